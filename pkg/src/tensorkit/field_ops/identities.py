"""Catalog of vector-calculus identities and a numerical verification harness.

Each case evaluates both sides at a batch of points from seeded random
fields: scalars ``f``, ``h``, vectors ``A``, ``B``, ``C`` (polynomials of
degree <= 3 by default) and a constant vector ``a``.  Residuals are the
infinity norm of ``lhs - rhs`` per point, maximized over points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..dense_tensor import contract_labelled
from ..special_tensors import epsilon
from .differential import (FIRST_DERIVATIVE, SECOND_DERIVATIVE, adotnabla, as_field, curl, div,
                           grad, grad_vec, laplacian)
from .expression import evaluate_field_expression
from .fields import FieldSet, position_field, random_field_set

S1 = FIRST_DERIVATIVE
S2 = SECOND_DERIVATIVE


def _cross(u, v, batch):
    return contract_labelled([("ijk", epsilon(3).components), ("j", u), ("k", v)], "i", batch)


def _dot(u, v):
    return (u * v).sum(axis=0)


@dataclass(frozen=True)
class IdentityCase:
    id: str
    description: str
    uses: tuple
    evaluate_lhs: Callable
    evaluate_rhs: Callable

    @property
    def arity(self) -> int:
        return len(self.uses)


def _b(p):
    return p.shape[1:]


# each evaluator takes (fields: FieldSet, points) and returns an array (*shape, *batch)

def _div_position(F, p):
    return div(position_field, p, S1)


def _curl_position(F, p):
    return curl(position_field, p, S1)


def _grad_a_dot_r(F, p):
    return grad(lambda q: _dot(F.a(q), q), p, S1)


def _div_grad(F, p):
    return div(as_field(grad, F.f, scheme=S1), p, S1)


def _div_curl(F, p):
    return div(as_field(curl, F.A, scheme=S1), p, S1)


def _curl_grad(F, p):
    return curl(as_field(grad, F.f, scheme=S1), p, S1)


def _curl_curl(F, p):
    return curl(as_field(curl, F.A, scheme=S1), p, S1)


def _curl_curl_rhs(F, p):
    return grad(as_field(div, F.A, scheme=S1), p, S1) - laplacian(F.A, p, S2)


def _grad_product(F, p):
    return grad(lambda q: F.f(q) * F.h(q), p, S1)


def _grad_product_rhs(F, p):
    return F.f(p) * grad(F.h, p, S1) + F.h(p) * grad(F.f, p, S1)


def _div_scalar_vector(F, p):
    return div(lambda q: F.f(q) * F.A(q), p, S1)


def _div_scalar_vector_rhs(F, p):
    return F.f(p) * div(F.A, p, S1) + _dot(F.A(p), grad(F.f, p, S1))


def _curl_scalar_vector(F, p):
    return curl(lambda q: F.f(q) * F.A(q), p, S1)


def _curl_scalar_vector_rhs(F, p):
    return F.f(p) * curl(F.A, p, S1) + _cross(grad(F.f, p, S1), F.A(p), _b(p))


def _scalar_triple(F, p):
    A, B, C = F.A(p), F.B(p), F.C(p)
    v = _dot(A, _cross(B, C, _b(p)))
    return np.stack([v, v])


def _scalar_triple_rhs(F, p):
    A, B, C = F.A(p), F.B(p), F.C(p)
    return np.stack([_dot(C, _cross(A, B, _b(p))), _dot(B, _cross(C, A, _b(p)))])


def _vector_triple(F, p):
    A, B, C = F.A(p), F.B(p), F.C(p)
    return _cross(A, _cross(B, C, _b(p)), _b(p))


def _vector_triple_rhs(F, p):
    A, B, C = F.A(p), F.B(p), F.C(p)
    return B * _dot(A, C) - C * _dot(A, B)


def _a_cross_curl_b(F, p):
    return _cross(F.A(p), curl(F.B, p, S1), _b(p))


def _a_cross_curl_b_rhs(F, p):
    J = grad_vec(F.B, p, S1)          # J[i, m] = d_i B_m
    return (J * F.A(p)[None]).sum(axis=1) - adotnabla(F.A, F.B, p, S1)


def _grad_dot(F, p):
    return grad(lambda q: _dot(F.A(q), F.B(q)), p, S1)


def _grad_dot_rhs(F, p):
    A, B = F.A(p), F.B(p)
    return (_cross(A, curl(F.B, p, S1), _b(p)) + _cross(B, curl(F.A, p, S1), _b(p))
            + adotnabla(F.A, F.B, p, S1) + adotnabla(F.B, F.A, p, S1))


def _div_cross(F, p):
    return div(lambda q: _cross(F.A(q), F.B(q), _b(q)), p, S1)


def _div_cross_rhs(F, p):
    return _dot(F.B(p), curl(F.A, p, S1)) - _dot(F.A(p), curl(F.B, p, S1))


def _curl_cross(F, p):
    return curl(lambda q: _cross(F.A(q), F.B(q), _b(q)), p, S1)


def _curl_cross_rhs(F, p):
    A, B = F.A(p), F.B(p)
    return (adotnabla(F.B, F.A, p, S1) + div(F.B, p, S1) * A
            - div(F.A, p, S1) * B - adotnabla(F.A, F.B, p, S1))


def _solenoidal_irrotational(F, p):
    # curl A is solenoidal and grad f irrotational; both conditions are
    # evaluated from their index-notation form.
    curl_A = as_field(curl, F.A, scheme=S1)
    grad_f = as_field(grad, F.f, scheme=S1)
    div_part = evaluate_field_expression("pd_i V_i", {"V": curl_A}, p, S1)
    curl_part = evaluate_field_expression("e_{ijk} pd_j G_k", {"G": grad_f}, p, S1)
    return np.concatenate([div_part[None], curl_part])


def _zeros_like(lhs: Callable) -> Callable:
    return lambda F, p: np.zeros_like(lhs(F, p))


def _constant(value: float) -> Callable:
    return lambda F, p: np.full(_b(p), float(value))


CASES = (
    IdentityCase("div_position", "div r = n", (), _div_position, _constant(3.0)),
    IdentityCase("curl_position", "curl r = 0", (), _curl_position, _zeros_like(_curl_position)),
    IdentityCase("grad_a_dot_r", "grad(a . r) = a", ("a",), _grad_a_dot_r, lambda F, p: F.a(p)),
    IdentityCase("div_grad", "div(grad f) = laplacian f", ("f",), _div_grad,
                 lambda F, p: laplacian(F.f, p, S2)),
    IdentityCase("div_curl", "div(curl A) = 0", ("A",), _div_curl, _zeros_like(_div_curl)),
    IdentityCase("curl_grad", "curl(grad f) = 0", ("f",), _curl_grad, _zeros_like(_curl_grad)),
    IdentityCase("curl_curl", "curl(curl A) = grad(div A) - laplacian A", ("A",),
                 _curl_curl, _curl_curl_rhs),
    IdentityCase("grad_product", "grad(f h) = f grad h + h grad f", ("f", "h"),
                 _grad_product, _grad_product_rhs),
    IdentityCase("div_scalar_vector", "div(f A) = f div A + A . grad f", ("f", "A"),
                 _div_scalar_vector, _div_scalar_vector_rhs),
    IdentityCase("curl_scalar_vector", "curl(f A) = f curl A + grad f x A", ("f", "A"),
                 _curl_scalar_vector, _curl_scalar_vector_rhs),
    IdentityCase("scalar_triple", "A . (B x C) = C . (A x B) = B . (C x A)", ("A", "B", "C"),
                 _scalar_triple, _scalar_triple_rhs),
    IdentityCase("vector_triple", "A x (B x C) = B (A . C) - C (A . B)", ("A", "B", "C"),
                 _vector_triple, _vector_triple_rhs),
    IdentityCase("a_cross_curl_b", "A x (curl B) = (grad B) . A - (A . grad) B", ("A", "B"),
                 _a_cross_curl_b, _a_cross_curl_b_rhs),
    IdentityCase("grad_dot", "grad(A . B) = A x curl B + B x curl A + (A . grad) B + (B . grad) A",
                 ("A", "B"), _grad_dot, _grad_dot_rhs),
    IdentityCase("div_cross", "div(A x B) = B . curl A - A . curl B", ("A", "B"),
                 _div_cross, _div_cross_rhs),
    IdentityCase("curl_cross", "curl(A x B) = (B . grad) A + (div B) A - (div A) B - (A . grad) B",
                 ("A", "B"), _curl_cross, _curl_cross_rhs),
    IdentityCase("solenoidal_irrotational", "div(curl A) = 0 and curl(grad f) = 0 in index form",
                 ("A", "f"), _solenoidal_irrotational, _zeros_like(_solenoidal_irrotational)),
)

CASE_IDS = tuple(c.id for c in CASES)
SECOND_DERIVATIVE_CASES = ("div_grad", "div_curl", "curl_grad", "curl_curl")


def get_case(case) -> IdentityCase:
    if isinstance(case, IdentityCase):
        return case
    for c in CASES:
        if c.id == case:
            return c
    raise KeyError(f"unknown identity {case!r}; known: {', '.join(CASE_IDS)}")


def sample_points(rng: np.random.Generator, n: int, low: float = -1.0, high: float = 1.0) -> np.ndarray:
    return rng.uniform(low, high, size=(3, n))


def verify_identity(case, fields: FieldSet | None = None, points: int | np.ndarray = 100,
                    seed: int = 42, tol: float = 1e-5, degree: int = 3, trig: bool = False) -> dict:
    """Evaluate ``lhs - rhs`` on ``points`` samples and report the worst residual.

    Without explicit ``fields`` the random fields and the sample points are
    both drawn from ``numpy.random.default_rng(seed)``, fields first.
    """
    c = get_case(case)
    rng = np.random.default_rng(seed)
    if fields is None:
        fields = random_field_set(rng, degree=degree, trig=trig)
    if np.ndim(points) == 0:
        pts = sample_points(rng, int(points))
    else:
        pts = np.asarray(points, dtype=float)
    lhs = np.asarray(c.evaluate_lhs(fields, pts), dtype=float)
    rhs = np.asarray(c.evaluate_rhs(fields, pts), dtype=float)
    if lhs.shape != rhs.shape:
        raise ValueError(f"{c.id}: lhs shape {lhs.shape} != rhs shape {rhs.shape}")
    n = pts.shape[1] if pts.ndim > 1 else 1
    diff = np.abs(lhs - rhs).reshape(-1, n) if lhs.size else np.zeros((1, n))
    max_residual = float(diff.max())
    return {
        "identity": c.id,
        "points": int(n),
        "seed": int(seed),
        "max_residual": max_residual,
        "tol": float(tol),
        "pass": bool(max_residual < tol),
    }


def verify_all(points: int = 100, seed: int = 42, tol: float = 1e-5, **kwargs) -> list[dict]:
    return [verify_identity(c, points=points, seed=seed, tol=tol, **kwargs) for c in CASES]
