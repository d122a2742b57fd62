"""Finite-difference differential operators on Cartesian fields.

A field is any callable taking points of shape ``(3, *batch)`` (or a single
point of shape ``(3,)``) and returning values of shape
``(*value_shape, *batch)``.  Steps are relative: ``h = step * max(1, |x_i|)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..dense_tensor import contract_labelled
from ..special_tensors import epsilon

MIN_STEP = 1e-8
MAX_STEP = 1e-2


@dataclass(frozen=True)
class FDScheme:
    """Central-difference stencil: ``order`` 2 or 4, relative ``step``."""

    order: int = 4
    step: float = 1e-3

    def __post_init__(self):
        if self.order not in (2, 4):
            raise ValueError(f"order must be 2 or 4, got {self.order}")
        if not MIN_STEP <= self.step <= MAX_STEP:
            raise ValueError(f"step must lie in [{MIN_STEP:g}, {MAX_STEP:g}], got {self.step}")


FIRST_DERIVATIVE = FDScheme(order=4, step=1e-3)
SECOND_DERIVATIVE = FDScheme(order=2, step=1e-4)


def _points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 0 or pts.shape[0] != 3:
        raise ValueError(f"points must have shape (3, ...), got {pts.shape}")
    return pts


def batch_shape(points) -> tuple:
    return np.shape(points)[1:]


def _shifted(F: Callable, pts: np.ndarray, i: int, offset) -> np.ndarray:
    p = pts.copy()
    p[i] = pts[i] + offset
    return np.asarray(F(p), dtype=float)


def partial(F: Callable, i: int, points, scheme: FDScheme = FIRST_DERIVATIVE) -> np.ndarray:
    """d F / d x_i by a central stencil."""
    pts = _points(points)
    h = scheme.step * np.maximum(1.0, np.abs(pts[i]))
    if scheme.order == 2:
        return (_shifted(F, pts, i, h) - _shifted(F, pts, i, -h)) / (2.0 * h)
    d1 = _shifted(F, pts, i, h) - _shifted(F, pts, i, -h)
    d2 = _shifted(F, pts, i, 2 * h) - _shifted(F, pts, i, -2 * h)
    return (8.0 * d1 - d2) / (12.0 * h)


def second_partial(F: Callable, i: int, j: int, points,
                   scheme: FDScheme = SECOND_DERIVATIVE) -> np.ndarray:
    """d2 F / dx_i dx_j; direct three/five-point stencil on the diagonal, nested otherwise."""
    pts = _points(points)
    if i != j:
        return partial(lambda p: partial(F, j, p, scheme), i, pts, scheme)
    h = scheme.step * np.maximum(1.0, np.abs(pts[i]))
    f0 = np.asarray(F(pts), dtype=float)
    s1 = _shifted(F, pts, i, h) + _shifted(F, pts, i, -h)
    if scheme.order == 2:
        return (s1 - 2.0 * f0) / h ** 2
    s2 = _shifted(F, pts, i, 2 * h) + _shifted(F, pts, i, -2 * h)
    return (16.0 * s1 - s2 - 30.0 * f0) / (12.0 * h ** 2)


def _stack_partials(F, points, scheme) -> np.ndarray:
    """Array with the derivative index as the leading axis."""
    return np.stack([partial(F, i, points, scheme) for i in range(3)])


def grad(f: Callable, points, scheme: FDScheme = FIRST_DERIVATIVE) -> np.ndarray:
    """[grad f]_i = d_i f"""
    return _stack_partials(f, points, scheme)


def grad_vec(A: Callable, points, scheme: FDScheme = FIRST_DERIVATIVE) -> np.ndarray:
    """[grad A]_ij = d_i A_j (derivative index first)."""
    return _stack_partials(A, points, scheme)


def div(A: Callable, points, scheme: FDScheme = FIRST_DERIVATIVE) -> np.ndarray:
    """d_i A_i"""
    return sum(partial(A, i, points, scheme)[i] for i in range(3))


def div_rank2(A: Callable, points, scheme: FDScheme = FIRST_DERIVATIVE,
              form: str = "first_index") -> np.ndarray:
    """``first_index``: d_j A_ji;  ``second_index``: d_i A_ji."""
    if form == "first_index":
        return sum(partial(A, j, points, scheme)[j] for j in range(3))
    if form == "second_index":
        return sum(partial(A, i, points, scheme)[:, i] for i in range(3))
    raise ValueError(f"form must be 'first_index' or 'second_index', got {form!r}")


def curl(A: Callable, points, scheme: FDScheme = FIRST_DERIVATIVE) -> np.ndarray:
    """[curl A]_i = e_ijk d_j A_k"""
    J = grad_vec(A, points, scheme)
    return contract_labelled([("ijk", epsilon(3).components), ("jk", J)], "i", batch_shape(points))


def curl_rank2(A: Callable, points, scheme: FDScheme = FIRST_DERIVATIVE) -> np.ndarray:
    """[curl A]_ij = e_imn d_m A_nj"""
    J = _stack_partials(A, points, scheme)
    return contract_labelled([("imn", epsilon(3).components), ("mnj", J)], "ij", batch_shape(points))


def laplacian(F: Callable, points, scheme: FDScheme = SECOND_DERIVATIVE) -> np.ndarray:
    """d_ii F, componentwise for vector or tensor fields."""
    return sum(second_partial(F, i, i, points, scheme) for i in range(3))


def adotnabla(A: Callable, B: Callable, points, scheme: FDScheme = FIRST_DERIVATIVE) -> np.ndarray:
    """(A . grad) B = A_i d_i B, applied componentwise to B."""
    a = np.asarray(A(_points(points)), dtype=float)
    return sum(a[i] * partial(B, i, points, scheme) for i in range(3))


def as_field(op: Callable, *fields, **kwargs) -> Callable:
    """Wrap ``op(*fields, points, **kwargs)`` as a field so operators can be nested."""
    return lambda p: op(*fields, p, **kwargs)
