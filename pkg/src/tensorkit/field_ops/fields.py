"""Seeded random test fields: polynomials of bounded degree, with optional trig terms."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


def monomial_exponents(degree: int, dim: int = 3) -> np.ndarray:
    """All exponent tuples with total degree <= ``degree``, in a fixed order."""
    exps = [e for e in itertools.product(range(degree + 1), repeat=dim) if sum(e) <= degree]
    exps.sort(key=lambda e: (sum(e), tuple(-k for k in e)))
    return np.array(exps, dtype=int)


@dataclass(frozen=True, eq=False)
class PolynomialField:
    """sum_m c[..., m] x^e_m, optionally plus a[...] sin(w . x + phase)."""

    coeffs: np.ndarray
    exponents: np.ndarray
    trig_amp: np.ndarray | None = None
    trig_freq: np.ndarray | None = None
    trig_phase: np.ndarray | None = None

    @property
    def rank(self) -> int:
        return self.coeffs.ndim - 1

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        # monomials: (n_terms, *batch)
        mono = np.prod(pts[None, ...] ** self.exponents.reshape(self.exponents.shape + (1,) * (pts.ndim - 1)),
                       axis=1)
        out = np.tensordot(self.coeffs, mono, axes=([-1], [0]))
        if self.trig_amp is not None:
            arg = np.tensordot(self.trig_freq, pts, axes=([-1], [0])) + \
                self.trig_phase.reshape(self.trig_phase.shape + (1,) * (pts.ndim - 1))
            out = out + self.trig_amp.reshape(self.trig_amp.shape + (1,) * (pts.ndim - 1)) * np.sin(arg)
        return out


def random_polynomial_field(rng: np.random.Generator, rank: int = 0, degree: int = 3,
                            trig: bool = False, dim: int = 3) -> PolynomialField:
    """Coefficients uniform on [-1, 1]; one independent polynomial per component."""
    exps = monomial_exponents(degree, dim)
    value_shape = (dim,) * rank
    coeffs = rng.uniform(-1.0, 1.0, size=value_shape + (len(exps),))
    if not trig:
        return PolynomialField(coeffs, exps)
    amp = rng.uniform(-0.5, 0.5, size=value_shape)
    freq = rng.uniform(-1.5, 1.5, size=value_shape + (dim,))
    phase = rng.uniform(0.0, 2 * np.pi, size=value_shape)
    return PolynomialField(coeffs, exps, amp, freq, phase)


def random_symmetric_rank2_field(rng: np.random.Generator, degree: int = 3) -> PolynomialField:
    P = random_polynomial_field(rng, rank=2, degree=degree)
    c = 0.5 * (P.coeffs + np.swapaxes(P.coeffs, 0, 1))
    return PolynomialField(c, P.exponents)


def position_field(points) -> np.ndarray:
    """r = x_i e_i"""
    return np.asarray(points, dtype=float).copy()


@dataclass(frozen=True, eq=False)
class ConstantField:
    value: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __call__(self, points) -> np.ndarray:
        v = np.asarray(self.value, dtype=float)
        batch = np.shape(points)[1:]
        return np.broadcast_to(v.reshape(v.shape + (1,) * len(batch)), v.shape + batch).copy()


@dataclass(frozen=True)
class FieldSet:
    """The random fields consumed by the identity cases."""

    f: PolynomialField
    h: PolynomialField
    A: PolynomialField
    B: PolynomialField
    C: PolynomialField
    a: ConstantField

    def get(self, name):
        return getattr(self, name)


def random_field_set(rng: np.random.Generator, degree: int = 3, trig: bool = False) -> FieldSet:
    return FieldSet(
        f=random_polynomial_field(rng, 0, degree, trig),
        h=random_polynomial_field(rng, 0, degree, trig),
        A=random_polynomial_field(rng, 1, degree, trig),
        B=random_polynomial_field(rng, 1, degree, trig),
        C=random_polynomial_field(rng, 1, degree, trig),
        a=ConstantField(rng.uniform(-1.0, 1.0, size=3)),
    )
