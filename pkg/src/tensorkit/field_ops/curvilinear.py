"""Gradient, divergence, curl and Laplacian in curvilinear coordinates.

Fields are given in physical components (against the unit basis vectors)
as functions of the curvilinear coordinates.  Cylindrical points are
``(rho, phi, z)`` and spherical points ``(r, theta, phi)``; angles in
radians.  The dedicated cylindrical and spherical formulas are written out
separately from the general orthogonal (scale factor) path so the two can
be checked against each other.  The Laplacian is scalar-only here.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..coord_systems import SCALE_FLOOR, CoordinateSystem, builtin_system
from ..errors import DomainError
from .differential import FIRST_DERIVATIVE, SECOND_DERIVATIVE, FDScheme, partial, second_partial

OPS = ("grad", "div", "curl", "laplacian")
SYSTEMS = ("cylindrical", "spherical", "orthogonal")


def _component(F, k):
    return lambda p: np.asarray(F(p), dtype=float)[k]


def _check_rank(F, pts, op):
    rank = np.ndim(F(pts)) - (pts.ndim - 1)
    want = 0 if op in ("grad", "laplacian") else 1
    if rank != want:
        kind = "scalar" if want == 0 else "vector"
        raise ValueError(f"curvilinear {op} needs a {kind} field, got rank {rank}")


# -- cylindrical (rho, phi, z) ---------------------------------------------


def _cyl_check(pts):
    if np.any(pts[0] < SCALE_FLOOR):
        raise DomainError("cylindrical chart is singular where rho <= 0")


def _cyl(op, F, pts, s1, s2):
    rho = pts[0]
    d = lambda G, i: partial(G, i, pts, s1)
    if op == "grad":
        return np.stack([d(F, 0), d(F, 1) / rho, d(F, 2)])
    if op == "laplacian":
        dd = lambda i: second_partial(F, i, i, pts, s2)
        return dd(0) + d(F, 0) / rho + dd(1) / rho ** 2 + dd(2)
    A_rho, A_phi, A_z = (_component(F, k) for k in range(3))
    rho_times = lambda G: (lambda p: p[0] * G(p))
    if op == "div":
        return (d(rho_times(A_rho), 0) + d(A_phi, 1) + d(rho_times(A_z), 2)) / rho
    if op == "curl":
        # (1/rho) det | e_rho  rho e_phi  e_z ; d_rho d_phi d_z ; A_rho  rho A_phi  A_z |
        return np.stack([
            (d(A_z, 1) - d(rho_times(A_phi), 2)) / rho,
            -(d(A_z, 0) - d(A_rho, 2)),
            (d(rho_times(A_phi), 0) - d(A_rho, 1)) / rho,
        ])
    raise ValueError(f"unknown operator {op!r}")


# -- spherical (r, theta, phi) ---------------------------------------------


def _sph_check(pts):
    if np.any(pts[0] < SCALE_FLOOR) or np.any(np.sin(pts[1]) < SCALE_FLOOR):
        raise DomainError("spherical chart is singular where r <= 0 or sin(theta) <= 0")


def _sph(op, F, pts, s1, s2):
    r, th = pts[0], pts[1]
    sin, cos = np.sin(th), np.cos(th)
    d = lambda G, i: partial(G, i, pts, s1)
    if op == "grad":
        return np.stack([d(F, 0), d(F, 1) / r, d(F, 2) / (r * sin)])
    if op == "laplacian":
        dd = lambda i: second_partial(F, i, i, pts, s2)
        return (dd(0) + 2.0 / r * d(F, 0) + dd(1) / r ** 2
                + cos / (r ** 2 * sin) * d(F, 1) + dd(2) / (r ** 2 * sin ** 2))
    A_r, A_th, A_ph = (_component(F, k) for k in range(3))
    if op == "div":
        r2_Ar = lambda p: p[0] ** 2 * A_r(p)
        sin_Ath = lambda p: np.sin(p[1]) * A_th(p)
        return (sin * d(r2_Ar, 0) + r * d(sin_Ath, 1) + r * d(A_ph, 2)) / (r ** 2 * sin)
    if op == "curl":
        # (1/(r^2 sin)) det | e_r  r e_th  r sin e_ph ; d_r d_th d_ph ; A_r  r A_th  r sin A_ph |
        r_Ath = lambda p: p[0] * A_th(p)
        rsin_Aph = lambda p: p[0] * np.sin(p[1]) * A_ph(p)
        pref = 1.0 / (r ** 2 * sin)
        return np.stack([
            pref * (d(rsin_Aph, 1) - d(r_Ath, 2)),
            -pref * r * (d(rsin_Aph, 0) - d(A_r, 2)),
            pref * r * sin * (d(r_Ath, 0) - d(A_r, 1)),
        ])
    raise ValueError(f"unknown operator {op!r}")


# -- general orthogonal (u1, u2, u3) with scale factors h_i ------------------


def _orth(op, F, pts, s1, hfun):
    h = np.asarray(hfun(pts), dtype=float)
    if np.any(h < SCALE_FLOOR):
        raise DomainError(f"scale factor below {SCALE_FLOOR:g}")
    H = h[0] * h[1] * h[2]
    d = lambda G, i: partial(G, i, pts, s1)
    hk = lambda k: (lambda p: np.asarray(hfun(p), dtype=float)[k])
    if op == "grad":
        return np.stack([d(F, i) / h[i] for i in range(3)])
    if op == "laplacian":
        total = 0.0
        for i in range(3):
            j, k = [m for m in range(3) if m != i]
            flux = lambda p, i=i, j=j, k=k: (hk(j)(p) * hk(k)(p) / hk(i)(p)) * partial(F, i, p, s1)
            total = total + d(flux, i)
        return total / H
    comp = [_component(F, k) for k in range(3)]
    if op == "div":
        total = 0.0
        for i in range(3):
            j, k = [m for m in range(3) if m != i]
            total = total + d(lambda p, i=i, j=j, k=k: hk(j)(p) * hk(k)(p) * comp[i](p), i)
        return total / H
    if op == "curl":
        hA = [lambda p, k=k: hk(k)(p) * comp[k](p) for k in range(3)]
        return np.stack([
            h[0] * (d(hA[2], 1) - d(hA[1], 2)),
            -h[1] * (d(hA[2], 0) - d(hA[0], 2)),
            h[2] * (d(hA[1], 0) - d(hA[0], 1)),
        ]) / H
    raise ValueError(f"unknown operator {op!r}")


def curvilinear_op(op: str, system, field: Callable, point,
                   scale_factors: Callable | None = None,
                   scheme: FDScheme = FIRST_DERIVATIVE,
                   second_scheme: FDScheme = SECOND_DERIVATIVE) -> np.ndarray:
    """Apply ``op`` to a physical-component field at ``point`` (shape ``(3, ...)``).

    ``system`` is ``"cylindrical"``, ``"spherical"``, ``"orthogonal"`` or a
    :class:`CoordinateSystem`; the orthogonal path takes its scale factors
    from ``scale_factors`` or from the system.
    """
    if op not in OPS:
        raise ValueError(f"unknown operator {op!r}; choose from {', '.join(OPS)}")
    pts = np.asarray(point, dtype=float)
    if isinstance(system, CoordinateSystem):
        if scale_factors is None:
            scale_factors = system.scale_factors
        system = "orthogonal"
    _check_rank(field, pts, op)
    if system == "cylindrical":
        _cyl_check(pts)
        return _cyl(op, field, pts, scheme, second_scheme)
    if system == "spherical":
        _sph_check(pts)
        return _sph(op, field, pts, scheme, second_scheme)
    if system == "orthogonal":
        if scale_factors is None:
            raise ValueError("the orthogonal path needs scale factors")
        return _orth(op, field, pts, scheme, scale_factors)
    raise ValueError(f"unknown system {system!r}; choose from {', '.join(SYSTEMS)}")


def builtin_scale_factors(name: str) -> Callable:
    """Scale factors of a built-in system; they broadcast over batched points."""
    return builtin_system(name).scale_factors
