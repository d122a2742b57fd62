"""Midpoint-rule checks of the divergence and Stokes theorems on axis-aligned domains."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .differential import FIRST_DERIVATIVE, FDScheme, curl, div

MIN_N = 4


def _rel_error(a: float, b: float, scale: float) -> float:
    denom = max(abs(a), abs(b), scale)
    if denom == 0.0:
        return 0.0
    return abs(a - b) / denom


def _midpoints(lo: float, hi: float, n: int) -> np.ndarray:
    return lo + (np.arange(n) + 0.5) * (hi - lo) / n


def _box(box) -> list[tuple[float, float]]:
    box = np.asarray(box, dtype=float)
    if box.shape == (2,):
        box = np.tile(box, (3, 1))
    if box.shape != (3, 2) or np.any(box[:, 1] <= box[:, 0]):
        raise ValueError(f"box must be three (low, high) pairs with low < high, got {box.tolist()}")
    return [(float(a), float(b)) for a, b in box]


def divergence_theorem_check(A: Callable, box=(0.0, 1.0), N: int = 64,
                             scheme: FDScheme = FIRST_DERIVATIVE) -> dict:
    """Volume integral of div A against the outward flux through the six faces.

    ``rel_error`` is ``|V - S| / max(|V|, |S|, integral of |div A|)``.
    """
    if N < MIN_N:
        raise ValueError(f"N must be >= {MIN_N}, got {N}")
    bounds = _box(box)
    axes = [_midpoints(a, b, N) for a, b in bounds]
    widths = [(b - a) / N for a, b in bounds]
    grid = np.stack(np.meshgrid(*axes, indexing="ij")).reshape(3, -1)
    divA = div(A, grid, scheme)
    cell = widths[0] * widths[1] * widths[2]
    volume = float(divA.sum() * cell)
    volume_abs = float(np.abs(divA).sum() * cell)

    surface = 0.0
    for k in range(3):
        u, v = [m for m in range(3) if m != k]
        U, V = np.meshgrid(axes[u], axes[v], indexing="ij")
        area = widths[u] * widths[v]
        for side, sign in ((1, 1.0), (0, -1.0)):
            pts = np.empty((3, U.size))
            pts[u], pts[v] = U.ravel(), V.ravel()
            pts[k] = bounds[k][side]
            surface += sign * float(np.asarray(A(pts))[k].sum() * area)
    return {
        "volume_integral": volume,
        "surface_integral": surface,
        "rel_error": _rel_error(volume, surface, volume_abs),
        "N": int(N),
    }


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle ``{x[normal] = offset, u in u_range, v in v_range}``.

    ``(u, v, normal)`` is right-handed: normal 2 spans (x, y), normal 0
    spans (y, z), normal 1 spans (z, x).  The normal points along the
    positive axis and the perimeter runs counterclockwise seen from its tip.
    """

    normal: int = 2
    offset: float = 0.0
    u_range: tuple = (0.0, 1.0)
    v_range: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.normal not in (0, 1, 2):
            raise ValueError(f"normal axis must be 0, 1 or 2, got {self.normal}")
        if not (self.u_range[1] > self.u_range[0] and self.v_range[1] > self.v_range[0]):
            raise ValueError("degenerate rectangle")

    @property
    def in_plane_axes(self) -> tuple[int, int]:
        return ((1, 2), (2, 0), (0, 1))[self.normal]

    def embed(self, U: np.ndarray, V: np.ndarray) -> np.ndarray:
        u, v = self.in_plane_axes
        pts = np.empty((3,) + np.shape(U))
        pts[u], pts[v] = U, V
        pts[self.normal] = self.offset
        return pts


def stokes_check(A: Callable, rect: Rectangle = Rectangle(), N: int = 64,
                 scheme: FDScheme = FIRST_DERIVATIVE) -> dict:
    """Flux of curl A through ``rect`` against the circulation around its edge."""
    if N < MIN_N:
        raise ValueError(f"N must be >= {MIN_N}, got {N}")
    (a, b), (c, d) = rect.u_range, rect.v_range
    uu, vv = _midpoints(a, b, N), _midpoints(c, d, N)
    du, dv = (b - a) / N, (d - c) / N
    U, V = np.meshgrid(uu, vv, indexing="ij")
    curl_n = curl(A, rect.embed(U.ravel(), V.ravel()), scheme)[rect.normal]
    surface = float(curl_n.sum() * du * dv)
    surface_abs = float(np.abs(curl_n).sum() * du * dv)

    u_ax, v_ax = rect.in_plane_axes
    ones = np.ones(N)
    line = 0.0
    # bottom (+u), right (+v), top (-u), left (-v)
    for U_e, V_e, axis, length in (
        (uu, c * ones, u_ax, b - a),
        (b * ones, vv, v_ax, d - c),
        (uu, d * ones, u_ax, -(b - a)),
        (a * ones, vv, v_ax, -(d - c)),
    ):
        vals = np.asarray(A(rect.embed(U_e, V_e)))[axis]
        line += float(vals.sum() * length / N)
    return {
        "surface_integral": surface,
        "line_integral": line,
        "rel_error": _rel_error(surface, line, surface_abs),
        "N": int(N),
    }


def convergence_ratios(errors: Sequence[float]) -> list[float]:
    """Successive ratios ``e[k] / e[k + 1]``; near 4 for second-order decay under doubling."""
    return [errors[k] / errors[k + 1] if errors[k + 1] else float("inf")
            for k in range(len(errors) - 1)]
