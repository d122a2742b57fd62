"""Metrics, index raising/lowering, Christoffel symbols and covariant derivatives.

A coordinate system is a bundle of callables of a point ``x`` (array of
length ``dim``): the covariant metric ``g_ij``, optionally its partials
``P[i, j, l] = d g_ij / d x^l``, an embedding into Cartesian space and
scale factors for orthogonal systems (the built-in scale factors also
accept batched points of shape ``(dim, ...)``).  Points where ``|det g| < 1e-12`` or
a scale factor falls below ``1e-9`` are rejected with :class:`DomainError`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .dense_tensor import CO, CONTRA, DenseTensor, contract_labelled
from .errors import DomainError, ShapeError

DET_FLOOR = 1e-12
SCALE_FLOOR = 1e-9
METRIC_FD_STEP = 1e-6
FIELD_FD_STEP = 1e-5

BUILTIN_NAMES = ("cartesian", "cylindrical", "spherical")


def _point(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (dim,):
        raise ShapeError(f"expected a point with {dim} coordinates, got {x.shape[0]}")
    return x


def _steps(x: np.ndarray, rel: float) -> np.ndarray:
    return rel * np.maximum(1.0, np.abs(x))


def central_partials(func: Callable, x: np.ndarray, rel_step: float) -> np.ndarray:
    """Central differences of ``func`` at ``x``; the derivative axis is last."""
    x = np.asarray(x, dtype=float)
    h = _steps(x, rel_step)
    cols = []
    for q in range(x.shape[0]):
        xp, xm = x.copy(), x.copy()
        xp[q] += h[q]
        xm[q] -= h[q]
        fp = np.asarray(func(xp), dtype=float)
        fm = np.asarray(func(xm), dtype=float)
        cols.append((fp - fm) / (2.0 * h[q]))
    return np.stack(cols, axis=-1)


@dataclass(frozen=True)
class CoordinateSystem:
    name: str
    dim: int
    coord_names: tuple
    metric: Callable
    metric_partials: Optional[Callable] = None
    embedding: Optional[Callable] = None
    scale_factors: Optional[Callable] = None

    def __post_init__(self):
        object.__setattr__(self, "coord_names", tuple(self.coord_names))
        if len(self.coord_names) != self.dim:
            raise ShapeError(f"{self.name}: {len(self.coord_names)} coordinate names for dim {self.dim}")

    def check_point(self, x) -> np.ndarray:
        x = _point(x, self.dim)
        if self.scale_factors is not None:
            h = np.asarray(self.scale_factors(x), dtype=float)
            if np.any(h < SCALE_FLOOR):
                raise DomainError(f"{self.name}: scale factor below {SCALE_FLOOR:g} at {x.tolist()}")
        return x

    def metric_at(self, x) -> np.ndarray:
        x = self.check_point(x)
        g = np.asarray(self.metric(x), dtype=float)
        if g.shape != (self.dim, self.dim):
            raise ShapeError(f"{self.name}: metric has shape {g.shape}")
        if np.max(np.abs(g - g.T)) > 1e-12:
            raise ShapeError(f"{self.name}: metric is not symmetric at {x.tolist()}")
        det = np.linalg.det(g)
        if abs(det) < DET_FLOOR:
            raise DomainError(f"{self.name}: metric is singular at {x.tolist()} (det = {det:.3e})")
        return g

    def inverse_metric_at(self, x) -> np.ndarray:
        return np.linalg.inv(self.metric_at(x))

    def parse_point(self, assignments: Mapping[str, float]) -> np.ndarray:
        """Point from a ``{coord_name: value}`` mapping; missing names are an error."""
        missing = [n for n in self.coord_names if n not in assignments]
        unknown = [n for n in assignments if n not in self.coord_names]
        if missing or unknown:
            raise ShapeError(
                f"{self.name} coordinates are {', '.join(self.coord_names)}"
                + (f"; missing {', '.join(missing)}" if missing else "")
                + (f"; unknown {', '.join(unknown)}" if unknown else ""))
        return np.array([float(assignments[n]) for n in self.coord_names])


# ---------------------------------------------------------------------------
# Built-in systems
# ---------------------------------------------------------------------------


def _cartesian(dim: int) -> CoordinateSystem:
    names = ("x", "y", "z") if dim == 3 else tuple(f"x{i + 1}" for i in range(dim))
    return CoordinateSystem(
        name="cartesian", dim=dim, coord_names=names,
        metric=lambda x: np.eye(dim),
        metric_partials=lambda x: np.zeros((dim, dim, dim)),
        embedding=lambda x: np.asarray(x, dtype=float).copy(),
        scale_factors=lambda x: np.ones((dim,) + np.shape(x)[1:]),
    )


def _cyl_partials(x):
    P = np.zeros((3, 3, 3))
    P[1, 1, 0] = 2.0 * x[0]
    return P


def _cylindrical() -> CoordinateSystem:
    return CoordinateSystem(
        name="cylindrical", dim=3, coord_names=("rho", "phi", "z"),
        metric=lambda x: np.diag([1.0, x[0] ** 2, 1.0]),
        metric_partials=_cyl_partials,
        embedding=lambda x: np.array([x[0] * np.cos(x[1]), x[0] * np.sin(x[1]), x[2]]),
        scale_factors=lambda x: np.stack(np.broadcast_arrays(1.0, x[0], 1.0)),
    )


def _sph_partials(x):
    r, th = x[0], x[1]
    P = np.zeros((3, 3, 3))
    P[1, 1, 0] = 2.0 * r
    P[2, 2, 0] = 2.0 * r * np.sin(th) ** 2
    P[2, 2, 1] = 2.0 * r ** 2 * np.sin(th) * np.cos(th)
    return P


def _spherical() -> CoordinateSystem:
    return CoordinateSystem(
        name="spherical", dim=3, coord_names=("r", "theta", "phi"),
        metric=lambda x: np.diag([1.0, x[0] ** 2, (x[0] * np.sin(x[1])) ** 2]),
        metric_partials=_sph_partials,
        embedding=lambda x: np.array([
            x[0] * np.sin(x[1]) * np.cos(x[2]),
            x[0] * np.sin(x[1]) * np.sin(x[2]),
            x[0] * np.cos(x[1]),
        ]),
        scale_factors=lambda x: np.stack(np.broadcast_arrays(1.0, x[0], x[0] * np.sin(x[1]))),
    )


def builtin_system(name: str, dim: int = 3) -> CoordinateSystem:
    if name == "cartesian":
        if dim < 1:
            raise ShapeError(f"dim must be >= 1, got {dim}")
        return _cartesian(dim)
    if name in ("cylindrical", "spherical"):
        if dim != 3:
            raise ShapeError(f"{name} coordinates are three-dimensional, got dim={dim}")
        return _cylindrical() if name == "cylindrical" else _spherical()
    raise ValueError(f"unknown coordinate system {name!r}; choose from {', '.join(BUILTIN_NAMES)}")


def load_coordinate_system(source) -> CoordinateSystem:
    """Build a system from a JSON descriptor (path, JSON text or dict).

    ``{"name": ..., "dim": 3, "coords": [...], "metric": "spherical"}``;
    ``metric`` names a built-in, ``coords`` renames its coordinates.
    """
    if isinstance(source, Mapping):
        doc = dict(source)
    else:
        text = str(source)
        if text.lstrip().startswith("{"):
            doc = json.loads(text)
        else:
            with open(text, encoding="utf-8") as fh:
                doc = json.load(fh)
    try:
        base_name = doc["metric"]
    except KeyError:
        raise ShapeError("coordinate descriptor needs a 'metric' entry") from None
    dim = int(doc.get("dim", 3))
    base = builtin_system(base_name, dim)
    coords = doc.get("coords")
    if coords is not None and len(coords) != dim:
        raise ShapeError(f"descriptor lists {len(coords)} coordinates for dim {dim}")
    return replace(base, name=str(doc.get("name", base_name)),
                   coord_names=tuple(coords) if coords is not None else base.coord_names)


# ---------------------------------------------------------------------------
# Metric helpers
# ---------------------------------------------------------------------------


def metric_from_embedding(sys: CoordinateSystem, point, step: float = METRIC_FD_STEP) -> np.ndarray:
    """g = J^T J with J[a, i] = d r^a / d u^i by central differences."""
    if sys.embedding is None:
        raise ShapeError(f"{sys.name}: no embedding available")
    x = sys.check_point(point)
    J = central_partials(sys.embedding, x, step)
    return J.T @ J


def metric_partials_fd(sys: CoordinateSystem, point, step: float = METRIC_FD_STEP) -> np.ndarray:
    x = sys.check_point(point)
    return central_partials(sys.metric, x, step)


def _change_slot(t, sys, point, slot, want, matrix):
    if not isinstance(t, DenseTensor):
        raise ShapeError("expected a DenseTensor")
    if t.dim != sys.dim:
        raise ShapeError(f"tensor dim {t.dim} != system dim {sys.dim}")
    if not 0 <= slot < t.rank:
        raise ShapeError(f"slot {slot} out of range for rank {t.rank}")
    if t.variance[slot] != want:
        raise ShapeError(f"slot {slot} has variance {t.variance[slot]!r}, expected {want!r}")
    comps = np.moveaxis(np.tensordot(matrix, t.components, axes=([1], [slot])), 0, slot)
    new = CONTRA if want == CO else CO
    variance = t.variance[:slot] + new + t.variance[slot + 1:]
    return DenseTensor(t.dim, variance, comps, t.weight)


def raise_index(t: DenseTensor, sys: CoordinateSystem, point, slot: int) -> DenseTensor:
    """Contract a covariant slot with g^ij, keeping the slot in place."""
    return _change_slot(t, sys, point, slot, CO, sys.inverse_metric_at(point))


def lower_index(t: DenseTensor, sys: CoordinateSystem, point, slot: int) -> DenseTensor:
    """Contract a contravariant slot with g_ij, keeping the slot in place."""
    return _change_slot(t, sys, point, slot, CONTRA, sys.metric_at(point))


# ---------------------------------------------------------------------------
# Christoffel symbols
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Christoffel:
    """Second-kind symbols, ``values[k, i, j]`` = Gamma^k_ij."""

    values: np.ndarray

    def __getitem__(self, idx):
        return self.values[idx]

    def nonzero(self, tol: float = 1e-12) -> list:
        """``(k, i, j, value)`` for every entry with ``|value| > tol`` (0-based)."""
        d = self.values.shape[0]
        out = []
        for k in range(d):
            for i in range(d):
                for j in range(d):
                    v = float(self.values[k, i, j])
                    if abs(v) > tol:
                        out.append((k, i, j, v))
        return out


def christoffel2(sys: CoordinateSystem, point, use_analytic: bool = True,
                 step: float = METRIC_FD_STEP) -> Christoffel:
    """Gamma^k_ij = g^kl (d_j g_il + d_i g_jl - d_l g_ij) / 2."""
    x = sys.check_point(point)
    ginv = sys.inverse_metric_at(x)
    if use_analytic and sys.metric_partials is not None:
        P = np.asarray(sys.metric_partials(x), dtype=float)
    else:
        P = metric_partials_fd(sys, x, step)
    d = sys.dim
    if P.shape != (d, d, d):
        raise ShapeError(f"metric partials have shape {P.shape}")
    # bracket[l, i, j] = P[i, l, j] + P[j, l, i] - P[i, j, l]
    bracket = (contract_labelled([("ilj", P)], "lij")
               + contract_labelled([("jli", P)], "lij")
               - contract_labelled([("ijl", P)], "lij"))
    gamma = 0.5 * contract_labelled([("kl", ginv), ("lij", bracket)], "kij")
    gamma = 0.5 * (gamma + np.swapaxes(gamma, 1, 2))
    gamma.setflags(write=False)
    return Christoffel(gamma)


# ---------------------------------------------------------------------------
# Tensor fields and covariant differentiation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TensorField:
    """A tensor-valued function of position.

    ``eval(x)`` returns the components (array or DenseTensor) and the
    optional ``partials(x)`` returns their derivatives with the
    differentiation axis last.
    """

    dim: int
    variance: str
    eval: Callable
    partials: Optional[Callable] = field(default=None)
    weight: int = 0

    @property
    def rank(self) -> int:
        return len(self.variance)

    @property
    def shape(self) -> tuple:
        return (self.dim, self.rank, self.variance)

    def components(self, x) -> np.ndarray:
        value = self.eval(np.asarray(x, dtype=float))
        arr = value.components if isinstance(value, DenseTensor) else np.asarray(value, dtype=float)
        expected = (self.dim,) * self.rank
        if arr.shape != expected:
            raise ShapeError(f"field returned shape {arr.shape}, declared {expected}")
        return arr

    def at(self, x) -> DenseTensor:
        return DenseTensor(self.dim, self.variance, self.components(x), self.weight)

    def partial_components(self, x, step: float = FIELD_FD_STEP) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.partials is not None:
            arr = np.asarray(self.partials(x), dtype=float)
            expected = (self.dim,) * (self.rank + 1)
            if arr.shape != expected:
                raise ShapeError(f"field partials have shape {arr.shape}, expected {expected}")
            return arr
        return central_partials(self.components, x, step)


def scalar_field(dim: int, f: Callable, gradient: Optional[Callable] = None) -> TensorField:
    return TensorField(dim, "", f, gradient)


def metric_field(sys: CoordinateSystem) -> TensorField:
    """The covariant metric as a rank-2 field, with analytic partials when known."""
    return TensorField(sys.dim, CO + CO, sys.metric, sys.metric_partials)


def linear_combination(a: float, A: TensorField, b: float, B: TensorField) -> TensorField:
    if A.shape != B.shape or A.weight != B.weight:
        raise ShapeError(f"field shapes differ: {A.shape} vs {B.shape}")
    partials = None
    if A.partials is not None and B.partials is not None:
        partials = lambda x: a * A.partial_components(x) + b * B.partial_components(x)
    return TensorField(A.dim, A.variance,
                       lambda x: a * A.components(x) + b * B.components(x), partials, A.weight)


def outer_field(A: TensorField, B: TensorField) -> TensorField:
    if A.dim != B.dim:
        raise ShapeError(f"field dims differ: {A.dim} vs {B.dim}")
    return TensorField(A.dim, A.variance + B.variance,
                       lambda x: np.multiply.outer(A.components(x), B.components(x)),
                       weight=A.weight + B.weight)


def covariant_derivative(fld: TensorField, sys: CoordinateSystem, point,
                         use_analytic_metric: bool = True,
                         step: float = FIELD_FD_STEP) -> DenseTensor:
    """Covariant derivative; the differentiation slot is appended last.

    Each contravariant slot adds ``Gamma^i_aq T^..a..`` and each covariant
    slot subtracts ``Gamma^a_lq T_..a..``.
    """
    if fld.dim != sys.dim:
        raise ShapeError(f"field dim {fld.dim} != system dim {sys.dim}")
    if fld.weight != 0:
        raise ShapeError("covariant derivative is implemented for absolute tensors only")
    x = sys.check_point(point)
    gamma = christoffel2(sys, x, use_analytic=use_analytic_metric).values
    T = fld.components(x)
    result = fld.partial_components(x, step).copy()
    for s, v in enumerate(fld.variance):
        if v == CONTRA:
            X = np.tensordot(gamma, T, axes=([1], [s]))      # (i, q, rest)
            result += np.moveaxis(X, [0, 1], [s, -1])
        else:
            X = np.tensordot(gamma, T, axes=([0], [s]))      # (l, q, rest)
            result -= np.moveaxis(X, [0, 1], [s, -1])
    return DenseTensor(fld.dim, fld.variance + CO, result)


def covariant_derivative_field(fld: TensorField, sys: CoordinateSystem, **kwargs) -> TensorField:
    """The covariant derivative of ``fld`` as a field in its own right."""
    return TensorField(fld.dim, fld.variance + CO,
                       lambda x: covariant_derivative(fld, sys, x, **kwargs).components)


def covariant_derivative_linearity_check(a: float, b: float, A: TensorField, B: TensorField,
                                         sys: CoordinateSystem, point) -> float:
    """||nabla(aA + bB) - a nabla A - b nabla B||_inf"""
    combo = covariant_derivative(linear_combination(a, A, b, B), sys, point)
    dA = covariant_derivative(A, sys, point)
    dB = covariant_derivative(B, sys, point)
    return float(np.max(np.abs(combo.components - a * dA.components - b * dB.components)))


def covariant_derivative_product_check(A: TensorField, B: TensorField,
                                       sys: CoordinateSystem, point) -> float:
    """||nabla(A B) - (nabla A) B - A (nabla B)||_inf with slots kept in order."""
    lhs = covariant_derivative(outer_field(A, B), sys, point).components
    dA = covariant_derivative(A, sys, point).components
    dB = covariant_derivative(B, sys, point).components
    first = np.moveaxis(np.multiply.outer(dA, B.components(point)), A.rank, -1)
    second = np.multiply.outer(A.components(point), dB)
    return float(np.max(np.abs(lhs - first - second)))
