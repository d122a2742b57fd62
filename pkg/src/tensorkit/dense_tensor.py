"""Dense tensor components and the index-notation evaluation engine.

Components are stored row-major (last index fastest).  Variance is a string
over ``^`` (contravariant) and ``_`` (covariant) with one character per
slot, which is also the on-disk notation of the tensor file format::

    {"dim": 3, "variance": "^_", "weight": 0, "components": [... 9 numbers ...]}
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import index_lang as il
from .errors import DomainError, ShapeError, ValidationError

CONTRA = "^"
CO = "_"

MAX_DIM = 8
MAX_SYMBOLS = 8


@dataclass(frozen=True, eq=False)
class DenseTensor:
    """Components of a (relative) tensor of rank ``len(variance)``."""

    dim: int
    variance: str
    components: np.ndarray
    weight: int = 0

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise ShapeError(f"dim must be a positive integer, got {self.dim!r}")
        if any(c not in (CONTRA, CO) for c in self.variance):
            raise ShapeError(f"variance must be a string over '^' and '_', got {self.variance!r}")
        rank = len(self.variance)
        arr = np.array(self.components, dtype=float)
        shape = (self.dim,) * rank
        if arr.shape != shape:
            if arr.size != self.dim ** rank:
                raise ShapeError(
                    f"expected {self.dim ** rank} components for dim={self.dim}, rank={rank}; got {arr.size}")
            arr = arr.reshape(shape)
        arr.setflags(write=False)
        object.__setattr__(self, "components", arr)
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "weight", int(self.weight))

    @property
    def rank(self) -> int:
        return len(self.variance)

    @property
    def flat(self) -> np.ndarray:
        return self.components.reshape(-1)

    def __getitem__(self, idx):
        return self.components[idx]

    def __repr__(self):
        return (f"DenseTensor(dim={self.dim}, variance={self.variance!r}, weight={self.weight}, "
                f"components={self.components.tolist()!r})")

    def same_type(self, other: "DenseTensor") -> bool:
        return (self.dim == other.dim and self.variance == other.variance
                and self.weight == other.weight)

    def __eq__(self, other):
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return self.same_type(other) and np.array_equal(self.components, other.components)

    __hash__ = None

    def allclose(self, other: "DenseTensor", atol=1e-12, rtol=0.0) -> bool:
        return self.same_type(other) and np.allclose(self.components, other.components, atol=atol, rtol=rtol)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1.0))

    def __neg__(self):
        return scale(self, -1.0)

    def __mul__(self, c):
        return scale(self, c)

    __rmul__ = __mul__

    # -- file format ----------------------------------------------------

    def to_dict(self) -> dict:
        return {"dim": self.dim, "variance": self.variance, "weight": self.weight,
                "components": [float(x) for x in self.flat]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "DenseTensor":
        try:
            dim = int(data["dim"])
            variance = str(data.get("variance", ""))
            comps = data["components"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ShapeError(f"invalid tensor document: {exc}") from None
        comps = np.asarray(comps, dtype=float).reshape(-1)
        if comps.size != dim ** len(variance):
            raise ShapeError(
                f"components length {comps.size} != dim**rank = {dim ** len(variance)}")
        return cls(dim, variance, comps, int(data.get("weight", 0)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DenseTensor":
        return cls.from_dict(json.loads(text))


def scalar(value: float, dim: int = 3, weight: int = 0) -> DenseTensor:
    return DenseTensor(dim, "", np.array(float(value)), weight)


def zeros(dim: int, variance: str, weight: int = 0) -> DenseTensor:
    return DenseTensor(dim, variance, np.zeros((dim,) * len(variance)), weight)


def load_tensor(path) -> DenseTensor:
    with open(path, encoding="utf-8") as fh:
        return DenseTensor.from_dict(json.load(fh))


def save_tensor(t: DenseTensor, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(t.to_dict(), fh)


# ---------------------------------------------------------------------------
# Algebra
# ---------------------------------------------------------------------------


def outer_product(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    if a.dim != b.dim:
        raise ShapeError(f"dimension mismatch: {a.dim} vs {b.dim}")
    comps = np.multiply.outer(a.components, b.components)
    return DenseTensor(a.dim, a.variance + b.variance, comps, a.weight + b.weight)


def _check_slot(t: DenseTensor, slot: int):
    if not 0 <= slot < t.rank:
        raise ShapeError(f"slot {slot} out of range for rank {t.rank}")


def contract(t: DenseTensor, slot_a: int, slot_b: int, strict: bool = False) -> DenseTensor:
    """Sum the diagonal over two slots, reducing the rank by two."""
    _check_slot(t, slot_a)
    _check_slot(t, slot_b)
    if slot_a == slot_b:
        raise ShapeError("cannot contract a slot with itself")
    if strict and t.variance[slot_a] == t.variance[slot_b]:
        raise ShapeError(
            f"slots {slot_a} and {slot_b} are both {'contravariant' if t.variance[slot_a] == CONTRA else 'covariant'}; "
            "strict contraction pairs an upper with a lower index")
    comps = np.trace(t.components, axis1=slot_a, axis2=slot_b)
    variance = "".join(v for k, v in enumerate(t.variance) if k not in (slot_a, slot_b))
    return DenseTensor(t.dim, variance, comps, t.weight)


def permute_slots(t: DenseTensor, perm: Sequence[int]) -> DenseTensor:
    """Move slot ``k`` of ``t`` to slot ``perm[k]`` of the result."""
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(t.rank)):
        raise ShapeError(f"{perm} is not a permutation of 0..{t.rank - 1}")
    inverse = np.argsort(perm)
    comps = np.transpose(t.components, inverse)
    variance = "".join(t.variance[k] for k in inverse)
    return DenseTensor(t.dim, variance, comps, t.weight)


def add(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    if not a.same_type(b):
        raise ShapeError(
            "tensors must share dim, variance and weight to be added: "
            f"({a.dim}, {a.variance!r}, w={a.weight}) vs ({b.dim}, {b.variance!r}, w={b.weight})")
    return DenseTensor(a.dim, a.variance, a.components + b.components, a.weight)


def scale(a: DenseTensor, c: float) -> DenseTensor:
    return DenseTensor(a.dim, a.variance, a.components * float(c), a.weight)


def permutation_sign(perm: Sequence[int]) -> int:
    """Parity of a permutation of ``0..n-1`` from its cycle decomposition."""
    perm = list(perm)
    seen = [False] * len(perm)
    sign = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = perm[k]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _check_slot_set(t: DenseTensor, slots: Sequence[int]) -> list[int]:
    slots = [int(s) for s in slots]
    if len(slots) < 2 or len(set(slots)) != len(slots):
        raise ShapeError("need at least two distinct slots")
    for s in slots:
        _check_slot(t, s)
    if len({t.variance[s] for s in slots}) != 1:
        raise ShapeError("(anti)symmetrized slots must share the same variance")
    return slots


def _signed_average(t: DenseTensor, slots: Sequence[int], signed: bool) -> DenseTensor:
    slots = _check_slot_set(t, slots)
    total = np.zeros_like(t.components)
    for perm in itertools.permutations(range(len(slots))):
        axes = list(range(t.rank))
        for k, p in enumerate(perm):
            axes[slots[k]] = slots[p]
        sign = permutation_sign(perm) if signed else 1
        total = total + sign * np.transpose(t.components, axes)
    return DenseTensor(t.dim, t.variance, total / math.factorial(len(slots)), t.weight)


def symmetrize(t: DenseTensor, slots: Sequence[int] | None = None) -> DenseTensor:
    """Average of ``t`` over all permutations of the given slots (default: all)."""
    return _signed_average(t, range(t.rank) if slots is None else slots, signed=False)


def antisymmetrize(t: DenseTensor, slots: Sequence[int] | None = None) -> DenseTensor:
    """Even permutations minus odd permutations of the given slots, over n!."""
    return _signed_average(t, range(t.rank) if slots is None else slots, signed=True)


# ---------------------------------------------------------------------------
# Coordinate transformation
# ---------------------------------------------------------------------------


def transform(t: DenseTensor, jac, inv_jac=None) -> DenseTensor:
    """Components of ``t`` in the barred system.

    ``jac[i, j]`` is d(xbar^i)/d(x^j) and ``inv_jac[i, j]`` is d(x^i)/d(xbar^j).
    Contravariant slots pick up ``jac``, covariant slots ``inv_jac``, and the
    whole tensor is scaled by ``det(inv_jac) ** weight``.
    """
    jac = np.asarray(jac, dtype=float)
    if jac.shape != (t.dim, t.dim):
        raise ShapeError(f"jacobian must be {t.dim}x{t.dim}, got {jac.shape}")
    det_jac = np.linalg.det(jac)
    if abs(det_jac) < 1e-12:
        raise DomainError(f"jacobian is singular (det = {det_jac:.3e})")
    if inv_jac is None:
        inv_jac = np.linalg.inv(jac)
    inv_jac = np.asarray(inv_jac, dtype=float)
    if inv_jac.shape != (t.dim, t.dim):
        raise ShapeError(f"inverse jacobian must be {t.dim}x{t.dim}, got {inv_jac.shape}")
    if not np.allclose(jac @ inv_jac, np.eye(t.dim), atol=1e-10, rtol=0):
        raise ShapeError("jac @ inv_jac is not the identity within 1e-10")

    comps = t.components
    for slot, v in enumerate(t.variance):
        # contra: sum_a jac[i, a] A[..a..];  co: sum_a inv_jac[a, i] A[..a..]
        mat = jac if v == CONTRA else inv_jac.T
        comps = np.moveaxis(np.tensordot(mat, comps, axes=([1], [slot])), 0, slot)
    if t.weight:
        comps = comps * np.linalg.det(inv_jac) ** t.weight
    return DenseTensor(t.dim, t.variance, comps, t.weight)


# ---------------------------------------------------------------------------
# Index-notation evaluation
# ---------------------------------------------------------------------------


def _diagonalize(labels: list[str], core: np.ndarray):
    """Collapse labels repeated on one operand to their diagonal.

    ``core`` carries one leading batch axis ahead of the labelled axes.
    """
    labels = list(labels)
    while True:
        seen = {}
        dup = None
        for k, s in enumerate(labels):
            if s in seen:
                dup = (seen[s], k)
                break
            seen[s] = k
        if dup is None:
            return labels, core
        a, b = dup
        core = np.diagonal(core, axis1=a + 1, axis2=b + 1)
        sym = labels[a]
        labels = [s for k, s in enumerate(labels) if k not in (a, b)] + [sym]


def contract_labelled(operands, output: Sequence[str], batch_shape: tuple = ()) -> np.ndarray:
    """Multiply labelled operands and sum every label not in ``output``.

    ``operands`` is a sequence of ``(labels, array)`` pairs.  Each array has
    one axis per label, optionally followed by the axes of ``batch_shape``
    (broadcast, never summed).  A label seen twice is summed unless listed
    in ``output``; summation happens as soon as no later operand needs the
    label, which keeps intermediates small.
    """
    batch_shape = tuple(batch_shape)
    n_batch = math.prod(batch_shape)
    prepared = []
    for labels, arr in operands:
        arr = np.asarray(arr, dtype=float)
        extra = arr.ndim - len(labels)
        if extra == 0:
            core = arr[None]
        elif batch_shape and arr.shape[len(labels):] == batch_shape:
            core = np.moveaxis(arr.reshape(arr.shape[:len(labels)] + (n_batch,)), -1, 0)
        else:
            raise ShapeError(f"operand with labels {''.join(labels)!r} has shape {arr.shape}")
        prepared.append(_diagonalize(labels, core))

    symbols = []
    for labs, _ in prepared:
        for s in labs:
            if s not in symbols:
                symbols.append(s)
    for s in output:
        if s not in symbols:
            raise ShapeError(f"output label {s!r} does not occur in any operand")
    order = list(output) + [s for s in symbols if s not in output]
    pos = {s: k for k, s in enumerate(order)}
    last_use = {}
    for k, (labs, _) in enumerate(prepared):
        for s in labs:
            last_use[s] = k

    acc = np.ones((1,) + (1,) * len(order))
    for k, (labs, core) in enumerate(prepared):
        perm = sorted(range(len(labs)), key=lambda a: pos[labs[a]])
        aligned = np.transpose(core, [0] + [a + 1 for a in perm])
        shape = [core.shape[0]] + [1] * len(order)
        for a in perm:
            shape[1 + pos[labs[a]]] = core.shape[1 + a]
        acc = acc * aligned.reshape(shape)
        done = [1 + pos[s] for s, last in last_use.items() if last == k and s not in output]
        if done:
            acc = acc.sum(axis=tuple(done), keepdims=True)
    acc = acc.reshape(acc.shape[:1 + len(output)])
    if not batch_shape:
        return acc[0]
    acc = np.broadcast_to(acc, (n_batch,) + acc.shape[1:])
    return np.moveaxis(acc, 0, -1).reshape(acc.shape[1:] + batch_shape)


def _special_tensor(name: str, n_indices: int, dim: int) -> DenseTensor:
    from . import special_tensors as st

    if name == il.EPSILON_NAME:
        if n_indices != dim:
            raise ShapeError(f"'e' carries {n_indices} indices but the permutation symbol in dim {dim} has rank {dim}")
        return st.epsilon(dim)
    if n_indices != 2:
        raise ShapeError(f"'d' carries {n_indices} indices; the Kronecker delta has rank 2")
    return st.kronecker(dim)


def einsum_eval(expr, bind: Mapping[str, DenseTensor] | None = None, dim: int = 3,
                mode: str = il.CARTESIAN, output: str | None = None) -> DenseTensor:
    """Evaluate an index-notation expression by the summation convention.

    ``e`` and ``d`` are bound automatically to the permutation symbol and
    the Kronecker delta of dimension ``dim`` unless ``bind`` overrides them.
    Output slots follow the first appearance of the free indices in the
    first term; output variance follows their positions.  In strict mode
    every bound tensor's variance must match the index positions written
    against it.  ``output`` (e.g. ``"ijlm"``) fixes the slot order explicitly.
    """
    if isinstance(expr, str):
        expr = il.parse(expr)
    if isinstance(expr, il.Equation):
        raise ValidationError("einsum_eval takes an expression, not an equation")
    if isinstance(expr, il.Term):
        expr = il.Expression((expr,))
    bind = dict(bind or {})
    if not 1 <= dim <= MAX_DIM:
        raise ShapeError(f"dim must be in 1..{MAX_DIM}, got {dim}")
    for name, t in bind.items():
        if t.dim != dim:
            raise ShapeError(f"{name!r} has dim {t.dim}, evaluation dim is {dim}")

    report = il.validate(expr, mode)
    if not report.ok:
        msgs = "; ".join(d.message for d in report.diagnostics)
        raise ValidationError(f"expression is not legitimate: {msgs}", report)

    first = next((t for t in expr.terms if not t.is_zero_literal), None)
    out_occ = il.free_occurrences(first) if first is not None else []
    if output is not None:
        by_symbol = {o.symbol: o for o in out_occ}
        if sorted(output) != sorted(by_symbol):
            raise ShapeError(f"output {output!r} is not an ordering of the free indices "
                             f"{''.join(sorted(by_symbol))!r}")
        out_occ = [by_symbol[s] for s in output]
    out_symbols = [o.symbol for o in out_occ]
    variance = "".join(CONTRA if o.position == il.UPPER else CO for o in out_occ)

    result = np.zeros((dim,) * len(out_symbols))
    weight = None
    for term in expr.terms:
        if term.is_zero_literal:
            continue
        operands = []
        term_weight = 0
        for f in term.factors:
            if f.is_derivative:
                raise ValidationError("'pd' needs a field context; use field_ops.evaluate_field_expression")
            if f.name in bind:
                t = bind[f.name]
            elif f.name in (il.EPSILON_NAME, il.DELTA_NAME):
                t = _special_tensor(f.name, len(f.indices), dim)
            else:
                raise ValidationError(f"unbound factor {f.name!r}")
            if t.rank != len(f.indices):
                raise ShapeError(f"{f.name!r} is bound to a rank-{t.rank} tensor but carries {len(f.indices)} indices")
            if mode == il.STRICT and f.name in bind:
                written = "".join(CONTRA if o.position == il.UPPER else CO for o in f.indices)
                if written != t.variance:
                    raise ShapeError(f"{f.name!r} is written with variance {written!r} but bound with {t.variance!r}")
            term_weight += t.weight
            operands.append(([o.symbol for o in f.indices], t.components))
        n_symbols = len({o.symbol for o in term.occurrences()})
        if n_symbols > MAX_SYMBOLS:
            raise ShapeError(f"term uses {n_symbols} index symbols; at most {MAX_SYMBOLS} are supported")
        if weight is None:
            weight = term_weight
        elif weight != term_weight:
            raise ShapeError(f"terms have different weights ({weight} vs {term_weight})")
        # term free indices may be ordered differently from the output
        value = contract_labelled(operands, out_symbols) if operands else np.ones(())
        result = result + float(term.coefficient) * value
    return DenseTensor(dim, variance, result, weight or 0)
