"""Linear-algebra quantities written through the permutation symbol.

Determinant, 3x3 inverse, cross and triple products, double contractions,
and the scalar invariants of rank-2 tensors.  Inputs may be DenseTensors
or plain array-likes.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .dense_tensor import CO, DenseTensor, contract_labelled, einsum_eval
from .errors import DomainError, ShapeError
from .special_tensors import epsilon

DET_METHODS = ("by_row", "by_col", "double_epsilon")
MAX_DET_DIM = 6


def _matrix(A, dim=None) -> np.ndarray:
    arr = A.components if isinstance(A, DenseTensor) else np.asarray(A, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"expected a square rank-2 tensor, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ShapeError(f"expected a {dim}x{dim} tensor, got {arr.shape}")
    return np.asarray(arr, dtype=float)


def _vector(a, dim=3) -> np.ndarray:
    arr = a.components if isinstance(a, DenseTensor) else np.asarray(a, dtype=float)
    if arr.shape != (dim,):
        raise ShapeError(f"expected a {dim}-vector, got shape {arr.shape}")
    return np.asarray(arr, dtype=float)


def _as_tensor(arr: np.ndarray) -> DenseTensor:
    return DenseTensor(arr.shape[0] if arr.ndim else 3, CO * arr.ndim, arr)


def matmul(A, B) -> np.ndarray:
    """[AB]_ik = A_ij B_jk as an explicit broadcast-and-sum."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    return (A[:, :, None] * B[None, :, :]).sum(axis=1)


def trace(A) -> float:
    M = _matrix(A)
    return float(sum(M[i, i] for i in range(M.shape[0])))


def _apply_to_each_slot(eps: np.ndarray, M: np.ndarray) -> np.ndarray:
    """X_{i1..in} = M_{i1 j1} ... M_{in jn} eps_{j1..jn}."""
    X = eps
    for slot in range(eps.ndim):
        X = np.moveaxis(np.tensordot(M, X, axes=([1], [slot])), 0, slot)
    return X


def det_epsilon(A, method: str = "by_row") -> float:
    """Determinant as a contraction with the permutation symbol.

    ``by_row``: eps_{i1..in} A_{1 i1} ... A_{n in}
    ``by_col``: eps_{i1..in} A_{i1 1} ... A_{in n}
    ``double_epsilon``: eps_{i..} eps_{j..} A_{i1 j1} ... A_{in jn} / n!
    """
    M = _matrix(A)
    n = M.shape[0]
    if n == 1:
        return float(M[0, 0])
    if n > MAX_DET_DIM:
        raise ShapeError(f"det_epsilon supports d <= {MAX_DET_DIM}, got {n}")
    eps = epsilon(n).components
    if method == "by_row":
        X = eps
        for row in range(n):
            X = np.tensordot(M[row], X, axes=([0], [0]))
        return float(X)
    if method == "by_col":
        X = eps
        for col in range(n):
            X = np.tensordot(M[:, col], X, axes=([0], [0]))
        return float(X)
    if method == "double_epsilon":
        X = _apply_to_each_slot(eps, M)
        return float((eps * X).sum() / math.factorial(n))
    raise ValueError(f"unknown determinant method {method!r}; choose from {DET_METHODS}")


def inverse_epsilon(A) -> DenseTensor:
    """[A^-1]_ij = eps_jmn eps_ipq A_mp A_nq / (2 det A), 3x3 only."""
    M = _matrix(A, dim=3)
    det = det_epsilon(M, "by_row")
    if abs(det) <= 1e-12:
        raise DomainError(f"matrix is singular (det = {det:.3e})")
    adj = einsum_eval("e_{ipq} e_{jmn} A_{mp} A_{nq}", {"A": _as_tensor(M)}, dim=3)
    variance = A.variance[::-1] if isinstance(A, DenseTensor) else CO + CO
    weight = -A.weight if isinstance(A, DenseTensor) else 0
    return DenseTensor(3, variance, adj.components / (2.0 * det), weight)


def cross(a, b) -> np.ndarray:
    """[a x b]_i = eps_ijk a_j b_k"""
    eps = epsilon(3).components
    return contract_labelled([("ijk", eps), ("j", _vector(a)), ("k", _vector(b))], "i")


def dot(a, b) -> float:
    a = np.asarray(a.components if isinstance(a, DenseTensor) else a, dtype=float)
    return float((a * _vector(b, a.shape[0])).sum())


def scalar_triple(a, b, c) -> float:
    """eps_ijk a_i b_j c_k"""
    eps = epsilon(3).components
    return float(contract_labelled(
        [("ijk", eps), ("i", _vector(a)), ("j", _vector(b)), ("k", _vector(c))], ""))


def vector_triple(a, b, c) -> np.ndarray:
    """[a x (b x c)]_i = eps_ijk eps_klm a_j b_l c_m"""
    eps = epsilon(3).components
    return contract_labelled(
        [("ijk", eps), ("klm", eps), ("j", _vector(a)), ("l", _vector(b)), ("m", _vector(c))], "i")


def double_dot(A, B, transposed: bool = False) -> float:
    """A:B = A_ij B_ij, or A..B = A_ij B_ji when ``transposed``."""
    MA = _matrix(A)
    MB = _matrix(B, dim=MA.shape[0])
    if transposed:
        MB = MB.T
    return float((MA * MB).sum())


@dataclass(frozen=True)
class InvariantSet:
    I: float
    II: float
    III: float
    I1: float
    I2: float
    I3: float

    def as_dict(self):
        return asdict(self)

    def relation_residuals(self) -> dict:
        """Residuals of I = I1, II = I1^2 - 2 I2, III = I1^3 - 3 I1 I2 + 3 I3."""
        return {
            "I": self.I - self.I1,
            "II": self.II - (self.I1 ** 2 - 2 * self.I2),
            "III": self.III - (self.I1 ** 3 - 3 * self.I1 * self.I2 + 3 * self.I3),
        }


def invariants(A) -> InvariantSet:
    M = _matrix(A, dim=3)
    M2 = matmul(M, M)
    I = trace(M)
    II = trace(M2)
    III = trace(matmul(M2, M))
    I2 = 0.5 * (I * I - float((M * M.T).sum()))
    I3 = det_epsilon(M, "double_epsilon")
    return InvariantSet(I=I, II=II, III=III, I1=I, I2=I2, I3=I3)


JOINT_INVARIANT_NAMES = (
    "tr(A)", "tr(B)", "tr(A2)", "tr(B2)", "tr(A3)", "tr(B3)",
    "tr(AB)", "tr(A2B)", "tr(AB2)", "tr(A2B2)",
)


def joint_invariants(A, B) -> dict:
    """The ten joint invariants of two rank-2 tensors, keyed by name."""
    MA = _matrix(A, dim=3)
    MB = _matrix(B, dim=3)
    A2, B2 = matmul(MA, MA), matmul(MB, MB)
    values = (
        trace(MA), trace(MB), trace(A2), trace(B2),
        trace(matmul(A2, MA)), trace(matmul(B2, MB)),
        trace(matmul(MA, MB)), trace(matmul(A2, MB)), trace(matmul(MA, B2)),
        trace(matmul(A2, B2)),
    )
    return dict(zip(JOINT_INVARIANT_NAMES, values))
