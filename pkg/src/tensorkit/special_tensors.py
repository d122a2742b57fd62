"""Kronecker delta, the rank-n permutation symbol, and the generalized delta.

API indices are 0-based.  The closed-form epsilon formulas are stated for
1-based index values, so :func:`epsilon_closed_form` and
:func:`epsilon_product_formula` take 1-based tuples.
"""

from __future__ import annotations

import functools
import itertools
import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dense_tensor import CO, DenseTensor, permutation_sign
from .errors import ShapeError

MAX_EPSILON_RANK = 8


def kronecker(d: int, variance: str = CO + CO) -> DenseTensor:
    if d < 1:
        raise ShapeError(f"dimension must be >= 1, got {d}")
    if len(variance) != 2:
        raise ShapeError("the Kronecker delta has rank 2")
    return DenseTensor(d, variance, np.eye(d))


@functools.lru_cache(maxsize=None)
def _epsilon_components(n: int) -> np.ndarray:
    comps = np.zeros((n,) * n)
    for perm in itertools.permutations(range(n)):
        comps[perm] = permutation_sign(perm)
    comps.setflags(write=False)
    return comps


def epsilon(n: int, variance: str | None = None, weight: int = 0) -> DenseTensor:
    """Rank-n permutation symbol in n dimensions, stored densely.

    Components are +1/-1 on even/odd permutations of (0, ..., n-1) and 0
    on any repeated index.  Weight defaults to 0; pass ``weight=-1`` with a
    covariant variance (or ``+1`` contravariant) for the relative-tensor
    reading.
    """
    if not 2 <= n <= MAX_EPSILON_RANK:
        raise ShapeError(f"epsilon rank must be in 2..{MAX_EPSILON_RANK}, got {n}")
    if variance is None:
        variance = CO * n
    if len(variance) != n:
        raise ShapeError(f"variance {variance!r} does not have length {n}")
    return DenseTensor(n, variance, _epsilon_components(n), weight)


def _check_one_based(indices: Sequence[int]) -> list[int]:
    idx = [int(i) for i in indices]
    n = len(idx)
    if n < 1:
        raise ShapeError("need at least one index")
    bad = [i for i in idx if not 1 <= i <= n]
    if bad:
        raise ShapeError(f"indices must lie in 1..{n}, got {bad}")
    return idx


def epsilon_closed_form(indices: Sequence[int]) -> int:
    """Sign form: product of sign(a_j - a_i) over all pairs i < j (1-based values)."""
    a = _check_one_based(indices)
    sign = 1
    for i, j in itertools.combinations(range(len(a)), 2):
        diff = a[j] - a[i]
        if diff == 0:
            return 0
        if diff < 0:
            sign = -sign
    return sign


def superfactorial(k: int) -> int:
    """1! * 2! * ... * k!"""
    return math.prod(math.factorial(i) for i in range(1, k + 1))


def epsilon_product_formula(indices: Sequence[int]) -> int:
    """Exact form: product of (a_j - a_i) over i < j, divided by S(n-1).

    For n = 2, 3, 4 this is (j - i), (j-i)(k-i)(k-j)/2 and the six-factor
    product over 12.
    """
    a = _check_one_based(indices)
    prod = math.prod(a[j] - a[i] for i, j in itertools.combinations(range(len(a)), 2))
    value = Fraction(prod, superfactorial(len(a) - 1))
    if value.denominator != 1 or abs(value) > 1:
        raise ArithmeticError(f"product formula gave {value} for {a}")
    return int(value)


def _int_det(matrix: list[list[int]]) -> int:
    """Exact integer determinant by fraction-free (Bareiss) elimination."""
    m = [row[:] for row in matrix]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if m[r][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def generalized_kronecker(upper: Sequence[int], lower: Sequence[int], d: int) -> int:
    """Determinant of the n x n matrix M[a][b] = delta(upper[a], lower[b]).

    Indices are 0-based and must lie in ``0..d-1``.
    """
    upper = [int(i) for i in upper]
    lower = [int(i) for i in lower]
    if len(upper) != len(lower):
        raise ShapeError(f"index tuples differ in length: {len(upper)} vs {len(lower)}")
    if len(upper) > d:
        raise ShapeError(f"tuple length {len(upper)} exceeds dimension {d}")
    bad = [i for i in upper + lower if not 0 <= i < d]
    if bad:
        raise ShapeError(f"indices must lie in 0..{d - 1}, got {bad}")
    matrix = [[1 if u == v else 0 for v in lower] for u in upper]
    return _int_det(matrix)


def generalized_kronecker_tensor(n: int, d: int) -> DenseTensor:
    """Rank-2n tensor of generalized-delta values, upper slots first."""
    if not 1 <= n <= d:
        raise ShapeError(f"need 1 <= n <= d, got n={n}, d={d}")
    comps = np.zeros((d,) * (2 * n))
    for upper in itertools.product(range(d), repeat=n):
        if len(set(upper)) < n:
            continue
        for perm in itertools.permutations(range(n)):
            lower = tuple(upper[p] for p in perm)
            comps[upper + lower] = permutation_sign(perm)
    return DenseTensor(d, "^" * n + CO * n, comps)
