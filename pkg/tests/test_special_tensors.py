import itertools
import math

import numpy as np
import pytest

from oracles import epsilon_array, generalized_delta_by_permutation, parity_by_transpositions
from tensorkit import dense_tensor as dt
from tensorkit import special_tensors as sp
from tensorkit.errors import ShapeError


def test_kronecker_identity():
    assert np.array_equal(sp.kronecker(3).components, np.eye(3))


def test_kronecker_trace_d4():
    assert dt.contract(sp.kronecker(4), 0, 1).flat[0] == 4.0


def test_delta_composition():
    assert dt.einsum_eval("d_{ij} d_{jk}", {}) == sp.kronecker(3)


def test_epsilon_values():
    assert sp.epsilon(3)[0, 1, 2] == 1
    assert sp.epsilon(2)[1, 0] == -1
    assert sp.epsilon(3)[0, 0, 1] == 0


def test_epsilon_range():
    for n in (1, 9):
        with pytest.raises(ShapeError):
            sp.epsilon(n)


def test_epsilon_default_weight_zero():
    assert sp.epsilon(4).weight == 0
    assert sp.epsilon(3, weight=-1).weight == -1


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_epsilon_matches_parity_oracle(n):
    assert np.array_equal(sp.epsilon(n).components, epsilon_array(n))


def test_closed_form_examples():
    assert sp.epsilon_closed_form((1, 2, 3)) == 1
    assert sp.epsilon_product_formula((2, 1)) == -1
    with pytest.raises(ShapeError):
        sp.epsilon_closed_form((1, 4, 2))


def test_rank4_closed_forms_all_256():
    for idx in itertools.product(range(1, 5), repeat=4):
        expected = parity_by_transpositions(idx)
        assert sp.epsilon_closed_form(idx) == expected
        assert sp.epsilon_product_formula(idx) == expected


def test_superfactorial():
    assert [sp.superfactorial(k) for k in range(5)] == [1, 1, 2, 12, 288]


def test_generalized_delta_reproduces_epsilon():
    for n in (2, 3):
        for low in itertools.product(range(n), repeat=n):
            assert sp.generalized_kronecker(tuple(range(n)), low, n) == parity_by_transpositions(low)


def test_generalized_delta_repeated_lower():
    assert sp.generalized_kronecker((0, 1), (1, 1), 3) == 0


def test_generalized_delta_rank2_expansion():
    for i, j, l, m in itertools.product(range(3), repeat=4):
        expected = int(i == l) * int(j == m) - int(i == m) * int(j == l)
        assert sp.generalized_kronecker((i, j), (l, m), 3) == expected


def test_generalized_delta_errors():
    with pytest.raises(ShapeError):
        sp.generalized_kronecker((0, 1), (0,), 3)
    with pytest.raises(ShapeError):
        sp.generalized_kronecker((0, 1, 2, 3), (0, 1, 2, 3), 3)


def test_generalized_delta_tensor_matches_scalar_api():
    G = sp.generalized_kronecker_tensor(2, 3)
    for up in itertools.product(range(3), repeat=2):
        for low in itertools.product(range(3), repeat=2):
            assert G[up + low] == generalized_delta_by_permutation(up, low)


# -- contraction identities ------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_self_contraction_n_factorial(n):
    e = sp.epsilon(n).components
    assert float((e * e).sum()) == math.factorial(n)


def test_epsilon_delta_identity():
    got = dt.einsum_eval("e_{ijk} e_{lmk}", {}).components
    want = dt.einsum_eval("d_{il} d_{jm} - d_{im} d_{jl}", {}, output="ijlm").components
    assert np.array_equal(got, want)


def test_epsilon_double_contraction():
    assert dt.einsum_eval("e_{ijk} e_{ljk}", {}) == dt.scale(sp.kronecker(3), 2)


@pytest.mark.parametrize("n", [2, 3])
def test_epsilon_product_is_delta_determinant(n):
    e = sp.epsilon(n).components
    for up in itertools.product(range(n), repeat=n):
        for low in itertools.product(range(n), repeat=n):
            det = np.linalg.det(np.array([[float(a == b) for b in low] for a in up]))
            assert e[up] * e[low] == round(det)


def test_epsilon_delta_contractions_vanish():
    for expr in ("e_{ijk} d_{ij}", "e_{ijk} d_{ik}", "e_{ijk} d_{jk}"):
        assert not dt.einsum_eval(expr, {}).components.any()


def test_epsilon_kills_symmetric():
    M = np.random.default_rng(0).normal(size=(3, 3))
    A = dt.DenseTensor(3, "__", M + M.T)
    assert np.max(np.abs(dt.einsum_eval("e_{ijk} A_{jk}", {"A": A}).components)) < 1e-15
