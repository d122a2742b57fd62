import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import well_conditioned
from tensorkit import dense_tensor as dt
from tensorkit.dense_tensor import CO, CONTRA, DenseTensor
from tensorkit.errors import DomainError, ShapeError, ValidationError
from tensorkit.special_tensors import epsilon, kronecker


def rand_tensor(rng, dim, variance, weight=0):
    return DenseTensor(dim, variance, rng.normal(size=(dim,) * len(variance)), weight)


# -- construction and file format ------------------------------------------------


def test_components_row_major():
    t = DenseTensor(2, "__", [1, 2, 3, 4])
    assert t[0, 1] == 2 and t[1, 0] == 3
    assert t.flat.tolist() == [1, 2, 3, 4]


def test_rank_zero_has_one_component():
    t = dt.scalar(5.0)
    assert t.rank == 0 and t.flat.tolist() == [5.0]


def test_wrong_component_count():
    with pytest.raises(ShapeError):
        DenseTensor(3, "__", np.zeros(8))


def test_bad_variance_string():
    with pytest.raises(ShapeError):
        DenseTensor(3, "_x", np.zeros(9))


def test_components_read_only():
    t = DenseTensor(2, "_", [1.0, 2.0])
    with pytest.raises(ValueError):
        t.components[0] = 5.0


def test_json_round_trip(tmp_path):
    t = DenseTensor(3, "^_", np.arange(9.0), weight=-1)
    path = tmp_path / "t.json"
    dt.save_tensor(t, path)
    doc = json.loads(path.read_text())
    assert doc == {"dim": 3, "variance": "^_", "weight": -1, "components": list(np.arange(9.0))}
    assert dt.load_tensor(path) == t
    assert DenseTensor.from_json(t.to_json()) == t


def test_file_format_length_check():
    with pytest.raises(ShapeError):
        DenseTensor.from_dict({"dim": 2, "variance": "__", "components": [1, 2, 3]})


def test_equality_includes_weight():
    a = DenseTensor(2, "_", [1, 2])
    assert a != DenseTensor(2, "_", [1, 2], weight=1)
    assert a != DenseTensor(2, "^", [1, 2])


# -- outer product and contraction ------------------------------------------------


def test_outer_product_vectors():
    c = dt.outer_product(DenseTensor(2, "_", [1, 2]), DenseTensor(2, "_", [3, 4]))
    assert c.components.tolist() == [[3, 4], [6, 8]]
    assert c.variance == "__"


def test_outer_with_scalar():
    v = DenseTensor(3, "^", [1, -2, 0.5])
    c = dt.outer_product(dt.scalar(5.0), v)
    assert c == DenseTensor(3, "^", [5, -10, 2.5])


def test_outer_weights_add():
    c = dt.outer_product(DenseTensor(2, "_", [1, 2], 1), DenseTensor(2, "^", [1, 2], -3))
    assert c.weight == -2 and c.variance == "_^"


def test_outer_dim_mismatch():
    with pytest.raises(ShapeError):
        dt.outer_product(DenseTensor(2, "_", [1, 2]), DenseTensor(3, "_", [1, 2, 3]))


def test_outer_then_contract_is_dot():
    rng = np.random.default_rng(0)
    u, v = rng.normal(size=4), rng.normal(size=4)
    c = dt.contract(dt.outer_product(DenseTensor(4, "^", u), DenseTensor(4, "_", v)), 0, 1, strict=True)
    assert c.flat[0] == pytest.approx(float(u @ v), abs=1e-12)


def test_contract_delta():
    assert dt.contract(kronecker(3), 0, 1).flat[0] == 3.0


def test_contract_trace():
    A = rand_tensor(np.random.default_rng(1), 3, "^_")
    assert dt.contract(A, 0, 1, strict=True).flat[0] == pytest.approx(np.trace(A.components))


def test_epsilon_full_self_contraction():
    e = epsilon(3)
    t = dt.outer_product(e, e)
    for _ in range(3):
        t = dt.contract(t, 0, t.rank // 2)
    assert t.flat[0] == 6.0


def test_contract_errors():
    A = rand_tensor(np.random.default_rng(1), 3, "__")
    with pytest.raises(ShapeError):
        dt.contract(A, 0, 0)
    with pytest.raises(ShapeError):
        dt.contract(A, 0, 2)
    with pytest.raises(ShapeError):
        dt.contract(A, 0, 1, strict=True)


def test_contract_keeps_weight():
    A = DenseTensor(2, "^_", np.eye(2), weight=2)
    assert dt.contract(A, 0, 1, strict=True).weight == 2


# -- permutation, addition, symmetrization ------------------------------------------------


def test_transpose():
    t = dt.permute_slots(DenseTensor(2, "^_", [[1, 2], [3, 4]]), [1, 0])
    assert t.components.tolist() == [[1, 3], [2, 4]]
    assert t.variance == "_^"


def test_identity_permutation():
    t = rand_tensor(np.random.default_rng(2), 3, "^__")
    assert dt.permute_slots(t, [0, 1, 2]) == t


def test_permute_rule_rank3():
    t = rand_tensor(np.random.default_rng(3), 3, "^_^")
    perm = [2, 0, 1]
    b = dt.permute_slots(t, perm)
    for idx in np.ndindex(3, 3, 3):
        target = [0, 0, 0]
        for k in range(3):
            target[perm[k]] = idx[k]
        assert b[tuple(target)] == t[idx]
    assert b.variance == "_^^"


def test_swap_negates_epsilon():
    e = epsilon(3)
    assert dt.permute_slots(e, [1, 0, 2]) == dt.scale(e, -1)


def test_invalid_permutation():
    with pytest.raises(ShapeError):
        dt.permute_slots(epsilon(3), [0, 0, 1])


def test_add_commutes_and_scale():
    rng = np.random.default_rng(4)
    a, b = rand_tensor(rng, 3, "^_"), rand_tensor(rng, 3, "^_")
    assert dt.add(a, b) == dt.add(b, a)
    assert dt.scale(a, 1) == a
    assert dt.scale(a, 0) == dt.zeros(3, "^_")


def test_add_mismatch():
    a = DenseTensor(2, "_", [1, 2])
    for b in (DenseTensor(2, "^", [1, 2]), DenseTensor(2, "_", [1, 2], 1), DenseTensor(3, "_", [1, 2, 3])):
        with pytest.raises(ShapeError):
            dt.add(a, b)


def test_sym_plus_antisym():
    A = rand_tensor(np.random.default_rng(5), 4, "__")
    assert dt.add(dt.symmetrize(A), dt.antisymmetrize(A)).allclose(A)


def test_antisymmetrize_symmetric_is_zero():
    M = np.random.default_rng(6).normal(size=(3, 3))
    S = DenseTensor(3, "__", M + M.T)
    assert dt.antisymmetrize(S) == dt.zeros(3, "__")


def test_antisymmetrize_rank3_six_terms():
    A = np.random.default_rng(7).normal(size=(3, 3, 3))
    expected = (A + A.transpose(1, 2, 0) + A.transpose(2, 0, 1)
                - A.transpose(1, 0, 2) - A.transpose(0, 2, 1) - A.transpose(2, 1, 0)) / 6.0
    got = dt.antisymmetrize(DenseTensor(3, "___", A)).components
    assert np.allclose(got, expected, atol=1e-14)


def test_symmetrize_subset_and_variance_check():
    A = rand_tensor(np.random.default_rng(8), 3, "__^")
    S = dt.symmetrize(A, [0, 1])
    assert np.allclose(S.components, S.components.transpose(1, 0, 2))
    with pytest.raises(ShapeError):
        dt.symmetrize(A, [1, 2])


@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 4))
@settings(max_examples=40, deadline=None)
def test_property_sym_then_antisym_vanishes(seed, dim):
    A = rand_tensor(np.random.default_rng(seed), dim, "___")
    assert np.max(np.abs(dt.antisymmetrize(dt.symmetrize(A)).components)) < 1e-12


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 5))
@settings(max_examples=40, deadline=None)
def test_property_outer_contract_dot(seed, dim):
    rng = np.random.default_rng(seed)
    u, v = rng.normal(size=dim), rng.normal(size=dim)
    c = dt.contract(dt.outer_product(DenseTensor(dim, "_", u), DenseTensor(dim, "^", v)), 0, 1)
    assert abs(c.flat[0] - sum(u[i] * v[i] for i in range(dim))) < 1e-12


# -- einsum ------------------------------------------------


def test_einsum_cross_basis():
    A = DenseTensor(3, "_", [1, 0, 0])
    B = DenseTensor(3, "_", [0, 1, 0])
    assert dt.einsum_eval("e_{ijk} A_j B_k", {"A": A, "B": B}).flat.tolist() == [0, 0, 1]


def test_einsum_index_replacement():
    A = rand_tensor(np.random.default_rng(9), 3, "_")
    assert dt.einsum_eval("d_{ij} A_j", {"A": A}).allclose(A, atol=0)


def test_einsum_sym_antisym_contraction():
    M = np.random.default_rng(10).normal(size=(3, 3))
    res = dt.einsum_eval("A_{ij} B_{ij}", {"A": DenseTensor(3, "__", M + M.T),
                                           "B": DenseTensor(3, "__", M - M.T)})
    assert abs(res.flat[0]) < 1e-12


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5, 6])
def test_einsum_matmul_against_loops(d):
    rng = np.random.default_rng(d)
    A, B = rng.normal(size=(d, d)), rng.normal(size=(d, d))
    res = dt.einsum_eval("A^{ij} B_{jk}", {"A": DenseTensor(d, "^^", A), "B": DenseTensor(d, "__", B)},
                         dim=d, mode="strict")
    loops = np.zeros((d, d))
    for i in range(d):
        for k in range(d):
            loops[i, k] = sum(A[i, j] * B[j, k] for j in range(d))
    assert np.max(np.abs(res.components - loops)) < 1e-12
    assert res.variance == "^_"


def test_einsum_against_numpy_einsum():
    rng = np.random.default_rng(11)
    T = rng.normal(size=(3, 3, 3))
    U = rng.normal(size=(3, 3))
    res = dt.einsum_eval("T_{iji} U_{kj} - 2 U_{jk} T_{jmm}", {"T": DenseTensor(3, "___", T),
                                                            "U": DenseTensor(3, "__", U)})
    expected = np.einsum("iji,kj->k", T, U) - 2 * np.einsum("jk,jmm->k", U, T)
    assert np.allclose(res.components, expected, atol=1e-12)


def test_einsum_output_follows_first_term_order():
    rng = np.random.default_rng(12)
    A = DenseTensor(3, "__", rng.normal(size=(3, 3)))
    res = dt.einsum_eval("A_{ji} + A_{ij}", {"A": A})
    assert np.allclose(res.components, A.components.T + A.components)
    # a single all-free factor comes back unchanged; an explicit order permutes it
    assert dt.einsum_eval("A_{ji}", {"A": A}) == A
    assert np.array_equal(dt.einsum_eval("A_{ji}", {"A": A}, output="ij").components, A.components.T)
    with pytest.raises(ShapeError):
        dt.einsum_eval("A_{ji}", {"A": A}, output="ik")


def test_einsum_errors():
    A = DenseTensor(3, "_", [1, 2, 3])
    with pytest.raises(ValidationError):
        dt.einsum_eval("A_i B_i", {"A": A})
    with pytest.raises(ShapeError):
        dt.einsum_eval("A_{ij}", {"A": A})
    with pytest.raises(ValidationError):
        dt.einsum_eval("A_i + A_{ij}", {"A": A})
    with pytest.raises(ShapeError):
        dt.einsum_eval("A^i B_i", {"A": A, "B": A}, mode="strict")


def test_einsum_binding_dims_must_match():
    with pytest.raises(ShapeError):
        dt.einsum_eval("A_i", {"A": DenseTensor(2, "_", [1, 2])}, dim=3)


def test_einsum_weights():
    A = DenseTensor(3, "_", [1, 2, 3], weight=-1)
    assert dt.einsum_eval("e_{ijk} A_k", {"A": A}).weight == -1
    with pytest.raises(ShapeError):
        dt.einsum_eval("A_i + B_i", {"A": A, "B": DenseTensor(3, "_", [1, 2, 3])})


# -- transformation ------------------------------------------------


def test_transform_identity():
    t = rand_tensor(np.random.default_rng(13), 3, "^_^", weight=1)
    assert dt.transform(t, np.eye(3)).allclose(t)


def test_transform_scalar_invariant():
    J = well_conditioned(np.random.default_rng(14))
    assert dt.transform(dt.scalar(2.5), J) == dt.scalar(2.5)


def test_epsilon_weight_minus_one_under_reflection():
    e = epsilon(3, weight=-1)
    J = np.diag([1.0, 1.0, -1.0])
    assert dt.transform(e, J, J).allclose(e, atol=0)


def test_transform_rules():
    rng = np.random.default_rng(15)
    J = well_conditioned(rng)
    Ji = np.linalg.inv(J)
    v = rng.normal(size=3)
    assert np.allclose(dt.transform(DenseTensor(3, "^", v), J).components, J @ v)
    assert np.allclose(dt.transform(DenseTensor(3, "_", v), J).components, Ji.T @ v)
    M = rng.normal(size=(3, 3))
    got = dt.transform(DenseTensor(3, "^_", M, weight=2), J).components
    assert np.allclose(got, J @ M @ Ji * np.linalg.det(Ji) ** 2)


def test_transform_errors():
    t = DenseTensor(3, "^", [1, 2, 3])
    with pytest.raises(DomainError):
        dt.transform(t, np.zeros((3, 3)))
    with pytest.raises(ShapeError):
        dt.transform(t, np.eye(3), 2 * np.eye(3))


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=30, deadline=None)
def test_property_transform_composes(seed):
    rng = np.random.default_rng(seed)
    t = rand_tensor(rng, 3, "^_", weight=1)
    J1, J2 = well_conditioned(rng), well_conditioned(rng)
    two_step = dt.transform(dt.transform(t, J1), J2)
    one_step = dt.transform(t, J2 @ J1)
    assert np.max(np.abs(two_step.components - one_step.components)) < 1e-9


def test_contract_labelled_batched():
    rng = np.random.default_rng(16)
    M = rng.normal(size=(3, 3, 5))
    v = rng.normal(size=(3, 5))
    out = dt.contract_labelled([("ij", M), ("j", v)], "i", (5,))
    assert np.allclose(out, np.einsum("ijb,jb->ib", M, v))
