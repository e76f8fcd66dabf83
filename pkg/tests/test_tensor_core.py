# tests/test_tensor_core.py
import numpy as np
import pytest

from bethe_forge.errors import DimensionGuardError, ParameterRangeError, PoleError
from bethe_forge.tensor_core import (
    ChainOperator,
    ScalarKernels,
    a_kernel,
    basis_change,
    d_kernel,
    d_over_a,
    embed_single,
    embed_two_site,
    guard_pole,
    kron_all,
    partial_trace_aux,
    permutation_op,
    sp_form_op,
    sp_unit,
    to_basis,
    trace_op,
)


def test_guard_pole_raises_instead_of_dividing_by_zero():
    with pytest.raises(PoleError):
        d_kernel(0.0)
    with pytest.raises(PoleError):
        d_over_a(2.0)
    assert guard_pole("x", 0.5) == 0.5


def test_scalar_kernels_relations():
    k = ScalarKernels(5)
    u = 0.37 + 0.21j
    assert k.shift == 3
    assert np.isclose(k.a(u), (u - 2) / u)
    assert np.isclose(k.b(u), 1 - 2 / (3 - u))
    assert np.isclose(k.c(u), k.d(u) + k.e(u))
    assert np.isclose(a_kernel(u) * d_over_a(u), d_kernel(u))


def test_f_forms_agree():
    for n in (4, 5, 6, 7):
        k = ScalarKernels(n)
        w = 0.83 + 0.4j
        assert np.isclose(k.f(w), k.f_shifted(w))


def test_permutation_swaps_product_states():
    n = 3
    p = permutation_op(n).entries
    e = np.eye(n)
    assert np.allclose(p @ np.kron(e[0], e[2]), np.kron(e[2], e[0]))
    assert np.allclose(p @ p, np.eye(n * n))


def test_trace_op_is_rank_one():
    k = trace_op(4).entries
    assert np.linalg.matrix_rank(k) == 1
    assert np.allclose(k @ k, 4 * k)


def test_sp_unit_squares_to_minus_one():
    u = sp_unit(4)
    assert np.allclose(u @ u, -np.eye(4))
    with pytest.raises(ParameterRangeError):
        sp_unit(3)


def test_embedded_operators_match_kron():
    n, L = 2, 3
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    single = embed_single(x, 1, n, L).to_dense()
    assert np.allclose(single, kron_all([np.eye(2), x, np.eye(2)]))

    p = permutation_op(n)
    two = embed_two_site(p, (0, 1), L).to_dense()
    assert np.allclose(two, np.kron(p.entries, np.eye(2)))


def test_matrix_free_action_and_composition():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    b = rng.normal(size=(8, 8))
    op_a = ChainOperator.from_dense(a, 2, 3)
    op_b = ChainOperator.from_dense(b, 2, 3)
    v = rng.normal(size=8)
    assert np.allclose((op_a @ op_b).apply(v), a @ b @ v)
    lin = op_a.as_linear_operator()
    assert np.allclose(lin.matvec(v), a @ v)


def test_dense_guard():
    op = ChainOperator(n=4, L=7, action=lambda x: x, dense_limit=4096)
    with pytest.raises(DimensionGuardError) as info:
        op.to_dense()
    assert info.value.dim == 4 ** 7
    assert info.value.limit == 4096


def test_from_dense_checks_shape():
    with pytest.raises(ParameterRangeError):
        ChainOperator.from_dense(np.eye(5), 2, 2)


def test_partial_trace_dense_and_matrix_free_agree():
    rng = np.random.default_rng(11)
    m = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    dense = ChainOperator.from_dense(m, 3, 2, has_aux=True)
    free = ChainOperator(n=3, L=2, action=lambda x: m @ x, has_aux=True)
    expected = np.einsum("aiaj->ij", m.reshape(3, 3, 3, 3))
    assert np.allclose(partial_trace_aux(dense).to_dense(), expected)
    assert np.allclose(partial_trace_aux(free).to_dense(), expected)


def test_paired_basis_is_unitary_and_pairs_the_first_two_axes():
    w = basis_change(5)
    assert np.allclose(w @ w.conj().T, np.eye(5))
    diag = np.diag([2.0, 2.0, 1.0, 1.0, 1.0]).astype(complex)
    rotated = to_basis(diag, w)
    assert np.allclose(rotated, np.diag(np.diag(rotated)))
    assert np.isclose(rotated[0, 0], 2.0) and np.isclose(rotated[-1, -1], 2.0)


def test_symplectic_form_operator():
    op = sp_form_op(4).entries
    assert np.allclose(op @ op, 4 * op)
    assert np.isclose(np.trace(op), 4)
    assert np.isclose(op[0 * 4 + 2, 1 * 4 + 3], 1.0)
    assert np.isclose(op[0 * 4 + 2, 2 * 4 + 0], -1.0)
    with pytest.raises(ParameterRangeError):
        sp_form_op(3)
