# tests/test_bae.py
import itertools

import numpy as np
import pytest

from bethe_forge.bae import (
    BetheRootSet,
    FamilyRole,
    bae_residual,
    build_bae,
    one_magnon_polynomial_roots,
    residue_check,
    solve_bae,
    two_string,
    vacuum_eigenvalue,
)
from bethe_forge.catalog import BoundaryModel, so
from bethe_forge.chain import SpinChain, dense_spectrum, double_row_transfer
from bethe_forge.errors import ConvergenceError, ParameterRangeError
from bethe_forge.solver import canonical_order, screen_roots
from bethe_forge.tables import TABLE_1

O3 = BoundaryModel("appA_MxRest", so(3), 0)


def _distance_to_spectrum(value, chain, theta):
    values = dense_spectrum(double_row_transfer(chain, theta)).eigenvalues
    return float(np.min(np.abs(values - value)) / max(1.0, abs(value)))


def test_odd_family_layout():
    system = build_bae(O3, 2)
    assert system.labels == ("1",)
    assert system.families[0].role is FamilyRole.ODD_LAST
    assert system.cartan.tolist() == [[1]]

    so5 = build_bae(BoundaryModel("appA_MxRest", so(5), 0), 2)
    assert so5.labels == ("1", "2")
    assert so5.cartan.tolist() == [[2, -1], [-1, 1]]


def test_su_d2_family_layout():
    system = build_bae(BoundaryModel("Dn_d", so(6), 1), 2)
    assert system.labels == ("1", "2")
    assert system.families[1].role is FamilyRole.SU_D2
    assert system.cartan.tolist() == [[2, -1], [-1, 2]]


def test_factorized_family_layout():
    system = build_bae(BoundaryModel("Dn_a", so(8), 2), 2)
    assert system.labels == ("1", "2", "+", "-")
    assert system.cartan.tolist() == [
        [2, -1, 0, 0],
        [-1, 2, -1, -1],
        [0, -1, 2, 0],
        [0, -1, 0, 2],
    ]
    assert system.index_of("+") == 2
    with pytest.raises(ParameterRangeError):
        system.index_of("3")


def test_counts_must_match_the_families():
    with pytest.raises(ParameterRangeError):
        build_bae(O3, 2, (1, 1))
    with pytest.raises(ParameterRangeError):
        build_bae(O3, 2, (-1,))
    system = build_bae(O3, 2, (2,))
    with pytest.raises(ParameterRangeError):
        system.products(BetheRootSet((np.array([0.3j]),)))


def test_empty_root_set():
    system = build_bae(O3, 2)
    empty = system.empty_roots()
    assert empty.counts == (0,)
    assert bae_residual(system, empty).size == 0
    assert residue_check(system, empty).size == 0
    assert solve_bae(system, empty).counts == (0,)


def test_vacuum_eigenvalue_is_in_the_dense_spectrum():
    chain = SpinChain(so(3), 2, O3)
    system = build_bae(O3, 2)
    for theta in (0.8, 0.3 + 0.4j):
        assert _distance_to_spectrum(vacuum_eigenvalue(system, theta), chain, theta) < 1e-9


def test_one_magnon_solutions_are_eigenvalues():
    chain = SpinChain(so(3), 2, O3)
    system = build_bae(O3, 2, (1,))
    found = []
    for seed in (0.3j, 0.7j, 1.2j, 0.5 + 0.5j, 1.5 + 0.2j):
        try:
            roots = solve_bae(system, [seed])
        except ConvergenceError:
            continue
        found.append(roots)
    assert found
    for roots in found:
        assert np.max(np.abs(bae_residual(system, roots))) < 1e-8
        for theta in (0.63, 0.2 + 0.3j):
            assert _distance_to_spectrum(system.eigenvalue(roots, theta), chain, theta) < 1e-6


def test_printed_roots_favour_the_imaginary_reading():
    system = TABLE_1.system()
    printed = TABLE_1.row_roots(0)
    literal = BetheRootSet((np.asarray(TABLE_1.rows[0], dtype=complex),))
    assert np.max(np.abs(bae_residual(system, printed))) < np.max(np.abs(bae_residual(system, literal)))


def test_table_one_solves_near_the_printed_values():
    system = TABLE_1.system()
    solved = solve_bae(system, TABLE_1.row_roots(0))
    assert solved.residual_norm < 1e-10
    printed = canonical_order(TABLE_1.row_roots(0).roots[0])
    assert np.max(np.abs(solved.roots[0] - printed)) < 1e-4
    assert np.max(residue_check(system, solved)) < 1e-6


def test_table_one_eigenvalue_is_in_the_spectrum():
    system = TABLE_1.system()
    solved = solve_bae(system, TABLE_1.row_roots(0))
    value = system.eigenvalue(solved, 0.63)
    assert _distance_to_spectrum(value, TABLE_1.chain(), 0.63) < 1e-6


def test_perturbed_roots_leave_a_residual():
    system = TABLE_1.system()
    solved = solve_bae(system, TABLE_1.row_roots(0))
    bumped = solved.flat().copy()
    bumped[0] += 0.01
    assert np.max(np.abs(bae_residual(system, bumped))) > 1e-3


def test_two_string_and_canonical_order():
    assert np.allclose(two_string(0.5, 0.5), [-0.5 + 0.5j, 0.5 + 0.5j])
    assert np.allclose(two_string(0.5), [-0.505 + 0.5j, 0.505 + 0.5j])
    ordered = canonical_order(np.array([-0.3 + 0.1j, 0.2, 0.4j]))
    assert np.allclose(ordered, [0.4j, 0.2, 0.3 - 0.1j])
    assert np.allclose(canonical_order(np.array([0.2, -0.1]), fold_sign=False), [-0.1, 0.2])


def test_root_set_helpers():
    roots = BetheRootSet.from_flat([0.1, 0.2, 0.3], (1, 2))
    assert roots.counts == (1, 2)
    assert np.allclose(roots.flat(), [0.1, 0.2, 0.3])
    with pytest.raises(ParameterRangeError):
        BetheRootSet.from_flat([0.1], (1, 1))
    assert BetheRootSet((np.array([0.5j, 0.5j + 1e-12]),)).collisions() == [(0, 0, 1)]


def test_one_magnon_polynomial_oracle():
    # (v-1)^4 = (v+1)^4 away from v = 0
    roots = one_magnon_polynomial_roots(2)
    assert np.allclose(np.sort_complex(roots), [-1j, 1j])
    assert one_magnon_polynomial_roots(1).size == 0


def test_one_magnon_solve_matches_the_polynomial_roots():
    system = build_bae(O3, 2, (1,))
    solved = solve_bae(system, [0.9j])
    oracle = one_magnon_polynomial_roots(2)
    assert np.min(np.abs(oracle - solved.roots[0][0])) < 1e-10
    assert np.isclose(solved.roots[0][0], 1j)


def test_flipping_a_doubled_root_inverts_its_equation():
    system = build_bae(O3, 2, (2,))
    roots = np.array([0.3 + 0.4j, -0.7 + 0.9j])
    flipped = roots * np.array([-1.0, 1.0])
    before = system.products(roots)
    after = system.products(flipped)
    assert np.isclose(after[0], 1.0 / before[0])
    assert np.isclose(after[1], before[1])


def test_flipped_solution_keeps_the_eigenvalue():
    system = build_bae(O3, 2, (1,))
    up = BetheRootSet((np.array([1j]),))
    down = BetheRootSet((np.array([-1j]),))
    assert np.max(np.abs(bae_residual(system, down))) < 1e-12
    for theta in (0.63, 0.2 + 0.3j):
        assert np.isclose(system.eigenvalue(up, theta), system.eigenvalue(down, theta))


def test_residue_check_fails_off_shell():
    system = build_bae(O3, 2, (1,))
    solved = solve_bae(system, [0.9j])
    assert np.max(residue_check(system, solved)) < 1e-8
    bumped = BetheRootSet((solved.roots[0] + 0.05,))
    assert np.max(residue_check(system, bumped)) > 1e-5


def test_screening_rejects_escaped_roots():
    with pytest.raises(ConvergenceError, match="escaped") as info:
        screen_roots([np.array([1e15 + 0j, 0.3j])], [True], [0.5, 1e-12], 1e-12)
    assert info.value.trace == [0.5, 1e-12]
    with pytest.raises(ConvergenceError):
        screen_roots([np.array([np.nan + 0j])], [False], [], 0.0)


def test_screening_rejects_the_fixed_point_of_mirrored_families():
    with pytest.raises(ConvergenceError, match="fixed point"):
        screen_roots([np.array([3e-4j, 0.5j])], [True], [1.0], 1e-12)
    screen_roots([np.array([3e-4j, 0.5j])], [False], [1.0], 1e-12)


def test_screening_rejects_coincident_roots():
    with pytest.raises(ConvergenceError, match="coincide"):
        screen_roots([np.array([0.5j, 0.5j + 1e-10])], [False], [1.0], 1e-12)
    mirror = np.array([0.3 + 0.5j, -0.3 - 0.5j])
    with pytest.raises(ConvergenceError, match="coincide"):
        screen_roots([mirror], [True], [1.0], 1e-12)
    screen_roots([mirror], [False], [1.0], 1e-12)


def test_seed_on_a_pole_is_a_convergence_error():
    system = build_bae(O3, 2, (2,))
    with pytest.raises(ConvergenceError, match="pole"):
        solve_bae(system, two_string(0.5, 0.5))


DN_D = BoundaryModel("Dn_d", so(6), 1)
SEED_POOL = (0.35j, 0.9j, 0.45 + 0.5j, 1.4j, 0.8 + 0.15j, 0.2 + 0.9j, 1.1 + 0.6j)


@pytest.mark.parametrize("counts", [(1, 1), (2, 0), (1, 2), (2, 1)])
def test_rank_breaking_even_chain_end_to_end(counts):
    chain = SpinChain(so(6), 2, DN_D)
    system = build_bae(DN_D, 2, counts)
    theta = 0.63
    spectrum = dense_spectrum(double_row_transfer(chain, theta)).eigenvalues
    matched = False
    for groups in itertools.product(*(itertools.combinations(SEED_POOL, c) for c in counts)):
        try:
            solved = solve_bae(system, np.concatenate([np.asarray(g, dtype=complex) for g in groups]))
        except ConvergenceError:
            continue
        value = system.eigenvalue(solved, theta)
        if np.min(np.abs(spectrum - value)) / max(1.0, abs(value)) < 1e-8:
            matched = True
            break
    assert matched


def test_vacuum_of_the_rank_breaking_chain():
    chain = SpinChain(so(6), 2, DN_D)
    system = build_bae(DN_D, 2)
    assert _distance_to_spectrum(vacuum_eigenvalue(system, 0.63), chain, 0.63) < 1e-9


def test_lone_su_d2_root_is_free():
    chain = SpinChain(so(6), 2, DN_D)
    system = build_bae(DN_D, 2, (0, 1))
    values = []
    for v in (0.3 + 0.2j, 1.1j, -0.6 + 0.45j):
        roots = BetheRootSet((np.zeros(0, dtype=complex), np.array([v])))
        assert np.allclose(system.products(roots), 1.0)
        values.append(system.eigenvalue(roots, 0.63))
    assert np.allclose(values, values[0])
    assert _distance_to_spectrum(values[0], chain, 0.63) < 1e-9
