# tests/test_nesting.py
import numpy as np
import pytest

from bethe_forge.catalog import AlgebraFamily, BoundaryModel, so
from bethe_forge.errors import ParameterRangeError
from bethe_forge.nesting import (
    EndgameKind,
    NestingLadder,
    block_split,
    boundary_coeffs,
    closed_form,
    closed_form_nested_k,
    nested_k,
)

THETAS = (0.37 + 0.21j, 1.7 - 0.4j, -0.9 + 1.3j)


def test_ladder_dimensions():
    assert NestingLadder(BoundaryModel("appA_MxRest", so(7), 0)).dims == (7, 5, 3, 1)
    assert NestingLadder(BoundaryModel("Dn_a", so(8), 0)).dims == (8, 6, 4)
    assert NestingLadder(BoundaryModel("Dn_a", so(4), 0)).top == 0


def test_nesting_needs_an_orthogonal_chain():
    with pytest.raises(ParameterRangeError):
        NestingLadder(BoundaryModel("An_b", AlgebraFamily("su", 4)))


@pytest.mark.parametrize("model, kind", [
    (BoundaryModel("appA_MxRest", so(5), 0), EndgameKind.ODD),
    (BoundaryModel("Dn_a", so(8), 0), EndgameKind.FACTORIZED),
    (BoundaryModel("Dn_a", so(6), 0), EndgameKind.FACTORIZED),
    (BoundaryModel("Dn_d", so(6), 1), EndgameKind.SU_D2),
])
def test_endgame_kind(model, kind):
    assert NestingLadder(model).endgame is kind


@pytest.mark.parametrize("level", [0, 1])
def test_identity_so8_matches_the_closed_form(level):
    model = BoundaryModel("Dn_a", so(8), 0)
    coeffs = boundary_coeffs(model, level)
    form = closed_form(model, level)
    for t in THETAS:
        assert np.isclose(coeffs.k_right(t), form.k_right(t))
        assert np.isclose(coeffs.k_left(t), form.k_left(t))


def test_identity_so8_level_one_coefficient():
    coeffs = boundary_coeffs(BoundaryModel("Dn_a", so(8), 0), 1)
    for t in THETAS:
        assert np.isclose(coeffs.k_right(t), t / (t - 1))


def test_odd_split_so6_level_zero():
    model = BoundaryModel("Dn_d", so(6), 0)
    coeffs = boundary_coeffs(model, 0)
    form = closed_form(model, 0)
    for t in THETAS:
        assert np.isclose(coeffs.k_right(t), 1.0)
        assert np.isclose(coeffs.k_left(t), form.k_left(t))


def test_odd_split_so6_nested_k():
    model = BoundaryModel("Dn_d", so(6), 0)
    for u in THETAS:
        assert np.allclose(nested_k(model, 1, u), closed_form_nested_k(model, 1, u))


@pytest.mark.parametrize("level", [0, 1])
def test_odd_identity_so5_matches_the_closed_form(level):
    model = BoundaryModel("appA_MxRest", so(5), 0)
    coeffs = boundary_coeffs(model, level)
    form = closed_form(model, level)
    for t in THETAS:
        assert np.isclose(coeffs.k_right(t), form.k_right(t))
        assert np.isclose(coeffs.k_left(t), form.k_left(t))


def test_level_one_k_of_the_identity_is_scalar():
    model = BoundaryModel("Dn_a", so(8), 0)
    u = 0.55 + 0.35j
    k1 = nested_k(model, 1, u)
    assert k1.shape == (6, 6)
    assert np.allclose(k1, (u + 1) / u * np.eye(6))


def test_endgame_level_has_no_generic_coefficients():
    ladder = NestingLadder(BoundaryModel("Dn_a", so(8), 0))
    with pytest.raises(ParameterRangeError):
        ladder.coefficients(ladder.top)
    with pytest.raises(ParameterRangeError):
        ladder.k_matrix("R", 5, 0.3)


def test_block_split_rejects_mixing():
    k = np.eye(4, dtype=complex)
    k[0, 1] = 0.5
    with pytest.raises(ParameterRangeError):
        block_split(k)
    y, mid, y_star = block_split(np.diag([2.0, 1.0, 1.0, 3.0]))
    assert y == 2.0 and y_star == 3.0
    assert np.allclose(mid, np.eye(2))


def test_endgame_scalars_of_the_odd_chain():
    scalars = boundary_coeffs(BoundaryModel("appA_MxRest", so(5), 0), 0).endgame_scalars(0.4)
    assert set(scalars) == {"K_R", "K_L"}
