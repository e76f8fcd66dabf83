# tests/test_strings.py
import numpy as np
import pytest

from bethe_forge.bae import build_bae
from bethe_forge.catalog import BoundaryModel, so
from bethe_forge.errors import ParameterRangeError
from bethe_forge.strings import (
    MIN_SEED_GAP,
    StringLayout,
    StringSeed,
    seed_roots,
    solve_strings,
    string_seed,
)

O3 = BoundaryModel("appA_MxRest", so(3), 0)
O2 = BoundaryModel("appA_MxRest", so(3), 1)


def test_string_members():
    seed = StringSeed(0.2 + 0.5j, (0.01, -0.02))
    assert seed.size == 3
    assert np.allclose(seed.members(), [0.2 + 0.5j, 1.21 + 0.5j, 2.19 + 0.5j])
    down = StringSeed(-0.49, (-0.01,), step=-1.0, anchor=-0.5)
    assert np.allclose(down.members(), [-0.49, -1.5])


def test_two_string_seed():
    seed = string_seed(0.65, 0.53)
    assert np.allclose(seed.members(), [-0.53 + 0.65j, 0.53 + 0.65j])


def test_vanishing_gap_seeds_move_off_zero():
    seed = string_seed(0.16, 0.50)
    assert seed.gaps == (complex(MIN_SEED_GAP),)
    assert np.isclose(seed.members()[1], 0.5 + MIN_SEED_GAP + 0.16j)


def test_anchored_head_must_start_off_the_anchor():
    with pytest.raises(ParameterRangeError):
        StringSeed(-0.5, (-0.01,), step=-1.0, anchor=-0.5)


def test_seed_roots_flatten_plain_and_string_items():
    values = seed_roots([0.58j, StringSeed(-0.51, (-0.01,), step=-1.0), -2.55])
    assert np.allclose(values, [0.58j, -0.51, -1.52, -2.55])


def test_layout_checks_counts_and_families():
    system = build_bae(O3, 2, (2,))
    with pytest.raises(ParameterRangeError):
        StringLayout(system, [[0.5j]])
    with pytest.raises(ParameterRangeError):
        StringLayout(system, [[0.5j, 0.9j], [0.3j]])
    layout = StringLayout(system, [[string_seed(0.4, 0.55)]])
    assert layout.seed().shape == (2,)
    assert layout.roots(layout.seed()).counts == (2,)


def test_plain_seeds_solve_like_the_product_form():
    system = build_bae(O3, 2, (1,))
    solved = solve_strings(system, [[0.9j]])
    assert np.isclose(solved.roots[0][0], 1j)
    assert solved.residual_norm < 1e-10


def test_empty_seed_gives_the_vacuum():
    system = build_bae(O2, 4)
    assert solve_strings(system, [[]]).counts == (0,)
