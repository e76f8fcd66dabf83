# tests/test_tables.py
import numpy as np
import pytest

from bethe_forge.bae import bae_residual, canonical_roots
from bethe_forge.tables import (
    TABLE_1,
    TABLE_2,
    TABLE_3,
    TABLES,
    interpretation_residuals,
    listed_to_v,
    pm,
    reproduce_table,
    v_to_listed,
)


def test_tables_are_registered():
    assert sorted(TABLES) == ["table1", "table2", "table3"]
    assert TABLE_1.L == 5 and TABLE_2.L == 4 and TABLE_3.L == 5
    assert all(len(row) == 4 for t in TABLES.values() for row in t.rows)
    assert all(len(t.seeds) == len(t.rows) for t in TABLES.values())
    assert TABLE_3.note and not TABLE_1.note


def test_listed_convention():
    assert pm(1.0, 0.5j) == (1.0 + 0.5j, 1.0 - 0.5j)
    v = listed_to_v([0.15505 + 0.500072j])
    assert np.isclose(v[0], -0.500072 + 0.15505j)
    assert np.allclose(v_to_listed(v), [0.15505 + 0.500072j])


def test_imaginary_reading_wins():
    for table in (TABLE_1, TABLE_2):
        res = interpretation_residuals(table, 0)
        assert res["v/i"] < res["v"]


@pytest.mark.parametrize("table", list(TABLES.values()), ids=lambda t: t.name)
def test_seeds_are_not_the_printed_roots(table):
    system = table.system()
    for i in range(len(table.rows)):
        seed = canonical_roots(system, table.seed_set(i)).flat()
        printed = canonical_roots(system, table.row_roots(i)).flat()
        assert seed.shape == printed.shape
        assert np.max(np.abs(seed - printed)) > 1e-4
        assert np.max(np.abs(seed - printed)) < 0.1


def test_rounded_seeds_do_not_solve_the_equations():
    system = TABLE_1.system()
    assert np.max(np.abs(bae_residual(system, TABLE_1.seed_set(0)))) > 1e-3


@pytest.mark.parametrize("table", list(TABLES.values()), ids=lambda t: t.name)
def test_every_table_is_reproduced_with_eigencheck(table):
    results = reproduce_table(table, eigencheck=True)
    assert len(results) == len(table.rows)
    for result in results:
        assert result.error == ""
        assert result.deviation < 1e-4
        assert result.eigen_residual < 1e-6
        assert result.listed.shape == (4,)


def test_table_one_from_string_seeds():
    for result in reproduce_table(TABLE_1):
        assert result.solved.residual_norm < 1e-8
        assert result.solved.source == "solver"
