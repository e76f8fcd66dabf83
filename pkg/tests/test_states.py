# tests/test_states.py
import numpy as np
import pytest

from bethe_forge.bae import build_bae, solve_bae
from bethe_forge.catalog import AlgebraFamily, BoundaryModel, identity_model, so
from bethe_forge.chain import SpinChain, vacuum_state
from bethe_forge.errors import ConvergenceError, ParameterRangeError
from bethe_forge.states import (
    CONJECTURE_FROM,
    best_state,
    eigencheck,
    exchange_residual,
    nested_vectors,
    phi_state,
    pseudo_vacuum_report,
    rmrm_check,
    split_monodromy,
    trt_check,
)

O3 = identity_model(so(3))


@pytest.mark.parametrize("n", [3, 4])
def test_reflection_algebra_of_the_double_row_monodromy(n):
    chain = SpinChain(so(n), 1, identity_model(so(n)))
    assert rmrm_check(chain, 0.6 + 0.3j, -0.2 + 0.7j).passed(1e-9)
    assert trt_check(chain, 0.45 - 0.35j).passed(1e-9)


def test_pseudo_vacuum_actions():
    chain = SpinChain(so(5), 2, identity_model(so(5)))
    for theta in (0.37, 0.9 + 0.4j):
        assert pseudo_vacuum_report(chain, theta).passed(1e-9)


def test_monodromy_blocks_have_the_paired_shapes():
    chain = SpinChain(so(4), 1, identity_model(so(4)))
    blocks = split_monodromy(chain, 0.5 + 0.1j)
    assert blocks.n == 4
    assert blocks.Q == 4
    assert blocks.d == 2
    assert blocks.assemble().shape == (16, 16)
    assert blocks.B_vec.shape == (2, 4, 4)
    assert blocks.A_mid.shape == (2, 2, 4, 4)
    with pytest.raises(ParameterRangeError):
        split_monodromy(SpinChain(AlgebraFamily("su", 3), 1, identity_model(AlgebraFamily("su", 3))), 0.5)


def test_no_rapidities_gives_the_vacuum():
    chain = SpinChain(so(3), 2, O3)
    state = phi_state(chain, [])
    vac = vacuum_state(chain)
    assert np.allclose(state.vector, vac)
    assert not state.conjectural
    assert np.max(eigencheck(state, chain, (0.37, 0.8))) < 1e-10


def test_one_magnon_bethe_vector_is_an_eigenvector():
    chain = SpinChain(so(3), 2, O3)
    system = build_bae(O3, 2, (1,))
    solved = None
    for seed in (0.3j, 0.7j, 1.2j, 0.5 + 0.5j):
        try:
            solved = solve_bae(system, [seed])
            break
        except ConvergenceError:
            continue
    assert solved is not None
    rapidities = solved.roots[0] + 1.0
    state, residuals = best_state(chain, rapidities, (0.37, 0.63))
    assert state.norm > 0
    assert np.max(residuals) < 1e-8
    theta = 0.63
    lam = system.eigenvalue(solved, theta)
    assert np.max(eigencheck(state, chain, [theta], [lam])) < 1e-7


def test_nested_vector_size_is_checked():
    chain = SpinChain(so(5), 1, identity_model(so(5)))
    with pytest.raises(ParameterRangeError):
        phi_state(chain, [0.4 + 0.2j])
    with pytest.raises(ParameterRangeError):
        phi_state(chain, [0.4 + 0.2j], nested=np.ones(2))


def test_coincident_rapidities_are_rejected():
    chain = SpinChain(so(3), 2, O3)
    with pytest.raises(ParameterRangeError):
        phi_state(chain, [0.5j, 0.5j])


def test_long_recursions_are_flagged():
    chain = SpinChain(so(3), 1, O3)
    us = [0.3j + 0.2 * k for k in range(CONJECTURE_FROM)]
    assert phi_state(chain, us).conjectural


@pytest.mark.parametrize("n, L", [(3, 2), (4, 1)])
def test_exchange_on_the_pseudo_vacuum(n, L):
    chain = SpinChain(so(n), L, identity_model(so(n)))
    us = [0.31 + 0.42j, -0.27 + 0.85j]
    assert exchange_residual(chain, us, 0) < 1e-8
    with pytest.raises(ParameterRangeError):
        exchange_residual(chain, us, 1)


def test_nested_vector_candidates():
    chain = SpinChain(so(5), 1, identity_model(so(5)))
    result = nested_vectors(chain, [0.4 + 0.2j], 0.7)
    assert len(result) == 3
    assert result.vectors.shape == (3, 3)


@pytest.mark.parametrize("model, L", [(O3, 2), (BoundaryModel("Dn_d", so(6), 1), 1)],
                         ids=["so(3) L=2", "Dn_d so(6) L=1"])
def test_reflection_algebra_beyond_one_identity_site(model, L):
    chain = SpinChain(model.family, L, model, inhomogeneities=(0.2,) * L)
    assert rmrm_check(chain, 0.6 + 0.3j, -0.2 + 0.7j).passed(1e-9)
    assert trt_check(chain, 0.45 - 0.35j).passed(1e-9)


@pytest.mark.parametrize("n, L", [(3, 2), (4, 1)])
def test_exchange_of_three_rapidities(n, L):
    chain = SpinChain(so(n), L, identity_model(so(n)))
    us = [0.31 + 0.42j, -0.27 + 0.85j, 0.56 - 0.33j]
    assert exchange_residual(chain, us, 0) < 1e-8
    assert exchange_residual(chain, us, 1) < 1e-8


def test_three_magnon_bethe_vector_is_an_eigenvector():
    chain = SpinChain(so(3), 4, O3)
    system = build_bae(O3, 4, (3,))
    solved = solve_bae(system, [[0.51375j, 0.60016 + 1.28354j, 0.60016 - 1.28354j]])
    assert solved.residual_norm < 1e-9
    state = phi_state(chain, solved.roots[0] + 1.0)
    thetas = (0.63, 0.41 + 0.2j)
    assert np.max(eigencheck(state, chain, thetas)) < 1e-6
    formula = [system.eigenvalue(solved, t) for t in thetas]
    assert np.max(eigencheck(state, chain, thetas, formula)) < 1e-6
