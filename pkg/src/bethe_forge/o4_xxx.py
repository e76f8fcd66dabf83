# src/bethe_forge/o4_xxx.py
"""
O(4) endgame in the su(2) x su(2) basis.

A site of the O(4) chain is a pair of spin-1/2 factors (a, b). The vector
e_mu is mapped to vec(S_mu) with S = (I, -i sz, i sx, i sy)/sqrt(2), the
row index of S labelling a and the column index labelling b. Chains of n
O(4) sites become chains of 2n spins ordered (a1, b1, a2, b2, ...).
"""
from __future__ import annotations
from dataclasses import dataclass
from typing import Sequence
import logging

import numpy as np

from .catalog import so
from .chain import SpinChain, double_row_transfer
from .errors import ParameterRangeError
from .integrability import EquationId, ResidualReport, single_report
from .solver import SolverResult, screen_roots, solve_product_system
from .tensor_core import (
    ChainOperator,
    TwoSiteOperator,
    a_kernel,
    embed_two_site,
    guard_pole,
    identity_op,
    kron_all,
    partial_trace_aux,
    permutation_op,
    trace_op,
)

logger = logging.getLogger(__name__)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def xxx_r(theta: complex) -> TwoSiteOperator:
    """r(theta) = I - (2/theta) P on C^2 x C^2."""
    d = -2.0 / guard_pole("r_xxx", theta)
    return TwoSiteOperator(2, identity_op(2).entries + d * permutation_op(2).entries, "r")


def su2_pair_basis() -> np.ndarray:
    """Columns are vec(S_mu); unitary."""
    s = [np.eye(2), -1j * SIGMA_Z, 1j * SIGMA_X, 1j * SIGMA_Y]
    return np.stack([m.reshape(4) for m in s], axis=1) / np.sqrt(2.0)


def to_pair_basis(mat: np.ndarray) -> np.ndarray:
    """O(4) operator (on any number of sites) written on the spin pairs."""
    u = su2_pair_basis()
    sites = int(round(np.log(mat.shape[0]) / np.log(4)))
    big = kron_all([u] * sites)
    return big @ mat @ big.conj().T


def factorized_boundary(theta: complex) -> np.ndarray:
    """K(theta) = r(2 theta) P on the spin pair."""
    return xxx_r(2 * theta).entries @ permutation_op(2).entries


def su_d2_boundary(theta: complex, k0: complex = 1.0) -> np.ndarray:
    """Real-basis diag(k0 (1-theta)/theta x3, k0 (1+theta)/theta); equals -k0 r(2 theta) P."""
    t = guard_pole("su_d2", theta)
    return np.diag([k0 * (1 - t) / t] * 3 + [k0 * (1 + t) / t]).astype(complex)


def crossing_matrix() -> np.ndarray:
    """sigma_y on the auxiliary spin, identity on the other."""
    return np.kron(SIGMA_Y, np.eye(2))


def check_crossing(u: complex) -> ResidualReport:
    """r(u) = (u-2)/u C r^{t_1}(2-u) C with C = sigma_y x I."""
    c = crossing_matrix()
    r_t1 = identity_op(2).entries - 2.0 / guard_pole("r_xxx", 2.0 - u, u) * trace_op(2).entries
    rhs = (u - 2.0) / guard_pole("r_xxx", u) * c @ r_t1 @ c
    return single_report(EquationId.XXX_CROSSING, "su(2)", xxx_r(u).entries, rhs, (u,))


@dataclass(frozen=True)
class XXXChain:
    """Spin-1/2 chain built from the rapidities of the last O(4) nesting level."""
    inhomogeneities: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "inhomogeneities", tuple(complex(t) for t in self.inhomogeneities))

    @property
    def sites(self) -> int:
        return len(self.inhomogeneities)

    @property
    def spins(self) -> int:
        return 2 * self.sites


def _row(chain: XXXChain, factors: Sequence[tuple[int, complex]]) -> ChainOperator:
    total = 1 + chain.spins
    op = None
    for site, arg in factors:
        term = embed_two_site(xxx_r(arg), (0, site), total)
        op = term if op is None else op @ term
    op.has_aux = True
    op.label = "T_xxx"
    return op


def xxx_monodromy(chain: XXXChain, theta: complex, hat: bool = False) -> ChainOperator:
    """
    T(theta)  = prod_k r_{0 a_k}(theta - theta_k) r_{0 b_k}(theta + theta_k), k = 1..n
    T^(theta) = prod_k r_{0 b_k}(theta - theta_k) r_{0 a_k}(theta + theta_k), k = n..1
    """
    if chain.sites == 0:
        raise ParameterRangeError("an XXX monodromy needs at least one site")
    factors = []
    order = range(chain.sites - 1, -1, -1) if hat else range(chain.sites)
    for k in order:
        a_site, b_site = 1 + 2 * k, 2 + 2 * k
        tk = chain.inhomogeneities[k]
        if hat:
            factors += [(b_site, theta - tk), (a_site, theta + tk)]
        else:
            factors += [(a_site, theta - tk), (b_site, theta + tk)]
    return _row(chain, factors)


def xxx_tau(chain: XXXChain, theta: complex, hat: bool = False) -> ChainOperator:
    if chain.sites == 0:
        return ChainOperator.from_dense(np.array([[2.0]]), 2, 0, label="tau")
    return partial_trace_aux(xxx_monodromy(chain, theta, hat))


def crossing_prefactor(chain: XXXChain, theta: complex) -> complex:
    out = 1.0 + 0j
    for tk in chain.inhomogeneities:
        out *= (theta - tk) * (theta + tk) / guard_pole(
            "crossing", (theta - tk - 2) * (theta + tk - 2), theta)
    return out


def check_tau_crossing(chain: XXXChain, theta: complex) -> ResidualReport:
    """prod (theta-t)(theta+t)/((theta-t-2)(theta+t-2)) tau^(theta) = tau(2 - theta)."""
    lhs = crossing_prefactor(chain, theta) * xxx_tau(chain, theta, hat=True).to_dense()
    rhs = xxx_tau(chain, 2.0 - theta).to_dense()
    return single_report(EquationId.OPERATOR, "tau crossing", lhs, rhs, (theta,))


def tau_product(chain: XXXChain, theta: complex) -> np.ndarray:
    """tau(theta) tau(2 - theta), the O(4) transfer matrix with K0 = 1."""
    return xxx_tau(chain, theta).to_dense() @ xxx_tau(chain, 2.0 - theta).to_dense()


def tau_eigenvalue(chain: XXXChain, roots: Sequence[complex], theta: complex) -> complex:
    """
    lambda(theta) = prod_i a(theta-t_i) a(theta+t_i) prod_j a(u_j-theta)
                    + prod_j a(theta-u_j)
    """
    first = 1.0 + 0j
    for tk in chain.inhomogeneities:
        first *= a_kernel(theta - tk) * a_kernel(theta + tk)
    second = 1.0 + 0j
    for u in roots:
        first *= a_kernel(u - theta)
        second *= a_kernel(theta - u)
    return first + second


def o4_eigenvalue(chain: XXXChain, roots: Sequence[complex], theta: complex) -> complex:
    """Lambda(theta) = lambda(theta) lambda(2 - theta)."""
    return tau_eigenvalue(chain, roots, theta) * tau_eigenvalue(chain, roots, 2.0 - theta)


def _xxx_factors(chain: XXXChain, roots: np.ndarray, j: int) -> list:
    u = roots[j]
    factors = []
    for tk in chain.inhomogeneities:
        factors += [a_kernel(u - tk), a_kernel(u + tk)]
    for i, w in enumerate(roots):
        if i != j:
            factors.append((u - w + 2) / guard_pole("s_xxx", u - w - 2, u - w))
    return factors


def xxx_bae_products(chain: XXXChain, roots: Sequence[complex]) -> np.ndarray:
    """prod a(u_j - t)a(u_j + t) prod_{i != j} (u_ji + 2)/(u_ji - 2); one per root, 1 at a solution."""
    roots = np.asarray(roots, dtype=complex)
    return np.array([np.prod(_xxx_factors(chain, roots, j)) for j in range(roots.size)], dtype=complex)


def xxx_bae_residual(chain: XXXChain, roots: Sequence[complex]) -> np.ndarray:
    return xxx_bae_products(chain, roots) - 1.0


def solve_xxx_bae(chain: XXXChain, seed: Sequence[complex], tol: float = 1e-10) -> SolverResult:
    def log_sums(v):
        return np.array([np.sum(np.log(_xxx_factors(chain, v, j))) for j in range(v.size)])

    result = solve_product_system(log_sums, lambda v: xxx_bae_products(chain, v),
                                  np.asarray(seed, dtype=complex), tol=tol)
    screen_roots([result.roots], [False], result.trace, result.residual_norm)
    return result


def o4_chain(inhomogeneities: Sequence[complex], k0: complex = 1.0) -> SpinChain:
    """so(4) chain in the real basis closed by su_d2_boundary on both ends."""
    return SpinChain(so(4), len(inhomogeneities), inhomogeneities=tuple(inhomogeneities),
                     k_right=lambda u: su_d2_boundary(u, k0))


def operator_identity_report(inhomogeneities: Sequence[complex], theta: complex,
                             k0: complex = 1.0) -> ResidualReport:
    """
    D(theta) of the O(4) chain, written on the spin pairs, against
    k0^2 tau(theta) tau(2 - theta) of the XXX chain with the same sites.
    """
    if not inhomogeneities:
        raise ParameterRangeError("the operator identity needs at least one site")
    lhs = to_pair_basis(double_row_transfer(o4_chain(inhomogeneities, k0), theta).to_dense())
    rhs = k0 ** 2 * tau_product(XXXChain(tuple(inhomogeneities)), theta)
    logger.debug("O(4) operator identity at theta=%s on %d sites", theta, len(inhomogeneities))
    return single_report(EquationId.OPERATOR, "O(4) = tau tau", lhs, rhs, (theta,))
