# src/bethe_forge/states.py
"""
Bethe vectors of orthogonal open chains.

The double-row monodromy is split into blocks in the paired auxiliary basis

    M = ( A    B_vec   B      )
        ( C*   A_mid   B*_vec )
        ( C    C_vec   A*     )

and the states are assembled by the Phi recursion. Phi^(n) is a covector
over n nested spaces of dimension n - 2 whose entries are operators; it is
evaluated on a batch of quantum-space vectors and returned as an array
shaped (d,)*n + (Q, K). Nested c-number matrices multiply from the right.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Optional, Sequence
import logging

import numpy as np
import scipy.linalg

from .catalog import FamilyKind
from .chain import (
    SpinChain,
    dense_spectrum,
    double_row_monodromy,
    double_row_transfer,
    monodromy,
    nested_chain,
    vacuum_state,
)
from .errors import ParameterRangeError
from .integrability import EquationId, ResidualReport, compare, single_report
from .nesting import c_over_a
from .tensor_core import ScalarKernels, a_kernel, apply_local, d_kernel, d_over_a, guard_pole

logger = logging.getLogger(__name__)

MIN_SEPARATION = 1e-8
EIGEN_TOL = 1e-7
CONJECTURE_FROM = 4


@dataclass(frozen=True)
class MonodromyBlocks:
    """Blocks of M(theta) with the auxiliary index in the paired basis."""
    theta: complex
    full: np.ndarray = field(repr=False)
    crossing_shift: int = 0

    @property
    def n(self) -> int:
        return self.full.shape[0]

    @property
    def Q(self) -> int:
        return self.full.shape[1]

    @property
    def d(self) -> int:
        return self.n - 2

    def block(self, a: int, b: int) -> np.ndarray:
        return self.full[a, :, b, :]

    @property
    def A(self) -> np.ndarray:
        return self.full[0, :, 0, :]

    @property
    def B(self) -> np.ndarray:
        return self.full[0, :, -1, :]

    @property
    def C(self) -> np.ndarray:
        return self.full[-1, :, 0, :]

    @property
    def A_star(self) -> np.ndarray:
        return self.full[-1, :, -1, :]

    @property
    def B_vec(self) -> np.ndarray:
        """(d, Q, Q): B_vec[i] = M[1, 1+i]."""
        return np.moveaxis(self.full[0, :, 1:-1, :], 1, 0)

    @property
    def B_star_vec(self) -> np.ndarray:
        return self.full[1:-1, :, -1, :]

    @property
    def C_vec(self) -> np.ndarray:
        return np.moveaxis(self.full[-1, :, 1:-1, :], 1, 0)

    @property
    def C_star_vec(self) -> np.ndarray:
        return self.full[1:-1, :, 0, :]

    @property
    def A_mid(self) -> np.ndarray:
        """(d, d, Q, Q)."""
        return np.transpose(self.full[1:-1, :, 1:-1, :], (0, 2, 1, 3))

    @property
    def theta_hat(self) -> complex:
        return self.crossing_shift - self.theta

    def A_bar(self) -> np.ndarray:
        """A_mid - (d/a)(2 theta) A delta."""
        shift = d_over_a(2.0 * self.theta)
        return self.A_mid - shift * np.einsum("ab,qr->abqr", np.eye(self.d), self.A)

    def A_bar_star(self) -> np.ndarray:
        bar = self.A_bar()
        trace = np.einsum("aaqr->qr", bar)
        return (self.A_star + d_over_a(2.0 * self.theta_hat) * trace
                - c_over_a(self.n, 2.0 * self.theta) * self.A)

    def assemble(self) -> np.ndarray:
        n, q = self.n, self.Q
        return self.full.reshape(n * q, n * q)


def split_monodromy(chain: SpinChain, theta: complex) -> MonodromyBlocks:
    """Dense M(theta) rotated to the paired auxiliary basis and split into blocks."""
    if chain.family.kind is not FamilyKind.ORTHOGONAL:
        raise ParameterRangeError(f"block split is defined for orthogonal chains, not {chain.family.label}")
    n, q = chain.n, chain.dim
    m = double_row_monodromy(chain, theta).to_dense()
    w = chain.site_basis()
    if chain.basis == "real":
        eye = np.eye(q)
        m = np.kron(w.conj(), eye) @ m @ np.kron(w.T, eye)
    return MonodromyBlocks(complex(theta), m.reshape(n, q, n, q), chain.crossing_shift)


def pseudo_vacuum_report(chain: SpinChain, theta: complex) -> ResidualReport:
    """Action of A, A_bar and A_bar* on |1>_c^L against the scalar predictions."""
    blocks = split_monodromy(chain, theta)
    vac = vacuum_state(chain)
    k = chain.k_paired(theta)
    y, y_mid, y_star = k[0, 0], k[1:-1, 1:-1], k[-1, -1]
    theta_hat = chain.hat(theta)
    weight = chain.vacuum_weight(theta)
    weight_hat = chain.vacuum_weight(theta_hat)
    d = chain.n - 2

    report = ResidualReport(EquationId.OPERATOR, f"pseudo-vacuum {chain.label}")
    report.extend(single_report(EquationId.OPERATOR, "A", blocks.A @ vac, y * weight * vac, (theta,)))
    bar = np.einsum("abqr,r->abq", blocks.A_bar(), vac)
    expected = np.einsum("ab,q->abq", y_mid - d_over_a(2.0 * theta) * y * np.eye(d), vac)
    report.extend(single_report(EquationId.OPERATOR, "A_bar", bar, expected, (theta,)))
    star_scalar = (y_star + d_over_a(2.0 * theta_hat) * np.trace(y_mid)
                   + c_over_a(chain.n, 2.0 * theta_hat) * y)
    report.extend(single_report(EquationId.OPERATOR, "A_bar*", blocks.A_bar_star() @ vac,
                                star_scalar * weight_hat * vac, (theta,)))
    return report


# --- operator identities -----------------------------------------------------

def _aux_embed(x: np.ndarray, n: int, q: int, slot: int) -> np.ndarray:
    """X on (aux, Q) lifted to (aux1, aux2, Q); slot 1 or 2."""
    t = x.reshape(n, q, n, q)
    eye = np.eye(n)
    if slot == 1:
        full = np.einsum("aqbp,cd->acqbdp", t, eye)
    else:
        full = np.einsum("cqdp,ab->acqbdp", t, eye)
    return full.reshape(n * n * q, n * n * q)


def rmrm_check(chain: SpinChain, u: complex, v: complex) -> ResidualReport:
    """R12(u-v) M1(u) R21(u+v) M2(v) = M2(v) R12(u+v) M1(u) R21(u-v)."""
    n, q = chain.n, chain.dim
    m_u = double_row_monodromy(chain, u).to_dense()
    m_v = double_row_monodromy(chain, v).to_dense()
    m1 = _aux_embed(m_u, n, q, 1)
    m2 = _aux_embed(m_v, n, q, 2)
    eye = np.eye(q)

    def r12(x):
        return np.kron(chain.r_operator(x).entries, eye)

    def r21(x):
        return np.kron(chain.r_operator(x).swapped().entries, eye)

    lhs = r12(u - v) @ m1 @ r21(u + v) @ m2
    rhs = m2 @ r12(u + v) @ m1 @ r21(u - v)
    return single_report(EquationId.RMRM, chain.label, lhs, rhs, (u, v))


def trt_check(chain: SpinChain, u: complex) -> ResidualReport:
    """T1(u) R12(2u) T^2(u) = T^2(u) R12(2u) T1(u)."""
    n, q = chain.n, chain.dim
    t1 = _aux_embed(monodromy(chain, u, "T").to_dense(), n, q, 1)
    t2 = _aux_embed(monodromy(chain, u, "T_hat").to_dense(), n, q, 2)
    r = np.kron(chain.r_operator(2.0 * u).entries, np.eye(q))
    return single_report(EquationId.TRT, chain.label, t1 @ r @ t2, t2 @ r @ t1, (u,))


# --- nested R-matrix ---------------------------------------------------------

def nested_r(d: int, u: complex) -> np.ndarray:
    """R^(1)(u) = I + d(u) P + e(u) K on the nested d-dimensional spaces, as [o1, o2, i1, i2]."""
    eye = np.eye(d)
    ident = np.einsum("ac,bd->abcd", eye, eye)
    perm = np.einsum("ad,bc->abcd", eye, eye)
    trace = np.einsum("ab,cd->abcd", eye, eye)
    return ident + d_kernel(u) * perm + ScalarKernels(d).e(u) * trace


def _right_multiply(x: np.ndarray, r4: np.ndarray, i: int, j: int) -> np.ndarray:
    """Covector axes i, j of x times the nested matrix r4 from the right."""
    return apply_local(x, np.transpose(r4, (2, 3, 0, 1)), i, j)


# --- Phi recursion -------------------------------------------------------------

@dataclass(frozen=True)
class BetheVector:
    rapidities: tuple
    nested: np.ndarray = field(repr=False)
    vector: np.ndarray = field(repr=False)
    trace: tuple = ()
    conjectural: bool = False

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


class PhiBuilder:
    """Phi^(n) for one chain; monodromy blocks are cached per rapidity."""

    def __init__(self, chain: SpinChain):
        if chain.family.kind is not FamilyKind.ORTHOGONAL:
            raise ParameterRangeError(f"Bethe vectors are built for orthogonal chains, not {chain.family.label}")
        self.chain = chain
        self.n = chain.n
        self.d = chain.n - 2
        self.kernels = ScalarKernels(chain.n)
        self._blocks: dict = {}
        self.trace: list = []

    def blocks(self, u: complex) -> MonodromyBlocks:
        key = complex(u)
        if key not in self._blocks:
            self._blocks[key] = split_monodromy(self.chain, key)
        return self._blocks[key]

    def _e_over_b(self, u: complex) -> complex:
        return self.kernels.e(u) / guard_pole("b", self.kernels.b(u), u)

    def phi(self, us: Sequence[complex], v: np.ndarray) -> np.ndarray:
        """Phi^(n)(us) applied to the columns of v; shape (d,)*n + (Q, K)."""
        us = [complex(u) for u in us]
        if not us:
            return v
        blk1 = self.blocks(us[0])
        if len(us) == 1:
            return np.einsum("iqr,rk->iqk", blk1.B_vec, v)

        count = len(us)
        d = self.d
        inner = self.phi(us[1:], v)
        out = np.einsum("iqr,...rk->i...qk", blk1.B_vec, inner)
        self.trace.append(f"B_vec(u1) Phi^({count - 1})")

        for j in range(1, count):
            uj = us[j]
            others = [k for k in range(1, count) if k != j]
            rest = [us[k] for k in others]
            u1j = us[0] - uj

            # B(u1) Phi^(n-2) A(u_j) ...
            coef = -self._e_over_b(u1j) / guard_pole("a(2u)", a_kernel(2.0 * uj), uj)
            for k in others:
                coef *= a_kernel(us[k] - uj) / guard_pole("a", a_kernel(us[k] + uj), uj)
            lower = self.phi(rest, self.blocks(uj).A @ v)
            u_tensor = np.einsum("...qk,rc->...rcqk", lower, np.eye(d))
            c_axis = len(others) + 1
            for pos, k in enumerate(others):
                if k >= j:
                    break
                ukj = us[k] - uj
                u_tensor = _right_multiply(u_tensor, nested_r(d, ukj), pos, c_axis) / a_kernel(ukj)
            out = out + coef * self._close(blk1, u_tensor, others, j, count)
            self.trace.append(f"A-term j={j + 1}")

            # B(u1) Phi^(n-2) R(v-2) A_bar(u_j) R(u)/a ...
            coef = self.kernels.e(us[0] + uj)
            for k in others:
                coef *= a_kernel(uj - us[k])
            a_bar = self.blocks(uj).A_bar()
            q, width = v.shape
            w = np.einsum("abqr,rk->qabk", a_bar, v).reshape(q, d * d * width)
            lower = self.phi(rest, w)
            lower = lower.reshape(lower.shape[:-2] + (q, d, d, width))
            # axes: others..., r, c, c', c'', q, k
            u_tensor = np.einsum("...qxyk,rc->...rcxyqk", lower, np.eye(d))
            for pos, k in enumerate(others):
                u_tensor = _right_multiply(u_tensor, nested_r(d, us[k] + uj - 2.0), pos, c_axis)
            # contract the column index with the row index of A_bar
            u_tensor = np.einsum("...rccyqk->...ryqk", u_tensor)
            for pos in reversed(range(len(others))):
                k = others[pos]
                if k <= j:
                    continue
                ujk = uj - us[k]
                u_tensor = _right_multiply(u_tensor, nested_r(d, ujk), c_axis, pos) / a_kernel(ujk)
            out = out + coef * self._close(blk1, u_tensor, others, j, count)
            self.trace.append(f"A_bar-term j={j + 1}")
        return out

    def _close(self, blk1: MonodromyBlocks, u_tensor: np.ndarray, others: list, j: int,
               count: int) -> np.ndarray:
        """k_(1j) B(u1) applied to a tensor with axes (others..., r, c, q, k), reordered to 1..n."""
        applied = np.einsum("qr,...rk->...qk", blk1.B, u_tensor)
        r_axis, c_axis = len(others), len(others) + 1
        perm = []
        for pos in range(count):
            if pos == 0:
                perm.append(r_axis)
            elif pos == j:
                perm.append(c_axis)
            else:
                perm.append(others.index(pos))
        perm += [c_axis + 1, c_axis + 2]
        return np.transpose(applied, perm)


def _check_rapidities(rapidities: Sequence[complex]) -> tuple:
    us = tuple(complex(u) for u in rapidities)
    for i in range(len(us)):
        for j in range(i + 1, len(us)):
            if abs(us[i] - us[j]) < MIN_SEPARATION:
                raise ParameterRangeError(f"rapidities {us[i]} and {us[j]} coincide")
    return us


def phi_tensor(chain: SpinChain, rapidities: Sequence[complex]) -> np.ndarray:
    """Phi^(n)(us)|vac>, shape (d,)*n + (Q,)."""
    us = _check_rapidities(rapidities)
    builder = PhiBuilder(chain)
    vac = vacuum_state(chain).reshape(-1, 1)
    return builder.phi(us, vac)[..., 0]


def phi_state(chain: SpinChain, rapidities: Sequence[complex],
              nested: Optional[np.ndarray] = None) -> BetheVector:
    """
    Psi = Phi^(n)(us) F |vac>. Without F the nested space must be
    one-dimensional (odd chains ending at O(1)).
    """
    us = _check_rapidities(rapidities)
    d = chain.n - 2
    size = d ** len(us)
    if nested is None:
        if size != 1:
            raise ParameterRangeError(f"a nested vector of dimension {size} is required")
        nested = np.ones(1, dtype=complex)
    nested = np.asarray(nested, dtype=complex).reshape(-1)
    if nested.size != size:
        raise ParameterRangeError(f"nested vector has {nested.size} entries, expected {size}")
    builder = PhiBuilder(chain)
    vac = vacuum_state(chain).reshape(-1, 1)
    tensor = builder.phi(us, vac)[..., 0]
    vector = nested @ tensor.reshape(size, -1)
    conjectural = len(us) >= CONJECTURE_FROM
    if conjectural:
        logger.info("Phi^(%d) uses the n-particle recursion beyond the proven range", len(us))
    return BetheVector(us, nested, vector, tuple(builder.trace), conjectural)


def exchange_residual(chain: SpinChain, rapidities: Sequence[complex], position: int) -> float:
    """
    Relative residual of
        Phi(.., u_(j+1), u_j, ..) with legs j, j+1 swapped
            = Phi(.., u_j, u_(j+1), ..) R_(j,j+1)(u_(j+1) - u_j) / a(u_(j+1) - u_j)
    on the pseudo-vacuum; `position` is the zero-based j.
    """
    us = list(_check_rapidities(rapidities))
    if not 0 <= position < len(us) - 1:
        raise ParameterRangeError(f"no adjacent pair at position {position} for {len(us)} rapidities")
    d = chain.n - 2
    swapped = list(us)
    swapped[position], swapped[position + 1] = us[position + 1], us[position]
    lhs = np.swapaxes(phi_tensor(chain, swapped), position, position + 1)
    z = us[position + 1] - us[position]
    rhs = _right_multiply(phi_tensor(chain, us), nested_r(d, z), position, position + 1) / a_kernel(z)
    sample = compare(lhs, rhs, tuple(us))
    return sample.relative


def nested_vectors(chain: SpinChain, rapidities: Sequence[complex], theta: complex):
    """Eigenvectors of the level-1 transfer matrix at theta; candidates for F."""
    inner = nested_chain(chain, rapidities)
    return dense_spectrum(double_row_transfer(inner, theta), vectors=True)


def eigencheck(state: BetheVector, chain: SpinChain, thetas: Sequence[complex],
               eigenvalues: Optional[Sequence[complex]] = None) -> np.ndarray:
    """
    ||D psi - lambda psi|| / (||psi|| max(1, |lambda|)) per theta. lambda is
    the Rayleigh quotient unless eigenvalues are given.
    """
    psi = np.asarray(state.vector, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm < 1e-300 or not np.isfinite(norm):
        raise ParameterRangeError("the Bethe vector has zero norm")
    psi = psi / norm
    out = []
    for i, theta in enumerate(thetas):
        d_psi = double_row_transfer(chain, theta).apply(psi)
        lam = complex(np.vdot(psi, d_psi)) if eigenvalues is None else complex(eigenvalues[i])
        out.append(float(np.linalg.norm(d_psi - lam * psi) / max(1.0, abs(lam))))
    residuals = np.asarray(out)
    logger.debug("eigen residuals of a %d-magnon state: %s", len(state.rapidities), residuals)
    return residuals


def ritz_states(chain: SpinChain, rapidities: Sequence[complex], theta: complex) -> list:
    """
    Bethe vectors for every nested vector at once: D(theta) reduced to the span
    of the rows of Phi^(n)|vac>. Returns (BetheVector, ritz value) pairs.
    """
    us = _check_rapidities(rapidities)
    tensor = phi_tensor(chain, us)
    size = (chain.n - 2) ** len(us)
    rows = tensor.reshape(size, -1)
    basis = scipy.linalg.orth(rows.T)
    if basis.shape[1] == 0:
        raise ParameterRangeError("Phi^(n)|vac> vanishes for these rapidities")
    d_basis = np.column_stack([double_row_transfer(chain, theta).apply(basis[:, i])
                               for i in range(basis.shape[1])])
    values, coeffs = scipy.linalg.eig(basis.conj().T @ d_basis)
    out = []
    conjectural = len(us) >= CONJECTURE_FROM
    for i, value in enumerate(values):
        psi = basis @ coeffs[:, i]
        nested, *_ = np.linalg.lstsq(rows.T, psi, rcond=None)
        out.append((BetheVector(us, nested, psi, (), conjectural), complex(value)))
    return out


def best_state(chain: SpinChain, rapidities: Sequence[complex],
               thetas: Sequence[complex]) -> tuple[BetheVector, np.ndarray]:
    """The Ritz Bethe vector with the smallest worst-case eigen residual over thetas."""
    if (chain.n - 2) ** len(rapidities) == 1:
        state = phi_state(chain, rapidities)
        return state, eigencheck(state, chain, thetas)
    best = None
    for state, _ in ritz_states(chain, rapidities, thetas[0]):
        residuals = eigencheck(state, chain, thetas)
        if best is None or residuals.max() < best[1].max():
            best = (state, residuals)
    return best
