# src/bethe_forge/chain.py
"""
Open chains: one-row monodromies, the double-row monodromy
M(theta) = T(theta) K^R(theta) T^(theta) and the transfer matrix
D(theta) = tr_0[K^L(theta_hat) M(theta)], plus brute-force spectra.

Site 0 is the auxiliary space. T carries the arguments theta - theta_k,
T^ carries theta + theta_k.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence
import logging

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import eigs

from .catalog import AlgebraFamily, BoundaryModel, FamilyKind, build_r
from .errors import DimensionGuardError, ParameterRangeError
from .tensor_core import (
    BASIS_MODES,
    BASIS_PAIRED,
    BASIS_REAL,
    DENSE_LIMIT,
    ChainOperator,
    TwoSiteOperator,
    a_kernel,
    basis_change,
    embed_single,
    embed_two_site,
    kron_all,
    partial_trace_aux,
    to_basis,
    two_site_to_basis,
)

logger = logging.getLogger(__name__)

PAIRING_TOL = 1e-6
ITERATIVE_K = 6

MatrixMap = Callable[[complex], np.ndarray]


@dataclass(frozen=True)
class SpinChain:
    """
    An open chain of L sites. `k_right` / `k_left` replace the catalog
    K-matrices (real basis); without a left override the left K is the
    transpose of the right one. L = 0 is the bare boundary.
    """
    family: AlgebraFamily
    L: int
    model: Optional[BoundaryModel] = None
    inhomogeneities: tuple = ()
    basis: str = BASIS_REAL
    k_right: Optional[MatrixMap] = field(default=None, compare=False)
    k_left: Optional[MatrixMap] = field(default=None, compare=False)
    dense_limit: int = DENSE_LIMIT

    def __post_init__(self):
        if self.L < 0:
            raise ParameterRangeError(f"chain length must be >= 0, got {self.L}")
        if self.basis not in BASIS_MODES:
            raise ParameterRangeError(f"unknown basis mode {self.basis!r}")
        if self.model is None and self.k_right is None:
            raise ParameterRangeError("a chain needs a boundary model or an explicit K-matrix")
        if self.model is not None and self.model.family != self.family:
            raise ParameterRangeError(
                f"boundary {self.model.label} does not live on {self.family.label}"
            )
        inhom = tuple(complex(t) for t in self.inhomogeneities) or (0j,) * self.L
        if len(inhom) != self.L:
            raise ParameterRangeError(
                f"{len(inhom)} inhomogeneities given for a chain of {self.L} sites"
            )
        object.__setattr__(self, "inhomogeneities", inhom)

    @property
    def n(self) -> int:
        return self.family.n

    @property
    def crossing_shift(self) -> int:
        return self.family.crossing_shift

    @property
    def dim(self) -> int:
        return self.n ** self.L

    @property
    def label(self) -> str:
        boundary = self.model.label if self.model is not None else "custom K"
        return f"{self.family.label} L={self.L} {boundary}"

    def hat(self, theta: complex) -> complex:
        return self.crossing_shift - theta

    def frame(self) -> np.ndarray:
        if self.model is not None:
            return self.model.nesting_frame()
        return np.arange(self.n)

    def site_basis(self) -> np.ndarray:
        """Rows are the paired basis vectors |1>_c, middle, |1bar>_c in real coordinates."""
        if self.family.kind is not FamilyKind.ORTHOGONAL:
            return np.eye(self.n, dtype=complex)
        paired = basis_change(self.n, BASIS_PAIRED)
        out = np.zeros_like(paired)
        out[:, self.frame()] = paired
        return out

    def _to_chain_basis(self, mat: np.ndarray) -> np.ndarray:
        if self.basis == BASIS_REAL:
            return mat
        return to_basis(mat, self.site_basis())

    def _real_k_right(self, u: complex) -> np.ndarray:
        if self.k_right is not None:
            return np.asarray(self.k_right(u), dtype=complex)
        return self.model.matrix(u)

    def k_right_matrix(self, u: complex) -> np.ndarray:
        return self._to_chain_basis(self._real_k_right(u))

    def k_left_matrix(self, u: complex) -> np.ndarray:
        if self.k_left is not None:
            mat = np.asarray(self.k_left(u), dtype=complex)
        else:
            mat = self._real_k_right(u).T
        return self._to_chain_basis(mat)

    def k_paired(self, u: complex) -> np.ndarray:
        """Right K in the paired basis of the nesting frame."""
        return to_basis(self._real_k_right(u), self.site_basis())

    def vacuum_weight(self, theta: complex) -> complex:
        """prod_k a(theta - t_k) a(theta + t_k)."""
        out = 1.0 + 0j
        for t in self.inhomogeneities:
            out *= a_kernel(theta - t) * a_kernel(theta + t)
        return out

    def r_operator(self, u: complex) -> TwoSiteOperator:
        op = build_r(self.family, u)
        if self.basis == BASIS_REAL:
            return op
        return two_site_to_basis(op, self.site_basis())

    def site_vacuum(self) -> np.ndarray:
        if self.basis == BASIS_PAIRED:
            vac = np.zeros(self.n, dtype=complex)
            vac[0] = 1.0
            return vac
        return self.site_basis()[0].copy()


def _aux_identity(chain: SpinChain) -> ChainOperator:
    op = ChainOperator.from_dense(np.eye(chain.n ** (chain.L + 1)), chain.n, chain.L + 1,
                                  has_aux=True, label="I", dense_limit=chain.dense_limit)
    return op


def _product(chain: SpinChain, factors: Sequence[ChainOperator], label: str) -> ChainOperator:
    if not factors:
        return _aux_identity(chain)
    op = factors[0]
    for f in factors[1:]:
        op = op @ f
    op.has_aux = True
    op.label = label
    op.dense_limit = chain.dense_limit
    return op


def monodromy(chain: SpinChain, theta: complex, direction: str = "T") -> ChainOperator:
    """
    T(theta)  = R_01(theta - t_1) ... R_0L(theta - t_L)
    T^(theta) = R_L0(theta + t_L) ... R_10(theta + t_1)
    """
    total = chain.L + 1
    if direction == "T":
        factors = [embed_two_site(chain.r_operator(theta - t), (0, k), total)
                   for k, t in enumerate(chain.inhomogeneities, start=1)]
    elif direction in ("T_hat", "That"):
        factors = [embed_two_site(chain.r_operator(theta + t), (k, 0), total)
                   for k, t in reversed(list(enumerate(chain.inhomogeneities, start=1)))]
    else:
        raise ParameterRangeError(f"direction must be 'T' or 'T_hat', got {direction!r}")
    return _product(chain, factors, direction)


def double_row_monodromy(chain: SpinChain, theta: complex) -> ChainOperator:
    k_aux = embed_single(chain.k_right_matrix(theta), 0, chain.n, chain.L + 1)
    op = monodromy(chain, theta, "T") @ k_aux @ monodromy(chain, theta, "T_hat")
    op.has_aux = True
    op.label = "M"
    op.dense_limit = chain.dense_limit
    return op


def double_row_transfer(chain: SpinChain, theta: complex) -> ChainOperator:
    """D(theta) = tr_0[K^L_0(theta_hat) M_0(theta)]."""
    k_left = embed_single(chain.k_left_matrix(chain.hat(theta)), 0, chain.n, chain.L + 1)
    full = k_left @ double_row_monodromy(chain, theta)
    full.has_aux = True
    d = partial_trace_aux(full)
    d.label = f"D({theta:.4g})"
    d.dense_limit = chain.dense_limit
    logger.debug("built %s on %s (dim %d)", d.label, chain.label, d.dim)
    return d


def vacuum_state(chain: SpinChain) -> np.ndarray:
    """|1>_c^{x L}."""
    return kron_all([chain.site_vacuum().reshape(-1, 1)] * chain.L).reshape(-1)


def commutator_norm(a: ChainOperator, b: ChainOperator) -> float:
    """||[A, B]|| / (||A|| ||B||)."""
    da, db = a.to_dense(), b.to_dense()
    scale = np.linalg.norm(da) * np.linalg.norm(db)
    return float(np.linalg.norm(da @ db - db @ da) / max(scale, 1e-300))


# --- spectra ----------------------------------------------------------------

@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    method: str
    vectors: Optional[np.ndarray] = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.eigenvalues)


def _sorted(values: np.ndarray, vectors: Optional[np.ndarray]):
    order = np.lexsort((values.imag, values.real))
    return values[order], (vectors[:, order] if vectors is not None else None)


def dense_spectrum(op: ChainOperator, vectors: bool = False) -> Spectrum:
    """Every eigenvalue of a dense non-symmetric complex operator."""
    if op.dim > op.dense_limit:
        raise DimensionGuardError(
            f"{op.label or 'operator'} has dimension {op.dim} above the dense limit {op.dense_limit}",
            dim=op.dim, limit=op.dense_limit,
        )
    matrix = op.to_dense()
    if vectors:
        values, vecs = scipy.linalg.eig(matrix)
    else:
        values, vecs = scipy.linalg.eigvals(matrix), None
    values, vecs = _sorted(np.asarray(values, dtype=complex), vecs)
    return Spectrum(values, "dense", vecs)


def iterative_spectrum(op: ChainOperator, k: int = ITERATIVE_K, which: str = "LM") -> Spectrum:
    """A few eigenvalues through the matrix-free path."""
    k = min(k, op.dim - 2)
    if k < 1:
        raise ParameterRangeError(f"operator of dimension {op.dim} is too small for an iterative solve")
    values = eigs(op.as_linear_operator(), k=k, which=which, return_eigenvectors=False)
    values, _ = _sorted(np.asarray(values, dtype=complex), None)
    return Spectrum(values, "matrix-free")


def spectrum(op: ChainOperator, k: int = ITERATIVE_K) -> Spectrum:
    if op.dim <= op.dense_limit:
        return dense_spectrum(op)
    logger.info("dimension %d above the dense limit; using %d iterative eigenvalues", op.dim, k)
    return iterative_spectrum(op, k)


class Match(NamedTuple):
    index: int
    spectrum_index: int
    relative_distance: float
    matched: bool


def nearest_pairing(values: Sequence[complex], reference: Sequence[complex],
                    tol: float = PAIRING_TOL) -> list[Match]:
    """
    Greedy one-to-one pairing of `values` with `reference` eigenvalues, the
    closest pairs claimed first. Distances are |x - y| / max(1, |x|).
    """
    values = np.asarray(values, dtype=complex).reshape(-1)
    reference = np.asarray(reference, dtype=complex).reshape(-1)
    candidates = []
    for i, x in enumerate(values):
        dist = np.abs(reference - x) / max(1.0, abs(x))
        for j in np.argsort(dist):
            candidates.append((float(dist[j]), i, int(j)))
    candidates.sort()
    taken_values, taken_ref, out = set(), set(), {}
    for dist, i, j in candidates:
        if i in taken_values or j in taken_ref:
            continue
        taken_values.add(i)
        taken_ref.add(j)
        out[i] = Match(i, j, dist, dist < tol)
    return [out.get(i, Match(i, -1, float("inf"), False)) for i in range(len(values))]


def nested_chain(chain: SpinChain, rapidities: Sequence[complex]) -> SpinChain:
    """
    The level-1 chain whose sites are the rapidities u_i: so(n-2) with
    inhomogeneities u_i - 1, in level-local arguments x = theta - 1.
    """
    from .nesting import LEFT, RIGHT, NestingLadder

    if chain.model is None:
        raise ParameterRangeError("nesting needs a catalog boundary model")
    ladder = NestingLadder(chain.model)
    if ladder.top < 1 or ladder.dims[1] < 3:
        raise ParameterRangeError(f"{chain.family.label} has no generic level-1 chain")
    return SpinChain(
        AlgebraFamily(FamilyKind.ORTHOGONAL, ladder.dims[1]),
        len(rapidities),
        inhomogeneities=tuple(complex(u) - 1.0 for u in rapidities),
        k_right=lambda u: ladder.k_matrix(RIGHT, 1, u),
        k_left=lambda u: ladder.k_matrix(LEFT, 1, u),
        dense_limit=chain.dense_limit,
    )
