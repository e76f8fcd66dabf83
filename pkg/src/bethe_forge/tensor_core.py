# src/bethe_forge/tensor_core.py
"""
Linear algebra on tensor-product spaces.

Flattening is row-major over (aux, site1, ..., siteL); site 0 is the
auxiliary space whenever an operator carries one. Matrix-free operators act
on blocks of column vectors shaped (dim, k).
"""
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence
import logging

import numpy as np
from scipy.sparse.linalg import LinearOperator

from .errors import DimensionGuardError, ParameterRangeError, PoleError

logger = logging.getLogger(__name__)

DENSE_LIMIT = 4096
DENSE_CHUNK = 256
POLE_EPS = 1e-12

BASIS_REAL = "real"
BASIS_PAIRED = "paired"
BASIS_MODES = (BASIS_REAL, BASIS_PAIRED)


def guard_pole(label: str, denominator: complex, at: complex | None = None) -> complex:
    """Return the denominator, raising PoleError when it vanishes."""
    if abs(denominator) < POLE_EPS:
        raise PoleError(label, denominator if at is None else at)
    return denominator


def d_kernel(u: complex) -> complex:
    return -2.0 / guard_pole("d", u)


def d_over_a(w: complex) -> complex:
    """d(w)/a(w) = -2/(w-2)."""
    return -2.0 / guard_pole("d/a", w - 2.0, w)


def a_kernel(u: complex) -> complex:
    return 1.0 + d_kernel(u)


@dataclass(frozen=True)
class ScalarKernels:
    """
    Scalar functions of the orthogonal R-matrix I + d(u)P + e(u)K at site
    dimension n. The crossing shift is n - 2, which reads 2N-2 for so(2N) and
    2N-1 for so(2N+1).
    """
    n: int

    @property
    def shift(self) -> int:
        return self.n - 2

    def hat(self, u: complex) -> complex:
        return self.shift - u

    def d(self, u: complex) -> complex:
        return d_kernel(u)

    def e(self, u: complex) -> complex:
        return -2.0 / guard_pole(f"e_{self.n}", self.hat(u), u)

    def a(self, u: complex) -> complex:
        return 1.0 + self.d(u)

    def b(self, u: complex) -> complex:
        return 1.0 + self.e(u)

    def c(self, u: complex) -> complex:
        return self.d(u) + self.e(u)

    def f(self, w: complex) -> complex:
        """f at argument w = 2u, first form."""
        return 1.0 + (self.n - 2) * self.d(w) / guard_pole("a", self.a(w), w) + self.e(w)

    def f_shifted(self, w: complex) -> complex:
        """f at argument w = 2u, written with the next-level kernels."""
        lower = ScalarKernels(self.n - 2)
        return 1.0 + (self.n - 2) * self.d(w - 2.0) + lower.e(w - 2.0)


@dataclass(frozen=True)
class SiteSpace:
    dim: int
    basis_mode: str = BASIS_REAL

    def __post_init__(self):
        if self.dim < 2:
            raise ParameterRangeError(f"site dimension must be >= 2, got {self.dim}")
        if self.basis_mode not in BASIS_MODES:
            raise ParameterRangeError(f"unknown basis mode {self.basis_mode!r}")


@dataclass(frozen=True)
class TwoSiteOperator:
    n: int
    entries: np.ndarray
    label: str = ""

    def __post_init__(self):
        if self.entries.shape != (self.n * self.n, self.n * self.n):
            raise ParameterRangeError(
                f"{self.label or 'operator'} has shape {self.entries.shape}, expected n^2 x n^2 with n={self.n}"
            )

    def as_tensor(self) -> np.ndarray:
        """Entries as a rank-4 tensor [out1, out2, in1, in2]."""
        n = self.n
        return self.entries.reshape(n, n, n, n)

    def swapped(self) -> "TwoSiteOperator":
        """P X P, the same operator with the two legs exchanged."""
        p = permutation_op(self.n).entries
        return TwoSiteOperator(self.n, p @ self.entries @ p, f"{self.label}_21")

    def __add__(self, other: "TwoSiteOperator") -> "TwoSiteOperator":
        return TwoSiteOperator(self.n, self.entries + other.entries, f"{self.label}+{other.label}")

    def scaled(self, factor: complex, label: str | None = None) -> "TwoSiteOperator":
        return TwoSiteOperator(self.n, factor * self.entries, label or self.label)


def identity_op(n: int) -> TwoSiteOperator:
    return TwoSiteOperator(n, np.eye(n * n, dtype=complex), "I")


def permutation_op(n: int) -> TwoSiteOperator:
    if n < 2:
        raise ParameterRangeError(f"site dimension must be >= 2, got {n}")
    p = np.zeros((n * n, n * n), dtype=complex)
    for a in range(n):
        for b in range(n):
            p[b * n + a, a * n + b] = 1.0
    return TwoSiteOperator(n, p, "P")


def trace_op(n: int) -> TwoSiteOperator:
    if n < 2:
        raise ParameterRangeError(f"site dimension must be >= 2, got {n}")
    omega = np.eye(n, dtype=complex).reshape(n * n)
    return TwoSiteOperator(n, np.outer(omega, omega), "K-trace")


def sp_unit(n: int) -> np.ndarray:
    """The antisymmetric form U = [[0, I], [-I, 0]]."""
    if n % 2:
        raise ParameterRangeError(f"symplectic form needs an even dimension, got {n}")
    h = n // 2
    u = np.zeros((n, n), dtype=complex)
    u[:h, h:] = np.eye(h)
    u[h:, :h] = -np.eye(h)
    return u


def sp_form_op(n: int) -> TwoSiteOperator:
    """<ab|UU|cd> = U_ab U_cd."""
    vec = sp_unit(n).reshape(n * n)
    return TwoSiteOperator(n, np.outer(vec, vec), "U-form")


def apply_local(tensor: np.ndarray, op4: np.ndarray, i: int, j: int) -> np.ndarray:
    """
    Apply a two-site operator (rank-4, [out_i, out_j, in_i, in_j]) to factors
    i and j of a tensor whose trailing axis is a batch axis.
    """
    out = np.tensordot(op4, tensor, axes=([2, 3], [i, j]))
    return np.moveaxis(out, [0, 1], [i, j])


def apply_single(tensor: np.ndarray, mat: np.ndarray, i: int) -> np.ndarray:
    out = np.tensordot(mat, tensor, axes=([1], [i]))
    return np.moveaxis(out, 0, i)


@dataclass
class ChainOperator:
    """
    An operator on n^L, with L counting every tensor factor (auxiliary
    included when has_aux). The matrix-free action is always present; the
    dense form is built on demand and only below the dimension guard.
    """
    n: int
    L: int
    action: Callable[[np.ndarray], np.ndarray]
    poles: tuple = ()
    has_aux: bool = False
    label: str = ""
    dense_limit: int = DENSE_LIMIT
    _dense: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.n ** self.L

    @property
    def shape(self) -> tuple[int, int]:
        return (self.dim, self.dim)

    @classmethod
    def from_dense(cls, matrix: np.ndarray, n: int, L: int, **kwargs) -> "ChainOperator":
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (n ** L, n ** L):
            raise ParameterRangeError(f"dense matrix shape {matrix.shape} does not match n={n}, L={L}")
        op = cls(n=n, L=L, action=lambda x: matrix @ x, **kwargs)
        op._dense = matrix
        return op

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.ndim == 1:
            return self.action(x.reshape(-1, 1)).reshape(-1)
        return self.action(x)

    def __matmul__(self, other):
        if isinstance(other, ChainOperator):
            if other.shape != self.shape:
                raise ParameterRangeError("operator shapes do not match")
            return ChainOperator(
                n=self.n, L=self.L,
                action=lambda x: self.action(other.action(x)),
                poles=tuple(self.poles) + tuple(other.poles),
                has_aux=self.has_aux,
                label=f"{self.label}*{other.label}",
                dense_limit=self.dense_limit,
            )
        return self.apply(other)

    def to_dense(self) -> np.ndarray:
        if self._dense is None:
            if self.dim > self.dense_limit:
                raise DimensionGuardError(
                    f"{self.label or 'operator'} has dimension {self.dim} above the dense limit {self.dense_limit}",
                    dim=self.dim, limit=self.dense_limit,
                )
            logger.debug("materializing %s densely (dim %d)", self.label, self.dim)
            blocks = []
            for start in range(0, self.dim, DENSE_CHUNK):
                width = min(DENSE_CHUNK, self.dim - start)
                unit = np.zeros((self.dim, width), dtype=complex)
                unit[start + np.arange(width), np.arange(width)] = 1.0
                blocks.append(self.action(unit))
            self._dense = np.concatenate(blocks, axis=1)
        return self._dense

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator(
            self.shape,
            matvec=lambda v: self.apply(np.asarray(v).reshape(-1)),
            matmat=lambda m: self.apply(np.asarray(m)),
            dtype=complex,
        )


def embed_two_site(op: TwoSiteOperator, sites: Sequence[int], L: int) -> ChainOperator:
    i, j = sites
    if not (0 <= i < L and 0 <= j < L) or i == j:
        raise ParameterRangeError(f"sites {sites} invalid for {L} factors")
    n = op.n
    op4 = op.as_tensor()

    def action(x: np.ndarray) -> np.ndarray:
        k = x.shape[1]
        t = x.reshape((n,) * L + (k,))
        return apply_local(t, op4, i, j).reshape(n ** L, k)

    return ChainOperator(n=n, L=L, action=action, label=f"{op.label}[{i},{j}]")


def embed_single(mat: np.ndarray, site: int, n: int, L: int) -> ChainOperator:
    if not 0 <= site < L:
        raise ParameterRangeError(f"site {site} invalid for {L} factors")
    mat = np.asarray(mat, dtype=complex)

    def action(x: np.ndarray) -> np.ndarray:
        k = x.shape[1]
        t = x.reshape((n,) * L + (k,))
        return apply_single(t, mat, site).reshape(n ** L, k)

    return ChainOperator(n=n, L=L, action=action, label=f"X[{site}]")


def basis_change(n: int, mode: str = BASIS_PAIRED) -> np.ndarray:
    """
    Rows are the new basis vectors in old coordinates. In paired mode the
    first row is (e0 + i e1)/sqrt(2), the last (e0 - i e1)/sqrt(2), and the
    remaining real vectors sit in between. Operators transform as
    conj(W) X W^T.
    """
    SiteSpace(n, mode)
    if mode == BASIS_REAL:
        return np.eye(n, dtype=complex)
    w = np.zeros((n, n), dtype=complex)
    s = 1.0 / np.sqrt(2.0)
    w[0, 0], w[0, 1] = s, 1j * s
    w[-1, 0], w[-1, 1] = s, -1j * s
    for r in range(1, n - 1):
        w[r, r + 1] = 1.0
    return w


def to_basis(mat: np.ndarray, w: np.ndarray) -> np.ndarray:
    return w.conj() @ mat @ w.T


def two_site_to_basis(op: TwoSiteOperator, w: np.ndarray) -> TwoSiteOperator:
    ww = np.kron(w, w)
    return TwoSiteOperator(op.n, ww.conj() @ op.entries @ ww.T, f"{op.label}'")


def partial_trace_aux(op: ChainOperator) -> ChainOperator:
    if not op.has_aux or op.L < 1:
        raise ParameterRangeError(f"{op.label or 'operator'} carries no auxiliary factor")
    n, rest = op.n, op.L - 1
    q = n ** rest

    if op._dense is not None:
        m = op._dense.reshape(n, q, n, q)
        return ChainOperator.from_dense(np.einsum("aiaj->ij", m), n, rest, label=f"tr0 {op.label}")

    def action(x: np.ndarray) -> np.ndarray:
        k = x.shape[1]
        y = np.zeros((n, q, n, k), dtype=complex)
        for a in range(n):
            y[a, :, a, :] = x
        z = op.action(y.reshape(n * q, n * k)).reshape(n, q, n, k)
        return np.einsum("aiak->ik", z)

    return ChainOperator(n=n, L=rest, action=action, poles=op.poles, label=f"tr0 {op.label}")


def kron_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out
