# src/bethe_forge/nesting.py
"""
Nested K-matrices and scalar boundary coefficients of orthogonal chains.

Level k works on dimension m = n - 2k with the level-local spectral
parameter x = theta - k; its crossing is x_hat = m - 2 - x. Level 0 reads
the catalog K-matrix in the model's nesting frame, and the left K-matrix
is the transpose of the right one. Each level hands
    K^R_(k+1)(z) = Ymid^R_k(z+1) - (d/a)(2z+2) Y^R_k(z+1)
    K^L_(k+1)(z) = Ymid^L_k(z+1) - (d/a)(2z+2) Y*^L_k(z+1)
to the next one. The ladder stops at m = 1 (odd n) or at the O(4) level
(even n), where the endgame scalars are read off.
"""
from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Callable, NamedTuple, Optional
import logging

import numpy as np

from .catalog import BoundaryModel, FamilyKind
from .errors import ParameterRangeError
from .o4_xxx import to_pair_basis
from .tensor_core import (
    ScalarKernels,
    a_kernel,
    basis_change,
    d_over_a,
    guard_pole,
    to_basis,
)

logger = logging.getLogger(__name__)

BLOCK_TOL = 1e-9
RIGHT = "R"
LEFT = "L"
SAMPLE_POINT = 0.377 + 0.219j


class BlockSplit(NamedTuple):
    Y: complex
    middle: np.ndarray
    Y_star: complex


def block_split(k_paired: np.ndarray, level: int = 0, tol: float = BLOCK_TOL) -> BlockSplit:
    """(Y, Ymid, Y*) of a K-matrix written in the paired basis of its level."""
    k_paired = np.asarray(k_paired, dtype=complex)
    m = k_paired.shape[0]
    if m < 3:
        raise ParameterRangeError(f"level {level}: block split needs dimension >= 3, got {m}")
    mask = np.ones((m, m), dtype=bool)
    mask[0, 0] = mask[-1, -1] = False
    mask[1:-1, 1:-1] = False
    scale = max(1.0, float(np.max(np.abs(k_paired))))
    off = float(np.max(np.abs(k_paired[mask])))
    if off > tol * scale:
        raise ParameterRangeError(
            f"level {level}: K is not block diagonal in the paired basis (off-block {off:.3e})"
        )
    return BlockSplit(complex(k_paired[0, 0]), k_paired[1:-1, 1:-1].copy(), complex(k_paired[-1, -1]))


def c_over_a(m: int, w: complex) -> complex:
    """c_m(w)/a(w) with c_m = d + e_m."""
    e = ScalarKernels(m).e(w)
    return d_over_a(w) + e / guard_pole("a", a_kernel(w), w)


class EndgameKind(str, Enum):
    ODD = "o1"
    FACTORIZED = "factorized"
    SU_D2 = "su_d2"


class NestingLadder:
    """All nesting levels of one boundary model."""

    def __init__(self, model: BoundaryModel, normalized: bool = False,
                 k_override: Optional[Callable[[complex], np.ndarray]] = None):
        if model.family.kind is not FamilyKind.ORTHOGONAL:
            raise ParameterRangeError(f"nesting is implemented for orthogonal chains, not {model.family.label}")
        self.model = model
        self.normalized = normalized
        self._override = k_override
        n = model.family.n
        dims = [n]
        while dims[-1] not in (1, 4):
            dims.append(dims[-1] - 2)
        self.dims = tuple(dims)
        self._frame = model.nesting_frame()

    @property
    def top(self) -> int:
        return len(self.dims) - 1

    def dim(self, level: int) -> int:
        self._check_level(level)
        return self.dims[level]

    def _check_level(self, level: int) -> None:
        if not 0 <= level <= self.top:
            raise ParameterRangeError(
                f"nesting level {level} outside 0..{self.top} for {self.model.family.label}"
            )

    def base_matrix(self, u: complex) -> np.ndarray:
        """Level-0 right K in the nesting frame."""
        if self._override is not None:
            mat = self._override(u)
        elif self.normalized:
            mat = self.model.ratio_matrix(u)
        else:
            mat = self.model.matrix(u)
        order = self._frame
        return np.asarray(mat, dtype=complex)[np.ix_(order, order)]

    def k_matrix(self, side: str, level: int, u: complex) -> np.ndarray:
        """K^R or K^L of a level, real basis, level-local argument."""
        self._check_level(level)
        if level == 0:
            mat = self.base_matrix(u)
            return mat if side == RIGHT else mat.T
        prev = self.blocks(side, level - 1, u + 1.0)
        edge = prev.Y if side == RIGHT else prev.Y_star
        m = self.dims[level]
        return prev.middle - d_over_a(2.0 * u + 2.0) * edge * np.eye(m)

    def blocks(self, side: str, level: int, u: complex) -> BlockSplit:
        m = self.dim(level)
        paired = to_basis(self.k_matrix(side, level, u), basis_change(m))
        return block_split(paired, level)

    def coefficients(self, level: int) -> "LevelCoefficients":
        self._check_level(level)
        if level == self.top:
            raise ParameterRangeError(f"level {level} is the endgame of {self.model.family.label}")
        return LevelCoefficients(self, level)

    # --- endgame ------------------------------------------------------------

    @cached_property
    def endgame(self) -> EndgameKind:
        if self.dims[-1] == 1:
            return EndgameKind.ODD
        checks = [self._classify(side) for side in (RIGHT, LEFT)]
        if all(c is EndgameKind.FACTORIZED for c in checks):
            return EndgameKind.FACTORIZED
        if all(c in (EndgameKind.FACTORIZED, EndgameKind.SU_D2) for c in checks) and \
                all(self._is_su_d2(side) for side in (RIGHT, LEFT)):
            return EndgameKind.SU_D2
        raise ParameterRangeError(
            f"{self.model.label}: O(4) endgame K is neither factorized nor SU_D(2) symmetric"
        )

    def _classify(self, side: str) -> Optional[EndgameKind]:
        if self._is_factorized(side):
            return EndgameKind.FACTORIZED
        if self._is_su_d2(side):
            return EndgameKind.SU_D2
        return None

    def _is_factorized(self, side: str) -> bool:
        pair = to_pair_basis(self.k_matrix(side, self.top, SAMPLE_POINT))
        scale = max(1.0, float(np.max(np.abs(pair))))
        off = pair - np.diag(np.diag(pair))
        if np.max(np.abs(off)) > BLOCK_TOL * scale:
            return False
        p, q, r, s = np.diag(pair)
        return abs(p * s - q * r) <= BLOCK_TOL * scale * scale and abs(p) > BLOCK_TOL

    def _is_su_d2(self, side: str) -> bool:
        k = self.k_matrix(side, self.top, SAMPLE_POINT)
        scale = max(1.0, float(np.max(np.abs(k))))
        if np.max(np.abs(k - np.diag(np.diag(k)))) > BLOCK_TOL * scale:
            return False
        t = np.diag(k)
        z = SAMPLE_POINT
        k0 = t[3] * z / (1 + z)
        expected = k0 * (1 - z) / z
        return bool(np.all(np.abs(t[:3] - expected) <= BLOCK_TOL * scale))

    def factor_scalars(self, side: str, x: complex) -> tuple[complex, complex, complex]:
        """(K0, K_D^-, K_D^+) of a factorized O(4) endgame; K_A^+- = 1."""
        pair = to_pair_basis(self.k_matrix(side, self.top, x))
        p, q, r, _ = np.diag(pair)
        guard_pole("K0", p, x)
        return complex(p), complex(q / p), complex(r / p)

    def su_d2_scalar(self, side: str, x: complex) -> complex:
        """K0 of K = K0 diag((1-x)/x x3, (1+x)/x)."""
        k = self.k_matrix(side, self.top, x)
        return complex(k[3, 3] * x / guard_pole("su_d2", 1.0 + x, x))

    def terminal_scalar(self, side: str, x: complex) -> complex:
        """The 1x1 K of the odd endgame."""
        if self.endgame is not EndgameKind.ODD:
            raise ParameterRangeError("terminal scalar exists only for odd orthogonal chains")
        return complex(self.k_matrix(side, self.top, x)[0, 0])


class LevelCoefficients:
    """k^L, kbar^L, k^R, kbar^R of one generic level, level-local arguments."""

    def __init__(self, ladder: NestingLadder, level: int):
        self.ladder = ladder
        self.level = level
        self.m = ladder.dims[level]

    def hat(self, s: complex) -> complex:
        return self.m - 2 - s

    def k_right(self, s: complex) -> complex:
        return self.ladder.blocks(RIGHT, self.level, s).Y

    def k_bar_left(self, s: complex) -> complex:
        return self.ladder.blocks(LEFT, self.level, s).Y_star

    def k_left(self, s: complex) -> complex:
        b = self.ladder.blocks(LEFT, self.level, s)
        w = 2.0 * self.hat(s)
        return b.Y + d_over_a(w) * np.trace(b.middle) + c_over_a(self.m, w) * b.Y_star

    def k_bar_right(self, s: complex) -> complex:
        b = self.ladder.blocks(RIGHT, self.level, s)
        w = 2.0 * self.hat(s)
        return b.Y_star + d_over_a(w) * np.trace(b.middle) + c_over_a(self.m, w) * b.Y


@dataclass(frozen=True)
class BoundaryCoeffs:
    """
    Boundary coefficients of one nesting level as functions of the global
    theta. They enter the eigenvalue as k^L(theta_hat) k^R(theta) and
    kbar^L(theta_hat) kbar^R(theta).
    """
    ladder: NestingLadder
    level: int

    @property
    def local(self) -> LevelCoefficients:
        return self.ladder.coefficients(self.level)

    @property
    def crossing_shift(self) -> int:
        return self.ladder.model.family.crossing_shift

    def hat(self, theta: complex) -> complex:
        return self.crossing_shift - theta

    def k_left(self, theta: complex) -> complex:
        return self.local.k_left(theta - self.level)

    def k_bar_left(self, theta: complex) -> complex:
        return self.local.k_bar_left(theta - self.level)

    def k_right(self, theta: complex) -> complex:
        return self.local.k_right(theta - self.level)

    def k_bar_right(self, theta: complex) -> complex:
        return self.local.k_bar_right(theta - self.level)

    def endgame_scalars(self, theta: complex) -> dict:
        """Endgame scalars at the global theta (local argument theta - top)."""
        ladder = self.ladder
        x = theta - ladder.top
        kind = ladder.endgame
        if kind is EndgameKind.ODD:
            return {"K_R": ladder.terminal_scalar(RIGHT, x), "K_L": ladder.terminal_scalar(LEFT, x)}
        if kind is EndgameKind.SU_D2:
            return {"K0_R": ladder.su_d2_scalar(RIGHT, x), "K0_L": ladder.su_d2_scalar(LEFT, x)}
        k0r, dmr, dpr = ladder.factor_scalars(RIGHT, x)
        k0l, dml, dpl = ladder.factor_scalars(LEFT, x)
        return {"K0_R": k0r, "K0_L": k0l, "K_D-_R": dmr, "K_D+_R": dpr,
                "K_D-_L": dml, "K_D+_L": dpl, "K_A": 1.0}


def nested_k(model: BoundaryModel, level: int, u: complex, normalized: bool = True) -> np.ndarray:
    """K^(k)(u) in the real basis of level k; level 0 is the ratio-form K in the nesting frame."""
    return NestingLadder(model, normalized).k_matrix(RIGHT, level, u)


def boundary_coeffs(model: BoundaryModel, level: int, normalized: bool = True) -> BoundaryCoeffs:
    ladder = NestingLadder(model, normalized)
    ladder._check_level(level)
    return BoundaryCoeffs(ladder, level)


# --- closed forms -------------------------------------------------------------

class ClosedForm(NamedTuple):
    k_right: Callable[[complex], complex]
    k_left: Optional[Callable[[complex], complex]]


def closed_form(model: BoundaryModel, level: int) -> ClosedForm:
    """
    Known rational expressions for the ratio-normalized coefficients,
    as functions of the global theta. The U(1) cases use the sign of c
    fixed by the paired basis (Y = (p+c+u)/(p+c-u)).
    """
    family = model.family
    k, cid = level, model.case_id
    if family.n % 2 == 0:
        N = family.n // 2

        def hat(t):
            return 2 * N - 2 - t
    else:
        N = (family.n - 1) // 2

        def hat(t):
            return 2 * N - 1 - t

    if cid == "Dn_a":
        M = model.k
        if k < M:
            return ClosedForm(
                lambda t: -t * (t + N - 2 * M) / ((t - k) * (t - N + 2 * M)),
                lambda t: -(hat(t) - N + 2) * (hat(t) + N - 2 * M) * (hat(t) - 2 * N + 2)
                / ((hat(t) - k - 1) * (hat(t) - N + 1) * (hat(t) - N - 2 * M + 2)),
            )
        return ClosedForm(
            lambda t: t * (t - N) / ((t - k) * (t - N + 2 * M)),
            lambda t: (hat(t) - N + 2) * (hat(t) - N) * (hat(t) - 2 * N + 2)
            / ((hat(t) - k - 1) * (hat(t) - N + 1) * (hat(t) - N - 2 * M + 2)),
        )
    if cid == "Dn_c":
        c = model.c
        return ClosedForm(
            lambda t: t * (c - t) / (t - k),
            lambda t: (c - hat(t)) * (hat(t) - N) * (hat(t) - 2 * N + 2)
            / ((hat(t) - k - 1) * (hat(t) - N + 1)),
        )
    if cid == "Dn_b":
        c = -model.c
        if k == 0:
            return ClosedForm(lambda t: -(t + N - 2 - c) / (t - N + 2 + c), None)
        return ClosedForm(
            lambda t: t * (t - N + c) / ((t - k) * (t - N + 2 + c)),
            lambda t: (hat(t) - N + 2 - c) * (hat(t) - N) * (hat(t) - 2 * N + 2)
            / ((hat(t) - k - 1) * (hat(t) - N + 1) * (hat(t) - N - c)),
        )
    if cid == "Dn_d":
        M = model.k
        if k < M:
            return ClosedForm(
                lambda t: -t * (t + N - 2 * M - 1) / ((t - k) * (t - N + 2 * M + 1)),
                lambda t: -(hat(t) - N + 2) * (hat(t) + N - 2 * M - 1) * (hat(t) - 2 * N + 2)
                / ((hat(t) - k - 1) * (hat(t) - N + 1) * (hat(t) - N - 2 * M + 1)),
            )
        return ClosedForm(
            lambda t: t * (t - N + 1) / ((t - k) * (t - N + 2 * M + 1)),
            lambda t: (hat(t) - N + 2) * (hat(t) - 2 * N + 2)
            / ((hat(t) - k - 1) * (hat(t) - N - 2 * M + 1)),
        )
    if cid == "appA_MxRest":
        M = model.k
        if k < M:
            return ClosedForm(
                lambda t: -t * (t + N + 0.5 - 2 * M) / ((t - k) * (t - N - 0.5 + 2 * M)),
                lambda t: -(hat(t) - N + 1.5) * (hat(t) + N + 0.5 - 2 * M) * (hat(t) - 2 * N + 1)
                / ((hat(t) - k - 1) * (hat(t) - N + 0.5) * (hat(t) - N - 2 * M + 1.5)),
            )
        return ClosedForm(
            lambda t: t * (t - N - 0.5) / ((t - k) * (t - N - 0.5 + 2 * M)),
            lambda t: (hat(t) - N + 1.5) * (hat(t) - N - 0.5) * (hat(t) - 2 * N + 1)
            / ((hat(t) - k - 1) * (hat(t) - N + 0.5) * (hat(t) - N - 2 * M + 1.5)),
        )
    raise ParameterRangeError(f"no closed form recorded for {cid}")


def closed_form_nested_k(model: BoundaryModel, level: int, u: complex) -> np.ndarray:
    """Closed-form K^(k)(u) of the split and U(1) cases, in the nesting frame."""
    family = model.family
    m = family.n - 2 * level
    k, cid = level, model.case_id
    N = family.n // 2 if family.n % 2 == 0 else (family.n - 1) // 2
    if cid == "Dn_a":
        M = model.k
        if k < M:
            ck = (N - 2 * M + k + u) / (N - 2 * M + k - u)
            pref = (u + k) / u * (N - 2 * M + k - u) / (N - 2 * M - k - u)
            return pref * np.diag([ck] * (2 * M - 2 * k) + [1.0] * (m - 2 * M + 2 * k)).astype(complex)
        pref = (u + k) / u * (N - k - u) / (N - 2 * M - k - u)
        return pref * np.eye(m, dtype=complex)
    if cid == "Dn_d":
        M = model.k
        if k < M:
            ck = (N - 2 * M - 1 + k + u) / (N - 2 * M - 1 + k - u)
            pref = (u + k) / u * (N - 2 * M - 1 + k - u) / (N - 2 * M - 1 - k - u)
            diag = [ck] * (2 * M - 2 * k) + [1.0] * (m - 2 * M + 2 * k - 1) + [ck]
            return pref * np.diag(diag).astype(complex)
        pref = (u + k) / u * (N - 1 - k - u) / (N - 2 * M - 1 - k - u)
        last = (N - 1 - k + u) / (N - 1 - k - u)
        return pref * np.diag([1.0] * (m - 1) + [last]).astype(complex)
    if cid == "Dn_c":
        c = model.c
        pref = (u + k) / u
        block = np.array([[c - k, 1j * u], [-1j * u, c - k]])
        return pref * np.kron(np.eye(m // 2), block)
    if cid == "Dn_b":
        c = -model.c
        if k == 0:
            return NestingLadder(model, True).base_matrix(u)
        pref = (u + k) / u * (N - k - c - u) / (N - 2 - k - c - u)
        return pref * np.eye(m, dtype=complex)
    raise ParameterRangeError(f"no closed-form nested K recorded for {cid}")
