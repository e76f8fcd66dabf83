# src/bethe_forge/fusion.py
"""
SO(6) K-matrices from fused SU(4) reflection matrices.

The antisymmetric square of the su(4) fundamental is the vector of so(6).
A projects C^4 x C^4 onto it, C is the Hodge star on 2-forms (conj(G) = C G C^+)
and B realifies: B G B^+ is real for every G in the image of SU(4).
"""
from __future__ import annotations
from dataclasses import dataclass
from itertools import permutations
from typing import Callable, Union
import logging

import numpy as np
from scipy.stats import unitary_group

from .errors import ParameterRangeError
from .integrability import (
    EquationId,
    ResidualReport,
    bybe_suite,
    single_report,
    su4_r_crossed,
)
from .tensor_core import permutation_op, sp_unit

logger = logging.getLogger(__name__)

PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
# rows of B K B^+ reordered so the fused K reads as a catalog diagonal
ALIGNMENT = (4, 3, 5, 0, 1, 2)

KInput = Union[np.ndarray, Callable[[complex], np.ndarray]]


def _levi_civita(indices) -> int:
    indices = list(indices)
    if len(set(indices)) < len(indices):
        return 0
    sign = 1
    for i in range(len(indices)):
        for j in range(i + 1, len(indices)):
            if indices[i] > indices[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class RepIntertwiners:
    A: np.ndarray
    C: np.ndarray
    B: np.ndarray

    def project(self, g: np.ndarray) -> np.ndarray:
        """G = A (g x g) A^+."""
        return self.A @ np.kron(g, g) @ self.A.conj().T

    def realify(self, g: np.ndarray) -> np.ndarray:
        big = self.project(g)
        return self.B @ big @ self.B.conj().T


def build_intertwiners() -> RepIntertwiners:
    a = np.zeros((6, 16), dtype=complex)
    s = 1.0 / np.sqrt(2.0)
    for row, (i, j) in enumerate(PAIRS):
        a[row, 4 * i + j] = s
        a[row, 4 * j + i] = -s

    c = np.zeros((6, 6))
    for p, (i, j) in enumerate(PAIRS):
        for q, (k, l) in enumerate(PAIRS):
            c[p, q] = _levi_civita((i, j, k, l))

    e = np.eye(6)
    b = np.array([
        (e[0] + e[5]) * s,
        (e[1] - e[4]) * s,
        (e[2] + e[3]) * s,
        1j * (e[0] - e[5]) * s,
        1j * (e[1] + e[4]) * s,
        1j * (e[2] - e[3]) * s,
    ], dtype=complex)
    return RepIntertwiners(a, c.astype(complex), b)


def random_su4(seed: int) -> np.ndarray:
    g = unitary_group.rvs(4, random_state=seed)
    return g / np.linalg.det(g) ** 0.25


def intertwiner_report(reps: RepIntertwiners, samples: int = 10, seed: int = 0) -> ResidualReport:
    """A A^+ = I, C and B unitary, conj(G) = C G C^+ and B G B^+ real on random SU(4) elements."""
    report = ResidualReport(EquationId.OPERATOR, "su(4) -> so(6) intertwiners", seed=seed)
    eye6 = np.eye(6)
    report.extend(_report(reps.A @ reps.A.conj().T, eye6, "A A^+"))
    report.extend(_report(reps.C @ reps.C.conj().T, eye6, "C C^+"))
    report.extend(_report(reps.B @ reps.B.conj().T, eye6, "B B^+"))
    for k in range(samples):
        g = random_su4(seed + k)
        big = reps.project(g)
        report.extend(_report(big.conj(), reps.C @ big @ reps.C.conj().T, f"conj G #{k}"))
        real = reps.realify(g)
        report.extend(_report(real, real.real.astype(complex), f"real G #{k}"))
    return report


def _report(lhs, rhs, label) -> ResidualReport:
    return single_report(EquationId.OPERATOR, label, lhs, rhs, (0,))


def symmetric_leak(reps: RepIntertwiners) -> float:
    """Largest image of a symmetric tensor under A."""
    worst = 0.0
    for i, j in permutations(range(4), 2):
        sym = np.zeros(16, dtype=complex)
        sym[4 * i + j] += 1.0
        sym[4 * j + i] += 1.0
        worst = max(worst, float(np.linalg.norm(reps.A @ sym)))
    for i in range(4):
        sym = np.zeros(16, dtype=complex)
        sym[5 * i] = 1.0
        worst = max(worst, float(np.linalg.norm(reps.A @ sym)))
    return worst


def _k_callable(k: KInput) -> Callable[[complex], np.ndarray]:
    if callable(k):
        return k
    matrix = np.asarray(k, dtype=complex)
    if matrix.shape != (4, 4):
        raise ParameterRangeError(f"an su(4) K-matrix is 4x4, got {matrix.shape}")
    return lambda u: matrix


def fuse_k_raw(k: KInput, u: complex, reps: RepIntertwiners | None = None) -> np.ndarray:
    """B A (I x K(u-1)) Rbar(2u) (K(u+1) x I) P A^+ C^+ B^+, unnormalized, unaligned."""
    reps = reps or build_intertwiners()
    kf = _k_callable(k)
    eye = np.eye(4)
    p = permutation_op(4).entries
    core = np.kron(eye, kf(u - 1.0)) @ su4_r_crossed(2.0 * u) @ np.kron(kf(u + 1.0), eye) @ p
    return reps.B @ reps.A @ core @ reps.A.conj().T @ reps.C.conj().T @ reps.B.conj().T


def fuse_k(k: KInput, u: complex, reps: RepIntertwiners | None = None) -> np.ndarray:
    """The fused so(6) K in the aligned real basis, scaled so the last diagonal entry is 1."""
    raw = fuse_k_raw(k, u, reps)
    order = list(ALIGNMENT)
    aligned = raw[np.ix_(order, order)]
    pivot = aligned[-1, -1]
    if abs(pivot) < 1e-14:
        raise ParameterRangeError(f"fused K has a vanishing reference entry at u={u}")
    return aligned / pivot


def fused_identity(u: complex) -> np.ndarray:
    return fuse_k(np.eye(4), u)


def fused_symplectic(u: complex) -> np.ndarray:
    return fuse_k(sp_unit(4), u)


def fused_bybe_suite(k: KInput, model, count: int = 20, seed: int | None = None) -> ResidualReport:
    kwargs = {} if seed is None else {"seed": seed}
    report = bybe_suite(model, count, source=lambda u: fuse_k(k, u), **kwargs)
    logger.debug("fused BYBE on so(6): %.3e", report.max_relative_residual)
    return report
