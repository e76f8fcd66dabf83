# src/bethe_forge/solver.py
"""
Newton-type solver for systems written as products of factors equal to one.

The primary solve works on sums of logarithms with integer branch numbers
fixed from the seed. When the log form stalls (a factor crossed the branch
cut mid-iteration) the product form is polished directly.

Near-exact strings make some factors huge and others tiny; their products
then cannot be evaluated below a rounding floor that can sit well above
the requested tolerance. `rounding_floor` measures it and a solve is also
accepted within FLOOR_FACTOR of it, as long as the floor stays below
MAX_FLOOR.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence
import logging

import numpy as np
from scipy.optimize import root

from .errors import ConvergenceError, PoleError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
MAX_EVALUATIONS = 4000

FLOOR_FACTOR = 8.0
FLOOR_SAMPLES = 4
MAX_FLOOR = 1e-5

ROOT_CAP = 1e6
ROOT_ZERO = 1e-3
COLLISION_THRESHOLD = 1e-8


@dataclass
class SolverResult:
    roots: np.ndarray
    branches: np.ndarray
    residual_norm: float
    evaluations: int
    converged: bool
    method: str
    trace: list = field(default_factory=list)
    floor: float = 0.0


def _split(v: np.ndarray) -> np.ndarray:
    return np.concatenate([v.real, v.imag])


def _join(x: np.ndarray) -> np.ndarray:
    m = x.size // 2
    return x[:m] + 1j * x[m:]


def branch_numbers(log_sums: np.ndarray) -> np.ndarray:
    """Integers I_j with log-sum_j = 2 pi i I_j at a solution."""
    return np.rint(np.asarray(log_sums).imag / (2 * np.pi)).astype(int)


def _root(fun: Callable[[np.ndarray], np.ndarray], x0: np.ndarray):
    return root(fun, x0, method="hybr", options={"xtol": 1e-15, "maxfev": MAX_EVALUATIONS})


def rounding_floor(products: Callable[[np.ndarray], np.ndarray], roots: np.ndarray,
                   samples: int = FLOOR_SAMPLES) -> float:
    """
    Largest change of products(roots) under random kicks of one ulp of every
    root; 0 when the kicked roots hit a pole.
    """
    roots = np.asarray(roots, dtype=complex).reshape(-1)
    if roots.size == 0:
        return 0.0
    rng = np.random.default_rng(0)
    ulp = np.finfo(float).eps * np.maximum(1.0, np.abs(roots))
    try:
        base = products(roots)
        worst = 0.0
        for _ in range(samples):
            kick = ulp * np.exp(2j * np.pi * rng.uniform(size=roots.size))
            worst = max(worst, float(np.max(np.abs(products(roots + kick) - base))))
    except PoleError:
        return 0.0
    return worst


def accepted(residual: float, tol: float, floor: float) -> bool:
    if residual < tol:
        return True
    return floor < MAX_FLOOR and residual < FLOOR_FACTOR * floor


def screen_roots(groups: Sequence[np.ndarray], mirrored: Sequence[bool], trace: list,
                 residual: float, cap: float = ROOT_CAP, zero: float = ROOT_ZERO,
                 threshold: float = COLLISION_THRESHOLD) -> None:
    """
    Reject solutions that are not root sets: non-finite or escaped roots,
    roots at the fixed point v = 0 of a mirrored family, and coincident roots
    (v_i = -v_j counts as coincident when the family is mirrored).
    """
    for f, (group, mirror) in enumerate(zip(groups, mirrored)):
        group = np.asarray(group, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(group)) or np.any(np.abs(group) > cap):
            raise ConvergenceError(f"roots of family {f} escaped to infinity: {group}",
                                   trace=trace, residual=residual)
        if mirror and np.any(np.abs(group) < zero):
            raise ConvergenceError(f"family {f} has a root at the fixed point v = 0: {group}",
                                   trace=trace, residual=residual)
        for i in range(group.size):
            for j in range(i + 1, group.size):
                close = abs(group[i] - group[j]) < threshold
                if mirror:
                    close = close or abs(group[i] + group[j]) < threshold
                if close:
                    raise ConvergenceError(
                        f"roots {group[i]} and {group[j]} of family {f} coincide",
                        trace=trace, residual=residual)


def solve_product_system(
    log_sums: Callable[[np.ndarray], np.ndarray],
    products: Callable[[np.ndarray], np.ndarray],
    seed: np.ndarray,
    branches: Optional[np.ndarray] = None,
    tol: float = DEFAULT_TOL,
) -> SolverResult:
    """
    Solve products(v) == 1 starting from `seed`.

    `log_sums(v)` must return, per equation, the sum of principal logarithms
    of the factors whose product is `products(v)`.
    """
    seed = np.asarray(seed, dtype=complex).reshape(-1)
    if seed.size == 0:
        return SolverResult(seed, np.zeros(0, dtype=int), 0.0, 0, True, "empty")

    trace: list = []

    def residual_norm(v: np.ndarray) -> float:
        try:
            return float(np.max(np.abs(products(v) - 1.0)))
        except PoleError:
            return float("inf")

    if branches is None:
        try:
            branches = branch_numbers(log_sums(seed))
        except PoleError as e:
            raise ConvergenceError(f"the seed sits on a pole: {e}", trace=trace) from e
    branches = np.asarray(branches, dtype=int)
    target = 2j * np.pi * branches

    def log_form(x: np.ndarray) -> np.ndarray:
        v = _join(x)
        try:
            r = log_sums(v) - target
        except PoleError:
            return np.full(x.size, 1e6)
        trace.append(float(np.max(np.abs(r))))
        return _split(r)

    sol = _root(log_form, _split(seed))
    roots = _join(sol.x)
    best = residual_norm(roots)
    method = "log"
    logger.debug("log-form solve: %s evaluations, product residual %.3e", sol.nfev, best)

    if not best < tol:
        def product_form(x: np.ndarray) -> np.ndarray:
            v = _join(x)
            try:
                r = products(v) - 1.0
            except PoleError:
                return np.full(x.size, 1e6)
            trace.append(float(np.max(np.abs(r))))
            return _split(r)

        start = roots if np.all(np.isfinite(roots)) else seed
        polished = _root(product_form, _split(start))
        candidate = _join(polished.x)
        candidate_residual = residual_norm(candidate)
        logger.debug("product-form polish: residual %.3e", candidate_residual)
        if candidate_residual < best:
            roots, best, method = candidate, candidate_residual, "product"

    floor = 0.0
    if not best < tol and np.isfinite(best):
        floor = rounding_floor(products, roots)
        logger.debug("rounding floor of the products: %.3e", floor)
    converged = accepted(best, tol, floor)
    result = SolverResult(roots, branches, best, len(trace), converged, method, trace, floor)
    if not converged:
        raise ConvergenceError(
            f"Bethe equations did not converge: residual {best:.3e} after {len(trace)} evaluations",
            trace=trace, residual=best,
        )
    return result


def solve_regular_system(equations: Callable[[np.ndarray], np.ndarray], seed: np.ndarray,
                         tol: float = DEFAULT_TOL) -> tuple[np.ndarray, float, list]:
    """
    hybr on a complex system without poles or branch bookkeeping; returns
    (solution, max |equations|, trace). Raises ConvergenceError above tol.
    """
    seed = np.asarray(seed, dtype=complex).reshape(-1)
    trace: list = []

    def fun(x: np.ndarray) -> np.ndarray:
        try:
            r = np.asarray(equations(_join(x)), dtype=complex)
        except PoleError:
            return np.full(x.size, 1e6)
        if not np.all(np.isfinite(r)):
            return np.full(x.size, 1e6)
        trace.append(float(np.max(np.abs(r))))
        return _split(r)

    sol = _root(fun, _split(seed))
    x = _join(sol.x)
    try:
        residual = float(np.max(np.abs(equations(x))))
    except PoleError:
        residual = float("inf")
    if not residual < tol:
        raise ConvergenceError(
            f"regularized equations did not converge: residual {residual:.3e} after {len(trace)} evaluations",
            trace=trace, residual=residual,
        )
    return x, residual, trace


def canonical_order(roots: np.ndarray, fold_sign: bool = True) -> np.ndarray:
    """
    Representative of a root list under permutation (and v -> -v when the
    equations only see v through doubled factors): Re >= 0, then sorted
    lexicographically by (re, im).
    """
    roots = np.asarray(roots, dtype=complex).copy()
    if fold_sign:
        flip = (roots.real < -1e-12) | ((np.abs(roots.real) <= 1e-12) & (roots.imag < 0))
        roots[flip] = -roots[flip]
    order = np.lexsort((roots.imag, roots.real))
    return roots[order]
