# src/bethe_forge/bae.py
"""
Bethe Ansatz equations and nested eigenvalues of orthogonal open chains.

Roots are stored in level-local form v = u - k. A root of family k sits at
x = v + 1 in the coordinates of level k - 1; there the eigenvalue has the
apparent pole whose residue balance gives the equation

    rho_f(v) prod_sites s_-1(v - s) s_-1(v + s)
             prod_children s_-1(v - z) s_-1(v + z)
             prod_(i != j) s_A(v - v_i) s_A(v + v_i) = 1,

s_A(u) = (u + A)/(u - A), A the diagonal Cartan entry. rho_f is read off the
boundary coefficients of the two levels the family connects. Families of
the O(4) endgame are "+"/"-" (factorized K) or one SU_D(2) family whose
self scattering is not doubled.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Collection, Optional, Sequence
import logging

import numpy as np
from numpy.polynomial import polynomial as P

from .catalog import BoundaryModel
from .errors import ParameterRangeError, PoleError
from .nesting import LEFT, RIGHT, EndgameKind, NestingLadder
from .solver import (
    COLLISION_THRESHOLD,
    DEFAULT_TOL,
    SolverResult,
    canonical_order,
    screen_roots,
    solve_product_system,
)
from .tensor_core import a_kernel, d_over_a, guard_pole

logger = logging.getLogger(__name__)

RESIDUE_RADIUS = 1e-4
RESIDUE_POINTS = 8
RESIDUE_SCALE_RADIUS = 0.3
TWO_STRING_HALF_WIDTH = 0.505


def s_kernel(u: complex, A: int) -> complex:
    return (u + A) / guard_pole(f"s_{A}", u - A, u)


def r1_kernel(z: complex) -> complex:
    """1 + d(z) + e_1(z) = (z+2)(z-1)/(z(z+1)), the R-matrix of the one-dimensional level."""
    return (z + 2.0) * (z - 1.0) / guard_pole("R1", z * (z + 1.0), z)


class FamilyRole(str, Enum):
    GENERIC = "generic"
    ODD_LAST = "odd-last"
    PLUS = "+"
    MINUS = "-"
    SU_D2 = "su_d2"


@dataclass(frozen=True)
class RootFamily:
    label: str
    role: FamilyRole
    level: int
    parent: Optional[int]

    @property
    def self_coupling(self) -> int:
        return 1 if self.role is FamilyRole.ODD_LAST else 2

    @property
    def doubled(self) -> bool:
        return self.role is not FamilyRole.SU_D2


def family_layout(ladder: NestingLadder) -> tuple[RootFamily, ...]:
    top = ladder.top
    kind = ladder.endgame
    families = []
    for k in range(1, top + 1):
        role = FamilyRole.ODD_LAST if (kind is EndgameKind.ODD and k == top) else FamilyRole.GENERIC
        families.append(RootFamily(str(k), role, k, k - 2 if k > 1 else None))
    if kind is EndgameKind.ODD:
        return tuple(families)
    parent = top - 1 if top >= 1 else None
    if kind is EndgameKind.FACTORIZED:
        families.append(RootFamily("+", FamilyRole.PLUS, top + 1, parent))
        families.append(RootFamily("-", FamilyRole.MINUS, top + 1, parent))
    else:
        families.append(RootFamily(str(top + 1), FamilyRole.SU_D2, top + 1, parent))
    return tuple(families)


@dataclass(frozen=True)
class BetheRootSet:
    """Roots per family, level-local (v) form."""
    roots: tuple
    residual_norm: float = float("nan")
    source: str = "manual"
    branches: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "roots", tuple(np.asarray(r, dtype=complex).reshape(-1) for r in self.roots))

    @property
    def counts(self) -> tuple:
        return tuple(len(r) for r in self.roots)

    def flat(self) -> np.ndarray:
        if not self.roots:
            return np.zeros(0, dtype=complex)
        return np.concatenate(self.roots)

    @classmethod
    def from_flat(cls, values: Sequence[complex], counts: Sequence[int], **kwargs) -> "BetheRootSet":
        values = np.asarray(values, dtype=complex).reshape(-1)
        if values.size != sum(counts):
            raise ParameterRangeError(f"{values.size} roots do not match the counts {tuple(counts)}")
        split = np.split(values, np.cumsum(counts)[:-1]) if counts else []
        return cls(tuple(split), **kwargs)

    def collisions(self, threshold: float = COLLISION_THRESHOLD) -> list[tuple[int, int, int]]:
        out = []
        for f, r in enumerate(self.roots):
            for i in range(len(r)):
                for j in range(i + 1, len(r)):
                    if abs(r[i] - r[j]) < threshold:
                        out.append((f, i, j))
        return out


class BAESystem:
    """Bethe equations and eigenvalue of one orthogonal open chain."""

    def __init__(self, model: BoundaryModel, L: int, counts: Sequence[int],
                 inhomogeneities: Optional[Sequence[complex]] = None, normalized: bool = False):
        if L < 0:
            raise ParameterRangeError(f"chain length must be >= 0, got {L}")
        self.model = model
        self.L = L
        self.ladder = NestingLadder(model, normalized)
        self.families = family_layout(self.ladder)
        counts = tuple(int(c) for c in counts) if counts else (0,) * len(self.families)
        if len(counts) != len(self.families):
            raise ParameterRangeError(
                f"{model.label} has {len(self.families)} root families "
                f"({', '.join(f.label for f in self.families)}); got counts {counts}"
            )
        if any(c < 0 for c in counts):
            raise ParameterRangeError(f"magnon counts must be non-negative, got {counts}")
        self.counts = counts
        inhom = tuple(complex(t) for t in inhomogeneities) if inhomogeneities else (0j,) * L
        if len(inhom) != L:
            raise ParameterRangeError(f"{len(inhom)} inhomogeneities given for {L} sites")
        self.inhomogeneities = np.asarray(inhom, dtype=complex)

    # --- structure ------------------------------------------------------------

    @property
    def labels(self) -> tuple:
        return tuple(f.label for f in self.families)

    @cached_property
    def cartan(self) -> np.ndarray:
        size = len(self.families)
        c = np.zeros((size, size), dtype=int)
        for i, fam in enumerate(self.families):
            c[i, i] = fam.self_coupling
            if fam.parent is not None:
                c[i, fam.parent] = c[fam.parent, i] = -1
        return c

    def children(self, index: int) -> list[int]:
        return [g for g, fam in enumerate(self.families) if fam.parent == index]

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError as e:
            raise ParameterRangeError(f"no root family {label!r} in {self.labels}") from e

    def _sites(self, index: int, roots: BetheRootSet) -> np.ndarray:
        parent = self.families[index].parent
        return self.inhomogeneities if parent is None else roots.roots[parent]

    def _level_sites(self, level: int, roots: BetheRootSet) -> np.ndarray:
        return self.inhomogeneities if level == 0 else roots.roots[level - 1]

    def _check_roots(self, roots: BetheRootSet) -> BetheRootSet:
        if not isinstance(roots, BetheRootSet):
            roots = BetheRootSet.from_flat(roots, self.counts)
        if roots.counts != self.counts:
            raise ParameterRangeError(f"root counts {roots.counts} do not match {self.counts}")
        return roots

    # --- reflection factors ---------------------------------------------------

    def _kd(self, side: str, role: FamilyRole, x: complex) -> complex:
        _, d_minus, d_plus = self.ladder.factor_scalars(side, x)
        return d_plus if role is FamilyRole.PLUS else d_minus

    def _k_a_left(self, role: FamilyRole, t: complex) -> complex:
        """k_A^L(t) = 1 + (d/a)(2(2 - t)) K_D^L(t) at level-local t of the O(4) level."""
        return 1.0 + d_over_a(2.0 * (2.0 - t)) * self._kd(LEFT, role, t)

    def _parent_weight(self, fam: RootFamily, y: complex) -> complex:
        if fam.role in (FamilyRole.PLUS, FamilyRole.MINUS):
            return self._k_a_left(fam.role, 2.0 - y)
        p = fam.level - 1
        coeff = self.ladder.coefficients(p)
        return coeff.k_left(coeff.hat(y)) * coeff.k_right(y)

    def _child_weight(self, fam: RootFamily, v: complex) -> tuple[complex, complex]:
        """(kappa, sigma(2v)) seen from the level the root lives on."""
        ladder = self.ladder
        if fam.role in (FamilyRole.PLUS, FamilyRole.MINUS):
            k_d_right = self._kd(RIGHT, fam.role, v + 1.0) - d_over_a(2.0 * v + 2.0)
            return self._kd(LEFT, fam.role, 1.0 - v) * k_d_right, a_kernel(2.0 * v)
        if fam.role is FamilyRole.ODD_LAST:
            kappa = ladder.terminal_scalar(LEFT, -1.0 - v) * ladder.terminal_scalar(RIGHT, v)
            return kappa, r1_kernel(2.0 * v)
        if fam.level < ladder.top:
            coeff = ladder.coefficients(fam.level)
            return coeff.k_left(coeff.hat(v)) * coeff.k_right(v), a_kernel(2.0 * v)
        if ladder.endgame is EndgameKind.SU_D2:
            kappa = ladder.su_d2_scalar(LEFT, 2.0 - v) * ladder.su_d2_scalar(RIGHT, v)
            return kappa, a_kernel(2.0 * v)
        k0_left = ladder.factor_scalars(LEFT, 2.0 - v)[0]
        k0_right = ladder.factor_scalars(RIGHT, v)[0]
        kappa = k0_left * k0_right
        for role in (FamilyRole.PLUS, FamilyRole.MINUS):
            kappa *= self._k_a_left(role, 2.0 - v)
        return kappa, a_kernel(2.0 * v)

    def reflection_factor_squared(self, index: int, v: complex) -> complex:
        """rho_f(v), the boundary factor of family `index` (r_f(v)^2 in the displayed equations)."""
        fam = self.families[index]
        if fam.role is FamilyRole.SU_D2:
            return 1.0 + 0j
        kappa_parent = self._parent_weight(fam, v + 1.0)
        kappa_child, sigma = self._child_weight(fam, v)
        denominator = a_kernel(2.0 * v + 2.0) * sigma * kappa_child
        return complex(kappa_parent / guard_pole(f"rho_{fam.label}", denominator, v))

    # --- equations ------------------------------------------------------------

    def factors(self, roots: BetheRootSet, index: int, j: int, skip: Collection[int] = ()) -> list:
        """
        Factors of the equation of root j of family `index`. Difference factors
        s_A(v - v_i) with i in `skip` are left out; the sums stay.
        """
        fam = self.families[index]
        v = roots.roots[index][j]
        out = [self.reflection_factor_squared(index, v)]
        for s in self._sites(index, roots):
            out += [s_kernel(v - s, -1), s_kernel(v + s, -1)]
        for g in self.children(index):
            for z in roots.roots[g]:
                out += [s_kernel(v - z, -1), s_kernel(v + z, -1)]
        a = fam.self_coupling
        for i, w in enumerate(roots.roots[index]):
            if i == j:
                continue
            if i not in skip:
                out.append(s_kernel(v - w, a))
            if fam.doubled:
                out.append(s_kernel(v + w, a))
        return out

    def products(self, roots) -> np.ndarray:
        roots = self._check_roots(roots)
        values = [np.prod(self.factors(roots, f, j))
                  for f in range(len(self.families)) for j in range(self.counts[f])]
        return np.asarray(values, dtype=complex)

    def log_sums(self, roots) -> np.ndarray:
        roots = self._check_roots(roots)
        values = [np.sum(np.log(np.asarray(self.factors(roots, f, j), dtype=complex)))
                  for f in range(len(self.families)) for j in range(self.counts[f])]
        return np.asarray(values, dtype=complex)

    # --- eigenvalue -----------------------------------------------------------

    def _level_value(self, level: int, x: complex, roots: BetheRootSet) -> complex:
        ladder = self.ladder
        if level == ladder.top:
            return self._endgame_value(x, roots)
        coeff = ladder.coefficients(level)
        xh = coeff.hat(x)
        sites = self._level_sites(level, roots)
        children = roots.roots[level] + 1.0

        def dressing(z):
            out = 1.0 + 0j
            for s in sites:
                out *= a_kernel(z - s) * a_kernel(z + s)
            for w in children:
                out *= a_kernel(w - z) / guard_pole("a", a_kernel(w + z), z)
            return out

        first = coeff.k_left(xh) * coeff.k_right(x) * dressing(x)
        last = coeff.k_bar_left(xh) * coeff.k_bar_right(x) * dressing(xh)
        return first + self._level_value(level + 1, x - 1.0, roots) + last

    def _endgame_value(self, x: complex, roots: BetheRootSet) -> complex:
        ladder = self.ladder
        top = ladder.top
        sites = self._level_sites(top, roots)
        kind = ladder.endgame
        if kind is EndgameKind.ODD:
            out = ladder.terminal_scalar(LEFT, -1.0 - x) * ladder.terminal_scalar(RIGHT, x)
            for s in sites:
                out *= r1_kernel(x - s) * r1_kernel(x + s)
            return out

        site_weight = 1.0 + 0j
        for s in sites:
            site_weight *= a_kernel(x - s) * a_kernel(x + s)

        if kind is EndgameKind.SU_D2:
            w = roots.roots[top] + 1.0

            def lam(z):
                first = 1.0 + 0j
                for s in sites:
                    first *= a_kernel(z - s) * a_kernel(z + s)
                second = 1.0 + 0j
                for u in w:
                    first *= a_kernel(u - z)
                    second *= a_kernel(z - u)
                return first + second

            k0 = ladder.su_d2_scalar(LEFT, 2.0 - x) * ladder.su_d2_scalar(RIGHT, x)
            return k0 * lam(x) * lam(2.0 - x)

        xh = 2.0 - x
        k0 = ladder.factor_scalars(LEFT, xh)[0] * ladder.factor_scalars(RIGHT, x)[0]
        value = k0 / guard_pole("O(4) sites", site_weight, x)
        for offset, role in enumerate((FamilyRole.PLUS, FamilyRole.MINUS)):
            w = roots.roots[top + offset] + 1.0
            kd_left = self._kd(LEFT, role, xh)
            k_a_left = 1.0 + d_over_a(2.0 * x) * kd_left
            k_d_right = self._kd(RIGHT, role, x) - d_over_a(2.0 * x)
            first = k_a_left * site_weight
            second = kd_left * k_d_right
            for u in w:
                first *= a_kernel(u - x) / guard_pole("a", a_kernel(u + x), x)
                second *= a_kernel(x - u) * a_kernel(x + u - 2.0)
            value *= first + second
        return value

    def eigenvalue(self, roots, theta: complex) -> complex:
        """lambda(theta) at the global spectral parameter."""
        roots = self._check_roots(roots)
        return complex(self._level_value(0, complex(theta), roots))

    def pole_position(self, index: int, v: complex) -> complex:
        """Global theta of the apparent pole carried by a root."""
        return v + self.families[index].level

    # --- convenience ------------------------------------------------------------

    def empty_roots(self) -> BetheRootSet:
        return BetheRootSet(tuple(np.zeros(0, dtype=complex) for _ in self.families), source="vacuum")

    def fold_signs(self) -> tuple:
        return tuple(f.doubled for f in self.families)


def build_bae(model: BoundaryModel, L: int, counts: Sequence[int] = (),
              inhomogeneities: Optional[Sequence[complex]] = None,
              normalized: bool = False) -> BAESystem:
    system = BAESystem(model, L, counts, inhomogeneities, normalized)
    logger.debug("BAE for %s: families %s, counts %s, cartan %s",
                 model.label, system.labels, system.counts, system.cartan.tolist())
    return system


def bae_residual(system: BAESystem, roots) -> np.ndarray:
    """LHS - 1 per root, log-free."""
    return system.products(roots) - 1.0


def canonical_roots(system: BAESystem, roots: BetheRootSet) -> BetheRootSet:
    ordered = tuple(canonical_order(r, fold) for r, fold in zip(roots.roots, system.fold_signs()))
    return BetheRootSet(ordered, roots.residual_norm, roots.source, roots.branches)


def solve_bae(system: BAESystem, seed, branches: Optional[Sequence[int]] = None,
              tol: float = DEFAULT_TOL) -> BetheRootSet:
    """
    Newton solve from a seed, put in canonical order. Escaped, zero or
    coincident roots raise ConvergenceError.
    """
    seed_set = seed if isinstance(seed, BetheRootSet) else BetheRootSet.from_flat(seed, system.counts)
    seed_set = system._check_roots(seed_set)
    counts = system.counts

    def log_sums(v):
        return system.log_sums(BetheRootSet.from_flat(v, counts))

    def products(v):
        return system.products(BetheRootSet.from_flat(v, counts))

    result: SolverResult = solve_product_system(
        log_sums, products, seed_set.flat(),
        branches=np.asarray(branches) if branches is not None else None, tol=tol,
    )
    logger.info("solved %s roots of %s: residual %.3e (%s form)",
                sum(counts), system.model.label, result.residual_norm, result.method)
    solved = BetheRootSet.from_flat(result.roots, counts, residual_norm=result.residual_norm,
                                    source="solver", branches=tuple(int(b) for b in result.branches))
    screen_roots(solved.roots, system.fold_signs(), result.trace, result.residual_norm)
    return canonical_roots(system, solved)


def eigenvalue(system: BAESystem, roots, theta: complex) -> complex:
    return system.eigenvalue(roots, theta)


def vacuum_eigenvalue(system: BAESystem, theta: complex) -> complex:
    return system.eigenvalue(system.empty_roots(), theta)


def residue_check(system: BAESystem, roots, radius: float = RESIDUE_RADIUS,
                  points: int = RESIDUE_POINTS) -> np.ndarray:
    """
    Residue of lambda at every root's pole by contour averaging, relative to
    max(1, mean |lambda| on a wider circle around the same point).
    """
    roots = system._check_roots(roots)
    phases = np.exp(2j * np.pi * (np.arange(points) + 0.5) / points)
    out = []
    for f in range(len(system.families)):
        for v in roots.roots[f]:
            centre = system.pole_position(f, v)
            try:
                small = np.array([system.eigenvalue(roots, centre + radius * p) for p in phases])
                wide = np.array([system.eigenvalue(roots, centre + RESIDUE_SCALE_RADIUS * p) for p in phases])
            except PoleError as e:
                raise ParameterRangeError(f"root {v} of family {system.families[f].label} sits on a kernel pole") from e
            residue = np.mean(small * radius * phases)
            scale = max(1.0, float(np.mean(np.abs(wide))))
            out.append(abs(residue) / scale)
    return np.asarray(out, dtype=float)


def two_string(center: float, half_width: float = TWO_STRING_HALF_WIDTH) -> np.ndarray:
    """
    v = i*center -+ half_width, the pair listed as center +- half_width*i in
    v/i form. The default half-width keeps the pair off the s_1 pole.
    """
    return np.array([1j * center - half_width, 1j * center + half_width], dtype=complex)


def one_magnon_polynomial_roots(L: int, numerator: Sequence[float] = (1.0,),
                                denominator: Sequence[float] = (1.0,)) -> np.ndarray:
    """
    Roots of num(v)(v-1)^(2L) - den(v)(v+1)^(2L), the one-root equation
    rho(v) ((v-1)/(v+1))^(2L) = 1 with rho = num/den cleared of
    denominators. The fixed point v = 0 is dropped.
    """
    left = P.polymul(numerator, P.polypow([-1.0, 1.0], 2 * L))
    right = P.polymul(denominator, P.polypow([1.0, 1.0], 2 * L))
    poly = P.polysub(left, right)
    roots = P.polyroots(P.polytrim(poly, 1e-14))
    return roots[np.abs(roots) > 1e-9]
