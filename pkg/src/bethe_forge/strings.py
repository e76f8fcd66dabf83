# src/bethe_forge/strings.py
"""
Root sets with near-exact strings.

A string is a chain of roots of one family,

    v_0,   v_k = v_(k-1) + step + g_k,

whose gaps g_k are small, so that every link factor s_A(v_k - v_(k-1))
sits next to a pole or a zero. The head v_0 is free, or pinned at
anchor + g_0 next to a zero of the boundary factor.

The solve replaces the equations E_m = 1 of the members by

    head:    prod_(all members) E_m = 1
    link k:  prod_(m >= k) E_m = 1

Links cancel in pairs inside these products, and the one link factor left
in a link equation is evaluated from g_k itself. Gaps are unknowns in log
coordinates, where the equations are close to linear.
"""
from __future__ import annotations
from dataclasses import dataclass
from typing import Optional, Sequence, Union
import logging

import numpy as np

from .bae import BAESystem, BetheRootSet, canonical_roots
from .errors import ConvergenceError, ParameterRangeError, PoleError
from .solver import (
    DEFAULT_TOL,
    accepted,
    branch_numbers,
    rounding_floor,
    screen_roots,
    solve_regular_system,
)
from .tensor_core import guard_pole

logger = logging.getLogger(__name__)

MIN_SEED_GAP = 1e-3
MAX_WARM_GAP = 0.5
WARM_SWEEPS = 3


def _off_zero(gap: complex) -> complex:
    return gap if abs(gap) >= MIN_SEED_GAP else complex(MIN_SEED_GAP)


@dataclass(frozen=True)
class StringSeed:
    """
    Seed of one string. Gap seeds closer to zero than MIN_SEED_GAP are moved
    out to it; the warm start fixes their size and sign.
    """
    head: complex
    gaps: tuple = ()
    step: float = 1.0
    anchor: Optional[complex] = None

    def __post_init__(self):
        object.__setattr__(self, "head", complex(self.head))
        object.__setattr__(self, "gaps", tuple(_off_zero(complex(g)) for g in self.gaps))
        if self.anchor is not None:
            object.__setattr__(self, "anchor", complex(self.anchor))
            if abs(self.head - self.anchor) < 1e-12:
                raise ParameterRangeError(f"the head of an anchored string must start off its anchor {self.anchor}")

    @property
    def size(self) -> int:
        return 1 + len(self.gaps)

    def members(self) -> np.ndarray:
        out = [self.head]
        for g in self.gaps:
            out.append(out[-1] + self.step + g)
        return np.asarray(out, dtype=complex)


SeedItem = Union[complex, StringSeed]


def string_seed(center: float, half_width: float, spacing: float = 1.0) -> StringSeed:
    """The 2-string v = i*center -+ half_width, listed as center +- half_width*i."""
    return StringSeed(1j * center - half_width, (2.0 * half_width - spacing,), spacing)


def seed_roots(items: Sequence[SeedItem]) -> np.ndarray:
    """Plain root values of one family's seed items."""
    out = []
    for item in items:
        if isinstance(item, StringSeed):
            out.extend(item.members())
        else:
            out.append(complex(item))
    return np.asarray(out, dtype=complex)


def _wrap(z: complex) -> complex:
    """Principal value of a sum of logarithms."""
    return z - 2j * np.pi * np.rint(z.imag / (2 * np.pi))


def _link_factor(step: float, gap: complex, a: int) -> complex:
    """s_A(step + gap) without forming step + gap - A from rounded roots."""
    return ((step + a) + gap) / guard_pole("link", (step - a) + gap, gap)


class StringLayout:
    """Unknowns and equations of a string-form solve, family by family."""

    def __init__(self, system: BAESystem, seeds: Sequence[Sequence[SeedItem]]):
        if len(seeds) != len(system.families):
            raise ParameterRangeError(
                f"seeds for {len(seeds)} families given; {system.model.label} has {len(system.families)}"
            )
        self.system = system
        self.items = [tuple(i if isinstance(i, StringSeed) else complex(i) for i in family) for family in seeds]
        counts = tuple(sum(i.size if isinstance(i, StringSeed) else 1 for i in family) for family in self.items)
        if counts != system.counts:
            raise ParameterRangeError(f"seeds hold {counts} roots, the equations expect {system.counts}")

    def seed(self) -> np.ndarray:
        x = []
        for family in self.items:
            for item in family:
                if isinstance(item, StringSeed):
                    x.append(item.head if item.anchor is None else np.log(item.head - item.anchor))
                    x.extend(np.log(g) for g in item.gaps)
                else:
                    x.append(item)
        return np.asarray(x, dtype=complex)

    def roots(self, x: np.ndarray) -> BetheRootSet:
        groups, p = [], 0
        for family in self.items:
            values = []
            for item in family:
                if isinstance(item, StringSeed):
                    values.append(x[p] if item.anchor is None else item.anchor + np.exp(x[p]))
                    p += 1
                    for _ in item.gaps:
                        values.append(values[-1] + item.step + np.exp(x[p]))
                        p += 1
                else:
                    values.append(x[p])
                    p += 1
            groups.append(np.asarray(values, dtype=complex))
        return BetheRootSet(tuple(groups))

    def _reduced_log(self, roots: BetheRootSet, f: int, members: list, m: int) -> complex:
        """log of E_m with the link factors to its neighbours in the string left out."""
        skip = {members[i] for i in (m - 1, m + 1) if 0 <= i < len(members)}
        factors = self.system.factors(roots, f, members[m], skip)
        return complex(np.sum(np.log(np.asarray(factors, dtype=complex))))

    def _walk(self):
        """(family, string, first root index, first unknown index) for every string."""
        p = 0
        for f, family in enumerate(self.items):
            j = 0
            for item in family:
                size = item.size if isinstance(item, StringSeed) else 1
                yield f, item, j, p
                j += size
                p += size

    def equations(self, x: np.ndarray) -> np.ndarray:
        roots = self.roots(x)
        out = []
        for f, item, j, p in self._walk():
            if not isinstance(item, StringSeed):
                factors = self.system.factors(roots, f, j)
                out.append(_wrap(complex(np.sum(np.log(np.asarray(factors, dtype=complex))))))
                continue
            a = self.system.families[f].self_coupling
            members = list(range(j, j + item.size))
            reduced = [self._reduced_log(roots, f, members, m) for m in range(item.size)]
            out.append(_wrap(sum(reduced)))
            for k in range(1, item.size):
                link = np.log(_link_factor(item.step, np.exp(x[p + k]), a))
                out.append(_wrap(link + sum(reduced[k:])))
        return np.asarray(out, dtype=complex)

    def warm_start(self, x: np.ndarray, sweeps: int = WARM_SWEEPS) -> np.ndarray:
        """
        Move every gap to the value its link equation predicts from the rest:
        s_A(x) H = 1 gives x = A (1 + H)/(1 - H).
        """
        x = np.array(x, dtype=complex)
        with np.errstate(all="ignore"):
            for _ in range(sweeps):
                for f, item, j, p in self._walk():
                    if not isinstance(item, StringSeed):
                        continue
                    a = self.system.families[f].self_coupling
                    members = list(range(j, j + item.size))
                    for k in range(item.size - 1, 0, -1):
                        try:
                            roots = self.roots(x)
                            tail = sum(self._reduced_log(roots, f, members, m) for m in range(k, item.size))
                        except PoleError:
                            continue
                        h = np.exp(tail)
                        gap = a * (1.0 + h) / (1.0 - h) - item.step
                        if np.isfinite(gap) and 0.0 < abs(gap) < MAX_WARM_GAP:
                            x[p + k] = np.log(gap)
        return x


def solve_strings(system: BAESystem, seeds: Sequence[Sequence[SeedItem]],
                  tol: float = DEFAULT_TOL) -> BetheRootSet:
    """
    Solve from per-family seeds mixing plain roots and StringSeed chains.
    The plain equations are checked at the end, up to their rounding floor.
    """
    layout = StringLayout(system, seeds)
    x0 = layout.warm_start(layout.seed())
    if x0.size == 0:
        return system.empty_roots()
    x, residual, trace = solve_regular_system(layout.equations, x0, tol)
    solved = layout.roots(x)

    def products(v):
        return system.products(BetheRootSet.from_flat(v, system.counts))

    try:
        plain = float(np.max(np.abs(system.products(solved) - 1.0)))
    except PoleError as e:
        raise ConvergenceError(f"the string solution sits on a pole: {e}", trace=trace, residual=residual) from e
    floor = rounding_floor(products, solved.flat()) if not plain < tol else 0.0
    if not accepted(plain, tol, floor):
        raise ConvergenceError(
            f"string solution leaves the Bethe equations at {plain:.3e} (rounding floor {floor:.1e})",
            trace=trace, residual=plain,
        )
    screen_roots(solved.roots, system.fold_signs(), trace, plain)
    try:
        branches = tuple(int(b) for b in branch_numbers(system.log_sums(solved)))
    except PoleError:
        branches = ()
    logger.info("solved %s roots of %s in string form: residual %.3e, floor %.1e",
                sum(system.counts), system.model.label, plain, floor)
    return canonical_roots(system, BetheRootSet(solved.roots, plain, "solver", branches))
