# src/bethe_forge/integrability.py
"""
Residual-norm verifiers for the Yang-Baxter and reflection equations.

Every check returns a ResidualReport. Relative residuals divide by
max(1, scale), scale being the larger Frobenius norm of the two sides.
"""
from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Optional, Union
import logging

import numpy as np

from .catalog import AlgebraFamily, BoundaryModel, FamilyKind, build_r, build_r_crossed
from .config import DEFAULT_SEED, thread_limit
from .errors import PoleError, VerificationFailure
from .tensor_core import guard_pole, permutation_op, trace_op

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-10
ANNULUS = (0.1, 3.0)
POLE_MARGIN = 0.05
MAX_SKIPPED_SHARE = 0.25


class EquationId(str, Enum):
    YBE = "YBE"
    BYBE = "BYBE"
    CROSSED_BYBE = "crossed-BYBE"
    RMRM = "RMRM"
    TRT = "TRT"
    XXX_CROSSING = "XXX-crossing"
    OPERATOR = "operator-identity"


@dataclass(frozen=True)
class ResidualSample:
    params: tuple
    residual: float
    scale: float

    @property
    def relative(self) -> float:
        return self.residual / max(1.0, self.scale)

    def to_dict(self) -> dict:
        return {
            "params": [complex(p) for p in self.params],
            "residual": self.residual,
            "scale": self.scale,
            "relative": self.relative,
        }


@dataclass
class ResidualReport:
    equation_id: EquationId
    subject: str = ""
    samples: list = field(default_factory=list)
    seed: Optional[int] = None
    skipped: int = 0

    @property
    def max_relative_residual(self) -> float:
        if not self.samples:
            return float("inf")
        return max(s.relative for s in self.samples)

    def passed(self, tol: float = DEFAULT_TOLERANCE) -> bool:
        """False on a report without samples."""
        return bool(self.samples) and self.max_relative_residual < tol

    def require(self, tol: float = DEFAULT_TOLERANCE) -> "ResidualReport":
        if not self.passed(tol):
            if not self.samples:
                raise VerificationFailure(f"{self.equation_id.value} on {self.subject}: no samples evaluated",
                                          report=self)
            raise VerificationFailure(
                f"{self.equation_id.value} on {self.subject}: residual {self.max_relative_residual:.3e} >= {tol:.1e}",
                report=self,
            )
        return self

    def extend(self, other: "ResidualReport") -> "ResidualReport":
        self.samples.extend(other.samples)
        self.skipped += other.skipped
        return self

    def to_dict(self) -> dict:
        return {
            "equation_id": self.equation_id.value,
            "subject": self.subject,
            "seed": self.seed,
            "samples": [s.to_dict() for s in self.samples],
            "skipped": self.skipped,
            "max_relative_residual": self.max_relative_residual if self.samples else None,
        }


def compare(lhs: np.ndarray, rhs: np.ndarray, params: Iterable) -> ResidualSample:
    residual = float(np.linalg.norm(lhs - rhs))
    scale = float(max(np.linalg.norm(lhs), np.linalg.norm(rhs)))
    return ResidualSample(tuple(params), residual, scale)


def single_report(equation_id: EquationId, subject: str, lhs, rhs, params) -> ResidualReport:
    return ResidualReport(equation_id, subject, [compare(lhs, rhs, params)])


# --- Yang-Baxter ------------------------------------------------------------

RBuilder = Callable[[complex], np.ndarray]


def _r_builder(family: AlgebraFamily, r_builder: Optional[RBuilder]) -> RBuilder:
    if r_builder is not None:
        return r_builder
    return lambda u: build_r(family, u).entries


def check_ybe(family: AlgebraFamily, u1: complex, u2: complex,
              r_builder: Optional[RBuilder] = None) -> ResidualReport:
    """R12(u1-u2) R13(u1) R23(u2) = R23(u2) R13(u1) R12(u1-u2) on the triple space."""
    n = family.n
    r = _r_builder(family, r_builder)
    eye = np.eye(n)
    p23 = np.kron(eye, permutation_op(n).entries)

    def r12(u):
        return np.kron(r(u), eye)

    def r23(u):
        return np.kron(eye, r(u))

    def r13(u):
        return p23 @ r12(u) @ p23

    lhs = r12(u1 - u2) @ r13(u1) @ r23(u2)
    rhs = r23(u2) @ r13(u1) @ r12(u1 - u2)
    return single_report(EquationId.YBE, family.label, lhs, rhs, (u1, u2))


# --- reflection equations ----------------------------------------------------

KSource = Union[BoundaryModel, Callable[[complex], np.ndarray]]


def k_callable(source: KSource) -> Callable[[complex], np.ndarray]:
    if isinstance(source, BoundaryModel):
        return source.matrix
    if callable(source):
        return source
    matrix = np.asarray(source, dtype=complex)
    return lambda u: matrix


def check_bybe(family: AlgebraFamily, source: KSource, u1: complex, u2: complex,
               r_builder: Optional[RBuilder] = None) -> ResidualReport:
    """R12(u1-u2) K1(u1) R21(u1+u2) K2(u2) = K2(u2) R12(u1+u2) K1(u1) R21(u1-u2)."""
    n = family.n
    r = _r_builder(family, r_builder)
    k = k_callable(source)
    eye = np.eye(n)
    p = permutation_op(n).entries

    def r21(u):
        return p @ r(u) @ p

    k1 = np.kron(k(u1), eye)
    k2 = np.kron(eye, k(u2))
    lhs = r(u1 - u2) @ k1 @ r21(u1 + u2) @ k2
    rhs = k2 @ r(u1 + u2) @ k1 @ r21(u1 - u2)
    label = source.label if isinstance(source, BoundaryModel) else "custom K"
    return single_report(EquationId.BYBE, f"{family.label} {label}", lhs, rhs, (u1, u2))


def su4_r(u: complex) -> np.ndarray:
    return build_r(AlgebraFamily("su", 4), u).entries


def su4_r_crossed(u: complex) -> np.ndarray:
    """R^{t_2}(4-u) = I - 2 K/(4-u) for the su(4) fundamental."""
    return np.eye(16) - 2.0 / guard_pole("Rbar_su(4)", 4.0 - u, u) * trace_op(4).entries


def check_crossed_bybe(source: KSource, u1: complex, u2: complex) -> ResidualReport:
    """
    R(u1-u2) (K(u1) x I) Rbar(u1+u2) (I x K(u2))
        = (I x K(u2)) Rbar(u1+u2) (K(u1) x I) R(u1-u2)
    for su(4), Rbar being the particle-antiparticle R-matrix.
    """
    k = k_callable(source)
    eye = np.eye(4)
    k1 = np.kron(k(u1), eye)
    k2 = np.kron(eye, k(u2))
    lhs = su4_r(u1 - u2) @ k1 @ su4_r_crossed(u1 + u2) @ k2
    rhs = k2 @ su4_r_crossed(u1 + u2) @ k1 @ su4_r(u1 - u2)
    return single_report(EquationId.CROSSED_BYBE, "su(4)", lhs, rhs, (u1, u2))


# --- sampling suites ---------------------------------------------------------

def sample_parameter_pairs(count: int, seed: int = DEFAULT_SEED, poles: Iterable[float] = (0.0,),
                           annulus: tuple = ANNULUS, margin: float = POLE_MARGIN) -> list:
    """
    Complex pairs (u1, u2) in the annulus; u1, u2, u1-u2 and u1+u2 keep at
    least `margin` away from each listed pole.
    """
    rng = np.random.default_rng(seed)
    poles = tuple(poles)
    pairs = []
    while len(pairs) < count:
        radius = rng.uniform(*annulus, size=2)
        phase = rng.uniform(0.0, 2 * np.pi, size=2)
        u1, u2 = radius * np.exp(1j * phase)
        points = (u1, u2, u1 - u2, u1 + u2)
        if all(abs(v - p) > margin for v in points for p in poles):
            pairs.append((complex(u1), complex(u2)))
    return pairs


def _run_pairs(check: Callable[[complex, complex], ResidualReport], pairs: list,
               equation_id: EquationId, subject: str, seed: int) -> ResidualReport:
    """
    Evaluate a check on every pair. Pairs that hit a pole are skipped; more
    than MAX_SKIPPED_SHARE of them skipped raises VerificationFailure.
    """
    report = ResidualReport(equation_id, subject, seed=seed)

    def one(pair):
        try:
            return check(*pair).samples
        except PoleError as e:
            logger.debug("skipping sample %s: %s", pair, e)
            return None

    with ThreadPoolExecutor(max_workers=thread_limit()) as pool:
        for samples in pool.map(one, pairs):
            if samples is None:
                report.skipped += 1
            else:
                report.samples.extend(samples)
    if report.skipped:
        logger.warning("%s on %s: %d of %d samples hit a pole and were skipped",
                       equation_id.value, subject, report.skipped, len(pairs))
    if pairs and report.skipped > MAX_SKIPPED_SHARE * len(pairs):
        raise VerificationFailure(
            f"{equation_id.value} on {subject}: {report.skipped} of {len(pairs)} samples hit a pole",
            report=report,
        )
    logger.debug("%s on %s: max relative residual %.3e over %d samples",
                 equation_id.value, subject, report.max_relative_residual, len(report.samples))
    return report


def ybe_suite(family: AlgebraFamily, count: int = 20, seed: int = DEFAULT_SEED) -> ResidualReport:
    pairs = sample_parameter_pairs(count, seed, family.poles())
    return _run_pairs(lambda a, b: check_ybe(family, a, b), pairs, EquationId.YBE, family.label, seed)


def bybe_suite(model: BoundaryModel, count: int = 20, seed: int = DEFAULT_SEED,
               source: Optional[KSource] = None) -> ResidualReport:
    family = model.family
    pairs = sample_parameter_pairs(count, seed, family.poles())
    k = source if source is not None else model
    return _run_pairs(lambda a, b: check_bybe(family, k, a, b), pairs, EquationId.BYBE,
                      f"{family.label} {model.label}", seed)


def crossed_bybe_suite(source: KSource, count: int = 20, seed: int = DEFAULT_SEED) -> ResidualReport:
    pairs = sample_parameter_pairs(count, seed, (0.0, 4.0))
    return _run_pairs(lambda a, b: check_crossed_bybe(source, a, b), pairs,
                      EquationId.CROSSED_BYBE, "su(4)", seed)


def check_twisted_bybe(family: AlgebraFamily, source: KSource, u1: complex, u2: complex) -> ResidualReport:
    """
    R(u1-u2) K1(u1) Rbar(u1+u2) K2(u2) = K2(u2) Rbar(u1+u2) K1(u1) R(u1-u2),
    the reflection equation of boundaries that turn particles into antiparticles.
    """
    n = family.n
    k = k_callable(source)
    eye = np.eye(n)
    k1 = np.kron(k(u1), eye)
    k2 = np.kron(eye, k(u2))
    r = build_r(family, u1 - u2).entries
    rbar = build_r_crossed(family, u1 + u2).entries
    lhs = r @ k1 @ rbar @ k2
    rhs = k2 @ rbar @ k1 @ r
    label = source.label if isinstance(source, BoundaryModel) else "custom K"
    return single_report(EquationId.CROSSED_BYBE, f"{family.label} {label}", lhs, rhs, (u1, u2))


def reflection_suite(model: BoundaryModel, count: int = 20, seed: int = DEFAULT_SEED,
                     source: Optional[KSource] = None) -> ResidualReport:
    """The reflection equation a catalog case satisfies: twisted for su(n) cases that break the rank."""
    if model.family.kind is FamilyKind.UNITARY and not model.rank_preserving:
        family = model.family
        pairs = sample_parameter_pairs(count, seed, (0.0, float(family.crossing_shift)))
        k = source if source is not None else model
        return _run_pairs(lambda a, b: check_twisted_bybe(family, k, a, b), pairs,
                          EquationId.CROSSED_BYBE, f"{family.label} {model.label}", seed)
    return bybe_suite(model, count, seed, source)


def unitarity_scalar(family: AlgebraFamily, u: complex) -> complex:
    """
    Measured scalar c in R(u) R(-u) = c I. With the normalization of build_r
    it is 1 - 4/u^2 for su(n), so(n) and sp(n) alike.
    """
    prod = build_r(family, u).entries @ build_r(family, -u).entries
    return complex(np.trace(prod) / prod.shape[0])


__all__ = [
    "EquationId", "ResidualSample", "ResidualReport", "check_ybe", "check_bybe",
    "check_crossed_bybe", "sample_parameter_pairs", "ybe_suite", "bybe_suite",
    "crossed_bybe_suite", "unitarity_scalar",
]
