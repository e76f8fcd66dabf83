# src/bethe_forge/catalog.py
"""
R-matrices of the su/so/sp families and the catalog of boundary K-matrices.

K-matrices are kept exactly in their displayed (un-normalized) form;
`BoundaryModel.normalization` returns the scalar that turns them into the
ratio form used by the nested closed-form expressions.
"""
from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple, Optional
import logging
import re

import numpy as np

from .errors import ParameterRangeError
from .tensor_core import (
    TwoSiteOperator,
    guard_pole,
    identity_op,
    permutation_op,
    sp_form_op,
    sp_unit,
    trace_op,
)

logger = logging.getLogger(__name__)


class FamilyKind(str, Enum):
    UNITARY = "su"
    ORTHOGONAL = "so"
    SYMPLECTIC = "sp"


@dataclass(frozen=True)
class AlgebraFamily:
    kind: FamilyKind
    n: int

    def __post_init__(self):
        object.__setattr__(self, "kind", FamilyKind(self.kind))
        if self.n < 2:
            raise ParameterRangeError(f"{self.kind.value}({self.n}): dimension must be >= 2")
        if self.kind is FamilyKind.SYMPLECTIC and self.n % 2:
            raise ParameterRangeError(f"sp({self.n}): symplectic family needs an even dimension")
        if self.kind is FamilyKind.ORTHOGONAL and self.n < 3:
            raise ParameterRangeError(f"so({self.n}): orthogonal family needs n >= 3")

    @classmethod
    def parse(cls, text: str) -> "AlgebraFamily":
        match = re.fullmatch(r"\s*(su|so|sp)\s*\(?\s*(\d+)\s*\)?\s*", text.lower())
        if not match:
            raise ParameterRangeError(f"cannot parse algebra family {text!r}; expected e.g. so(6)")
        return cls(FamilyKind(match.group(1)), int(match.group(2)))

    @property
    def label(self) -> str:
        return f"{self.kind.value}({self.n})"

    @property
    def rank(self) -> int:
        if self.kind is FamilyKind.UNITARY:
            return self.n - 1
        return self.n // 2

    @property
    def is_odd_orthogonal(self) -> bool:
        return self.kind is FamilyKind.ORTHOGONAL and self.n % 2 == 1

    @property
    def crossing_shift(self) -> int:
        """rho in u_hat = rho - u."""
        if self.kind is FamilyKind.ORTHOGONAL:
            return self.n - 2
        if self.kind is FamilyKind.SYMPLECTIC:
            return self.n + 2
        return self.n

    def poles(self) -> tuple:
        if self.kind is FamilyKind.UNITARY:
            return (0.0,)
        return (0.0, float(self.crossing_shift))


def so(n: int) -> AlgebraFamily:
    return AlgebraFamily(FamilyKind.ORTHOGONAL, n)


def build_r(family: AlgebraFamily, u: complex) -> TwoSiteOperator:
    """
    su(n): I - (2/u) P
    so(n): I - (2/u) P - 2/(n-2-u) K
    sp(n): I - (2/u) P - 2/(n+2-u) UU
    """
    n = family.n
    d = -2.0 / guard_pole(f"R_{family.label}", u)
    out = identity_op(n).entries + d * permutation_op(n).entries
    if family.kind is FamilyKind.ORTHOGONAL:
        out = out - 2.0 / guard_pole(f"R_{family.label}", family.crossing_shift - u, u) * trace_op(n).entries
    elif family.kind is FamilyKind.SYMPLECTIC:
        out = out - 2.0 / guard_pole(f"R_{family.label}", family.crossing_shift - u, u) * sp_form_op(n).entries
    return TwoSiteOperator(n, out, f"R_{family.label}")


def build_r_crossed(family: AlgebraFamily, u: complex) -> TwoSiteOperator:
    """R between a representation and its conjugate, R^{t_2}(rho - u)."""
    n = family.n
    r = build_r(family, family.crossing_shift - u).as_tensor()
    crossed = np.transpose(r, (0, 3, 2, 1)).reshape(n * n, n * n)
    return TwoSiteOperator(n, crossed, f"Rbar_{family.label}")


# --- catalog ---------------------------------------------------------------

def _diag_split(n_first: int, first: complex, n_rest: int, rest: complex) -> np.ndarray:
    return np.diag(np.concatenate([np.full(n_first, first), np.full(n_rest, rest)])).astype(complex)


def _o2_block(n: int, p: float, c: complex, u: complex) -> np.ndarray:
    k = np.zeros((n, n), dtype=complex)
    k[0, 0] = k[1, 1] = p * p - c * c - u * u
    k[0, 1] = 2j * c * u
    k[1, 0] = -2j * c * u
    for i in range(2, n):
        k[i, i] = (p - u) ** 2 - c * c
    return k


def _u_n_block(n: int, c: complex, u: complex) -> np.ndarray:
    h = n // 2
    eye = np.eye(h)
    return np.block([[c * eye, 1j * u * eye], [-1j * u * eye, c * eye]]).astype(complex)


class CaseSpec(NamedTuple):
    case_id: str
    kind: FamilyKind
    rank_preserving: bool
    free_param_count: int
    residual: Callable[[AlgebraFamily, int], str]
    valid: Callable[[AlgebraFamily, int], bool]
    range_text: str
    matrix: Callable[[AlgebraFamily, int, complex, complex], np.ndarray]
    normalization: Callable[[AlgebraFamily, int, complex, complex], complex]
    description: str


def _half_n(f: AlgebraFamily) -> int:
    return f.n // 2


def _odd_rank(f: AlgebraFamily) -> int:
    return (f.n - 1) // 2


CASES: dict[str, CaseSpec] = {}


def _register(spec: CaseSpec) -> None:
    CASES[spec.case_id] = spec


_register(CaseSpec(
    "An_a", FamilyKind.UNITARY, True, 1,
    lambda f, k: f"su({k})+su({f.n - k})+u(1)" if k > 1 else f"su({f.n - 1})+u(1)",
    lambda f, k: 1 <= k <= f.n // 2,
    "1 <= k <= n/2",
    lambda f, k, c, u: _diag_split(k, c + u, f.n - k, c - u),
    lambda f, k, c, u: c - u,
    "diag((c+u) I_k, (c-u) I_(n-k))",
))
_register(CaseSpec(
    "An_b", FamilyKind.UNITARY, False, 0,
    lambda f, k: f"so({f.n})",
    lambda f, k: k == 0,
    "no index",
    lambda f, k, c, u: np.eye(f.n, dtype=complex),
    lambda f, k, c, u: 1.0,
    "unit matrix (particle to antiparticle)",
))
_register(CaseSpec(
    "An_c", FamilyKind.UNITARY, False, 0,
    lambda f, k: f"sp({f.n})",
    lambda f, k: k == 0 and f.n % 2 == 0,
    "n even",
    lambda f, k, c, u: sp_unit(f.n),
    lambda f, k, c, u: 1.0,
    "[[0, I], [-I, 0]] (particle to antiparticle)",
))
_register(CaseSpec(
    "Bn_a", FamilyKind.ORTHOGONAL, True, 0,
    lambda f, k: f"so({2 * k})+so({f.n - 2 * k})" if k < _odd_rank(f) else f"so({2 * k})",
    lambda f, k: f.n % 2 == 1 and ((1 < k < _odd_rank(f) - 1) or k == _odd_rank(f)),
    "1 < k < N-1 or k = N",
    lambda f, k, c, u: _diag_split(2 * k, _odd_rank(f) + 0.5 - 2 * k + u,
                                   f.n - 2 * k, _odd_rank(f) + 0.5 - 2 * k - u),
    lambda f, k, c, u: _odd_rank(f) + 0.5 - 2 * k - u,
    "diag((N+1/2-2k+u) I_2k, (N+1/2-2k-u) I_(2N+1-2k))",
))
_register(CaseSpec(
    "Bn_b", FamilyKind.ORTHOGONAL, True, 1,
    lambda f, k: f"so({f.n - 2})+u(1)",
    lambda f, k: f.n % 2 == 1 and k == 0,
    "no index",
    lambda f, k, c, u: _o2_block(f.n, _odd_rank(f) - 1.5, c, u),
    lambda f, k, c, u: (_odd_rank(f) - 1.5 - u) ** 2 - c * c,
    "O(2) block with p = N-3/2, ((p-u)^2-c^2) I elsewhere",
))
_register(CaseSpec(
    "Cn_a", FamilyKind.SYMPLECTIC, True, 0,
    lambda f, k: f"sp({2 * k})+sp({f.n - 2 * k})",
    lambda f, k: 1 < k <= _half_n(f) // 2,
    "1 < k <= N/2",
    lambda f, k, c, u: np.diag(np.tile(np.concatenate([
        np.full(k, _half_n(f) - 2 * k + u), np.full(_half_n(f) - k, _half_n(f) - 2 * k - u)]), 2)).astype(complex),
    lambda f, k, c, u: _half_n(f) - 2 * k - u,
    "diag((N-2k+u) I_k, (N-2k-u) I_(N-k)) repeated on both halves",
))
_register(CaseSpec(
    "Cn_b", FamilyKind.SYMPLECTIC, True, 1,
    lambda f, k: f"su({_half_n(f)})+u(1)",
    lambda f, k: k == 0,
    "no index",
    lambda f, k, c, u: _u_n_block(f.n, c, u),
    lambda f, k, c, u: 1.0,
    "[[c I, iu I], [-iu I, c I]]",
))
_register(CaseSpec(
    "Dn_a", FamilyKind.ORTHOGONAL, True, 0,
    lambda f, k: f"so({2 * k})+so({f.n - 2 * k})" if k else f"so({f.n})",
    lambda f, k: f.n % 2 == 0 and (k == 0 or 1 < k <= _half_n(f) // 2),
    "k = 0 or 1 < k <= N/2",
    lambda f, k, c, u: _diag_split(2 * k, _half_n(f) - 2 * k + u, f.n - 2 * k, _half_n(f) - 2 * k - u),
    lambda f, k, c, u: _half_n(f) - 2 * k - u,
    "diag((N-2k+u) I_2k, (N-2k-u) I_(2N-2k))",
))
_register(CaseSpec(
    "Dn_b", FamilyKind.ORTHOGONAL, True, 1,
    lambda f, k: f"so({f.n - 2})+u(1)",
    lambda f, k: f.n % 2 == 0 and k == 0,
    "no index",
    lambda f, k, c, u: _o2_block(f.n, _half_n(f) - 2, c, u),
    lambda f, k, c, u: (_half_n(f) - 2 - u) ** 2 - c * c,
    "O(2) block with p = N-2, ((p-u)^2-c^2) I elsewhere",
))
_register(CaseSpec(
    "Dn_c", FamilyKind.ORTHOGONAL, True, 1,
    lambda f, k: f"su({_half_n(f)})+u(1)",
    lambda f, k: f.n % 2 == 0 and k == 0,
    "no index",
    lambda f, k, c, u: _u_n_block(f.n, c, u),
    lambda f, k, c, u: 1.0,
    "[[c I, iu I], [-iu I, c I]]",
))
_register(CaseSpec(
    "Dn_d", FamilyKind.ORTHOGONAL, False, 0,
    lambda f, k: f"so({2 * k + 1})+so({f.n - 2 * k - 1})" if k else f"so({f.n - 1})",
    lambda f, k: f.n % 2 == 0 and 0 <= k and 2 * k < _half_n(f),
    "0 <= k < N/2",
    lambda f, k, c, u: _diag_split(2 * k + 1, _half_n(f) - 2 * k - 1 + u,
                                   f.n - 2 * k - 1, _half_n(f) - 2 * k - 1 - u),
    lambda f, k, c, u: _half_n(f) - 2 * k - 1 - u,
    "diag((N-2k-1+u) I_(2k+1), (N-2k-1-u) I_(2N-2k-1))",
))


def _mxrest_ratio(f: AlgebraFamily, m: int, u: complex) -> complex:
    a = _odd_rank(f) + 0.5 - 2 * m
    return (a + u) / guard_pole("appA_MxRest", a - u, u)


_register(CaseSpec(
    "appA_MxRest", FamilyKind.ORTHOGONAL, True, 0,
    lambda f, k: f"so({2 * k})+so({f.n - 2 * k})" if 0 < k < _odd_rank(f) + 1 else f"so({f.n})" if k == 0 else f"so({2 * k})",
    lambda f, k: f.n % 2 == 1 and 0 <= k <= _odd_rank(f),
    "0 <= M <= N",
    lambda f, k, c, u: _diag_split(2 * k, _mxrest_ratio(f, k, u), f.n - 2 * k, 1.0),
    lambda f, k, c, u: 1.0,
    "diag(c(u) I_2M, I_(2N-2M+1)), c(u) = (N+1/2-2M+u)/(N+1/2-2M-u)",
))


def _o2_normalized(f: AlgebraFamily, c: complex, u: complex) -> np.ndarray:
    p = _odd_rank(f) - 1.5
    return _o2_block(f.n, p, c, u) / guard_pole("appA_O2", (p - u) ** 2 - c * c, u)


_register(CaseSpec(
    "appA_O2", FamilyKind.ORTHOGONAL, True, 1,
    lambda f, k: f"u(1)+so({f.n - 2})",
    lambda f, k: f.n % 2 == 1 and k == 0,
    "no index",
    lambda f, k, c, u: _o2_normalized(f, c, u),
    lambda f, k, c, u: 1.0,
    "ratio-normalized O(2) block with p = N-3/2, I elsewhere",
))


@dataclass(frozen=True)
class BoundaryModel:
    case_id: str
    family: AlgebraFamily
    k: int = 0
    c: Optional[complex] = None

    def __post_init__(self):
        spec = CASES.get(self.case_id)
        if spec is None:
            raise ParameterRangeError(f"unknown boundary case {self.case_id!r}; known: {', '.join(CASES)}")
        if spec.kind is not self.family.kind:
            raise ParameterRangeError(
                f"{self.case_id} belongs to the {spec.kind.value} family, not {self.family.label}"
            )
        if not spec.valid(self.family, self.k):
            raise ParameterRangeError(
                f"{self.case_id} on {self.family.label}: index {self.k} outside {spec.range_text}"
            )
        if spec.free_param_count and self.c is None:
            raise ParameterRangeError(f"{self.case_id} needs the free parameter c")
        if not spec.free_param_count and self.c is not None:
            raise ParameterRangeError(f"{self.case_id} takes no free parameter")

    @property
    def spec(self) -> CaseSpec:
        return CASES[self.case_id]

    @property
    def residual_algebra(self) -> str:
        return self.spec.residual(self.family, self.k)

    @property
    def rank_preserving(self) -> bool:
        return self.spec.rank_preserving

    @property
    def free_param_count(self) -> int:
        return self.spec.free_param_count

    @property
    def label(self) -> str:
        extra = f", c={self.c}" if self.c is not None else ""
        return f"{self.case_id}[{self.family.label}, k={self.k}{extra}]"

    def matrix(self, u: complex) -> np.ndarray:
        return self.spec.matrix(self.family, self.k, self.c or 0.0, u)

    def normalization(self, u: complex) -> complex:
        return self.spec.normalization(self.family, self.k, self.c or 0.0, u)

    def ratio_matrix(self, u: complex) -> np.ndarray:
        return self.matrix(u) / guard_pole(self.case_id, self.normalization(u), u)

    def nesting_frame(self) -> np.ndarray:
        """Coordinate order in which the nesting reads the K-matrix."""
        n = self.family.n
        order = list(range(n))
        if self.case_id == "Dn_d":
            odd = 2 * self.k
            order = order[:odd] + order[odd + 1:] + [odd]
        elif self.case_id == "Dn_c":
            h = n // 2
            order = [j for pair in zip(range(h), range(h, n)) for j in pair]
        return np.asarray(order)


def build_k(model: BoundaryModel, u: complex) -> np.ndarray:
    return model.matrix(u)


def split_boundary(n: int, m: int, u: complex) -> np.ndarray:
    """O(m) x O(n-m) reflection diag(c(u) I_m, I_(n-m)), c(u) = (n/2-m+u)/(n/2-m-u)."""
    if not 0 <= m <= n:
        raise ParameterRangeError(f"split index {m} outside 0..{n}")
    a = n / 2.0 - m
    c = (a + u) / guard_pole("split", a - u, u)
    return _diag_split(m, c, n - m, 1.0)


def identity_model(family: AlgebraFamily) -> BoundaryModel:
    if family.kind is FamilyKind.ORTHOGONAL:
        if family.n % 2:
            return BoundaryModel("appA_MxRest", family, 0)
        return BoundaryModel("Dn_a", family, 0)
    if family.kind is FamilyKind.UNITARY:
        return BoundaryModel("An_b", family, 0)
    raise ParameterRangeError(f"no identity boundary registered for {family.label}")


def catalog_rows() -> list[dict]:
    """Machine-readable catalog listing."""
    rows = []
    for spec in CASES.values():
        rows.append({
            "case_id": spec.case_id,
            "family": spec.kind.value,
            "rank_preserving": spec.rank_preserving,
            "free_param_count": spec.free_param_count,
            "params": spec.range_text,
            "k_matrix": spec.description,
        })
    return rows
