# src/bethe_forge/__init__.py
from __future__ import annotations
from .catalog import AlgebraFamily, BoundaryModel, build_k, build_r, so
from .chain import SpinChain, dense_spectrum, double_row_transfer
from .bae import BAESystem, BetheRootSet, build_bae, solve_bae
from .states import phi_state, eigencheck
from .errors import (
    BetheForgeError,
    ConvergenceError,
    DimensionGuardError,
    ParameterRangeError,
    PoleError,
    VerificationFailure,
)

__all__ = [
    "AlgebraFamily",
    "BoundaryModel",
    "build_k",
    "build_r",
    "so",
    "SpinChain",
    "dense_spectrum",
    "double_row_transfer",
    "BAESystem",
    "BetheRootSet",
    "build_bae",
    "solve_bae",
    "phi_state",
    "eigencheck",
    "BetheForgeError",
    "ConvergenceError",
    "DimensionGuardError",
    "ParameterRangeError",
    "PoleError",
    "VerificationFailure",
]
