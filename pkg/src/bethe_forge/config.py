# src/bethe_forge/config.py
"""
Run configuration.

Resolution order, lowest first: built-in defaults, the [run] section of the
config file, the [<command>] section, the environment, the command line.
"""
from __future__ import annotations
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Optional
import configparser
import logging
import os

from .errors import ParameterRangeError
from . import paths

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240607
ENV_THREADS = "BETHE_FORGE_THREADS"
FORMATS = ("json", "csv")


@dataclass
class RunConfig:
    command: str = "run"
    family: str = "so(3)"
    case_id: Optional[str] = None
    N: Optional[int] = None
    M: int = 0
    c: Optional[complex] = None
    L: int = 2
    magnons: tuple = ()
    theta: tuple = (0.37, 0.63, 1.21)
    seed_file: Optional[Path] = None
    tol: float = 1e-10
    out: Optional[Path] = None
    format: str = "json"
    threads: Optional[int] = None
    basis: str = "real"
    seed: int = DEFAULT_SEED
    dense_limit: int = 4096
    corrupt: bool = False

    def as_params(self) -> dict:
        """JSON-friendly view used in export metadata."""
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, Path):
                value = str(value)
            elif isinstance(value, complex):
                value = {"re": value.real, "im": value.imag}
            elif isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ParameterRangeError(f"cannot read {text!r} as a boolean")


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError as e:
        raise ParameterRangeError(f"cannot read {text!r} as a complex number") from e


def _parse_tuple(text: str, item) -> tuple:
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    return tuple(item(p.strip()) for p in parts)


def _float_or_complex(text: str):
    value = _parse_complex(text)
    return value.real if value.imag == 0 else value


_PARSERS = {
    "command": str,
    "family": str,
    "case_id": str,
    "N": int,
    "M": int,
    "c": _parse_complex,
    "L": int,
    "magnons": lambda t: _parse_tuple(t, int),
    "theta": lambda t: _parse_tuple(t, _float_or_complex),
    "seed_file": lambda t: Path(t).expanduser(),
    "tol": float,
    "out": lambda t: Path(t).expanduser(),
    "format": lambda t: t.strip().lower(),
    "threads": int,
    "basis": lambda t: t.strip().lower(),
    "seed": int,
    "dense_limit": int,
    "corrupt": _parse_bool,
}

_ALIASES = {"case": "case_id", "k": "M", "n_sites": "L"}


def parse_value(key: str, text: str) -> Any:
    key = _ALIASES.get(key, key)
    parser = _PARSERS.get(key)
    if parser is None:
        raise ParameterRangeError(f"unknown config key {key!r}")
    try:
        return parser(text)
    except ParameterRangeError:
        raise
    except (TypeError, ValueError) as e:
        raise ParameterRangeError(f"bad value for {key}: {text!r}") from e


def load_config(path: Path | str | None, command: str) -> dict:
    """Read [run] and [<command>] sections; later sections win."""
    path = Path(path) if path else paths.CONFIG_FILE
    if not path.exists():
        logger.debug("no config file at %s", path)
        return {}
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read(path)
    except configparser.Error as e:
        raise ParameterRangeError(f"cannot parse config file {path}: {e}") from e
    values: dict = {}
    for section in ("run", command):
        if parser.has_section(section):
            for key, text in parser.items(section):
                values[_ALIASES.get(key, key)] = parse_value(key, text)
    logger.debug("config file %s supplied %s", path, sorted(values))
    return values


def thread_limit() -> int:
    raw = os.environ.get(ENV_THREADS)
    if raw is None or raw.strip() == "":
        return max(1, min(4, os.cpu_count() or 1))
    try:
        value = int(raw)
    except ValueError as e:
        raise ParameterRangeError(f"{ENV_THREADS} must be a positive integer, got {raw!r}") from e
    if value < 1:
        raise ParameterRangeError(f"{ENV_THREADS} must be a positive integer, got {raw!r}")
    return value


def resolve_config(command: str, cli_values: Optional[dict] = None,
                   config_path: Path | str | None = None) -> RunConfig:
    cfg = RunConfig(command=command)
    file_values = load_config(config_path, command)
    cfg = replace(cfg, **file_values)
    if os.environ.get(ENV_THREADS):
        cfg = replace(cfg, threads=thread_limit())
    overrides = {k: v for k, v in (cli_values or {}).items() if v is not None}
    cfg = replace(cfg, **overrides)
    cfg.command = command
    return validate_config(cfg)


def dimension_from_rank(case_id: Optional[str], family: str, rank: int) -> str:
    """--N is the rank; the case letter decides between 2N and 2N+1."""
    kind = family.split("(")[0].strip().lower() or "so"
    if case_id and case_id.startswith(("Bn", "appA")):
        return f"so({2 * rank + 1})"
    if case_id and case_id.startswith("Cn"):
        return f"sp({2 * rank})"
    if case_id and case_id.startswith("Dn"):
        return f"so({2 * rank})"
    if case_id and case_id.startswith("An"):
        return f"su({rank})"
    return f"{kind}({rank})"


def validate_config(cfg: RunConfig) -> RunConfig:
    from .catalog import AlgebraFamily, BoundaryModel, identity_model

    if cfg.N is not None:
        cfg.family = dimension_from_rank(cfg.case_id, cfg.family, cfg.N)
    family = AlgebraFamily.parse(cfg.family)
    cfg.family = family.label
    if cfg.case_id:
        BoundaryModel(cfg.case_id, family, cfg.M, cfg.c)
    else:
        identity_model(family)
    if cfg.L < 1:
        raise ParameterRangeError(f"L must be >= 1, got {cfg.L}")
    if any(m < 0 for m in cfg.magnons):
        raise ParameterRangeError(f"magnon counts must be non-negative, got {cfg.magnons}")
    if cfg.format not in FORMATS:
        raise ParameterRangeError(f"format must be one of {FORMATS}, got {cfg.format!r}")
    if cfg.basis not in ("real", "paired"):
        raise ParameterRangeError(f"basis must be real or paired, got {cfg.basis!r}")
    if cfg.tol <= 0:
        raise ParameterRangeError(f"tolerance must be positive, got {cfg.tol}")
    if cfg.threads is not None and cfg.threads < 1:
        raise ParameterRangeError(f"threads must be >= 1, got {cfg.threads}")
    if cfg.dense_limit < 1:
        raise ParameterRangeError(f"dense limit must be >= 1, got {cfg.dense_limit}")
    return cfg


def model_for(cfg: RunConfig):
    from .catalog import AlgebraFamily, BoundaryModel, identity_model

    family = AlgebraFamily.parse(cfg.family)
    if cfg.case_id:
        return BoundaryModel(cfg.case_id, family, cfg.M, cfg.c)
    return identity_model(family)
