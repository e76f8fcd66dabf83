# src/bethe_forge/exports.py
"""
Machine-readable artifacts.

JSON files carry a metadata block (tool, version, command, params) next to
the payload, sorted keys and complex numbers as {"re": .., "im": ..}. No
timestamps are written so reruns are byte-identical.
"""
from __future__ import annotations
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Sequence
import csv
import json
import logging
import math

import numpy as np

from ._version import __version__
from .bae import BAESystem, BetheRootSet
from .errors import DimensionGuardError, ParameterRangeError
from .tensor_core import DENSE_LIMIT

logger = logging.getLogger(__name__)

TOOL = "bethe-forge"
SIGNIFICANT = 17


def _float(x: float) -> Optional[float]:
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(format(x, f".{SIGNIFICANT}g"))


def complex_entry(z: complex) -> dict:
    z = complex(z)
    return {"re": _float(z.real), "im": _float(z.imag)}


def to_jsonable(obj: Any) -> Any:
    """Recursively turn numpy values, complex numbers, paths and reports into JSON types."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_entry(obj)
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if is_dataclass(obj):
        return to_jsonable(asdict(obj))
    raise TypeError(f"cannot export {type(obj).__name__}")


def package(payload: Any, command: str, params: Optional[dict] = None) -> dict:
    return {
        "metadata": {
            "tool": TOOL,
            "version": __version__,
            "command": command,
            "params": to_jsonable(params or {}),
        },
        "payload": to_jsonable(payload),
    }


def dumps_json(payload: Any, command: str, params: Optional[dict] = None) -> str:
    return json.dumps(package(payload, command, params), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: Path | str, payload: Any, command: str, params: Optional[dict] = None) -> Path:
    path = Path(path)
    path.write_text(dumps_json(payload, command, params), encoding="utf-8")
    logger.info("wrote %s", path)
    return path


def read_json(path: Path | str) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ParameterRangeError(f"cannot read JSON from {path}: {e}") from e
    if not isinstance(data, dict):
        raise ParameterRangeError(f"{path} does not hold a JSON object")
    return data


def _complex_from_entry(entry) -> complex:
    if isinstance(entry, dict):
        return complex(entry.get("re") or 0.0, entry.get("im") or 0.0)
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        return complex(entry[0], entry[1])
    if isinstance(entry, (int, float)):
        return complex(entry)
    raise ParameterRangeError(f"cannot read {entry!r} as a complex number")


def parse_complex_text(text: str) -> complex:
    """'0.15+0.5i', '1.2-3j' or a bare real."""
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError as e:
        raise ParameterRangeError(f"cannot read {text!r} as a complex number") from e


def format_complex_text(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.{SIGNIFICANT}g}{z.imag:+.{SIGNIFICANT}g}i"


# --- root sets ------------------------------------------------------------------

def root_set_payload(system: BAESystem, roots: BetheRootSet) -> dict:
    return {
        "case": system.model.label,
        "params": {
            "case_id": system.model.case_id,
            "family": system.model.family.label,
            "k": system.model.k,
            "c": system.model.c,
        },
        "L": system.L,
        "families": list(system.labels),
        "counts": list(roots.counts),
        "roots": [[complex_entry(z) for z in r] for r in roots.roots],
        "residual_norm": roots.residual_norm,
        "branch_integers": list(roots.branches),
        "source": roots.source,
    }


def read_root_set(path: Path | str) -> BetheRootSet:
    """Root set from a file written by `solve`, with or without the metadata wrapper."""
    data = read_json(path)
    body = data.get("payload", data)
    if "roots" not in body:
        raise ParameterRangeError(f"{path} has no 'roots' entry")
    roots = tuple(np.array([_complex_from_entry(e) for e in fam], dtype=complex) for fam in body["roots"])
    residual = body.get("residual_norm")
    return BetheRootSet(
        roots,
        residual_norm=float("nan") if residual is None else float(residual),
        source=str(path),
        branches=tuple(int(b) for b in body.get("branch_integers") or ()),
    )


def read_seed_csv(path: Path | str, labels: Sequence[str]) -> BetheRootSet:
    """
    Seeds as `family,re,im` rows; '#' lines and a header row are skipped.
    Rows are grouped by family in the order of `labels`.
    """
    path = Path(path)
    grouped: dict = {label: [] for label in labels}
    try:
        with path.open(newline="", encoding="utf-8") as f:
            for lineno, row in enumerate(csv.reader(f), start=1):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                cells = [c.strip() for c in row]
                if cells[0].lower() == "family":
                    continue
                if len(cells) < 2:
                    raise ParameterRangeError(f"{path}:{lineno}: expected family,re,im")
                if cells[0] not in grouped:
                    raise ParameterRangeError(f"{path}:{lineno}: unknown family {cells[0]!r}, expected one of {tuple(labels)}")
                if len(cells) == 2:
                    value = parse_complex_text(cells[1])
                else:
                    try:
                        value = complex(float(cells[1]), float(cells[2] or 0.0))
                    except ValueError as e:
                        raise ParameterRangeError(f"{path}:{lineno}: {e}") from e
                grouped[cells[0]].append(value)
    except OSError as e:
        raise ParameterRangeError(f"cannot read seed file {path}: {e}") from e
    return BetheRootSet(tuple(np.array(grouped[label], dtype=complex) for label in labels),
                        source=str(path))


def write_seed_csv(path: Path | str, labels: Sequence[str], roots: BetheRootSet) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["family", "re", "im"])
        for label, fam in zip(labels, roots.roots):
            for z in fam:
                writer.writerow([label, f"{z.real:.{SIGNIFICANT}g}", f"{z.imag:.{SIGNIFICANT}g}"])
    return path


# --- spectra and tables -----------------------------------------------------------

def write_spectrum_csv(path: Path | str, eigenvalues: Sequence[complex], chain_label: str,
                       theta: complex | None = None) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as f:
        header = f"# chain: {chain_label}"
        if theta is not None:
            header += f"; theta = {format_complex_text(theta)}"
        f.write(header + "\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["re", "im"])
        for z in eigenvalues:
            z = complex(z)
            writer.writerow([f"{z.real:.{SIGNIFICANT}g}", f"{z.imag:.{SIGNIFICANT}g}"])
    logger.info("wrote %d eigenvalues to %s", len(eigenvalues), path)
    return path


def read_spectrum_csv(path: Path | str) -> tuple[str, np.ndarray]:
    path = Path(path)
    label = ""
    values = []
    with path.open(newline="", encoding="utf-8") as f:
        for row in csv.reader(f):
            if not row:
                continue
            if row[0].startswith("# chain:"):
                label = ",".join(row)[len("# chain:"):].strip()
                continue
            if row[0].startswith("#") or row[0] == "re":
                continue
            values.append(complex(float(row[0]), float(row[1])))
    return label, np.asarray(values, dtype=complex)


def write_root_table_csv(path: Path | str, listed_rows: Sequence[Sequence[complex]],
                         caption: str = "") -> Path:
    """One row per root set, one column per root, entries in v/i form."""
    path = Path(path)
    width = max((len(r) for r in listed_rows), default=0)
    with path.open("w", newline="", encoding="utf-8") as f:
        if caption:
            f.write(f"# {caption}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([f"v{j + 1}/i" for j in range(width)])
        for row in listed_rows:
            writer.writerow([format_complex_text(z) for z in row])
    return path


def read_root_table_csv(path: Path | str) -> list[np.ndarray]:
    path = Path(path)
    rows = []
    with path.open(newline="", encoding="utf-8") as f:
        for row in csv.reader(f):
            if not row or row[0].startswith("#") or row[0].endswith("/i"):
                continue
            rows.append(np.array([parse_complex_text(c) for c in row if c.strip()], dtype=complex))
    return rows


# --- states -----------------------------------------------------------------------

def state_payload(state, chain_label: str, limit: int = DENSE_LIMIT) -> dict:
    vector = np.asarray(state.vector, dtype=complex).reshape(-1)
    if vector.size > limit:
        raise DimensionGuardError(
            f"state of dimension {vector.size} is above the export limit {limit}",
            dim=vector.size, limit=limit,
        )
    return {
        "chain": chain_label,
        "rapidities": [complex_entry(u) for u in state.rapidities],
        "nested": [complex_entry(z) for z in np.asarray(state.nested).reshape(-1)],
        "conjectural": bool(state.conjectural),
        "norm": state.norm,
        "vector": [complex_entry(z) for z in vector],
    }


def write_rows_csv(path: Path | str, rows: Sequence[dict], header: str = "") -> Path:
    """Flat dict rows; complex cells printed as a+bi."""
    path = Path(path)
    columns = list(rows[0].keys()) if rows else []
    with path.open("w", newline="", encoding="utf-8") as f:
        if header:
            f.write(f"# {header}\n")
        writer = csv.DictWriter(f, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({
                k: format_complex_text(v) if isinstance(v, (complex, np.complexfloating))
                else (f"{v:.{SIGNIFICANT}g}" if isinstance(v, (float, np.floating)) else v)
                for k, v in row.items()
            })
    return path
