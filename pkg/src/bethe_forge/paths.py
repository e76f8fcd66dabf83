# src/bethe_forge/paths.py
from __future__ import annotations
from pathlib import Path
import time

APP_DIR = Path.home() / ".bethe_forge"
CONFIG_FILE = APP_DIR / "config.ini"


def get_export_dir() -> Path:
    """~/.bethe_forge/exports, created on demand."""
    export_dir = APP_DIR / "exports"
    export_dir.mkdir(parents=True, exist_ok=True)
    return export_dir


def get_default_export_path(subject: str = "bethe_forge_export", suffix: str = ".json") -> Path:
    """
    Standardizes output paths: ~/.bethe_forge/exports/spectrum_1706000000.csv
    """
    unix_ts = int(time.time())
    filename = f"{subject}_{unix_ts}{suffix}"
    return get_export_dir() / filename


def resolve_output_path(out: Path | str | None, subject: str, suffix: str) -> Path:
    """Explicit --out wins; otherwise a timestamped file under the export dir."""
    if out:
        path = Path(out).expanduser()
        path.parent.mkdir(parents=True, exist_ok=True)
        return path
    return get_default_export_path(subject, suffix)
