# src/bethe_forge/logging_setup.py
from __future__ import annotations
import logging
import sys
import traceback
import warnings
from rich.logging import RichHandler
from rich.console import Console
console = Console(stderr=True)

logger = logging.getLogger("bethe_forge")

# sources of warnings raised inside eig, eigs and root
NUMERIC_WARNINGS = ("numpy", "scipy")


def _rich_handler(debug: bool) -> RichHandler:
    handler = RichHandler(console=console, show_time=False, show_path=debug, log_time_format="[%H:%M:%S]")
    handler.setFormatter(logging.Formatter("%(message)s"))
    return handler


def configure_logging_for_application(debug: bool = False, verbose: bool = False):
    """
    One RichHandler on the stderr console for the package logger.

    WARNING by default, INFO with --verbose, DEBUG with --debug. Warnings
    raised by the numerical backends go through the same handler; without
    --debug the ComplexWarning / ARPACK chatter is dropped.
    """
    INTENT = "bethe-forge"

    if debug:
        level = logging.DEBUG
    elif verbose:
        level = logging.INFO
    else:
        level = logging.WARNING

    logger.setLevel(level)
    if logger.hasHandlers():
        logger.handlers.clear()
    logger.addHandler(_rich_handler(debug))

    logging.captureWarnings(True)
    py_warnings = logging.getLogger("py.warnings")
    py_warnings.handlers.clear()
    py_warnings.addHandler(_rich_handler(debug))
    py_warnings.propagate = False
    py_warnings.setLevel(logging.WARNING if debug else logging.ERROR)
    for module in NUMERIC_WARNINGS:
        warnings.filterwarnings("default" if debug else "ignore", module=module)

    logger.debug(f"Debug logging enabled for {INTENT}.")
    logger.info(f"Verbose logging enabled for {INTENT}.")


def log_traceback(logger):
    if logger.getEffectiveLevel() <= logging.DEBUG:
        traceback.print_exc(file=sys.stderr)
