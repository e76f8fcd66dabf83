# src/bethe_forge/cli.py
from __future__ import annotations
import pyhabitat
import typer
import os
from rich.console import Console
from rich.table import Table
from pathlib import Path
from typing import Optional
from typer_helptree import add_typer_helptree
import logging

import numpy as np

from .logging_setup import configure_logging_for_application, log_traceback
from ._version import __version__
from .config import RunConfig, model_for, parse_value, resolve_config
from .errors import BetheForgeError, ParameterRangeError, VerificationFailure
from . import paths

logger = logging.getLogger(__name__)

console = Console(stderr=True)

# Force Rich to always enable colors, even in .pyz or Termux
os.environ["FORCE_COLOR"] = "1"
os.environ["TERM"] = "xterm-256color"

VERIFY_SAMPLES = 8
OPERATOR_SAMPLES = 2
DEVIATION_TOL = 1e-4
TABLE_EIGEN_TOL = 1e-6
CORRUPTION = 0.05

app = typer.Typer(
    name="bethe-forge",
    help=f"Algebraic Bethe Ansatz laboratory for open O(N) spin chains. (v{__version__})",
    add_completion=False,
    invoke_without_command=True,
    no_args_is_help=True,
    context_settings={
        "ignore_unknown_options": True,
        "allow_extra_args": True,
        "help_option_names": ["-h", "--help"]
    },
)

add_typer_helptree(app=app, console=console, version=__version__, hidden=False)


@app.callback(invoke_without_command=True, no_args_is_help=True)
def main(ctx: typer.Context,
    version: Optional[bool] = typer.Option(None, "--version", is_flag=True, help="Show the version."),
    debug: bool = typer.Option(False, "--debug", "-d", is_flag=True, help="Enable diagnostic logging."),
    verbose: bool = typer.Option(False, "--verbose", "-v", is_flag=True, help="Enable detail logging.")
    ):
    """
    Enable --version and --debug
    """
    if version:
        typer.echo(__version__)
        raise typer.Exit(code=0)

    configure_logging_for_application(debug, verbose)


# shared options
FAMILY = typer.Option(None, "--family", "-f", help="Algebra family, e.g. so(5), su(4), sp(4).")
CASE = typer.Option(None, "--case", help="Catalog case id, e.g. Dn_d or appA_MxRest.")
RANK = typer.Option(None, "--N", help="Rank; the case letter decides the dimension.")
INDEX = typer.Option(None, "--M", help="Boundary index k.")
FREE = typer.Option(None, "--c", help="Free boundary parameter (complex, e.g. 0.3+0.1i).")
SITES = typer.Option(None, "--L", help="Number of sites.")
THETA = typer.Option(None, "--theta", help="Comma separated spectral parameters.")
TOL = typer.Option(None, "--tol", help="Residual tolerance.")
OUT = typer.Option(None, "--out", "-o", help="Output file (directory for tables).")
FORMAT = typer.Option(None, "--format", help="json or csv.")
CONFIG = typer.Option(None, "--config", help="Config file; defaults to ~/.bethe_forge/config.ini.")
MAGNONS = typer.Option(None, "--magnons", help="Comma separated root counts per family.")
SEED_FILE = typer.Option(None, "--seed-file", help="Root set JSON or family,re,im CSV.")


def _collect(**raw) -> dict:
    """CLI strings through the config parsers; unset flags stay None."""
    values = {}
    for key, value in raw.items():
        if value is None:
            continue
        values[key] = parse_value(key, value) if isinstance(value, str) else value
    return values


def _resolve(command: str, config: Optional[Path], **raw) -> RunConfig:
    return resolve_config(command, _collect(**raw), config)


def _fail(e: BetheForgeError) -> None:
    console.print(f"[bold red]{type(e).__name__}:[/bold red] {e}")
    log_traceback(logger)
    raise typer.Exit(code=e.exit_code)


def _emit_path(path: Path) -> None:
    console.print(f"[green]Wrote[/green] [bold]{path}[/bold]")
    typer.echo(str(path))


def _show(table: Table) -> None:
    if not pyhabitat.is_likely_ci_or_non_interactive():
        console.print(table)


def _chain(cfg: RunConfig):
    from .chain import SpinChain

    model = model_for(cfg)
    return SpinChain(model.family, cfg.L, model, basis=cfg.basis, dense_limit=cfg.dense_limit)


def _vacuum_compatible(chain, theta) -> bool:
    """K in the paired basis leaves the first and last basis vectors alone."""
    k = chain.k_paired(theta)
    edges = np.concatenate([k[1:, 0], k[0, 1:], k[:-1, -1], k[-1, :-1]])
    return bool(np.allclose(edges, 0.0, atol=1e-12 * max(1.0, float(np.abs(k).max()))))


@app.command()
def catalog(
    out: Optional[Path] = OUT,
    fmt: Optional[str] = FORMAT,
    config: Optional[Path] = CONFIG,
):
    """List the boundary catalog."""
    from .catalog import catalog_rows
    from .exports import write_json, write_rows_csv

    try:
        cfg = _resolve("catalog", config, out=out, format=fmt)
        rows = catalog_rows()
        table = Table(title="Boundary catalog")
        for column in ("case_id", "family", "rank_preserving", "free_param_count", "params", "k_matrix"):
            table.add_column(column)
        for row in rows:
            table.add_row(*(str(row[c]) for c in ("case_id", "family", "rank_preserving",
                                                 "free_param_count", "params", "k_matrix")))
        _show(table)
        if cfg.out is None:
            return
        suffix = f".{cfg.format}"
        path = paths.resolve_output_path(cfg.out, "catalog", suffix)
        if cfg.format == "csv":
            write_rows_csv(path, rows)
        else:
            write_json(path, rows, "catalog", cfg.as_params())
        _emit_path(path)
    except BetheForgeError as e:
        _fail(e)


@app.command()
def verify(
    family: Optional[str] = FAMILY,
    case: Optional[str] = CASE,
    N: Optional[int] = RANK,
    M: Optional[int] = INDEX,
    c: Optional[str] = FREE,
    L: Optional[int] = SITES,
    theta: Optional[str] = THETA,
    tol: Optional[float] = TOL,
    out: Optional[Path] = OUT,
    fmt: Optional[str] = FORMAT,
    config: Optional[Path] = CONFIG,
    corrupt: bool = typer.Option(False, "--corrupt", is_flag=True,
                                 help="Perturb the K-matrix so the reflection check must fail."),
):
    """Yang-Baxter, reflection, RMRM and TRT residual reports."""
    from .catalog import FamilyKind, build_k
    from .exports import write_json, write_rows_csv
    from .integrability import EquationId, ResidualReport, reflection_suite, sample_parameter_pairs, ybe_suite

    try:
        cfg = _resolve("verify", config, family=family, case_id=case, N=N, M=M, c=c, L=L,
                       theta=theta, tol=tol, out=out, format=fmt, corrupt=corrupt or None)
        model = model_for(cfg)
        reports: list[ResidualReport] = [ybe_suite(model.family, VERIFY_SAMPLES, cfg.seed)]
        source = None
        if cfg.corrupt:
            n = model.family.n

            def source(u):
                scale = np.ones(n, dtype=complex)
                scale[0] += CORRUPTION * u
                return build_k(model, u) @ np.diag(scale)
        reports.append(reflection_suite(model, VERIFY_SAMPLES, cfg.seed, source=source))

        if model.family.kind is FamilyKind.ORTHOGONAL and not cfg.corrupt:
            from .states import pseudo_vacuum_report, rmrm_check, trt_check

            chain = _chain(cfg)
            n = chain.n
            if n * n * chain.dim <= cfg.dense_limit:
                pairs = sample_parameter_pairs(OPERATOR_SAMPLES, cfg.seed, model.family.poles())
                rmrm = ResidualReport(EquationId.RMRM, chain.label, seed=cfg.seed)
                trt = ResidualReport(EquationId.TRT, chain.label, seed=cfg.seed)
                for u, v in pairs:
                    rmrm.extend(rmrm_check(chain, u, v))
                    trt.extend(trt_check(chain, u))
                reports += [rmrm, trt]
                for t in cfg.theta:
                    if _vacuum_compatible(chain, t):
                        reports.append(pseudo_vacuum_report(chain, t))
            else:
                logger.warning("skipping operator checks: auxiliary-quantum dimension %d exceeds %d",
                               n * n * chain.dim, cfg.dense_limit)

        passed = all(r.passed(cfg.tol) for r in reports)
        table = Table(title=f"Residuals for {model.label}")
        table.add_column("equation")
        table.add_column("subject")
        table.add_column("samples", justify="right")
        table.add_column("max relative", justify="right")
        for r in reports:
            mark = "green" if r.passed(cfg.tol) else "red"
            table.add_row(r.equation_id.value, r.subject, str(len(r.samples)),
                          f"[{mark}]{r.max_relative_residual:.3e}[/{mark}]")
        _show(table)

        path = paths.resolve_output_path(cfg.out, "verify", f".{cfg.format}")
        if cfg.format == "csv":
            write_rows_csv(path, [{"equation_id": r.equation_id.value, "subject": r.subject,
                                   "samples": len(r.samples),
                                   "max_relative_residual": r.max_relative_residual} for r in reports],
                           header=model.label)
        else:
            write_json(path, {"passed": passed, "tol": cfg.tol, "reports": reports},
                       "verify", cfg.as_params())
        _emit_path(path)
        if not passed:
            worst = max(reports, key=lambda r: r.max_relative_residual)
            raise VerificationFailure(
                f"{worst.equation_id.value} residual {worst.max_relative_residual:.3e} above {cfg.tol:g}",
                report=worst,
            )
    except BetheForgeError as e:
        _fail(e)


@app.command()
def spectrum(
    family: Optional[str] = FAMILY,
    case: Optional[str] = CASE,
    N: Optional[int] = RANK,
    M: Optional[int] = INDEX,
    c: Optional[str] = FREE,
    L: Optional[int] = SITES,
    theta: Optional[str] = THETA,
    out: Optional[Path] = OUT,
    fmt: Optional[str] = FORMAT,
    config: Optional[Path] = CONFIG,
):
    """Dense spectrum of the double-row transfer matrix at the first theta."""
    from .chain import commutator_norm, dense_spectrum, double_row_transfer
    from .exports import write_json, write_spectrum_csv

    try:
        cfg = _resolve("spectrum", config, family=family, case_id=case, N=N, M=M, c=c, L=L,
                       theta=theta, out=out, format=fmt)
        chain = _chain(cfg)
        t0 = cfg.theta[0]
        transfer = double_row_transfer(chain, t0)
        result = dense_spectrum(transfer)
        commutators = [commutator_norm(transfer, double_row_transfer(chain, t)) for t in cfg.theta[1:]]
        console.print(f"{len(result)} eigenvalues of D({t0}) on {chain.label}")

        path = paths.resolve_output_path(cfg.out, "spectrum", f".{cfg.format}")
        if cfg.format == "csv":
            write_spectrum_csv(path, result.eigenvalues, chain.label, t0)
        else:
            write_json(path, {
                "chain": chain.label,
                "theta": complex(t0),
                "method": result.method,
                "eigenvalues": result.eigenvalues,
                "commutator_norms": commutators,
            }, "spectrum", cfg.as_params())
        _emit_path(path)
    except BetheForgeError as e:
        _fail(e)


def _load_roots(cfg: RunConfig, system):
    from .exports import read_root_set, read_seed_csv

    if cfg.seed_file is None:
        if any(system.counts):
            raise ParameterRangeError("nonzero magnon counts need --seed-file")
        return system.empty_roots()
    if cfg.seed_file.suffix.lower() == ".csv":
        roots = read_seed_csv(cfg.seed_file, system.labels)
    else:
        roots = read_root_set(cfg.seed_file)
    return roots


@app.command()
def solve(
    family: Optional[str] = FAMILY,
    case: Optional[str] = CASE,
    N: Optional[int] = RANK,
    M: Optional[int] = INDEX,
    c: Optional[str] = FREE,
    L: Optional[int] = SITES,
    magnons: Optional[str] = MAGNONS,
    seed_file: Optional[Path] = SEED_FILE,
    theta: Optional[str] = THETA,
    tol: Optional[float] = TOL,
    out: Optional[Path] = OUT,
    fmt: Optional[str] = FORMAT,
    config: Optional[Path] = CONFIG,
):
    """Solve the Bethe equations from a seed and report the eigenvalue."""
    from .bae import build_bae, residue_check, solve_bae
    from .exports import root_set_payload, write_json, write_seed_csv

    try:
        cfg = _resolve("solve", config, family=family, case_id=case, N=N, M=M, c=c, L=L,
                       magnons=magnons, seed_file=seed_file, theta=theta, tol=tol, out=out, format=fmt)
        model = model_for(cfg)
        counted = build_bae(model, cfg.L, cfg.magnons)
        seed = _load_roots(cfg, counted)
        system = counted if cfg.magnons else build_bae(model, cfg.L, seed.counts)
        if any(system.counts):
            roots = solve_bae(system, seed, branches=seed.branches or None, tol=cfg.tol)
            residues = residue_check(system, roots)
        else:
            roots = system.empty_roots()
            residues = np.zeros(0)
        eigenvalues = [system.eigenvalue(roots, t) for t in cfg.theta]
        console.print(f"{sum(system.counts)} roots of {model.label}, families {system.labels}")

        path = paths.resolve_output_path(cfg.out, "roots", f".{cfg.format}")
        if cfg.format == "csv":
            write_seed_csv(path, system.labels, roots)
        else:
            payload = root_set_payload(system, roots)
            payload["eigenvalues"] = [{"theta": t, "value": lam} for t, lam in zip(cfg.theta, eigenvalues)]
            payload["residues"] = residues
            write_json(path, payload, "solve", cfg.as_params())
        _emit_path(path)
    except BetheForgeError as e:
        _fail(e)


@app.command()
def checkstate(
    family: Optional[str] = FAMILY,
    case: Optional[str] = CASE,
    N: Optional[int] = RANK,
    M: Optional[int] = INDEX,
    c: Optional[str] = FREE,
    L: Optional[int] = SITES,
    magnons: Optional[str] = MAGNONS,
    seed_file: Optional[Path] = SEED_FILE,
    theta: Optional[str] = THETA,
    tol: Optional[float] = TOL,
    out: Optional[Path] = OUT,
    fmt: Optional[str] = FORMAT,
    config: Optional[Path] = CONFIG,
):
    """Build the Bethe vector of a root set and test it against D(theta) and the Bethe eigenvalue."""
    from .bae import build_bae
    from .exports import state_payload, write_json, write_rows_csv
    from .states import EIGEN_TOL, best_state, eigencheck

    try:
        cfg = _resolve("checkstate", config, family=family, case_id=case, N=N, M=M, c=c, L=L,
                       magnons=magnons, seed_file=seed_file, theta=theta, tol=tol, out=out, format=fmt)
        chain = _chain(cfg)
        counted = build_bae(chain.model, cfg.L, cfg.magnons)
        if len(counted.families) > 1:
            raise ParameterRangeError(
                f"checkstate builds Bethe vectors from one root family; {chain.model.label} has {counted.labels}"
            )
        roots = _load_roots(cfg, counted)
        system = counted if cfg.magnons else build_bae(chain.model, cfg.L, roots.counts)
        rapidities = roots.roots[0] + 1.0 if roots.roots else np.zeros(0)
        state, residuals = best_state(chain, rapidities, cfg.theta)
        eigenvalues = [system.eigenvalue(roots, t) for t in cfg.theta]
        formula = eigencheck(state, chain, cfg.theta, eigenvalues)
        worst = float(max(residuals.max(), formula.max()))
        limit = max(cfg.tol, EIGEN_TOL)
        console.print(f"{len(rapidities)} rapidities on {chain.label}: "
                      f"max eigen residual {float(residuals.max()):.3e}, "
                      f"against the Bethe eigenvalue {float(formula.max()):.3e}")

        path = paths.resolve_output_path(cfg.out, "state", f".{cfg.format}")
        if cfg.format == "csv":
            write_rows_csv(path, [{"theta": complex(t), "residual": float(r), "bethe_residual": float(b)}
                                  for t, r, b in zip(cfg.theta, residuals, formula)], header=chain.label)
        else:
            payload = state_payload(state, chain.label, cfg.dense_limit)
            payload["thetas"] = list(cfg.theta)
            payload["residuals"] = residuals
            payload["bethe_eigenvalues"] = eigenvalues
            payload["bethe_residuals"] = formula
            payload["passed"] = bool(worst <= limit)
            write_json(path, payload, "checkstate", cfg.as_params())
        _emit_path(path)
        if worst > limit:
            raise VerificationFailure(f"Bethe vector is not an eigenvector with the Bethe eigenvalue: residual {worst:.3e}")
    except BetheForgeError as e:
        _fail(e)


@app.command()
def tables(
    name: Optional[str] = typer.Option(None, "--table", help="Only this table (table1, table2, table3)."),
    eigencheck: bool = typer.Option(False, "--eigencheck", is_flag=True,
                                    help="Also build each Bethe vector and test it."),
    tol: Optional[float] = TOL,
    out: Optional[Path] = OUT,
    fmt: Optional[str] = FORMAT,
    config: Optional[Path] = CONFIG,
):
    """Re-solve the published O(3) root tables from their documented seeds."""
    from .exports import write_json, write_root_table_csv
    from .tables import TABLES, reproduce_table

    try:
        cfg = _resolve("tables", config, tol=tol, out=out, format=fmt)
        if name is not None and name not in TABLES:
            raise ParameterRangeError(f"unknown table {name!r}; expected one of {sorted(TABLES)}")
        chosen = [TABLES[name]] if name else list(TABLES.values())
        out_dir = Path(cfg.out).expanduser() if cfg.out else paths.get_export_dir()
        out_dir.mkdir(parents=True, exist_ok=True)

        summary = Table(title="Root tables")
        for column in ("table", "row", "deviation", "residual", "eigen"):
            summary.add_column(column)
        failures = []
        payload = {}
        for table in chosen:
            results = reproduce_table(table, eigencheck=eigencheck, tol=cfg.tol)
            payload[table.name] = [{
                "row": r.row + 1,
                "listed": r.listed,
                "deviation": r.deviation,
                "residual_norm": r.solved.residual_norm if r.solved is not None else None,
                "eigen_residual": r.eigen_residual,
                "error": r.error,
            } for r in results]
            for r in results:
                summary.add_row(table.name, str(r.row + 1), f"{r.deviation:.2e}",
                                f"{r.solved.residual_norm:.2e}" if r.solved is not None else "-",
                                f"{r.eigen_residual:.2e}" if r.eigen_residual is not None else "-")
                if not r.deviation <= DEVIATION_TOL:
                    failures.append(f"{table.name} row {r.row + 1}")
                elif r.eigen_residual is not None and not r.eigen_residual <= TABLE_EIGEN_TOL:
                    failures.append(f"{table.name} row {r.row + 1} (eigen)")
            if cfg.format == "csv":
                path = write_root_table_csv(out_dir / f"{table.name}.csv",
                                            [r.listed for r in results if r.solved is not None],
                                            table.caption)
                _emit_path(path)
        _show(summary)
        if cfg.format == "json":
            _emit_path(write_json(out_dir / "tables.json", payload, "tables", cfg.as_params()))
        if failures:
            raise VerificationFailure(f"rows off the printed values by more than {DEVIATION_TOL:g} "
                                      f"or failing the eigencheck at {TABLE_EIGEN_TOL:g}: {', '.join(failures)}")
    except BetheForgeError as e:
        _fail(e)


if __name__ == "__main__":
    app()
