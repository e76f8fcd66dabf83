# tests/test_cli.py
import json

from typer.testing import CliRunner

from bethe_forge._version import __version__
from bethe_forge.cli import app

runner = CliRunner()


def test_version():
    result = runner.invoke(app, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.stdout


def test_catalog_lists_and_exports(tmp_path):
    assert runner.invoke(app, ["catalog"]).exit_code == 0
    out = tmp_path / "catalog.json"
    result = runner.invoke(app, ["catalog", "--out", str(out)])
    assert result.exit_code == 0
    rows = json.loads(out.read_text(encoding="utf-8"))["payload"]
    assert len(rows) == 13


def test_spectrum_csv(tmp_path):
    out = tmp_path / "spectrum.csv"
    result = runner.invoke(app, ["spectrum", "--family", "so(3)", "--L", "2", "--format", "csv", "--out", str(out)])
    assert result.exit_code == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# chain:")
    assert lines[1] == "re,im"
    assert len(lines[2:]) == 9


def test_solve_vacuum(tmp_path):
    out = tmp_path / "roots.json"
    result = runner.invoke(app, ["solve", "--L", "2", "--out", str(out)])
    assert result.exit_code == 0
    data = json.loads(out.read_text(encoding="utf-8"))
    assert data["metadata"]["command"] == "solve"
    assert data["payload"]["counts"] == [0]
    assert len(data["payload"]["eigenvalues"]) == 3


def test_solve_needs_a_seed_for_magnons(tmp_path):
    result = runner.invoke(app, ["solve", "--L", "2", "--magnons", "1", "--out", str(tmp_path / "r.json")])
    assert result.exit_code == 2


def test_verify_passes_and_corruption_fails(tmp_path):
    good = runner.invoke(app, ["verify", "--tol", "1e-8", "--out", str(tmp_path / "good.json")])
    assert good.exit_code == 0
    assert json.loads((tmp_path / "good.json").read_text(encoding="utf-8"))["payload"]["passed"] is True

    bad = runner.invoke(app, ["verify", "--tol", "1e-8", "--corrupt", "--out", str(tmp_path / "bad.json")])
    assert bad.exit_code == 1
    assert json.loads((tmp_path / "bad.json").read_text(encoding="utf-8"))["payload"]["passed"] is False


def test_verify_rank_breaking_boundary(tmp_path):
    result = runner.invoke(app, ["verify", "--family", "so(6)", "--case", "Dn_d", "--M", "1", "--L", "1",
                                 "--tol", "1e-8", "--out", str(tmp_path / "dnd.json")])
    assert result.exit_code == 0
    reports = json.loads((tmp_path / "dnd.json").read_text(encoding="utf-8"))["payload"]["reports"]
    assert {r["equation_id"] for r in reports} >= {"YBE", "BYBE", "RMRM", "TRT"}


def test_tables_csv(tmp_path):
    result = runner.invoke(app, ["tables", "--table", "table2", "--format", "csv", "--out", str(tmp_path)])
    assert result.exit_code == 0
    lines = (tmp_path / "table2.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("#")
    assert lines[1] == "v1/i,v2/i,v3/i,v4/i"
    assert len(lines) == 3


def test_unknown_table_exits_two():
    assert runner.invoke(app, ["tables", "--table", "table9"]).exit_code == 2


def test_out_of_range_family_exits_two(tmp_path):
    result = runner.invoke(app, ["spectrum", "--family", "so(2)", "--out", str(tmp_path / "x.json")])
    assert result.exit_code == 2


def test_checkstate_compares_with_the_bethe_eigenvalue(tmp_path):
    seed = tmp_path / "roots.json"
    seed.write_text(json.dumps({"roots": [[[0.0, 1.0]]]}), encoding="utf-8")
    out = tmp_path / "state.json"
    result = runner.invoke(app, ["checkstate", "--L", "2", "--seed-file", str(seed), "--out", str(out)])
    assert result.exit_code == 0
    payload = json.loads(out.read_text(encoding="utf-8"))["payload"]
    assert payload["passed"] is True
    assert len(payload["bethe_residuals"]) == len(payload["thetas"])
    assert max(payload["bethe_residuals"]) < 1e-7


def test_checkstate_rejects_nested_families(tmp_path):
    result = runner.invoke(app, ["checkstate", "--family", "so(5)", "--L", "1", "--out", str(tmp_path / "s.json")])
    assert result.exit_code == 2
