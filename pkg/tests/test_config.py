# tests/test_config.py
from pathlib import Path

import pytest

from bethe_forge import paths
from bethe_forge.config import (
    ENV_THREADS,
    RunConfig,
    dimension_from_rank,
    load_config,
    model_for,
    parse_value,
    resolve_config,
    thread_limit,
    validate_config,
)
from bethe_forge.errors import ParameterRangeError


def test_parse_value_aliases_and_types():
    assert parse_value("case", "Dn_d") == "Dn_d"
    assert parse_value("k", "2") == 2
    assert parse_value("c", "0.3+0.1i") == 0.3 + 0.1j
    assert parse_value("theta", "0.37, 0.5+0.2i") == (0.37, 0.5 + 0.2j)
    assert parse_value("magnons", "1;2") == (1, 2)
    assert parse_value("corrupt", "yes") is True
    assert parse_value("out", "x.json") == Path("x.json")
    with pytest.raises(ParameterRangeError):
        parse_value("colour", "red")
    with pytest.raises(ParameterRangeError):
        parse_value("L", "many")


def test_load_config_sections(tmp_path):
    path = tmp_path / "config.ini"
    path.write_text(
        "[run]\nfamily = so(5)\nL = 3\ntol = 1e-8\n\n[spectrum]\nL = 4  # overrides run\n",
        encoding="utf-8",
    )
    assert load_config(path, "spectrum") == {"family": "so(5)", "L": 4, "tol": 1e-8}
    assert load_config(path, "solve")["L"] == 3
    assert load_config(tmp_path / "missing.ini", "solve") == {}


def test_default_config_file_is_under_the_app_dir(tmp_path):
    assert paths.CONFIG_FILE.parent == paths.APP_DIR
    assert load_config(None, "verify") == {}


def test_thread_limit(monkeypatch):
    monkeypatch.setenv(ENV_THREADS, "3")
    assert thread_limit() == 3
    monkeypatch.setenv(ENV_THREADS, "zero")
    with pytest.raises(ParameterRangeError):
        thread_limit()
    monkeypatch.setenv(ENV_THREADS, "0")
    with pytest.raises(ParameterRangeError):
        thread_limit()
    monkeypatch.delenv(ENV_THREADS)
    assert 1 <= thread_limit() <= 4


def test_command_line_beats_file_and_environment(tmp_path, monkeypatch):
    path = tmp_path / "config.ini"
    path.write_text("[run]\nfamily = so(5)\nL = 3\n[solve]\nthreads = 2\n", encoding="utf-8")
    monkeypatch.setenv(ENV_THREADS, "3")
    cfg = resolve_config("solve", {"L": 2, "family": None}, path)
    assert cfg.command == "solve"
    assert cfg.family == "so(5)"
    assert cfg.L == 2
    assert cfg.threads == 3
    assert resolve_config("solve", {"threads": 1}, path).threads == 1


def test_rank_to_dimension():
    assert dimension_from_rank("appA_MxRest", "so(3)", 1) == "so(3)"
    assert dimension_from_rank("Bn_a", "so", 2) == "so(5)"
    assert dimension_from_rank("Dn_d", "so", 3) == "so(6)"
    assert dimension_from_rank("Cn_a", "sp", 2) == "sp(4)"
    assert dimension_from_rank(None, "so(9)", 4) == "so(4)"
    cfg = validate_config(RunConfig(case_id="Dn_a", N=4))
    assert cfg.family == "so(8)"


@pytest.mark.parametrize("changes", [
    {"L": 0},
    {"format": "xml"},
    {"basis": "weird"},
    {"tol": 0.0},
    {"magnons": (1, -1)},
    {"threads": 0},
    {"dense_limit": 0},
    {"family": "so(2)"},
    {"case_id": "Dn_a", "family": "so(5)"},
])
def test_bad_settings_are_rejected(changes):
    with pytest.raises(ParameterRangeError):
        validate_config(RunConfig(**changes))


def test_model_for():
    assert model_for(RunConfig(family="so(3)")).case_id == "appA_MxRest"
    assert model_for(RunConfig(family="so(6)")).case_id == "Dn_a"
    model = model_for(RunConfig(family="so(6)", case_id="Dn_d", M=1))
    assert model.k == 1


def test_params_are_json_friendly():
    params = RunConfig(c=0.5 + 1j, out=Path("a.json")).as_params()
    assert params["c"] == {"re": 0.5, "im": 1.0}
    assert params["out"] == "a.json"
    assert params["theta"] == [0.37, 0.63, 1.21]
