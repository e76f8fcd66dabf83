# tests/test_exports.py
import json
from pathlib import Path

import numpy as np
import pytest

from bethe_forge._version import __version__
from bethe_forge.bae import BetheRootSet, build_bae
from bethe_forge.catalog import BoundaryModel, identity_model, so
from bethe_forge.errors import DimensionGuardError, ParameterRangeError
from bethe_forge.exports import (
    complex_entry,
    dumps_json,
    format_complex_text,
    parse_complex_text,
    read_json,
    read_root_set,
    read_root_table_csv,
    read_seed_csv,
    read_spectrum_csv,
    root_set_payload,
    state_payload,
    to_jsonable,
    write_json,
    write_root_table_csv,
    write_rows_csv,
    write_seed_csv,
    write_spectrum_csv,
)
from bethe_forge.integrability import ybe_suite
from bethe_forge.states import BetheVector


def test_json_has_metadata_and_sorted_keys():
    text = dumps_json({"zeta": 1, "alpha": 0.1 + 0.2j}, "spectrum", {"L": 2})
    data = json.loads(text)
    assert data["metadata"] == {"tool": "bethe-forge", "version": __version__,
                                "command": "spectrum", "params": {"L": 2}}
    assert data["payload"]["alpha"] == {"re": 0.1, "im": 0.2}
    assert text.index('"alpha"') < text.index('"zeta"')
    assert text.endswith("\n")


def test_reruns_are_byte_identical(tmp_path):
    payload = {"values": np.array([1 / 3, 2 / 3 + 1j])}
    a = write_json(tmp_path / "a.json", payload, "solve").read_bytes()
    b = write_json(tmp_path / "b.json", payload, "solve").read_bytes()
    assert a == b


def test_to_jsonable():
    report = ybe_suite(so(3), 1, seed=4)
    data = to_jsonable({"report": report, "path": Path("x"), "n": np.int64(3), "nan": float("nan")})
    assert data["report"]["equation_id"] == "YBE"
    assert data["path"] == "x"
    assert data["n"] == 3
    assert data["nan"] is None
    assert complex_entry(1 - 2j) == {"re": 1.0, "im": -2.0}
    with pytest.raises(TypeError):
        to_jsonable(object())


def test_complex_text():
    assert parse_complex_text("0.15+0.5i") == 0.15 + 0.5j
    assert parse_complex_text(" -2 ") == -2
    assert parse_complex_text(format_complex_text(0.25 - 1.5j)) == 0.25 - 1.5j
    with pytest.raises(ParameterRangeError):
        parse_complex_text("abc")


def test_read_json_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ParameterRangeError):
        read_json(bad)
    listed = tmp_path / "list.json"
    listed.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ParameterRangeError):
        read_json(listed)


def test_root_set_file_is_read_back(tmp_path):
    model = BoundaryModel("appA_MxRest", so(3), 1)
    system = build_bae(model, 4, (2,))
    roots = BetheRootSet((np.array([0.5j, 0.3 + 1.5j]),), residual_norm=1e-12, source="solver", branches=(1, 2))
    payload = root_set_payload(system, roots)
    assert payload["families"] == ["1"]
    assert payload["counts"] == [2]
    assert payload["params"]["case_id"] == "appA_MxRest"
    path = write_json(tmp_path / "roots.json", payload, "solve")
    back = read_root_set(path)
    assert back.counts == (2,)
    assert np.allclose(back.roots[0], roots.roots[0])
    assert back.branches == (1, 2)
    assert back.residual_norm == 1e-12


def test_seed_csv(tmp_path):
    path = tmp_path / "seed.csv"
    path.write_text("# two families\nfamily,re,im\n1,0.1,0.5\n2,0.0,1.5\n1,0.2,-0.5\n", encoding="utf-8")
    roots = read_seed_csv(path, ("1", "2"))
    assert roots.counts == (2, 1)
    assert np.allclose(roots.roots[0], [0.1 + 0.5j, 0.2 - 0.5j])

    compact = tmp_path / "compact.csv"
    compact.write_text("1,0.1+0.5i\n", encoding="utf-8")
    assert np.allclose(read_seed_csv(compact, ("1",)).roots[0], [0.1 + 0.5j])

    out = write_seed_csv(tmp_path / "out.csv", ("1", "2"), roots)
    again = read_seed_csv(out, ("1", "2"))
    assert np.allclose(again.flat(), roots.flat())


def test_seed_csv_rejects_unknown_families(tmp_path):
    path = tmp_path / "seed.csv"
    path.write_text("3,0.1,0.5\n", encoding="utf-8")
    with pytest.raises(ParameterRangeError):
        read_seed_csv(path, ("1", "2"))
    with pytest.raises(ParameterRangeError):
        read_seed_csv(tmp_path / "missing.csv", ("1",))


def test_spectrum_csv_header(tmp_path):
    path = write_spectrum_csv(tmp_path / "s.csv", [1.5, 0.25 - 2j], "so(3) L=2 appA_MxRest[so(3), k=0]", 0.8)
    first = path.read_text(encoding="utf-8").splitlines()[0]
    assert first.startswith("# chain: so(3) L=2")
    assert "theta = 0.8" in first
    label, values = read_spectrum_csv(path)
    assert label.startswith("so(3) L=2 appA_MxRest[so(3), k=0]")
    assert np.allclose(values, [1.5, 0.25 - 2j])


def test_root_table_csv(tmp_path):
    rows = [np.array([0.5 + 0.1j, 0.5 - 0.1j]), np.array([1.5j, 2.5j])]
    path = write_root_table_csv(tmp_path / "t.csv", rows, "L=4")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# L=4"
    assert lines[1] == "v1/i,v2/i"
    back = read_root_table_csv(path)
    assert len(back) == 2
    assert np.allclose(back[1], rows[1])


def test_state_export_guard():
    state = BetheVector((0.5j,), np.ones(1), np.ones(27, dtype=complex))
    payload = state_payload(state, "so(3) L=3")
    assert len(payload["vector"]) == 27
    assert payload["conjectural"] is False
    with pytest.raises(DimensionGuardError):
        state_payload(state, "so(3) L=3", limit=10)


def test_rows_csv(tmp_path):
    path = write_rows_csv(tmp_path / "r.csv", [{"a": 0.5, "b": 1 + 2j, "c": "x"}], header="h")
    assert path.read_text(encoding="utf-8").splitlines() == ["# h", "a,b,c", "0.5,1+2i,x"]


def test_identity_payload_is_serializable():
    system = build_bae(identity_model(so(5)), 2)
    text = dumps_json(root_set_payload(system, system.empty_roots()), "solve")
    assert json.loads(text)["payload"]["counts"] == [0, 0]
