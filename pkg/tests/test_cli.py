import json

import pytest

from unitary_homotopy.cli import (
    EXIT_CONFIG,
    EXIT_FAILURE,
    EXIT_OBSTRUCTION,
    EXIT_OK,
    ConfigError,
    main,
    parse_config_text,
)


def _body(path):
    return json.loads(path.read_text())["body"]


def test_parse_config_names_unknown_keys():
    assert parse_config_text("seed = 3  # comment\n\ntol.geodesic=1e-3") == {"seed": "3", "tol.geodesic": "1e-3"}
    with pytest.raises(ConfigError, match="colour, tol.nope"):
        parse_config_text("colour = red\ntol.nope = 1")
    with pytest.raises(ConfigError, match="line 1"):
        parse_config_text("seed 3")


def test_verify_default_passes_and_is_deterministic(tmp_path):
    assert main(["verify", "--out-dir", str(tmp_path / "a"), "--cases", "8"]) == EXIT_OK
    assert main(["verify", "--out-dir", str(tmp_path / "b"), "--cases", "8"]) == EXIT_OK
    a, b = _body(tmp_path / "a/verify_report.json"), _body(tmp_path / "b/verify_report.json")
    assert a == b and a["passed"]
    assert {s["suite"] for s in a["suites"]} >= {"mats", "geodesic", "state", "homotopy", "iteration", "nctorus"}
    assert (tmp_path / "a/verify_report.csv").read_text() == (tmp_path / "b/verify_report.csv").read_text()


def test_verify_forced_failure(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("cases = 5\ntol.geodesic = 1e-30\n")
    assert main(["verify", "--config", str(cfg), "--out-dir", str(tmp_path)]) == EXIT_FAILURE
    suites = {s["suite"]: s for s in _body(tmp_path / "verify_report.json")["suites"]}
    assert not suites["geodesic"]["passed"] and suites["mats"]["passed"]


def test_config_errors_exit_three(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    assert main(["verify", "--config", str(cfg)]) == EXIT_CONFIG
    assert main(["verify", "--set", "tol.mats=-1", "--out-dir", str(tmp_path)]) == EXIT_CONFIG
    assert main(["verify", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG
    assert main(["contract", "--delta", "0.01", "--demo", "sball", "--out-dir", str(tmp_path)]) == EXIT_CONFIG
    with pytest.raises(SystemExit) as info:
        main(["nonsense"])
    assert info.value.code == EXIT_CONFIG


def test_contract_uhf_demo(tmp_path):
    assert main(["contract", "--out-dir", str(tmp_path)]) == EXIT_OK
    doc = json.loads((tmp_path / "trace.json").read_text())
    assert doc["depth"] == 4 and all(c["passed"] for c in doc["checks"])
    assert doc["unitaries_elided"] and doc["base_vertex_deviation"] == 0.0
    header = (tmp_path / "margins.csv").read_text().splitlines()[0]
    assert header == "vertex,time,distance,constant,margin"
    margins = [float(r.split(",")[4]) for r in (tmp_path / "margins.csv").read_text().splitlines()[1:]]
    assert min(margins) >= -1e-9
    assert (tmp_path / "observables.csv").read_text().startswith("vertex,time,observable,value\n")


def test_contract_is_deterministic(tmp_path):
    for name in ("a", "b"):
        assert main(["contract", "--demo", "sball", "--out-dir", str(tmp_path / name)]) == EXIT_OK
    for f in ("trace.json", "margins.csv", "observables.csv"):
        assert (tmp_path / "a" / f).read_text() == (tmp_path / "b" / f).read_text()


def test_contract_small_overlap_demo(tmp_path):
    args = ["contract", "--demo", "sball", "--set", "overlap=4e-4", "--t-level", "1e-4", "--out-dir", str(tmp_path)]
    assert main(args) == EXIT_OK
    rep = json.loads((tmp_path / "trace.json").read_text())["report"]
    assert rep["sub_branch"] == "corner_sphere_lift"


def test_contract_obstruction_demo(tmp_path):
    assert main(["contract", "--demo", "obstruction", "--out-dir", str(tmp_path)]) == EXIT_OBSTRUCTION
    body = _body(tmp_path / "obstruction.json")
    assert body["obstruction"]["reason"] == "rank_condition"
    assert not (tmp_path / "trace.json").exists()


def test_contract_empty_family(tmp_path):
    assert main(["contract", "--vertices", "0", "--out-dir", str(tmp_path)]) == EXIT_CONFIG


def test_rotation_table(tmp_path):
    assert main(["rotation", "-p", "1", "-q", "2", "--kmax", "4", "--out-dir", str(tmp_path)]) == EXIT_OK
    rows = (tmp_path / "rotation_table.csv").read_text().splitlines()
    assert rows == [
        "k,group,provenance,resolved",
        "0,0,closed-form,",
        "1,Z^2,closed-form,",
        "2,Z,closed-form,",
        "3,Z,closed-form,",
        "4,pi_4(S^3),symbolic,",
    ]
    assert main(["rotation", "-p", "1", "-q", "2", "--resolve-spheres", "--out-dir", str(tmp_path)]) == EXIT_OK
    assert "4,pi_4(S^3),sphere-table,Z/2" in (tmp_path / "rotation_table.csv").read_text()


def test_rotation_irrational_and_errors(tmp_path):
    assert main(["rotation", "--irrational", "--out-dir", str(tmp_path)]) == EXIT_OK
    rows = _body(tmp_path / "rotation_table.json")["rows"]
    assert {r["value"] for r in rows} == {"0"}
    assert main(["rotation", "-p", "2", "-q", "4", "--out-dir", str(tmp_path)]) == EXIT_CONFIG
