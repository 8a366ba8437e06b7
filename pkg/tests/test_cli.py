import json

import pytest

from reflectlax import cli
from reflectlax.config import ConfigError, config_from_dict, parse_config, preset, preset_names
from reflectlax.checks import CHECKS


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


def read_all(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_presets_listing(capsys):
    code, out = run(["presets"], capsys)
    assert code == 0
    for name in ("sl2", "sl3", "gl2_loop_xxz", "toda_coxeter"):
        assert f"  {name}  [" in out.out
    assert cli.list_presets() == cli.list_presets() == out.out


def test_every_check_is_a_preset():
    assert set(CHECKS) <= set(preset_names())
    assert len(CHECKS) == 11


def test_verify_sl3_rows(tmp_path, capsys):
    code, out = run(["verify", "--preset", "sl3", "--out", str(tmp_path)], capsys)
    assert code == 0, out.out
    report = json.loads((tmp_path / "report.json").read_text())
    names = {row["name"] for row in report["checks"]}
    for row in ("cre_defect", "cybe_defect", "mcybe_defect"):
        assert row in names
    assert report["pass"] and all(row["pass"] for row in report["checks"])
    assert report["config_digest"].startswith("sha256:")
    assert "timings" not in report


def test_toda_simulation_is_byte_stable(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        code, out = run(["simulate", "--preset", "toda_coxeter", "--seed", "7", "--out", str(d)], capsys)
        assert code == 0, out.out
    files = read_all(a)
    assert {"trajectory.csv", "invariants.csv", "summary.json"} <= set(files)
    assert {k: v for k, v in files.items() if k != "timings.json"} == {
        k: v for k, v in read_all(b).items() if k != "timings.json"}
    header = files["invariants.csv"].split(b"\n")[0]
    assert header == b"t,eig_1,eig_2,eig_3,trT,trT2,trT3"


def test_xxz_simulation_writes_csv(tmp_path, capsys):
    code, out = run(["simulate", "--preset", "gl2_loop_xxz", "--out", str(tmp_path)], capsys)
    assert code == 0, out.out
    header = (tmp_path / "trajectory.csv").read_text().split("\n")[0].split(",")
    assert header[:4] == ["t", "k_1", "e_1", "f_1"]
    assert "omega_3" in header and "tau_1.3" in header
    doc = json.loads((tmp_path / "verification.json").read_text())
    assert any(row["name"].startswith("evolution.") for row in doc["checks"])


def test_seed_changes_results(tmp_path, capsys):
    for s in ("1", "2"):
        run(["simulate", "--preset", "toda_coxeter", "--seed", s, "--out", str(tmp_path / s)], capsys)
    assert (tmp_path / "1" / "trajectory.csv").read_bytes() != (tmp_path / "2" / "trajectory.csv").read_bytes()


def test_calibrate(tmp_path, capsys):
    code, out = run(["calibrate", "--preset", "toda_coxeter", "--out", str(tmp_path)], capsys)
    assert code == 0
    doc = json.loads((tmp_path / "calibration.json").read_text())
    assert doc["kappa"] == pytest.approx(-2.0, abs=1e-8)


def test_empty_and_malformed_configs(tmp_path, capsys):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    code, out = run(["verify", "--config", str(empty)], capsys)
    assert code == cli.EXIT_CONFIG and "empty.json:1:1" in out.err
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "toda", "toda": {"n": 2, "colour": 1}}')
    code, out = run(["simulate", "--config", str(bad)], capsys)
    assert code == cli.EXIT_CONFIG and "toda" in out.err and "colour" in out.err


def test_tolerance_override_can_fail_a_check(tmp_path, capsys):
    argv = ["verify", "--preset", "semiclassical_limit", "--out", str(tmp_path)]
    code, _ = run(argv + ["--tol", "semiclassical_limit.slope_offset=1e-9"], capsys)
    assert code == cli.EXIT_FAIL
    code, out = run(argv + ["--tol", "no_such_row=1"], capsys)
    assert code == cli.EXIT_CONFIG and "no_such_row" in out.err


def test_config_strictness():
    with pytest.raises(ConfigError):
        config_from_dict({"kind": "toda", "seed": -1})
    with pytest.raises(ConfigError):
        config_from_dict({"kind": "nope"})
    with pytest.raises(ConfigError, match="toda.n"):
        config_from_dict({"kind": "toda", "toda": {"n": "two"}})
    with pytest.raises(ConfigError, match="<config>:1:"):
        parse_config("{")
    cfg = preset("gl2_loop_xxz")
    assert cfg.xxz.N == 3 and cfg.kind == "xxz"
