import csv
import io
import json
import math

import pytest

from decaykit import cli

F5 = """
[resonance]
x_d = 0.1
nu = 0.5
b_s = 1.0

[grid]
n_max = 6
points = 7
"""


@pytest.fixture
def f5(tmp_path):
    p = tmp_path / "f5.toml"
    p.write_text(F5)
    return p


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_survival_csv(f5, tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run(["survival", "--config", str(f5), "--out", str(out)], capsys)
    assert code == 0
    raw = out.read_bytes()
    assert b"\r" not in raw
    rows = list(csv.DictReader(io.StringIO(raw.decode())))
    assert list(rows[0]) == ["n", "tau", "P", "P_e", "P_ne", "P_i", "I"]
    assert len(rows) == 7
    assert float(rows[0]["P"]) == pytest.approx(1.0, abs=1e-12)
    for r in rows:
        P = float(r["P"])
        assert P == pytest.approx(float(r["P_e"]) + float(r["P_ne"]) + float(r["P_i"]), abs=1e-10)
        # 17 significant digits round-trip
        assert repr(float(r["P"])) == repr(float(format(P, ".17g")))


def test_determinism(f5, tmp_path, capsys, monkeypatch):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["survival", "--config", str(f5), "--out", str(a)], capsys)
    monkeypatch.setenv("DECAYKIT_THREADS", "4")
    run(["survival", "--config", str(f5), "--out", str(b)], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_json_config_equivalent(f5, tmp_path, capsys):
    j = tmp_path / "f5.json"
    j.write_text(json.dumps({"resonance": {"x_d": 0.1, "nu": 0.5, "b_s": 1.0}, "grid": {"n_max": 6, "points": 7}}))
    _, t_out, _ = run(["survival", "--config", str(f5)], capsys)
    _, j_out, _ = run(["survival", "--config", str(j)], capsys)
    assert t_out == j_out


def test_table1_default(capsys):
    code, out, _ = run(["table1"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 12
    assert float(rows[10]["tau_cs"]) == pytest.approx(0.206, rel=5e-3)
    assert rows[0]["root_missing"] == "false"


def test_table1_no_solution_at_b_s_1(capsys):
    code, out, err = run(["table1", "--b-s", "1"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert all(r["root_missing"] == "true" for r in rows)
    assert "RootMissing" in err


def test_be8(capsys):
    code, out, _ = run(["be8", "--format", "json"], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["x_s"] == pytest.approx(2.8e-3 / 92.0, rel=1e-15)
    assert d["b_per_MeV"] == pytest.approx(10.83, rel=5e-3)
    assert d["oscillation_period_lifetimes"] == pytest.approx(4 * math.pi * d["x_s"], rel=1e-15)


def test_regions_json_mirrors_report(f5, capsys):
    code, out, _ = run(["regions", "--config", str(f5), "--format", "json"], capsys)
    d = json.loads(out)
    assert {"n_cl", "n_min_m", "intervals", "tau_cs_intersection", "alpha"} <= set(d)
    assert d["intervals"][2][1] is None


def test_other_commands(f5, capsys):
    for cmd in ("dos", "moments", "autocorr"):
        code, out, err = run([cmd, "--config", str(f5)], capsys)
        assert code == 0, err
        assert out.count("\n") >= 2
    code, out, _ = run(["moments", "--config", str(f5), "--format", "json"], capsys)
    d = json.loads(out)
    assert d["values"][0] == pytest.approx(1.0) and d["variance"] > 0


def test_physical_pole_round_trip(tmp_path, capsys):
    p = tmp_path / "be8.toml"
    p.write_text("[resonance]\nnu = 0.5\nb_s = 1.0\npoles = [{re_keV = 92.0, im_eV = 2.8}]\n")
    code, out, err = run(["regions", "--config", str(p), "--format", "json"], capsys)
    assert code == 0, err
    assert json.loads(out)["x_d"] == pytest.approx(2.8e-3 / 92.0, rel=1e-14)


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[resonance]\nx_d = 0.1\npoles = []\n")
    code, _, err = run(["survival", "--config", str(bad)], capsys)
    assert code == 2 and "ConfigError" in err
    bad.write_text("[resonance\n")
    assert run(["survival", "--config", str(bad)], capsys)[0] == 2
    bad.write_text("[resonance]\nx_d = 0.1\n[grid]\npoints = 1\n")
    assert run(["survival", "--config", str(bad)], capsys)[0] == 2
    assert run(["dos"], capsys)[0] == 2


def test_compute_errors_exit_3(f5, capsys):
    code, _, err = run(["survival", "--config", str(f5), "--nu", "1.5"], capsys)
    assert code == 3 and "NuOutOfRange" in err


def test_small_b_s_warning(f5, capsys):
    code, _, err = run(["moments", "--config", str(f5), "--b-s", "5e-4"], capsys)
    assert "b_s" in err
