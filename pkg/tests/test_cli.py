import csv
import json
import os

import pytest

from upperfn import cli
from upperfn.errors import NumericalGuard
from upperfn.scenarios import COLUMNS, SCENARIOS



def test_list(capsys):
    assert cli.main(["--scenario", "list"]) == 0
    out = capsys.readouterr().out.split()
    assert out == list(SCENARIOS)
    assert "thm3_kde" in out and "thm10_ll" in out


def test_unknown_scenario(tmp_path, capsys):
    assert cli.main(["--scenario", "nope", "--out", str(tmp_path / "o")]) == 2
    assert "unknown scenario" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_bad_replications(tmp_path):
    assert cli.main(["--scenario", "prop1_gaussian_grid", "--replications", "0",
                     "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("text", [
    "[run]\nscenario = prop1_gaussian_grid\nseed = abc\n",
    "[run]\nscenario = prop1_gaussian_grid\nbogus = 1\n",
    "[other]\nx = 1\n",
    "[run]\nscenario = prop1_gaussian_grid\n[params]\nno_such_param = 3\n",
    "[run]\nscenario = prop1_gaussian_grid\n[params]\nn_points = many\n",
    "not a config",
])
def test_malformed_config(tmp_path, text):
    cfg = tmp_path / "c.ini"
    cfg.write_text(text)
    out = tmp_path / "o"
    assert cli.main(["--config", str(cfg), "--out", str(out)]) == 2
    assert not out.exists() or not os.listdir(out)


def test_missing_config(tmp_path):
    assert cli.main(["--config", str(tmp_path / "none.ini")]) == 2


def _run(tmp_path, name, *extra):
    out = tmp_path / name
    rc = cli.main(["--scenario", "prop1_gaussian_grid", "--replications", "600", "--seed", "11",
                   "--out", str(out), *extra])
    return rc, out


def test_csv_output_and_determinism(tmp_path):
    rc1, o1 = _run(tmp_path, "a", "--threads", "1")
    rc2, o2 = _run(tmp_path, "b", "--threads", "8")
    rc3, o3 = _run(tmp_path, "c", "--threads", "1")
    assert rc1 == rc2 == rc3 == 0
    files = sorted(os.listdir(o1))
    assert files == sorted(os.listdir(o2))
    assert "prop1_gaussian_grid_manifest.csv" in files
    for f in files:
        a = (o1 / f).read_bytes()
        assert a == (o2 / f).read_bytes() == (o3 / f).read_bytes()
    rep = [f for f in files if not f.endswith("manifest.csv")][0]
    with open(o1 / rep) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == COLUMNS
    assert all(len(r) == len(COLUMNS) for r in rows)
    assert {r[-1] for r in rows[1:]} <= {"true", "false"}
    man = list(csv.reader(open(o1 / "prop1_gaussian_grid_manifest.csv")))
    names = {r[0] for r in man[1:]}
    assert {"delta_star", "C_NRmk", "lambda1", "lambda2"} <= names


def test_seed_changes_output(tmp_path):
    _, o1 = _run(tmp_path, "a")
    out = tmp_path / "z"
    cli.main(["--scenario", "prop1_gaussian_grid", "--replications", "600", "--seed", "12",
              "--out", str(out)])
    rep = [f for f in os.listdir(o1) if "manifest" not in f][0]
    assert (o1 / rep).read_bytes() != (out / rep).read_bytes()


def test_json_format(tmp_path):
    rc, out = _run(tmp_path, "j", "--format", "json")
    assert rc == 0
    rep = [f for f in os.listdir(out) if "manifest" not in f][0]
    data = json.loads((out / rep).read_text())
    assert list(data[0]) == COLUMNS
    man = json.loads((out / "prop1_gaussian_grid_manifest.json").read_text())
    assert {"name", "value", "provenance"} == set(man[0])


def test_config_file(tmp_path):
    cfg = tmp_path / "c.ini"
    out = tmp_path / "o"
    cfg.write_text(f"[run]\nscenario = prop1_gaussian_grid\nseed = 3\nreplications = 500\n"
                   f"out = {out}\n[params]\nys = 1,2\n")
    assert cli.main(["--config", str(cfg)]) == 0
    rep = [f for f in os.listdir(out) if "manifest" not in f][0]
    rows = list(csv.reader(open(out / rep)))
    assert rows[1][3] == "500"


def test_numerical_guard_exit(tmp_path, monkeypatch, capsys):
    def boom(*a, **k):
        raise NumericalGuard("capacity", "sup at grid boundary")
    monkeypatch.setattr(cli, "run_scenario", boom)
    out = tmp_path / "o"
    assert cli.main(["--scenario", "thm3_kde", "--out", str(out)]) == 3
    assert "capacity" in capsys.readouterr().err
    assert not out.exists()


def test_failing_inequality_exit(tmp_path, monkeypatch):
    from upperfn import scenarios
    real = scenarios.run_scenario

    def failing(*a, **k):
        res = real(*a, **k)
        for rows in res.reports.values():
            rows[0].passed = False
        return res
    monkeypatch.setattr(cli, "run_scenario", failing)
    rc, _ = _run(tmp_path, "f")
    assert rc == 1


def test_no_partial_files_left(tmp_path):
    _, out = _run(tmp_path, "p")
    assert not [f for f in os.listdir(out) if f.startswith(".tmp-")]
