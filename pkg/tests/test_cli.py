import csv
import io
import json

import pytest

from hyperlf import cli
from hyperlf.cli import ExperimentConfig, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_fe_lists_every_D(capsys):
    code, out, _ = run(["verify", "--suite", "fe", "--q", "3", "--nmax", "5"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    # one row per D in H_2 .. H_5 (the default lower end is n = 2)
    assert len(rows) == sum(3 ** n - 3 ** (n - 1) for n in range(2, 6))


def test_moments_row(capsys):
    code, out, _ = run(["moments", "--q", "3", "--n", "9", "--m", "1", "--k", "1",
                        "--theta", "0.01", "--alpha", "0"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1
    assert rows[0]["q"] == "3" and rows[0]["n"] == "9"
    assert float(rows[0]["S"]) > 0


def test_duplicate_shifts_exit_1(capsys):
    code, _, err = run(["moments", "--q", "3", "--n", "9", "--theta", "0.2,0.2"], capsys)
    assert code == 1
    assert "degenerate" in err


@pytest.mark.parametrize("argv", [
    [],
    ["nonsense"],
    ["moments", "--q", "3"],
    ["moments", "--q", "3", "--n", "9", "--theta", "0.1", "--mode", "bogus"],
    ["verify", "--suite", "nosuch", "--q", "3"],
])
def test_usage_errors(argv, capsys):
    assert run(argv, capsys)[0] == 1


def test_cap_exceeded_is_usage_error(capsys):
    assert run(["moments", "--q", "3", "--n", "9", "--theta", "0.1", "--cap", "100"], capsys)[0] == 1


def test_failed_check_exit_2(monkeypatch, capsys):
    monkeypatch.setitem(cli.EXPERIMENTS, "ensemble", lambda opts: ([{"x": 1}], False))
    assert run(["ensemble", "--q", "3", "--n", "2"], capsys)[0] == 2


def test_non_finite_value_exit_2(monkeypatch, capsys):
    monkeypatch.setitem(cli.EXPERIMENTS, "ensemble", lambda opts: ([{"x": float("nan")}], True))
    assert run(["ensemble", "--q", "3", "--n", "2"], capsys)[0] == 2


def test_config_roundtrip():
    cfg = ExperimentConfig("moments", {"q": "3", "n": "7,9", "theta": "0.1,0.2", "timing": True})
    assert ExperimentConfig.from_text(cfg.to_text()) == cfg
    parsed = ExperimentConfig.from_text("# comment\nexperiment = moments\nq = 3  # field\n\nk = 1,2\n")
    assert parsed.options == {"q": "3", "k": "1,2"}


def test_config_file_and_json(tmp_path, capsys):
    path = tmp_path / "exp.cfg"
    path.write_text("experiment = moments\nq = 3\nn = 5\nk = 1\ntheta = 0.3\n")
    code, out, _ = run(["moments", "--config", str(path), "--format", "json"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["ok"] is True
    assert payload["config"]["theta"] == "0.3"
    assert payload["rows"][0]["n"] == 5


def test_out_file_and_config_sidecar(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code, _, _ = run(["moments", "--q", "3", "--n", "5", "--theta", "0.3", "--out", str(out)], capsys)
    assert code == 0
    assert out.read_text().startswith("q,n,")
    side = ExperimentConfig.from_text((tmp_path / "r.csv.config").read_text())
    assert side.experiment == "moments" and side.options["theta"] == "0.3"


def test_unwritable_output(tmp_path, capsys):
    bad = tmp_path / "missing" / "r.csv"
    assert run(["moments", "--q", "3", "--n", "5", "--theta", "0.3", "--out", str(bad)], capsys)[0] == 1


def test_float_format_17_digits(capsys):
    code, out, _ = run(["moments", "--q", "3", "--n", "5", "--theta", "0.3"], capsys)
    row = list(csv.DictReader(io.StringIO(out)))[0]
    assert repr(float(row["S"])) == repr(float(format(float(row["S"]), ".17g")))
    assert "e" not in row["q"]


def test_residue_command(capsys):
    code, out, _ = run(["residue", "--g", "50", "--theta-g", "1,2", "--k", "1,1"], capsys)
    assert code in (0, 2)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["g"] in ("50", "50.0")
