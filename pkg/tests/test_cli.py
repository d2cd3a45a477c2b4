import csv
import functools
import json
import math

import pytest

from impact_series import cli
from impact_series.io import read_events
from impact_series.selfcheck import run_checks
from test_selfcheck import corrupted


def run(argv, capsys):
    try:
        code = cli.main(argv)
    except SystemExit as exc:
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parser_defaults():
    args = cli.build_parser().parse_args(["simulate", "--seed", "3", "--alpha", "0", "--beta", "0", "--gamma", "0"])
    assert args.model == "qm" and args.n_pairs == 100_000 and args.format == "csv"
    assert args.arms == (1.0, 2.0)


@pytest.mark.parametrize("text,value", [("0", 0.0), ("pi/4", math.pi / 4), ("-2*pi", -2 * math.pi), ("0.7", 0.7)])
def test_parse_angle(text, value):
    assert cli.parse_angle(text) == pytest.approx(value)


@pytest.mark.parametrize("text", ["foo", "__import__('os')", "1/0", "pi**2"])
def test_parse_angle_rejects(text):
    import argparse

    with pytest.raises(argparse.ArgumentTypeError):
        cli.parse_angle(text)


def test_analytic_headline(capsys):
    code, out, _ = run(["analytic", "--alpha", "0", "--beta", "0", "--gamma", "0", "--json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["QM"]["E"] == pytest.approx(2 / 3, abs=1e-12)
    assert doc["MC"]["E"] == pytest.approx(1 / 3, abs=1e-12)
    assert doc["QM"]["visibility_side1"] == pytest.approx(2 / 3, abs=1e-12)
    code, out, _ = run(["analytic", "--alpha", "0", "--beta", "0", "--gamma", "0"], capsys)
    assert "E_QM = 0.666666" in out and "E_MC = 0.333333" in out


@pytest.mark.parametrize("beta", ["0", "0.7", "-2.2", "pi/3"])
def test_analytic_special_form(capsys, beta):
    code, out, _ = run(["analytic", "--special-n", "0", "--beta", beta, "--json"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["QM"]["E"] == pytest.approx(2 / 3, abs=1e-12)
    assert doc["MC"]["E"] == pytest.approx(1 / 3, abs=1e-12)


def test_analytic_degrees(capsys):
    _, out, _ = run(["analytic", "--alpha", "90", "--beta", "0", "--gamma", "0", "--degrees", "--json"], capsys)
    doc = json.loads(out)
    assert doc["QM"]["P++"] == pytest.approx(5 / 12)


@pytest.mark.parametrize(
    "argv",
    [
        ["analytic", "--alpha", "0", "--beta", "0"],
        ["analytic", "--special-n", "0", "--alpha", "1"],
        ["analytic", "--alpha", "zero", "--beta", "0", "--gamma", "0"],
        ["analytic", "--special-m", "1", "--alpha", "0", "--beta", "0", "--gamma", "0"],
        ["nonsense"],
        [],
    ],
)
def test_usage_errors_exit_1(capsys, argv):
    code, _, err = run(argv, capsys)
    assert code == 1
    assert "error" in err


def _scan_rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def test_scan_alpha(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    code, _, _ = run(["scan", "--alpha", "0:2*pi:pi/4", "--beta", "0", "--gamma", "0", "-o", str(out)], capsys)
    assert code == 0
    rows = _scan_rows(out)
    assert len(rows) == 9
    assert list(rows[0]) == list(cli.SCAN_COLUMNS)
    for r in rows:
        a = float(r["alpha"])
        assert float(r["E_QM"]) == pytest.approx(2 / 3 * math.cos(a), abs=1e-12)
        assert float(r["E_MC"]) == pytest.approx(1 / 3 * math.cos(a), abs=1e-12)
    assert out.read_text().startswith("# tool: impact-series")


def test_scan_grid_and_single_point(tmp_path, capsys):
    code, out, _ = run(["scan", "--alpha", "0:1:0.5", "--beta", "0:1:1", "--gamma", "0.3"], capsys)
    assert code == 0
    data = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert len(data) == 1 + 3 * 2
    code, out, _ = run(["scan", "--alpha", "1:1:0.1", "--beta", "0", "--gamma", "0"], capsys)
    assert len([ln for ln in out.splitlines() if not ln.startswith("#")]) == 2


@pytest.mark.parametrize("alpha", ["0:1:0", "1:0:0.5", "0:1"])
def test_scan_bad_ranges(capsys, alpha):
    code, _, _ = run(["scan", "--alpha", alpha, "--beta", "0", "--gamma", "0"], capsys)
    assert code == 1


def _simulate(tmp_path, capsys, *extra, name="run"):
    d = tmp_path / name
    argv = ["simulate", "--alpha", "0", "--beta", "0", "--gamma", "0", "--output-dir", str(d), *extra]
    code, _, _ = run(argv, capsys)
    return code, d


def test_simulate_single_pair(tmp_path, capsys):
    code, d = _simulate(tmp_path, capsys, "--seed", "42", "--n-pairs", "1")
    assert code == 0
    batch, header = read_events(d / "events.csv")
    assert len(batch) == 1
    assert header["seed"] == "42"
    summary = json.loads((d / "summary.json").read_text())
    assert summary["meta"]["seed"] == 42


def test_simulate_is_byte_identical(tmp_path, capsys):
    args = ("--seed", "7", "--n-pairs", "20000", "--model", "mc", "--format", "jsonl")
    _, d1 = _simulate(tmp_path, capsys, *args, name="same")
    first = {p.name: p.read_bytes() for p in d1.iterdir()}
    _, d2 = _simulate(tmp_path, capsys, *args, name="same")
    assert {p.name: p.read_bytes() for p in d2.iterdir()} == first


def test_simulate_summary_contents(tmp_path, capsys):
    code, d = _simulate(tmp_path, capsys, "--seed", "42", "--n-pairs", "200000", "--model", "mc", "--blinded")
    summary = json.loads((d / "summary.json").read_text())["summary"]
    assert sum(summary["counts"].values()) == summary["n_classL"]
    assert abs(summary["E_hat"] - 1 / 3) <= 4 * summary["std_err_E"]
    columns = next(ln for ln in (d / "events.csv").read_text().splitlines() if not ln.startswith("#"))
    assert columns == "trial_id,class,time_tag_delta,sigma,omega"


def test_simulate_custom_model_file(tmp_path, capsys):
    spec = tmp_path / "pairs.txt"
    spec.write_text("1/3 (L,LL) (l,Ll)\n1/3 (L,LL) (l,lL)\n1/3 (l,Ll) (l,lL)\n")
    code, d = _simulate(tmp_path, capsys, "--seed", "1", "--n-pairs", "100000", "--model-file", str(spec))
    assert code == 0
    summary = json.loads((d / "summary.json").read_text())
    assert summary["meta"]["model"] == "pairs"
    assert abs(summary["summary"]["E_hat"] - 1 / 3) <= 5 * summary["summary"]["std_err_E"]
    bad = tmp_path / "bad.txt"
    bad.write_text("0.5 (L,LL)\n")
    code, _ = _simulate(tmp_path, capsys, "--seed", "1", "--model-file", str(bad), name="bad")
    assert code == 1


def test_simulate_requires_seed(tmp_path, capsys):
    code, _ = _simulate(tmp_path, capsys, "--n-pairs", "10")
    assert code == 1


def test_simulate_unwritable(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run(
        ["simulate", "--seed", "1", "--n-pairs", "10", "--alpha", "0", "--beta", "0", "--gamma", "0",
         "--events-out", str(blocker / "events.csv")],
        capsys,
    )  # fmt: skip
    assert code == 1 and "cannot write" in err


def test_simulate_env_outdir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUTDIR_ENV, str(tmp_path / "env"))
    code, _, _ = run(["simulate", "--seed", "1", "--n-pairs", "10", "--special-n", "0"], capsys)
    assert code == 0
    assert (tmp_path / "env" / "events.csv").exists()


def test_discriminate_simulated(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, _, _ = run(["discriminate", "--special-n", "0", "--beta", "0.4", "--seed", "3", "-o", str(out)], capsys)
    assert code == 0
    doc = json.loads(out.read_text())
    verdicts = {r["source"]: r["report"]["verdict"] for r in doc["reports"]}
    assert verdicts == {"qm": "FavorsQM", "mc": "FavorsMC"}
    assert doc["required_sample_size_5sigma"] == 642


def test_discriminate_ingests_stream(tmp_path, capsys):
    _, d = _simulate(tmp_path, capsys, "--seed", "9", "--n-pairs", "100000", "--model", "mc", "--blinded")
    code, out, _ = run(["discriminate", "--alpha", "0", "--beta", "0", "--gamma", "0",
                        "--events", str(d / "events.csv")], capsys)  # fmt: skip
    assert code == 0
    doc = json.loads(out[out.index("{"):])
    assert doc["reports"][0]["report"]["verdict"] == "FavorsMC"


def test_discriminate_off_surface(capsys):
    code, _, err = run(["discriminate", "--alpha", "0.3", "--beta", "0", "--gamma", "0", "--seed", "1"], capsys)
    assert code == 1 and "n*pi" in err


def test_selfcheck_passes(capsys):
    code, out, _ = run(["selfcheck", "--samples", "100"], capsys)
    assert code == 0
    assert out.strip().endswith("selfcheck: PASS")
    assert sum(line.startswith("PASS") for line in out.splitlines()) >= 8


def test_selfcheck_negative_control(capsys, monkeypatch):
    monkeypatch.setattr(cli, "run_checks", functools.partial(run_checks, amplitude_fn=corrupted))
    code, out, _ = run(["selfcheck", "--samples", "50"], capsys)
    assert code == 2
    assert "FAIL" in out
