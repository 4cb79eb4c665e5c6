import csv
import io
import json
import math
import subprocess
import sys

import pytest

from hyperpf.cli import EXIT_DISAGREE, EXIT_OK, EXIT_SPEC, SWEEP_HEADER, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def compute(capsys, *argv):
    code, out, err = run(capsys, "compute", *argv)
    return code, (json.loads(out) if out else None), err


def test_compute_beta4(capsys):
    code, doc, _ = compute(capsys, "--beta", "4", "--n", "2", "--weight", "gaussian")
    assert code == EXIT_OK
    assert doc["value"]["re"] == pytest.approx(6.0, rel=1e-14)
    assert doc["oracles"]["mehta"]["rel_err"] < 1e-8
    assert doc["case"] == "case1" and doc["L"] == 2


def test_compute_beta9(capsys):
    code, doc, _ = compute(capsys, "--beta", "9", "--n", "2")
    assert code == EXIT_OK
    assert doc["value"]["re"] == pytest.approx(3466.38, abs=0.01)


def test_compute_invalid_beta(capsys):
    code, doc, err = compute(capsys, "--beta", "3", "--n", "2")
    assert code == EXIT_SPEC and doc is None
    assert "beta must be L^2 or L^2+1" in err


@pytest.mark.parametrize("argv", [
    ["--beta", "2", "--n", "3"],
    ["--beta", "1", "--n", "2", "--geometry", "circle"],
    ["--beta", "1", "--n", "2", "--weight", "jacobi", "--a", "-1"],
    ["--beta", "1"],
    ["--beta", "x", "--n", "2"],
    ["--beta", "25", "--n", "7"],
])
def test_compute_spec_errors(capsys, argv):
    assert compute(capsys, *argv)[0] == EXIT_SPEC


def test_compute_disagreement_exit(capsys):
    # an impossible tolerance turns rounding noise into a reported disagreement
    code, doc, _ = compute(capsys, "--beta", "9", "--n", "3", "--tol", "0")
    assert code == EXIT_DISAGREE
    assert doc["oracles"]["mehta"]["rel_err"] > 0


def test_compute_circular(capsys):
    code, doc, _ = compute(capsys, "--beta", "4", "--n", "2", "--weight", "circular")
    assert code == EXIT_OK and doc["geometry"] == "circle"
    assert doc["value"]["re"] == pytest.approx(3 * (2 * math.pi) ** 2, rel=1e-12)
    code, doc, _ = compute(capsys, "--beta", "4", "--n", "2", "--weight", "circular", "--normalized")
    assert doc["value"]["re"] == pytest.approx(3, rel=1e-12)
    assert set(doc["oracles"]) == {"dyson", "direct"}


def test_compute_other_weights(capsys):
    code, doc, _ = compute(capsys, "--beta", "1", "--n", "3", "--weight", "jacobi", "--a", "2", "--b", "3",
                           "--family", "hermite")
    assert code == EXIT_OK and set(doc["oracles"]) == {"selberg", "direct"}
    code, doc, _ = compute(capsys, "--beta", "2", "--n", "2", "--weight", "uniform", "--lo", "0", "--hi", "1",
                           "--oracle", "none")
    assert code == EXIT_OK and doc["oracles"] == {}
    assert doc["value"]["re"] == pytest.approx(1 / 12, rel=1e-13)


def test_compute_oracle_all(capsys):
    code, doc, _ = compute(capsys, "--beta", "1", "--n", "2", "--oracle", "all", "--seed", "4")
    assert code == EXIT_OK
    assert set(doc["oracles"]) == {"mehta", "direct", "monte_carlo"}
    assert doc["seed"] == 4


def test_compute_output_is_deterministic(capsys):
    argv = ["--beta", "1", "--n", "3", "--family", "random", "--seed", "9", "--oracle", "all"]
    first = compute(capsys, *argv)[1]
    second = compute(capsys, *argv)[1]
    first.pop("seconds"), second.pop("seconds")
    assert json.dumps(first, sort_keys=True) == json.dumps(second, sort_keys=True)


def test_compute_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"beta": 4, "n": 2, "weight": "jacobi", "a": 2.0, "b": 2.0,
                               "atoms": [{"x": 0.5, "c": 1.0}]}))
    code, doc, _ = compute(capsys, "--config", str(cfg))
    assert code == EXIT_OK and doc["oracles"] == {}
    # flags override the file
    code, doc, _ = compute(capsys, "--config", str(cfg), "--n", "3")
    assert doc["N"] == 3
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"betta": 4}))
    assert compute(capsys, "--config", str(bad))[0] == EXIT_SPEC
    assert compute(capsys, "--config", str(tmp_path / "missing.json"))[0] == EXIT_SPEC


def test_threads_env(capsys, monkeypatch):
    monkeypatch.setenv("HYPERPF_THREADS", "3")
    code, doc, _ = compute(capsys, "--beta", "9", "--n", "2")
    assert code == EXIT_OK
    monkeypatch.setenv("HYPERPF_THREADS", "junk")
    assert compute(capsys, "--beta", "9", "--n", "2")[0] == EXIT_OK


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_sweep_beta1(capsys, tmp_path):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "sweep", "--beta", "1", "--n-range", "1..5", "--weight", "gaussian",
                     "--out", str(out))
    rows = read_csv(out)
    assert code == EXIT_OK and rows[0] == SWEEP_HEADER and len(rows) == 6
    assert all(float(r[8]) < 1e-6 for r in rows[1:])
    assert [r[6] for r in rows[1:]] == ["mehta"] * 5


def test_sweep_beta4_increasing(capsys, tmp_path):
    out = tmp_path / "s.csv"
    assert run(capsys, "sweep", "--beta", "4", "--n-range", "1..4", "--out", str(out))[0] == EXIT_OK
    values = [float(r[4]) for r in read_csv(out)[1:]]
    assert values == sorted(values) and len(values) == 4


def test_sweep_empty_range(capsys, tmp_path):
    out = tmp_path / "s.csv"
    assert run(capsys, "sweep", "--beta", "4", "--n-range", "3..2", "--out", str(out))[0] == EXIT_OK
    assert read_csv(out) == [SWEEP_HEADER]


def test_sweep_adjacent_skips_odd_n(capsys, tmp_path):
    out = tmp_path / "s.csv"
    assert run(capsys, "sweep", "--beta", "2", "--n-range", "1..4", "--out", str(out))[0] == EXIT_OK
    assert [r[2] for r in read_csv(out)[1:]] == ["2", "4"]


def test_sweep_failure_keeps_partial_file(capsys, tmp_path, monkeypatch):
    from hyperpf import cli
    real = cli.evaluate

    def failing(cfg, N=None):
        if N == 3:
            raise cli.InvalidSpecError("injected failure")
        return real(cfg, N)

    monkeypatch.setattr(cli, "evaluate", failing)
    out = tmp_path / "s.csv"
    code, _, err = run(capsys, "sweep", "--beta", "4", "--n-range", "1..5", "--out", str(out))
    assert code == EXIT_SPEC and "injected" in err
    assert [r[2] for r in read_csv(out)[1:]] == ["1", "2"]


def test_sweep_bad_range(capsys, tmp_path):
    assert run(capsys, "sweep", "--beta", "1", "--n-range", "1-3", "--out", str(tmp_path / "x"))[0] == EXIT_SPEC


def test_verify_identities(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "identities")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == EXIT_OK and rows[0] == ["suite", "check", "lhs", "rhs", "rel_err", "pass"]
    assert any(r[1].startswith("vandermonde") for r in rows[1:])
    assert any(r[1].startswith("pf_sign_matrix") for r in rows[1:])
    assert all(r[5] == "true" for r in rows[1:])


def test_verify_invariance(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "invariance")
    rows = list(csv.reader(io.StringIO(out)))[1:]
    assert code == EXIT_OK and len(rows) > 10


def test_verify_failure_exit(capsys):
    assert run(capsys, "verify", "--suite", "mehta", "--tol", "0")[0] == EXIT_DISAGREE


def test_verify_unknown_suite(capsys):
    assert run(capsys, "verify", "--suite", "bogus")[0] == EXIT_SPEC


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hyperpf", "verify", "--suite", "all", "--tol", "1e-6"],
                          capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stdout[-2000:] + proc.stderr
    assert proc.stdout.count("false") == 0
