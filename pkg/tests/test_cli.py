import json

import numpy as np
import pytest

from erwlab.cli import main, parse_grid, parse_int_list
from erwlab.errors import DomainError


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def rows(out):
    lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def meta(out):
    return dict(ln[2:].split("=", 1) for ln in out.splitlines() if ln.startswith("# "))


def test_parse_grid():
    assert len(parse_grid("0:3:0.1")) == 31
    assert parse_grid("0:1:0.3").tolist() == [0.0, 0.3, 0.6, 0.9]
    assert parse_grid("1:1:0.5").tolist() == [1.0]
    for bad in ("0:1", "1:0:0.1", "0:1:0", "a:b:c"):
        with pytest.raises(DomainError):
            parse_grid(bad)
    assert parse_int_list("100, 1e3,10000") == [100, 1000, 10000]


def test_coeffs(capsys):
    code, out, _ = run(capsys, "coeffs", "--p", 0.5, "--n", 3)
    assert code == 0
    head, body = rows(out)
    assert head == ["k", "gamma_k", "a_k", "v_k"]
    assert [r[2] for r in body] == ["1", "1", "1"] and body[-1][3] == "3"
    code, out, _ = run(capsys, "coeffs", "--p", 0.75, "--n", 3)
    assert float(rows(out)[1][-1][3]) == pytest.approx(389 / 225, rel=1e-15)
    m = meta(out)
    assert m["schema"] == "1" and m["p"] == "0.75" and m["n"] == "3"


def test_coeffs_json(capsys):
    code, out, _ = run(capsys, "coeffs", "--p", 0.25, "--n", 3, "--format", "json")
    doc = json.loads(out)
    assert doc["schema"] == 1 and doc["a"] == pytest.approx([1, 2, 8 / 3])
    assert doc["config"]["p"] == 0.25


def test_validation_exit(capsys):
    code, _, err = run(capsys, "coeffs", "--p", 1.5, "--n", 10)
    assert code == 2
    assert err.startswith("erwlab: error:") and "[0, 1]" in err and err.count("\n") == 1


def test_exact(capsys):
    code, out, _ = run(capsys, "exact", "--p", 0.75, "--q", 0.5, "--n", 2)
    head, body = rows(out)
    assert code == 0 and head == ["k", "pmf", "cdf", "x_k"]
    assert [(r[0], r[1]) for r in body] == [("-2", "0.375"), ("0", "0.25"), ("2", "0.375")]
    _, out, _ = run(capsys, "exact", "--p", 0.6, "--n", 1)
    assert [(r[0], r[1]) for r in rows(out)[1]] == [("-1", "0.5"), ("1", "0.5")]


def test_exact_moments(capsys):
    _, out, _ = run(capsys, "exact", "--p", 0.5, "--n", 10, "--moments")
    assert float(meta(out)["variance"]) == pytest.approx(10)


def test_exact_cap_exit(capsys):
    code, _, err = run(capsys, "exact", "--n", 100000)
    assert code == 3 and "--max-n" in err


def test_simulate(capsys, tmp_path):
    argv = ["simulate", "--p", 1, "--q", 1, "--n", 50, "--reps", 10, "--seed", 1]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    head, body = rows(out)
    assert head == ["S_n", "count"] and body == [["50", "10"]]
    m = meta(out)
    assert m["seed"] == "1" and m["sampler"] == "markov" and m["q"] == "1.0"
    path = tmp_path / "path.csv"
    run(capsys, *argv, "--export-path", path)
    assert path.read_text().splitlines()[-1] == "50,1,50"


def test_simulate_deterministic(capsys, tmp_path):
    argv = ["simulate", "--p", 0.6, "--n", 300, "--reps", 5000, "--seed", 99]
    outs = []
    for threads in (1, 1, 4, 16):
        run(capsys, *argv, "--threads", threads, "--out", tmp_path / f"o{threads}.csv")
        outs.append((tmp_path / f"o{threads}.csv").read_bytes())
    assert len(set(outs)) == 1


def test_simulate_needs_seed(capsys):
    code, _, err = run(capsys, "simulate", "--p", 0.3, "--n", 10, "--reps", 5)
    assert code == 2 and "seed" in err


def test_simulate_matches_exact(capsys):
    _, out, _ = run(capsys, "simulate", "--p", 0.75, "--q", 0.5, "--n", 1000,
                    "--reps", 100000, "--seed", 7)
    _, body = rows(out)
    keys = np.array([int(r[0]) for r in body])
    counts = np.array([int(r[1]) for r in body])
    _, out, _ = run(capsys, "exact", "--p", 0.75, "--q", 0.5, "--n", 1000)
    _, ex = rows(out)
    support = np.array([int(r[0]) for r in ex])
    cdf = np.array([float(r[2]) for r in ex])
    emp = np.cumsum(counts) / counts.sum()
    idx = np.searchsorted(keys, support, side="right")
    emp_at = np.where(idx > 0, emp[np.maximum(idx - 1, 0)], 0.0)
    assert np.max(np.abs(emp_at - cdf)) <= 0.0062


def test_diag_ratio(capsys):
    code, out, _ = run(capsys, "diag", "ratio", "--p", 0.2, "--q", 0.5, "--n", 10000,
                       "--x-grid", "0:3:0.1", "--source", "exact")
    head, body = rows(out)
    assert code == 0 and head == ["x", "value", "rate_reference", "flag", "lower"]
    assert len(body) == 31
    vals = np.array([float(r[1]) for r in body])
    assert np.all(np.abs(vals[:11] - 1) < 0.05)
    assert meta(out)["normalization"] == "martingale"


def test_diag_ratio_nlogn(capsys):
    code, out, _ = run(capsys, "diag", "ratio", "--p", 0.75, "--n", 1000,
                       "--x-grid", "0:2:0.5", "--normalization", "nlogn", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["report"]["params"]["normalization"] == "nlogn"
    assert doc["config"]["normalization"] == "nlogn"


def test_diag_ratio_mc(capsys):
    code, out, _ = run(capsys, "diag", "ratio", "--p", 0.3, "--n", 200, "--source", "mc",
                       "--reps", 2000, "--seed", 3)
    assert code == 0 and meta(out)["reps"] == "2000"


def test_diag_besseen_and_mdp(capsys):
    code, out, _ = run(capsys, "diag", "besseen", "--p", 0.25, "--n", "100,1000")
    assert code == 0 and len(rows(out)[1]) == 2
    code, out, _ = run(capsys, "diag", "mdp", "--p", 0.25, "--n", "100,1000")
    assert code == 0 and meta(out)["reference"] == "-0.5"


def test_diag_llt(capsys):
    code, out, _ = run(capsys, "diag", "llt", "--p", 0.25, "--n", 1000, "--k-range=-4:4")
    head, body = rows(out)
    assert code == 0 and head[0] == "k" and len(body) == 9
    assert float(meta(out)["lattice_factor"]) == pytest.approx(2, abs=0.01)
    code, out, _ = run(capsys, "diag", "llt-sup", "--p", 0.6, "--n", "100,200")
    assert code == 0


@pytest.mark.parametrize("sub", ["llt", "ratio", "besseen", "mdp", "llt-sup"])
def test_diag_gating_exit(capsys, sub):
    code, _, err = run(capsys, "diag", sub, "--p", 0.5, "--n", 100)
    assert code == 4 and err.startswith("erwlab: error:")


def test_infer(capsys):
    code, out, _ = run(capsys, "infer", "p-lower", "--n", 10000, "--s", 400, "--kappa", 0.05)
    doc = json.loads(out)
    assert code == 0 and doc["p_lower"] == pytest.approx(0.68997720592665428, rel=1e-13)
    assert doc["config"]["kappa"] == 0.05
    code, _, err = run(capsys, "infer", "p-lower", "--n", 100, "--s", 0)
    assert code == 2 and "undefined" in err
    code, out, _ = run(capsys, "infer", "position", "--p", 0.25, "--n", 10000, "--kappa", 0.05)
    assert json.loads(out)["upper"] == pytest.approx(138.59038243496779, rel=1e-13)


def test_infer_coverage_csv(capsys):
    code, out, _ = run(capsys, "infer", "coverage", "--p", 0.25, "--n", 100, "--kappa", 0.1,
                       "--reps", 1000, "--seed", 5, "--format", "csv")
    head, body = rows(out)
    assert code == 0 and head == ["kappa", "n", "p_true", "coverage", "reps", "seed"]
    assert body[0][4:] == ["1000", "5"]


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# experiment\np = 0.75\nn = 3\nformat = json\n")
    code, out, _ = run(capsys, "coeffs", "--config", cfg)
    assert code == 0 and json.loads(out)["config"]["p"] == 0.75
    code, out, _ = run(capsys, "coeffs", "--config", cfg, "--p", 0.5, "--format", "csv")
    assert meta(out)["p"] == "0.5" and meta(out)["n"] == "3"
    cfg.write_text("p = 0.5\nn = 4\nmoments = true\n")
    _, out, _ = run(capsys, "exact", "--config", cfg)
    assert "variance" in meta(out)
    cfg.write_text("p 0.5\n")
    assert run(capsys, "coeffs", "--config", cfg)[0] == 2
    assert run(capsys, "coeffs", "--config", tmp_path / "missing.cfg")[0] == 2


def test_echo_includes_defaults(capsys):
    _, out, _ = run(capsys, "exact", "--p", 0.3, "--n", 4)
    m = meta(out)
    assert m["q"] == "0.5" and m["max_n"] == "20000" and m["renormalize"] == "False"


def test_module_entry_point():
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "erwlab", "coeffs", "--p", "0.5", "--n", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.splitlines()[-1] == "2,,1,2"
