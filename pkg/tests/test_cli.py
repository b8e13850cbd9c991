import io
import json
import subprocess
import sys

import pytest

from cmfbounds import __version__
from cmfbounds.cli import run


def call(*argv):
    buf = io.StringIO()
    status = run(list(argv), stdout=buf)
    return status, buf.getvalue()


def call_json(*argv):
    status, text = call(*argv, "--json")
    return status, json.loads(text)


def test_verify_defaults():
    status, out = call_json("verify")
    assert status == 0
    assert out["pass_total"] and out["version"] == __version__
    assert all(c["ok"] for c in out["constraints"])
    assert out["lambda"] == 700 and out["R"] == 10000


def test_verify_constraint_exit():
    status, out = call_json("verify", "--sigma", "1.99")
    assert status == 3
    assert out == {"error": "constraint", "constraint": "k(2-sigma)>1",
                   "message": out["message"], "version": __version__}


def test_verify_failing_params_exit_one():
    status, out = call_json("verify", "--lambda", "1", "--delta", "0.5", "--k", "2",
                            "--sigma", "1.4", "--R", "100", "--ell", "0.9")
    assert status == 1 and not out["pass_total"]


def test_verify_round_trip():
    _, a = call_json("verify", "--zeta-cutoff", "100000")
    echoed = ["--lambda", str(a["lambda"]), "--delta", str(a["delta"]), "--k", str(a["k"]),
              "--sigma", str(a["sigma"]), "--R", str(a["R"]), "--ell", str(a["ell"]),
              "--zeta-cutoff", str(a["zeta_cutoff"])]
    _, b = call_json("verify", *echoed)
    assert a == b


def test_human_output():
    status, text = call("verify")
    assert status == 0 and "total" in text and "e-4" in text


def test_usage_errors():
    assert call("verify", "--bogus")[0] == 2
    assert call("verify", "--k", "2.5")[0] == 2
    assert call("nosuch")[0] == 2
    assert call("simulate", "moment", "--trials", "0")[0] == 2


def test_primes_count():
    status, out = call_json("primes", "count", "--limit", "7000")
    assert status == 0 and out["limit"] == 7000 and out["pi"] == 900


def test_convolution_check():
    status, out = call_json("convolution-check", "--seed", "3", "--limit", "10000")
    assert status == 0
    assert out["g_nonnegative"] and out["g_star_lambda_equals_f"]
    assert out["identity_residual"] <= 1e-7


def test_optimize_schema():
    status, out = call_json("optimize", "--seed", "1", "--iters", "50", "--init-lambda", "100",
                            "--init-delta", "0.2", "--init-k", "10", "--init-sigma", "1.5",
                            "--init-R", "1000", "--lambda-cap", "1000", "--R-cap", "10000")
    assert status == 0
    assert set(out) >= {"best", "log10_objective", "accepted_steps", "trace", "version"}
    assert out["trace"][-1][1] == out["log10_objective"]
    assert len(out["trace"]) == out["accepted_steps"] + 1


def test_simulate_positivity():
    status, out = call_json("simulate", "positivity", "--trials", "10", "--xmax", "100000", "--seed", "1")
    assert status == 0 and out["pass"] and out["stats"]["violations"] == 0


def test_simulate_decomp():
    status, out = call_json("simulate", "decomp", "--x", "10", "--cap", "1e12", "--seed", "7")
    assert status == 0 and out["experiment"] == "decomposition"


def test_simulate_moment_csv():
    status, text = call("simulate", "moment", "--x", "5", "--trials", "20", "--seed", "7", "--csv")
    lines = text.strip().splitlines()
    assert status == 0 and lines[0] == "trial,seed,statistic" and len(lines) == 21


def test_simulate_etemadi():
    status, out = call_json("simulate", "etemadi", "--n", "10", "--alpha", "1", "--mode", "exact")
    assert status == 0 and out["stats"]["lhs"] <= out["stats"]["rhs"]
    status, out = call_json("simulate", "etemadi", "--window", "100", "200", "--alpha", "0.01",
                            "--mode", "mc", "--trials", "20000")
    assert status == 0 and out["pass"]
    assert call("simulate", "etemadi", "--n", "40", "--mode", "exact")[0] == 3


def test_asym():
    status, out = call_json("asym", "--x", "1e100", "--C1", "40")
    assert status == 0
    for key in ("x", "k", "delta", "sigma", "log10_product_bound", "log10_tail_bound", "log10_total", "implied_C"):
        assert key in out
    assert call("asym", "--x", "1000")[0] == 3


def test_out_file(tmp_path):
    path = tmp_path / "report.json"
    status, text = call("primes", "count", "--limit", "100", "--json", "--out", str(path))
    assert status == 0 and text == ""
    assert json.loads(path.read_text())["pi"] == 25


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cmfbounds", "primes", "count", "--limit", "10", "--json"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["pi"] == 4
