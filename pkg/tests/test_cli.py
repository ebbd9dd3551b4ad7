import json
import subprocess
import sys

import pytest

from fairrec.cli import ExperimentPlan, main, run_sweep
from fairrec.data_io import read_report, write_relevance_csv
from fairrec.model import Instance

SYN = "synthetic:m=120,n=60,s=1.1,noise=0.5,seed=2"


def test_run_top_k_reference_values(tmp_path, capsys):
    assert main(["run", "--instance", SYN, "--strategy", "top_k", "--k", "5", "--out", str(tmp_path)]) == 0
    (row,) = read_report(tmp_path / "report.csv")
    assert (row["mu_phi"], row["Y"], row["L"], row["std_phi"]) == (1.0, 0.0, 0.0, 0.0)


def test_run_fairrec_audited(tmp_path):
    k, n = 5, 60
    status = main(["run", "--instance", SYN, "--k", str(k), "--audit", "--series", "--out", str(tmp_path)])
    assert status == 0
    (row,) = read_report(tmp_path / "report.csv")
    assert row["H"] >= (n - k) / n
    summary = json.loads((tmp_path / "summary.json").read_text())
    run = summary["runs"][0]
    assert run["status"] == "ok" and run["audit"]["violations"] == []
    lorenz = (tmp_path / "series" / "fairrec_k5_a1_s0_lorenz.csv").read_text().splitlines()
    assert len(lorenz) == 1 + n + 1
    cdf = (tmp_path / "series" / "fairrec_k5_a1_s0_cdf.csv").read_text().splitlines()
    assert len(cdf) == 1 + 120


def test_out_of_regime_k_is_skipped(tmp_path, caplog):
    assert main(["run", "--instance", SYN, "--k", "60", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["runs"][0]["status"] == "skipped"
    assert summary["runs"][0]["reason"] == "KOutOfRange"
    assert read_report(tmp_path / "report.csv") == []


def test_empty_plan(tmp_path, capsys):
    plan = ExperimentPlan(instance=SYN, strategies=[], ks=[3], out=tmp_path / "o")
    records, status = run_sweep(plan)
    assert records == [] and status == 0
    assert "nothing to run" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_k_sweep_cardinality(tmp_path):
    args = ["sweep", "--instance", "synthetic:m=40,n=25,seed=1", "--strategy", "fairrec,top_k", "--k", "1-20"]
    assert main(args + ["--out", str(tmp_path)]) == 0
    rows = read_report(tmp_path / "report.csv")
    assert sum(r["strategy"] == "fairrec" for r in rows) == 20
    assert sum(r["strategy"] == "top_k" for r in rows) == 20
    keys = [(r["strategy"], r["k"], r["alpha"], r["seed"]) for r in rows]
    assert keys == sorted(keys)


def test_alpha_sweep_and_json(tmp_path):
    args = ["sweep", "--instance", SYN, "--k", "10", "--alpha", "0:1:0.25", "--format", "json", "--out", str(tmp_path)]
    assert main(args) == 0
    rows = json.loads((tmp_path / "report.json").read_text())
    assert [r["alpha"] for r in rows] == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_sweep_is_byte_identical(tmp_path):
    args = ["sweep", "--instance", SYN, "--strategy", "fairrec,random_k,mixed_k,poorest_k,top_k"]
    args += ["--k", "3,7", "--seed", "0,1", "--order", "seeded", "--series"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("report.csv", "summary.json", "series/random_k_k7_a1_s1_lorenz.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_parallel_workers_same_output(tmp_path):
    args = ["sweep", "--instance", SYN, "--strategy", "fairrec,random_k", "--k", "2,4", "--seed", "0,1"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--workers", "2", "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "report.csv").read_bytes() == (tmp_path / "b" / "report.csv").read_bytes()


def test_audit_violation_sets_exit_status(tmp_path):
    # instance on which the literal algorithm breaks EF1 (see test_allocator)
    V = [
        [0, 2, 1, 1, 1, 3, 1],
        [3, 3, 2, 2, 0, 3, 0],
        [1, 3, 3, 0, 1, 0, 0],
        [3, 3, 0, 2, 2, 1, 3],
        [2, 0, 0, 0, 2, 2, 0],
        [2, 2, 0, 3, 3, 0, 3],
        [1, 0, 1, 0, 0, 1, 2],
    ]
    path = tmp_path / "inst.csv"
    write_relevance_csv(Instance(V), path)
    assert main(["audit", "--instance", str(path), "--k", "5", "--out", str(tmp_path / "o")]) == 1
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["runs"][0]["status"] == "audit-failed"
    assert summary["runs"][0]["audit"]["ef1_witness"] == [5, 3]
    # baselines are only described, never failed
    assert main(["audit", "--instance", str(path), "--k", "5", "--strategy", "poorest_k", "--out", str(tmp_path / "p")]) == 0


def test_gen_synthetic_then_run(tmp_path):
    out = tmp_path / "inst.csv"
    assert main(["gen-synthetic", "--m", "30", "--n", "12", "--seed", "3", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "customer_id,producer_id,score"
    assert main(["run", "--instance", str(out), "--k", "3", "--audit", "--out", str(tmp_path / "r")]) == 0


def test_geo_source(tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("producer_id,rating,lat,lon\nb1,4.0,40.75,-73.99\nb2,3.5,40.70,-74.01\nb3,5,40.72,-74.0\n")
    c = tmp_path / "c.csv"
    c.write_text("customer_id,lat,lon\nu1,40.74,-73.98\nu2,40.71,-74.00\n")
    assert main(["run", "--geo", str(p), str(c), "--k", "2", "--audit", "--out", str(tmp_path / "o")]) == 0


def test_missing_source_and_bad_file(tmp_path, capsys):
    assert main(["run", "--k", "2", "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("nope\n")
    assert main(["run", "--instance", str(bad), "--k", "2", "--out", str(tmp_path)]) == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "fairrec.cli", "run", "--instance", SYN, "--k", "4", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "fairrec k=4" in proc.stdout
