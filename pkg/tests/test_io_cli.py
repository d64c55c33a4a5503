import json
import math
import subprocess
import sys

import numpy as np
import pytest

from mermin_lab import io
from mermin_lab.bell_states import BellKind
from mermin_lab.classical_lhv import SetDistribution, sample_raffle
from mermin_lab.cli import main
from mermin_lab.quantum_sampler import ExperimentSpec, run_experiment
from mermin_lab.trials import DevicePolicy, FixedPolicy

# Regression goldens: pin the byte layout of both trial formats.
GOLDEN_JSONL = (
    '{"index": 0, "alice_setting": 0.0, "bob_setting": 120.0, "alice_outcome": 1, "bob_outcome": -1}\n'
    '{"index": 1, "alice_setting": 0.0, "bob_setting": 120.0, "alice_outcome": 1, "bob_outcome": -1}\n'
    '{"index": 2, "alice_setting": 0.0, "bob_setting": 120.0, "alice_outcome": -1, "bob_outcome": 1}\n'
)
GOLDEN_CSV = (
    "index,alice_setting,bob_setting,alice_outcome,bob_outcome\n"
    "0,3,1,1,-1\n"
    "1,1,3,1,1\n"
    "2,1,3,-1,-1\n"
)


def test_golden_jsonl():
    log = run_experiment(ExperimentSpec(BellKind.PHI_PLUS, FixedPolicy.from_degrees(0, 120), 3, 7))
    text = io.format_jsonl(log)
    assert text == GOLDEN_JSONL
    for line in text.splitlines():
        assert tuple(json.loads(line)) == io.TRIAL_COLUMNS


def test_golden_csv():
    log = run_experiment(ExperimentSpec(BellKind.PSI_MINUS, DevicePolicy(), 3, 7))
    assert io.format_csv(log) == GOLDEN_CSV


@pytest.mark.parametrize("fmt", ["jsonl", "csv"])
@pytest.mark.parametrize("policy", [DevicePolicy(), FixedPolicy.from_degrees(30, 275.5)])
def test_log_roundtrip(tmp_path, fmt, policy):
    log = run_experiment(ExperimentSpec(BellKind.PSI_PLUS, policy, 500, 3))
    path = io.write_log(log, tmp_path / f"log.{fmt}", fmt)
    back = io.read_log(path)
    assert back.policy == log.policy
    assert np.array_equal(back.outcome_pairs(), log.outcome_pairs())
    assert np.array_equal(back.alice_setting, log.alice_setting)
    assert np.allclose(back.bob_angle, log.bob_angle, atol=1e-9)
    assert io.write_log(back, tmp_path / f"again.{fmt}", fmt).read_bytes() == path.read_bytes()


def test_bad_format_and_header(tmp_path):
    log = run_experiment(ExperimentSpec(BellKind.PSI_PLUS, DevicePolicy(), 5, 3))
    with pytest.raises(ValueError):
        io.write_log(log, tmp_path / "x", "xml")
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        io.read_log(bad)


def test_summary_table_frequencies_sum_to_one(tmp_path):
    log = sample_raffle(SetDistribution.uniform(), DevicePolicy(), 9000, 1)
    rows = io.summary_table(log)
    assert len(rows) == 9
    assert sum(r["n"] for r in rows) == 9000
    for r in rows:
        assert abs(r["f_uu"] + r["f_ud"] + r["f_du"] + r["f_dd"] - 1.0) <= 1e-12
        assert r["correlation"] == pytest.approx(r["f_uu"] - r["f_ud"] - r["f_du"] + r["f_dd"])
    path = io.write_summary_csv(rows, tmp_path / "s.csv")
    assert path.read_text().splitlines()[0] == ",".join(io.SUMMARY_COLUMNS)
    assert "corr" in io.format_summary(rows)


def test_manifest_roundtrip(tmp_path):
    m = io.RunManifest(command="simulate", spec={"trials": 3, "seed": 1}, outputs={"log": "x"})
    back = io.RunManifest.read(m.write(tmp_path / "m.json"))
    assert back == m
    assert io.manifest_path("a/b.jsonl").name == "b.jsonl.manifest.json"


# --- CLI -----------------------------------------------------------------

def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_device_fact2(tmp_path, capsys):
    code, out, _ = run(["simulate", "--state", "phi-plus", "--policy", "device", "--trials", "900000",
                        "--seed", "7", "--out", str(tmp_path / "q.jsonl")], capsys)
    assert code == 0
    line = next(l for l in out.splitlines() if l.startswith("case (b)"))
    same = float(line.split("same=")[1].split()[0])
    assert abs(same - 0.25) <= 4.5 * math.sqrt(0.25 * 0.75 / 600_000)
    assert (tmp_path / "q.jsonl.manifest.json").exists()


def test_simulate_fixed_fact1(tmp_path, capsys):
    out_path = tmp_path / "a.jsonl"
    code, _, _ = run(["simulate", "--state", "phi-plus", "--policy", "fixed", "--alpha", "0", "--beta", "0",
                      "--trials", "100", "--out", str(out_path)], capsys)
    assert code == 0
    log = io.read_log(out_path)
    assert len(log) == 100 and log.same_fraction() == 1.0


def test_rerun_and_manifest_are_byte_identical(tmp_path, capsys):
    args = ["simulate", "--state", "psi-minus", "--trials", "20000", "--seed", "11", "--format", "csv"]
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--workers", "3"]) == 0
    assert main(["simulate", "--manifest", str(io.manifest_path(a)), "--out", str(c)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_manifest_command_mismatch(tmp_path, capsys):
    a = tmp_path / "a.jsonl"
    main(["simulate", "--trials", "10", "--out", str(a)])
    code, _, err = run(["classical", "--manifest", str(io.manifest_path(a))], capsys)
    assert code == 2 and "manifest" in err


@pytest.mark.parametrize("dist,p", [("uniform", 0.5), ("two-one", 1 / 3)])
def test_classical_case_b(dist, p, capsys):
    code, out, _ = run(["classical", "--dist", dist, "--trials", "900000", "--seed", "7"], capsys)
    assert code == 0
    line = next(l for l in out.splitlines() if l.startswith("case (b)"))
    same = float(line.split("same=")[1].split()[0])
    assert abs(same - p) <= 4.5 * math.sqrt(p * (1 - p) / 600_000)


def test_classical_point_mass_deterministic(tmp_path, capsys):
    path = tmp_path / "rrg.jsonl"
    assert run(["classical", "--dist", "point:RRG", "--trials", "1000", "--out", str(path)], capsys)[0] == 0
    log = io.read_log(path)
    for a in (1, 2, 3):
        for b in (1, 2, 3):
            sel = log.select_pair(a, b)
            assert len(set(map(tuple, sel.outcome_pairs().tolist()))) <= 1


def test_env_seed_default(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("MERMIN_LAB_SEED", "42")
    main(["simulate", "--trials", "500", "--out", str(tmp_path / "env.jsonl")])
    main(["simulate", "--trials", "500", "--seed", "42", "--out", str(tmp_path / "flag.jsonl")])
    main(["simulate", "--trials", "500", "--seed", "1", "--out", str(tmp_path / "other.jsonl")])
    capsys.readouterr()
    env = (tmp_path / "env.jsonl").read_bytes()
    assert env == (tmp_path / "flag.jsonl").read_bytes()
    assert env != (tmp_path / "other.jsonl").read_bytes()
    monkeypatch.setenv("MERMIN_LAB_SEED", "abc")
    assert run(["simulate", "--trials", "5"], capsys)[0] == 2


@pytest.mark.parametrize("argv", [
    ["simulate", "--state", "chi"],
    ["simulate", "--trials", "ten"],
    ["simulate", "--policy", "fixed", "--alpha", "0"],
    ["simulate", "--alpha", "10"],
    ["simulate", "--trials", "0"],
    ["simulate", "--seed", "-4"],
    ["simulate", "--workers", "0"],
    ["classical", "--dist", "gaussian", "--trials", "5"],
    ["classical", "--policy", "fixed", "--alpha", "0", "--beta", "45", "--trials", "5"],
    ["analytic", "--state", "phi-plus", "--a", "1,1,0", "--b", "0,0,1"],
    ["analytic", "--state", "phi-plus", "--a", "1,0,0"],
    ["conserve", "--pair", "1,7", "--trials", "10"],
    ["check", "--mutate", "nothing"],
    [],
])
def test_usage_errors_exit_2(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    capsys.readouterr()
    assert code == 2


def test_io_failure_exit_1(tmp_path, capsys):
    code, _, err = run(["simulate", "--trials", "5", "--out", str(tmp_path / "missing" / "x.jsonl")], capsys)
    assert code == 1 and "I/O" in err
    assert run(["conserve", "--in", str(tmp_path / "nope.jsonl")], capsys)[0] == 1


def test_analytic_outputs(capsys):
    code, out, _ = run(["analytic", "--state", "phi-plus", "--beta", "120", "--json"], capsys)
    row = json.loads(out)[0]
    assert code == 0 and abs(row["correlation"] + 0.5) <= 1e-12
    assert [row[k] for k in ("p_uu", "p_ud", "p_du", "p_dd")] == pytest.approx([1 / 8, 3 / 8, 3 / 8, 1 / 8],
                                                                                abs=1e-12)
    _, out, _ = run(["analytic", "--state", "psi-minus", "--beta", "0", "--json"], capsys)
    row = json.loads(out)[0]
    assert abs(row["correlation"] + 1) <= 1e-12
    assert [row[k] for k in ("p_uu", "p_ud", "p_du", "p_dd")] == pytest.approx([0, 0.5, 0.5, 0], abs=1e-12)
    _, out, _ = run(["analytic", "--state", "phi-plus", "--a", "0,0,1", "--b", "0,1,0", "--json"], capsys)
    assert abs(json.loads(out)[0]["correlation"]) <= 1e-12
    code, out, _ = run(["analytic", "--state", "phi-minus"], capsys)
    assert code == 0 and len(out.splitlines()) == 4


def test_conserve_quantum_pass(capsys):
    code, out, _ = run(["conserve", "--state", "phi-plus", "--alpha", "0", "--beta", "60",
                        "--trials", "1000000", "--seed", "3", "--json"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["passed"]
    assert abs(rep["report"]["ba_plus"] - 0.5) < 0.01
    assert rep["identity_gap"] <= 1e-12


def test_conserve_theta_zero_exact(capsys):
    code, out, _ = run(["conserve", "--beta", "0", "--trials", "1000", "--json"], capsys)
    assert code == 0 and json.loads(out)["report"]["ba_plus"] == 1.0


def test_conserve_from_logs(tmp_path, capsys):
    q = tmp_path / "q.jsonl"
    main(["simulate", "--state", "phi-plus", "--trials", "300000", "--seed", "2", "--out", str(q)])
    c = tmp_path / "c.csv"
    main(["classical", "--dist", "uniform", "--trials", "300000", "--seed", "2", "--format", "csv",
          "--out", str(c)])
    capsys.readouterr()
    assert run(["conserve", "--in", str(q), "--pair", "1,2"], capsys)[0] == 0
    assert run(["conserve", "--in", str(q)], capsys)[0] == 2
    code, out, _ = run(["conserve", "--in", str(c), "--pair", "1,2", "--state", "phi-plus"], capsys)
    assert code == 3 and "FAIL" in out


def test_check_passes_and_json(capsys):
    code, out, _ = run(["check", "--json"], capsys)
    report = json.loads(out)
    assert code == 0 and report["passed"] and report["failures"] == []
    assert len(report["checks"]) >= 15
    assert all({"name", "passed", "detail"} <= set(c) for c in report["checks"])


def test_check_mutation_fails(capsys):
    code, out, _ = run(["check", "--json", "--mutate", "correlation-sign"], capsys)
    report = json.loads(out)
    assert code != 0 and not report["passed"] and report["failures"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mermin_lab", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "mermin-lab" in proc.stdout
