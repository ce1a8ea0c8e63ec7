"""CLI exit codes, artifact formats, and byte-level determinism."""

import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from softqec.cli import main

SCHEMA = json.loads(
    (Path(__file__).parent.parent / "src" / "softqec" / "data" / "artifacts.schema.json")
    .read_text()
)


def run_cli(*argv):
    return main(list(argv))


def test_help_exits_cleanly():
    assert run_cli("--help") == 0


def test_missing_subcommand_is_usage_error():
    assert run_cli() == 2


def test_bad_distance_is_usage_error(tmp_path):
    code = run_cli(
        "posteriors", "--d", "4", "--seed", "1", "--out", str(tmp_path / "x.csv")
    )
    assert code == 2


def test_domain_value_error_maps_to_2(tmp_path):
    code = run_cli(
        "zne",
        "--qubits", "2", "--gates", "5", "--seed", "1",
        "--scales", "2,3",
        "--shots-per-scale", "100",
        "--out", str(tmp_path / "z.csv"),
    )
    assert code == 2


def test_abort_savings_requires_seed_with_shots(tmp_path):
    code = run_cli(
        "abort-savings", "--n-steps", "100", "--p", "0.01",
        "--shots", "50", "--out", str(tmp_path / "a.json"),
    )
    assert code == 2


def test_capacity_error_maps_to_3(tmp_path):
    code = run_cli(
        "posteriors", "--d", "5", "--shots", "10", "--seed", "1",
        "--oracle", "enumerate", "--out", str(tmp_path / "p.csv"),
    )
    assert code == 3


def test_posteriors_csv_shape_and_worker_invariance(tmp_path):
    outs = []
    for name, workers in (("a.csv", "1"), ("b.csv", "1"), ("c.csv", "4")):
        out = tmp_path / name
        code = run_cli(
            "posteriors", "--d", "3", "--p", "0.02", "--shots", "200",
            "--seed", "7", "--workers", workers, "--out", str(out),
        )
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0] == outs[2]
    lines = outs[0].decode().strip().split("\n")
    assert lines[0] == "shot,true_class,decoded_class,p_i,p_x,p_y,p_z"
    assert len(lines) == 201


def test_posteriors_mps_oracle_matches_enumeration(tmp_path):
    outs = {}
    for oracle in ("mps", "enumerate"):
        out = tmp_path / f"{oracle}.csv"
        code = run_cli(
            "posteriors", "--d", "3", "--p", "0.02", "--shots", "60",
            "--seed", "7", "--oracle", oracle, "--chi", "64", "--out", str(out),
        )
        assert code == 0
        outs[oracle] = out.read_text().strip().split("\n")
    for mps_line, enum_line in zip(outs["mps"][1:], outs["enumerate"][1:]):
        mvals = mps_line.split(",")
        evals = enum_line.split(",")
        assert mvals[:3] == evals[:3]
        for m, e in zip(mvals[3:], evals[3:]):
            assert abs(float(m) - float(e)) < 1e-9


def test_bias_artifact_reruns_identically(tmp_path):
    blobs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        code = run_cli(
            "bias", "--d", "3", "--p", "0.01", "--shots", "100",
            "--seed", "11", "--chi", "32", "--out", str(out),
        )
        assert code == 0
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1]
    header = blobs[0].decode().split("\n", 1)[0]
    assert header == "d,p,class,mean_bias,stderr,shots"


def test_postselect_artifact(tmp_path):
    out = tmp_path / "ps.csv"
    code = run_cli(
        "postselect", "--d", "3", "--p", "0.05", "--shots", "3000",
        "--seed", "5", "--thresholds", "0.001,0.01,0.1", "--out", str(out),
    )
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "threshold,discard_rate,ratio,stderr"
    assert len(lines) == 4


def test_pec_json_validates_and_repeats(tmp_path):
    blobs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        code = run_cli(
            "pec", "--qubits", "2", "--gates", "10", "--p-gate", "0.005",
            "--shots", "2000", "--seed", "3", "--out", str(out),
        )
        assert code == 0
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1]
    payload = json.loads(blobs[0])
    jsonschema.validate(payload, SCHEMA)
    assert payload["artifact"] == "pec"


def test_zne_artifacts_validate_and_repeat(tmp_path):
    pairs = []
    for tag in ("a", "b"):
        out = tmp_path / f"{tag}.csv"
        summary = tmp_path / f"{tag}.json"
        code = run_cli(
            "zne", "--qubits", "2", "--gates", "8", "--p-gate", "0.01",
            "--scales", "1,2,3", "--shots-per-scale", "500",
            "--seed", "9", "--out", str(out), "--summary-out", str(summary),
        )
        assert code == 0
        pairs.append((out.read_bytes(), summary.read_bytes()))
    assert pairs[0] == pairs[1]
    payload = json.loads(pairs[0][1])
    jsonschema.validate(payload, SCHEMA)
    assert payload["coefficients"] == [3.0, -3.0, 1.0]


def test_zne_default_summary_path(tmp_path):
    out = tmp_path / "z.csv"
    code = run_cli(
        "zne", "--qubits", "2", "--gates", "5", "--p-gate", "0.01",
        "--scales", "1,2", "--shots-per-scale", "200",
        "--seed", "2", "--out", str(out),
    )
    assert code == 0
    assert (tmp_path / "z.json").exists()


def test_convergence_artifact(tmp_path):
    out = tmp_path / "c.csv"
    code = run_cli(
        "convergence", "--d", "3", "--p", "0.05", "--shots", "1500",
        "--seed", "4", "--source", "exact", "--checkpoints", "10",
        "--out", str(out),
    )
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "n,class,estimate,stderr"
    assert len(lines) > 10


def test_tradeoff_artifact(tmp_path):
    out = tmp_path / "t.csv"
    code = run_cli(
        "tradeoff", "--total-shots", "100000", "--gates", "100",
        "--p-avg", "0.001", "--gamma", "1.5", "--grid", "9",
        "--out", str(out),
    )
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "lambda,bias,variance,mse"
    assert len(lines) == 10


def test_tcnot_artifact_repeats(tmp_path):
    blobs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        code = run_cli(
            "tcnot", "--d", "3", "--p", "0.005,0.02", "--shots", "200",
            "--seed", "6", "--out", str(out),
        )
        assert code == 0
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1]
    lines = blobs[0].decode().strip().split("\n")
    assert lines[0].startswith("p,d,failure_rate,mp_II,")
    assert len(lines) == 3


def test_ls_channel_json_validates(tmp_path):
    out = tmp_path / "ls.json"
    code = run_cli(
        "ls-channel",
        "--step1", "0.004,0.002,0.006",
        "--step2", "0.003,0.001,0.005",
        "--step3", "0.002,0.003,0.004",
        "--out", str(out),
    )
    assert code == 0
    payload = json.loads(out.read_text())
    jsonschema.validate(payload, SCHEMA)
    assert payload["artifact"] == "ls-channel"
    assert sum(payload["total"].values()) == pytest.approx(1.0, abs=1e-12)


def test_resources_artifact(tmp_path):
    out = tmp_path / "r.csv"
    code = run_cli("resources", "--out", str(out))
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0].startswith("name,d_a,d_b,d_c,")
    assert len(lines) >= 5


def test_abort_savings_json_validates(tmp_path):
    out = tmp_path / "a.json"
    code = run_cli(
        "abort-savings", "--n-steps", "1000", "--p", "0.001",
        "--shots", "2000", "--seed", "8", "--out", str(out),
    )
    assert code == 0
    payload = json.loads(out.read_text())
    jsonschema.validate(payload, SCHEMA)
    assert payload["artifact"] == "abort-savings"
    assert payload["mc_mean"] is not None


def test_module_entry_point_runs(tmp_path):
    out = tmp_path / "r.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "softqec.cli", "resources", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
    assert "wrote" in proc.stdout
