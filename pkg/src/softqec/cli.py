"""Command-line harness emitting experiment artifacts as CSV/JSON files.

Every stochastic subcommand takes a mandatory seed and derives all
randomness from counter-based streams keyed on it, so identical
invocations produce byte-identical artifacts regardless of worker
count. Plotting is left to external tools; this harness only writes
data files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from ._rng import rng_for
from .channels import class_labels
from .errors import CapacityError
from .estimator import convergence_trace
from .exact import MpsConfig, bias_table, mps_posteriors
from .experiments import run_memory_batch
from .pec import pec_postselect_overhead  # noqa: F401  (re-export for scripting)
from .pec import random_logical_circuit, run_pec, shot_allocation_tradeoff
from .resources import (
    ArchitectureParams,
    compare_architectures,
    default_profiles_path,
    load_profiles,
)
from .select import expected_saved_steps, improvement_curve_arrays, simulate_abort_savings
from .surface import LOGICAL_CLASSES, CodeLayout, NoiseModel
from .twoqubit import (
    LatticeSurgerySoftInputs,
    ls_channel_report,
    tcnot_experiment,
)
from .zne import ScaleSchedule, run_zne


def _odd_distance(text: str) -> int:
    value = int(text)
    if value < 1 or value % 2 == 0:
        raise argparse.ArgumentTypeError(
            f"distance must be an odd positive integer, got {value}"
        )
    return value


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}") from err


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"bad int list {text!r}") from err


def _noise_from(args) -> NoiseModel:
    if getattr(args, "px", None) is not None:
        return NoiseModel(q_x=args.px, q_y=args.py or 0.0, q_z=args.pz or 0.0)
    return NoiseModel.depolarizing(args.p)


def _add_noise_args(sub, default_p: float = 0.01):
    sub.add_argument("--p", type=float, default=default_p, help="depolarizing mass")
    sub.add_argument("--px", type=float, default=None, help="X mass (overrides --p)")
    sub.add_argument("--py", type=float, default=None)
    sub.add_argument("--pz", type=float, default=None)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    out.write_text("\n".join(lines) + "\n")


def _write_json(path: str, payload: dict) -> None:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _default_workers() -> int:
    env = os.environ.get("SOFTQEC_WORKERS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _cmd_posteriors(args) -> int:
    layout = CodeLayout(args.d)
    noise = _noise_from(args)
    batch = run_memory_batch(layout, noise, args.shots, rng_for(args.seed, 0))
    if args.oracle == "matching":
        matrix = batch.posteriors("matching", workers=args.workers)
    elif args.oracle == "enumerate":
        matrix = batch.posteriors("exact", workers=args.workers)
    else:
        unique = batch._unique_syndromes()
        table = np.vstack(
            [
                mps_posteriors(layout, noise, syn, MpsConfig(chi=args.chi)).as_array(
                    LOGICAL_CLASSES
                )
                for syn in unique
            ]
        )
        matrix = table[batch.inverse]
    decoded = matrix.argmax(axis=1)
    rows = []
    for i in range(batch.shots):
        rows.append(
            [
                i,
                LOGICAL_CLASSES[batch.true_class_idx[i]],
                LOGICAL_CLASSES[decoded[i]],
                *[float(matrix[i, j]) for j in range(4)],
            ]
        )
    _write_csv(
        args.out,
        ["shot", "true_class", "decoded_class", "p_i", "p_x", "p_y", "p_z"],
        rows,
    )
    print(f"wrote {args.out} ({batch.shots} shots, oracle={args.oracle})")
    return 0


def _cmd_bias(args) -> int:
    rows = bias_table(
        args.d, args.p, args.shots, rng_for(args.seed, 0), chi=args.chi
    )
    _write_csv(
        args.out,
        ["d", "p", "class", "mean_bias", "stderr", "shots"],
        [
            [r["d"], r["p"], r["class"], r["mean_bias"], r["stderr"], r["shots"]]
            for r in rows
        ],
    )
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def _cmd_postselect(args) -> int:
    layout = CodeLayout(args.d)
    noise = _noise_from(args)
    batch = run_memory_batch(layout, noise, args.shots, rng_for(args.seed, 0))
    err = batch.confidence_error(args.source)
    failed = batch.failed(args.source)
    rows = improvement_curve_arrays(
        err.reshape(-1, 1), failed, args.thresholds, mode=args.mode
    )
    _write_csv(
        args.out,
        ["threshold", "discard_rate", "ratio", "stderr"],
        [[r["threshold"], r["discard_rate"], r["ratio"], r["stderr"]] for r in rows],
    )
    print(f"wrote {args.out} ({len(rows)} thresholds)")
    return 0


def _cmd_pec(args) -> int:
    circ = random_logical_circuit(
        args.qubits, args.gates, rng_for(args.seed, 1), p_gate=args.p_gate
    )
    result = run_pec(
        circ,
        args.shots,
        args.mode,
        rng_for(args.seed, 2),
        channel_source=args.source,
        patch_distance=args.patch_d,
        patch_noise=NoiseModel.depolarizing(args.patch_p),
    )
    _write_json(
        args.out,
        {
            "artifact": "pec",
            "mitigated_mean": result.mitigated_mean,
            "mitigated_stderr": result.mitigated_stderr,
            "unmitigated_mean": result.unmitigated_mean,
            "total_gamma": result.total_gamma,
            "shots": result.shots_used,
            "warmup_shots": result.warmup_shots,
            "mode": result.mode,
            "channel_source": args.source,
            "seed": args.seed,
        },
    )
    print(f"wrote {args.out} (mitigated={result.mitigated_mean!r})")
    return 0


def _cmd_zne(args) -> int:
    circ = random_logical_circuit(
        args.qubits, args.gates, rng_for(args.seed, 1), p_gate=args.p_gate
    )
    schedule = ScaleSchedule(tuple(args.scales))
    result = run_zne(
        circ,
        schedule,
        args.shots_per_scale,
        rng_for(args.seed, 2),
        amplification=args.amplification,
    )
    _write_csv(
        args.out,
        ["scale", "mean", "stderr"],
        [[r["scale"], r["mean"], r["stderr"]] for r in result.scale_rows],
    )
    summary = args.summary_out or str(Path(args.out).with_suffix(".json"))
    _write_json(
        summary,
        {
            "artifact": "zne",
            "extrapolated": result.extrapolated,
            "stderr": result.stderr,
            "coefficients": list(result.coefficients),
            "scales": list(schedule.scales),
            "shots_per_scale": args.shots_per_scale,
            "seed": args.seed,
        },
    )
    print(f"wrote {args.out} and {summary} (extrapolated={result.extrapolated!r})")
    return 0


def _cmd_convergence(args) -> int:
    layout = CodeLayout(args.d)
    noise = _noise_from(args)
    rows = convergence_trace(
        layout,
        noise,
        args.shots,
        rng_for(args.seed, 0),
        source=args.source,
        checkpoints=args.checkpoints,
    )
    _write_csv(
        args.out,
        ["n", "class", "estimate", "stderr"],
        [[r["n"], r["class"], r["estimate"], r["stderr"]] for r in rows],
    )
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def _cmd_tradeoff(args) -> int:
    lambdas = args.lambdas or list(np.linspace(0.01, 0.99, args.grid))
    rows = shot_allocation_tradeoff(
        args.total_shots,
        lambdas,
        args.gates,
        args.p_avg,
        args.gamma,
        batch=args.batch,
    )
    _write_csv(
        args.out,
        ["lambda", "bias", "variance", "mse"],
        [[r["lambda"], r["bias"], r["variance"], r["mse"]] for r in rows],
    )
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def _cmd_tcnot(args) -> int:
    layout = CodeLayout(args.d)
    labels = class_labels(2)
    rows = []
    for idx, p in enumerate(args.p):
        noise = NoiseModel.depolarizing(p)
        result = tcnot_experiment(
            layout,
            noise,
            args.shots,
            rng_for(args.seed, idx),
            errors_before_gate=not args.after_gate,
        )
        rows.append(
            [p, args.d, result["failure_rate"]]
            + [float(v) for v in result["mean_joint_posterior"]]
        )
    _write_csv(
        args.out,
        ["p", "d", "failure_rate"] + [f"mp_{lab}" for lab in labels],
        rows,
    )
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def _cmd_ls_channel(args) -> int:
    def triple(vals):
        x, y, z = vals
        return {"X": x, "Y": y, "Z": z}

    inputs = LatticeSurgerySoftInputs.from_error_probs(
        {
            "step1": triple(args.step1),
            "step2": triple(args.step2),
            "step3": triple(args.step3),
            "idle1": triple(args.idle1),
            "idle2": triple(args.idle2),
        }
    )
    report = ls_channel_report(inputs)
    report["artifact"] = "ls-channel"
    _write_json(args.out, report)
    print(f"wrote {args.out}")
    return 0


def _cmd_resources(args) -> int:
    params = ArchitectureParams(
        epsilon_target=args.epsilon, gst_shot_overhead=args.gst_overhead
    )
    profiles = load_profiles(args.profiles or default_profiles_path())
    rows = []
    for profile in profiles:
        report = compare_architectures(profile, params)
        rows.append(
            [
                profile.name,
                report.d_a,
                report.d_b,
                report.d_c,
                float(np.log10(report.v_a)),
                float(np.log10(report.v_b)),
                float(np.log10(report.v_c)),
                report.savings_vs_a,
                report.savings_vs_b,
            ]
        )
    _write_csv(
        args.out,
        [
            "name",
            "d_a",
            "d_b",
            "d_c",
            "log10_v_a",
            "log10_v_b",
            "log10_v_c",
            "savings_vs_a",
            "savings_vs_b",
        ],
        rows,
    )
    print(f"wrote {args.out} ({len(rows)} profiles)")
    return 0


def _cmd_abort_savings(args) -> int:
    saved, p_abort = expected_saved_steps(args.n_steps, args.p)
    payload = {
        "artifact": "abort-savings",
        "n_steps": args.n_steps,
        "p": args.p,
        "expected_saved_steps": saved,
        "abort_probability": p_abort,
        "mc_mean": None,
        "mc_stderr": None,
        "mc_abort_fraction": None,
        "shots": None,
        "seed": None,
    }
    if args.shots:
        if args.seed is None:
            print(
                "abort-savings: --seed is required when --shots is given",
                file=sys.stderr,
            )
            return 2
        mean, stderr, frac = simulate_abort_savings(
            args.n_steps, args.p, args.shots, rng_for(args.seed, 0)
        )
        payload.update(
            {
                "mc_mean": mean,
                "mc_stderr": stderr,
                "mc_abort_fraction": frac,
                "shots": args.shots,
                "seed": args.seed,
            }
        )
    _write_json(args.out, payload)
    print(f"wrote {args.out} (saved={saved!r})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="softqec",
        description="Surface-code soft-information decoding and mitigation artifacts.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("posteriors", help="per-shot class posteriors")
    sp.add_argument("--d", type=_odd_distance, required=True)
    _add_noise_args(sp)
    sp.add_argument("--shots", type=int, default=1000)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument(
        "--oracle", choices=("matching", "enumerate", "mps"), default="matching"
    )
    sp.add_argument("--chi", type=int, default=64)
    sp.add_argument("--workers", type=int, default=_default_workers())
    sp.add_argument("--out", default="posteriors.csv")
    sp.set_defaults(func=_cmd_posteriors)

    sp = subs.add_parser("bias", help="exact-vs-matching posterior bias table")
    sp.add_argument("--d", type=_int_list, required=True, help="comma list, odd")
    sp.add_argument("--p", type=_float_list, required=True, help="comma list")
    sp.add_argument("--shots", type=int, default=1000)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--chi", type=int, default=64)
    sp.add_argument("--out", default="bias.csv")
    sp.set_defaults(func=_cmd_bias)

    sp = subs.add_parser("postselect", help="discard-rate vs error-rate curve")
    sp.add_argument("--d", type=_odd_distance, required=True)
    _add_noise_args(sp)
    sp.add_argument("--shots", type=int, default=100000)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--thresholds", type=_float_list, required=True)
    sp.add_argument(
        "--mode", choices=("max-per-gate", "accumulated-sum"), default="accumulated-sum"
    )
    sp.add_argument("--source", choices=("matching", "exact"), default="matching")
    sp.add_argument("--out", default="postselect.csv")
    sp.set_defaults(func=_cmd_postselect)

    sp = subs.add_parser("pec", help="probabilistic error cancellation run")
    sp.add_argument("--qubits", type=int, default=5)
    sp.add_argument("--gates", type=int, default=50)
    sp.add_argument("--p-gate", type=float, default=1e-3)
    sp.add_argument("--shots", type=int, default=100000)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--mode", choices=("type1", "type2"), default="type2")
    sp.add_argument("--source", choices=("known", "soft"), default="known")
    sp.add_argument("--patch-d", type=_odd_distance, default=3)
    sp.add_argument("--patch-p", type=float, default=0.01)
    sp.add_argument("--out", default="pec.json")
    sp.set_defaults(func=_cmd_pec)

    sp = subs.add_parser("zne", help="zero-noise extrapolation run")
    sp.add_argument("--qubits", type=int, default=5)
    sp.add_argument("--gates", type=int, default=50)
    sp.add_argument("--p-gate", type=float, default=1e-3)
    sp.add_argument("--scales", type=_float_list, default=[1.0, 2.0, 3.0])
    sp.add_argument("--shots-per-scale", type=int, default=100000)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument(
        "--amplification", choices=("pea-insert", "exact"), default="pea-insert"
    )
    sp.add_argument("--out", default="zne.csv")
    sp.add_argument("--summary-out", default=None)
    sp.set_defaults(func=_cmd_zne)

    sp = subs.add_parser("convergence", help="channel estimate vs shot count")
    sp.add_argument("--d", type=_odd_distance, required=True)
    _add_noise_args(sp)
    sp.add_argument("--shots", type=int, default=100000)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--source", choices=("matching", "exact"), default="exact")
    sp.add_argument("--checkpoints", type=int, default=60)
    sp.add_argument("--out", default="convergence.csv")
    sp.set_defaults(func=_cmd_convergence)

    sp = subs.add_parser("tradeoff", help="characterization/mitigation shot split")
    sp.add_argument("--total-shots", type=int, default=1000000)
    sp.add_argument("--gates", type=int, default=100)
    sp.add_argument("--p-avg", type=float, default=1e-3)
    sp.add_argument("--gamma", type=float, default=1.5)
    sp.add_argument("--lambdas", type=_float_list, default=None)
    sp.add_argument("--grid", type=int, default=99)
    sp.add_argument("--batch", choices=("first", "later"), default="first")
    sp.add_argument("--out", default="tradeoff.csv")
    sp.set_defaults(func=_cmd_tradeoff)

    sp = subs.add_parser("tcnot", help="transversal CNOT sequential decoding")
    sp.add_argument("--d", type=_odd_distance, required=True)
    sp.add_argument("--p", type=_float_list, required=True)
    sp.add_argument("--shots", type=int, default=2000)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--after-gate", action="store_true")
    sp.add_argument("--out", default="tcnot.csv")
    sp.set_defaults(func=_cmd_tcnot)

    sp = subs.add_parser("ls-channel", help="lattice-surgery CNOT channel")
    for step in ("step1", "step2", "step3", "idle1", "idle2"):
        sp.add_argument(
            f"--{step}",
            type=_float_list,
            default=[0.0, 0.0, 0.0],
            help=f"{step} X,Y,Z error masses",
        )
    sp.add_argument("--out", default="ls_channel.json")
    sp.set_defaults(func=_cmd_ls_channel)

    sp = subs.add_parser("resources", help="architecture volume comparison")
    sp.add_argument("--profiles", default=None)
    sp.add_argument("--epsilon", type=float, default=1e-8)
    sp.add_argument("--gst-overhead", type=float, default=1e5)
    sp.add_argument("--out", default="resources.csv")
    sp.set_defaults(func=_cmd_resources)

    sp = subs.add_parser("abort-savings", help="runtime abort expected savings")
    sp.add_argument("--n-steps", type=int, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--shots", type=int, default=0)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out", default="abort_savings.json")
    sp.set_defaults(func=_cmd_abort_savings)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
