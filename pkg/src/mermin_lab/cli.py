"""Command-line front end: ``mermin-lab {simulate,classical,analytic,conserve,check}``.

Exit codes: 0 success, 1 I/O failure, 2 invalid arguments, 3 conservation
test failed (``conserve``) or invariant failure (``check``).
Angles are degrees on the command line. ``MERMIN_LAB_SEED`` sets the default
seed; ``--seed`` overrides it.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from mermin_lab import __version__
from mermin_lab import classical_lhv as lhv
from mermin_lab import io
from mermin_lab.bell_states import (
    BellKind,
    SymmetryPlane,
    correlation_analytic,
    in_plane_direction,
    joint_distribution,
    symmetry_plane,
)
from mermin_lab.checks import MUTATIONS, run_checks
from mermin_lab.conservation import conservation_test, reconstruct_correlation
from mermin_lab.quantum_sampler import ExperimentSpec, run_experiment
from mermin_lab.spin_algebra import Direction
from mermin_lab.trials import DevicePolicy, FixedPolicy, TrialLog, device_angle

SEED_ENV = "MERMIN_LAB_SEED"
STATES = [k.value for k in BellKind]


class UsageError(Exception):
    """Bad flag combination detected after parsing; maps to exit code 2."""


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trials", type=int, default=None, help="number of trials (default 100000)")
    p.add_argument("--seed", type=int, default=None, help=f"64-bit seed (default ${SEED_ENV} or 0)")
    p.add_argument("--policy", choices=["device", "fixed"], default=None)
    p.add_argument("--alpha", type=float, default=None, help="Alice's angle in degrees (fixed policy)")
    p.add_argument("--beta", type=float, default=None, help="Bob's angle in degrees (fixed policy)")
    p.add_argument("--format", choices=["jsonl", "csv"], default=None, dest="fmt")
    p.add_argument("--out", type=Path, default=None, help="trial log path; manifest goes to PATH.manifest.json")
    p.add_argument("--summary-csv", type=Path, default=None)
    p.add_argument("--manifest", type=Path, default=None, help="re-run exactly from a manifest")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mermin-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo trials for a Bell state")
    p.add_argument("--state", choices=STATES, default=None)
    _add_run_flags(p)

    p = sub.add_parser("classical", help="instruction-set raffle trials")
    p.add_argument("--dist", default=None, help="uniform | two-one | point:SET (e.g. point:RRG)")
    p.add_argument("--mode", choices=[m.value for m in lhv.CorrelationMode], default=None)
    _add_run_flags(p)

    p = sub.add_parser("analytic", help="exact correlations and joint distributions")
    p.add_argument("--state", choices=STATES, required=True)
    p.add_argument("--plane", choices=[pl.value for pl in SymmetryPlane if pl is not SymmetryPlane.ALL],
                   default=None, help="measurement plane (default: the state's symmetry plane)")
    p.add_argument("--alpha", type=float, default=0.0, help="Alice's in-plane angle, degrees")
    p.add_argument("--beta", type=float, nargs="+", default=[0.0, 120.0, 240.0],
                   help="one or more in-plane angles for Bob, degrees")
    p.add_argument("--a", type=str, default=None, help="explicit direction ax,ay,az for Alice")
    p.add_argument("--b", type=str, default=None, help="explicit direction bx,by,bz for Bob")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("conserve", help="partition analysis of average-only conservation")
    p.add_argument("--in", dest="log_in", type=Path, default=None, help="trial log (jsonl or csv)")
    p.add_argument("--state", choices=STATES, default=None,
                   help="state whose conserved projection is tested (default: manifest or phi-plus)")
    p.add_argument("--theta", type=float, default=None, help="relative angle, degrees (default: from log)")
    p.add_argument("--pair", type=str, default=None, help="device setting pair to select, e.g. 1,2")
    p.add_argument("--reference", choices=["alice", "bob"], default="alice")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=60.0)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("check", help="run the full invariant suite")
    p.add_argument("--json", action="store_true")
    p.add_argument("--mutate", choices=MUTATIONS, default=None,
                   help="inject a known defect; the suite must then fail")
    return parser


def _resolve_run(args, command: str) -> dict:
    if args.manifest is not None:
        try:
            manifest = io.RunManifest.read(args.manifest)
        except (OSError, ValueError) as exc:
            raise OSError(f"cannot read manifest: {exc}") from exc
        if manifest.command != command:
            raise UsageError(f"manifest is for {manifest.command!r}, not {command!r}")
        spec = dict(manifest.spec)
        if args.out is not None:
            spec["out"] = str(args.out)
        return spec
    spec = {
        "trials": 100_000 if args.trials is None else args.trials,
        "seed": _default_seed() if args.seed is None else args.seed,
        "policy": args.policy or "device",
        "alpha": args.alpha,
        "beta": args.beta,
        "format": args.fmt or "jsonl",
        "out": None if args.out is None else str(args.out),
    }
    if command == "simulate":
        spec["state"] = args.state or "phi-plus"
    else:
        spec["dist"] = args.dist or "uniform"
        spec["mode"] = args.mode or "correlated"
    if spec["policy"] == "fixed":
        if spec["alpha"] is None or spec["beta"] is None:
            raise UsageError("--policy fixed needs --alpha and --beta")
    elif spec["alpha"] is not None or spec["beta"] is not None:
        raise UsageError("--alpha/--beta apply only to --policy fixed")
    if spec["trials"] < 1:
        raise UsageError("--trials must be >= 1")
    if not 0 <= spec["seed"] < 2 ** 64:
        raise UsageError("--seed must be in [0, 2**64)")
    return spec


def _policy(spec: dict):
    if spec["policy"] == "device":
        return DevicePolicy()
    return FixedPolicy.from_degrees(spec["alpha"], spec["beta"])


def _execute(spec: dict, command: str, workers: int) -> TrialLog:
    if command == "simulate":
        return run_experiment(ExperimentSpec(BellKind(spec["state"]), _policy(spec),
                                             spec["trials"], spec["seed"]), workers=workers)
    try:
        dist = lhv.SetDistribution.from_name(spec["dist"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return lhv.sample_raffle(dist, _policy(spec), spec["trials"], spec["seed"],
                             mode=lhv.CorrelationMode(spec["mode"]), workers=workers)


def _run_command(args, command: str) -> int:
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    spec = _resolve_run(args, command)
    try:
        log = _execute(spec, command, args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = io.summary_table(log)
    print(io.format_summary(rows))
    case_b = log.case_b()
    if case_b.any() and case_b.sum() < len(log):
        sub = log.subset(case_b)
        print(f"case (b): n={len(sub)} same={sub.same_fraction():.5f} corr={sub.correlation():.5f}")
        sub_a = log.subset(~case_b)
        print(f"case (a): n={len(sub_a)} same={sub_a.same_fraction():.5f} corr={sub_a.correlation():.5f}")
    if spec["out"] is not None:
        out = Path(spec["out"])
        io.write_log(log, out, spec["format"])
        outputs = {"log": str(out)}
        if args.summary_csv is not None:
            io.write_summary_csv(rows, args.summary_csv)
            outputs["summary"] = str(args.summary_csv)
        manifest = io.RunManifest(command=command, spec=dict(spec, out=str(out)), outputs=outputs)
        manifest.write(io.manifest_path(out))
        print(f"wrote {out} and {io.manifest_path(out)}")
    elif args.summary_csv is not None:
        io.write_summary_csv(rows, args.summary_csv)
    return 0


def _parse_vector(text: str) -> Direction:
    try:
        parts = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"direction must be three comma-separated numbers, got {text!r}") from None
    if len(parts) != 3:
        raise UsageError(f"direction must have three components, got {text!r}")
    try:
        return Direction(*parts)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_analytic(args) -> int:
    kind = BellKind(args.state)
    if (args.a is None) != (args.b is None):
        raise UsageError("--a and --b must be given together")
    if args.a is not None:
        pairs = [(args.a, args.b, _parse_vector(args.a), _parse_vector(args.b))]
    else:
        plane = SymmetryPlane(args.plane) if args.plane else symmetry_plane(kind)
        alpha = math.radians(args.alpha)
        pairs = [(args.alpha, beta, in_plane_direction(plane, alpha),
                  in_plane_direction(plane, math.radians(beta))) for beta in args.beta]
    rows = []
    for la, lb, a, b in pairs:
        jd = joint_distribution(kind, a, b)
        rows.append({"state": kind.value, "alice": la, "bob": lb,
                     "correlation": correlation_analytic(kind, a, b),
                     "p_uu": jd.p_uu, "p_ud": jd.p_ud, "p_du": jd.p_du, "p_dd": jd.p_dd})
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        print(f"{'alice':>14} {'bob':>14} {'corr':>10} {'p_uu':>8} {'p_ud':>8} {'p_du':>8} {'p_dd':>8}")
        for r in rows:
            print(f"{r['alice']!s:>14} {r['bob']!s:>14} {r['correlation']:10.6f} "
                  f"{r['p_uu']:8.5f} {r['p_ud']:8.5f} {r['p_du']:8.5f} {r['p_dd']:8.5f}")
    return 0


def _parse_pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in text.split(","))
        device_angle(a), device_angle(b)
    except ValueError:
        raise UsageError(f"--pair must look like 1,2 with settings 1-3, got {text!r}") from None
    return a, b


def cmd_conserve(args) -> int:
    state = args.state
    if args.log_in is not None:
        try:
            log = io.read_log(args.log_in)
        except OSError as exc:
            raise OSError(f"cannot read log: {exc}") from exc
        manifest = io.manifest_path(args.log_in)
        if state is None and manifest.exists():
            state = io.RunManifest.read(manifest).spec.get("state")
    else:
        seed = _default_seed() if args.seed is None else args.seed
        state = state or "phi-plus"
        log = run_experiment(ExperimentSpec(
            BellKind(state), FixedPolicy.from_degrees(args.alpha, args.beta), args.trials, seed))
    kind = BellKind(state or "phi-plus")

    if args.pair is not None:
        log = log.select_pair(*_parse_pair(args.pair))
        if len(log) == 0:
            raise UsageError(f"log has no trials with settings {args.pair}")
    pairs = log.setting_pairs()
    if len(pairs) != 1:
        raise UsageError(f"log has {len(pairs)} setting pairs; choose one with --pair")
    if args.theta is not None:
        theta = math.radians(args.theta)
    else:
        theta = pairs[0][1] - pairs[0][0]

    verdict = conservation_test(log, kind, theta, reference=args.reference)
    identity_gap = None if verdict.reconstructed is None else abs(verdict.reconstructed - verdict.direct)
    if args.json:
        out = verdict.as_dict() | {"state": kind.value, "theta_deg": math.degrees(theta),
                                   "identity_gap": identity_gap}
        print(json.dumps(out, indent=2))
    else:
        r = verdict.report
        print(f"state {kind.value}  theta {math.degrees(theta):.6g} deg  reference {r.reference_party}")
        print(f"  +1 class: n={r.n_plus} mean={_fmt(r.ba_plus)} se={_fmt(r.se_plus)} "
              f"target={verdict.target_plus:.6f} z={_fmt(verdict.z_plus)}")
        print(f"  -1 class: n={r.n_minus} mean={_fmt(r.ba_minus)} se={_fmt(r.se_minus)} "
              f"target={verdict.target_minus:.6f} z={_fmt(verdict.z_minus)}")
        recon = "undefined" if verdict.reconstructed is None else f"{reconstruct_correlation(r):.12f}"
        print(f"  reconstructed correlation {recon}; direct {verdict.direct:.12f}")
        print(f"  verdict: {'PASS' if verdict.passed else 'FAIL'}")
    return 0 if verdict.passed else 3


def _fmt(x) -> str:
    return "undefined" if x is None else f"{x:.6f}"


def cmd_check(args) -> int:
    results = run_checks(args.mutate)
    failed = [r for r in results if not r.passed]
    if args.json:
        print(json.dumps({"passed": not failed, "mutation": args.mutate,
                          "checks": [r.as_dict() for r in results],
                          "failures": [r.name for r in failed]}, indent=2))
    else:
        for r in results:
            print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
        print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 0 if not failed else 3


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _run_command(args, "simulate")
        if args.command == "classical":
            return _run_command(args, "classical")
        if args.command == "analytic":
            return cmd_analytic(args)
        if args.command == "conserve":
            return cmd_conserve(args)
        return cmd_check(args)
    except UsageError as exc:
        print(f"mermin-lab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"mermin-lab {args.command}: I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
