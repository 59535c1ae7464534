"""Command-line surface: profile generation, plan optimization, latency
calibration, strategy comparison, and profile similarity.

Human-readable tables go to stdout; machine-readable files go to --out, each
accompanied by a .manifest.json reproducibility record. Exit codes: 0 ok,
1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from . import __version__
from .allocate import optimize_plan, save_plan
from .errors import HeadBalanceError
from .latency import calibrate, load_model, load_samples, save_model
from .manifest import write_manifest
from .profiles import (
    SyntheticSpec,
    generate_profile,
    load_profile,
    profile_similarity,
    save_profile,
)
from .schemes import EnumerationConfig
from .simulate import SimulationConfig, compare, save_comparison, save_gpu_table


def _parse_dist(text: str) -> tuple[str, float | None]:
    name, _, raw = text.partition(":")
    if name == "uniform":
        if raw:
            raise argparse.ArgumentTypeError("uniform takes no parameter")
        return name, None
    if name in ("zipf", "dirichlet"):
        try:
            param = float(raw)
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"{name} needs a numeric parameter, e.g. {name}:1.2"
            ) from None
        if param <= 0:
            raise argparse.ArgumentTypeError(f"{name} parameter must be > 0")
        return name, param
    raise argparse.ArgumentTypeError(
        f"unknown distribution {text!r}; use uniform, zipf:S or dirichlet:A"
    )


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return value


def _workers() -> int:
    raw = os.environ.get("HEADBALANCE_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="headbalance",
        description="Balance per-head KV-cache loads across tensor-parallel GPUs.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-profile", help="write a synthetic workload profile")
    p.add_argument("--layers", type=_positive_int, required=True)
    p.add_argument("--heads", type=_positive_int, required=True)
    p.add_argument("--dist", type=_parse_dist, required=True,
                   help="uniform, zipf:S or dirichlet:A")
    p.add_argument("--budget", type=float, required=True,
                   help="total weight per layer")
    p.add_argument("--seed", type=_nonneg_int, required=True)
    p.add_argument("--model-name", default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("optimize", help="compute a balanced allocation plan")
    p.add_argument("--profile", required=True)
    p.add_argument("--tp", type=_positive_int, required=True)
    p.add_argument("--ch", type=_nonneg_int, required=True,
                   help="extra-copy budget per layer")
    p.add_argument("--rmax", type=_positive_int, default=1,
                   help="per-head replication cap")
    p.add_argument("--no-equal-split", action="store_true",
                   help="allow unequal group sizes (experimental)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("calibrate", help="fit the latency law to samples")
    p.add_argument("--samples", required=True,
                   help="delimited text with header batch,kv_load,latency")
    p.add_argument("--comm-alpha", type=_nonneg_float, default=0.0)
    p.add_argument("--comm-beta", type=_nonneg_float, default=0.0)
    p.add_argument("--bytes-per-activation", type=float, default=1.0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("compare", help="simulate baseline vs balanced strategies")
    p.add_argument("--profile", required=True)
    p.add_argument("--tp", type=_positive_int, required=True)
    p.add_argument("--ch", type=_nonneg_int, required=True)
    p.add_argument("--rmax", type=_positive_int, default=2)
    p.add_argument("--model", required=True, help="latency model file")
    p.add_argument("--batch", type=_positive_int, required=True)
    p.add_argument("--steps", type=_positive_int, required=True)
    p.add_argument("--replication-overhead", type=_nonneg_float, default=0.0,
                   help="comm seconds added per extra copy per layer step")
    p.add_argument("--gpu-table", default=None,
                   help="also write a per-GPU delimited table here")
    p.add_argument("--out", required=True)

    p = sub.add_parser("similarity", help="cosine similarity of two profiles")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)

    return parser


def _cmd_gen_profile(args) -> int:
    dist, param = args.dist
    spec = SyntheticSpec(
        distribution=dist,
        param=param,
        total_budget_per_layer=args.budget,
        seed=args.seed,
    )
    profile = generate_profile(spec, args.layers, args.heads)
    if args.model_name:
        profile = dataclasses.replace(profile, model_name=args.model_name)
    save_profile(profile, args.out)
    write_manifest(
        args.out,
        "gen-profile",
        {
            "layers": args.layers,
            "heads": args.heads,
            "dist": dist if param is None else f"{dist}:{param!r}",
            "budget": args.budget,
            "model_name": args.model_name,
        },
        inputs={},
        seed=args.seed,
    )
    print(f"wrote profile: {args.out} ({args.layers} layers x {args.heads} heads)")
    return 0


def _cmd_optimize(args) -> int:
    profile = load_profile(args.profile)
    cfg = EnumerationConfig(ch_budget=args.ch, r_max=args.rmax,
                            require_divisible=not args.no_equal_split, tp=args.tp)
    plan = optimize_plan(
        profile,
        args.tp,
        cfg,
        equal_split=not args.no_equal_split,
        workers=_workers(),
    )
    save_plan(plan, args.out)
    write_manifest(
        args.out,
        "optimize",
        {
            "tp": args.tp,
            "ch": args.ch,
            "rmax": args.rmax,
            "equal_split": not args.no_equal_split,
        },
        inputs={"profile": args.profile},
    )
    print(f"{'layer':>5}  {'delta':>12}  {'copies':>6}")
    for i, assignment in enumerate(plan.layers):
        copies = sum(len(g) for g in assignment.groups)
        print(f"{i:>5}  {assignment.delta:>12.6g}  {copies:>6}")
    print(f"wrote plan: {args.out}")
    return 0


def _cmd_calibrate(args) -> int:
    samples = load_samples(args.samples)
    result = calibrate(
        samples,
        comm_alpha=args.comm_alpha,
        comm_beta=args.comm_beta,
        bytes_per_activation=args.bytes_per_activation,
    )
    save_model(result.model, args.out)
    write_manifest(
        args.out,
        "calibrate",
        {
            "comm_alpha": args.comm_alpha,
            "comm_beta": args.comm_beta,
            "bytes_per_activation": args.bytes_per_activation,
        },
        inputs={"samples": args.samples},
    )
    m = result.model
    print(f"fitted on {result.num_samples} samples")
    print(f"c0={m.c0!r} c1={m.c1!r} c2={m.c2!r} c3={m.c3!r}")
    print(f"residual_rms={result.residual_rms!r}")
    print(f"wrote model: {args.out}")
    return 0


def _cmd_compare(args) -> int:
    profile = load_profile(args.profile)
    model = load_model(args.model)
    cfg = EnumerationConfig(ch_budget=args.ch, r_max=args.rmax,
                            require_divisible=True, tp=args.tp)
    simcfg = SimulationConfig(
        batch=args.batch,
        decode_steps=args.steps,
        tp=args.tp,
        replication_overhead=args.replication_overhead,
    )
    comparison = compare(profile, args.tp, cfg, model, simcfg, workers=_workers())
    save_comparison(comparison, args.out)
    if args.gpu_table:
        save_gpu_table(comparison, args.gpu_table)
    write_manifest(
        args.out,
        "compare",
        {
            "tp": args.tp,
            "ch": args.ch,
            "rmax": args.rmax,
            "batch": args.batch,
            "steps": args.steps,
            "replication_overhead": args.replication_overhead,
        },
        inputs={"profile": args.profile, "model": args.model},
    )
    header = (
        f"{'strategy':>8}  {'busy':>8}  {'tok/s':>12}  {'gain':>7}  "
        f"{'d_idle':>10}  {'d_cache':>10}  {'d_comm':>10}  {'d_total':>10}"
    )
    print(header)
    for r in comparison.results:
        d = r.decomposition
        print(
            f"{r.name:>8}  {r.report.mean_busy_rate:>8.4f}  "
            f"{r.report.throughput:>12.4f}  {r.throughput_gain:>7.4f}  "
            f"{d.d_idle:>10.4g}  {d.d_cache:>10.4g}  {d.d_comm:>10.4g}  "
            f"{d.d_total:>10.4g}"
        )
    print(f"wrote report: {args.out}")
    return 0


def _cmd_similarity(args) -> int:
    a = load_profile(args.a)
    b = load_profile(args.b)
    print(repr(profile_similarity(a, b)))
    return 0


_HANDLERS = {
    "gen-profile": _cmd_gen_profile,
    "optimize": _cmd_optimize,
    "calibrate": _cmd_calibrate,
    "compare": _cmd_compare,
    "similarity": _cmd_similarity,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (HeadBalanceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
