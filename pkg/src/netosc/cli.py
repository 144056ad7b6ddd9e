"""Command-line entry point: one subcommand per experiment kind.

Exit codes: 0 when the experiment's checks pass, 1 when a check fails,
2 on configuration or runtime errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback

from .experiments import KINDS, ExperimentConfig, run_experiment


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netosc",
        description="Phase-oscillator dynamics on graphs sampled from a kernel, "
        "with averaged and continuum-limit convergence studies.",
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--config", help="JSON config file (flags override its values)")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", dest="out_dir", help="output directory for artifacts")
        p.add_argument("--threads", type=int)
        p.add_argument("--plot", action="store_true", default=None)
        p.add_argument("--graphon", choices=["constant", "erdos_renyi", "power_law", "small_world"])
        p.add_argument("--beta", type=float)
        p.add_argument("--p", type=float)
        p.add_argument("--r", type=float)
        p.add_argument("--c", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--ns", help="comma-separated resolutions, e.g. 256,512,1024")
        p.add_argument("--n-ref", dest="n_ref", type=int)
        p.add_argument("--T", dest="T", type=float)
        p.add_argument("--dt", type=float)
        p.add_argument("--trials", type=int)
        p.add_argument("--directed", action="store_true", default=None)
        p.add_argument("--cache-dir", dest="cache_dir")
    return parser


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    data["kind"] = args.kind
    overrides = (
        "seed", "out_dir", "threads", "plot", "graphon", "beta", "p", "r", "c",
        "gamma", "n_ref", "T", "dt", "trials", "directed", "cache_dir",
    )
    for name in overrides:
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    if getattr(args, "ns", None):
        data["ns"] = [int(tok) for tok in args.ns.split(",") if tok]
    return ExperimentConfig.from_dict(data)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        record = run_experiment(cfg)
    except Exception:
        traceback.print_exc()
        return 2
    for check in record.checks:
        status = "PASS" if check["passed"] else "FAIL"
        print(f"[{status}] {check['name']}: {check['detail']}")
    if record.fit:
        print(
            f"fitted slope {record.fit['slope']:.4f}"
            + (
                f" (target {record.fit['target_exponent']:.4f})"
                if record.fit.get("target_exponent") is not None
                else ""
            )
        )
    if cfg.out_dir:
        print(f"artifacts in {cfg.out_dir}")
    return 0 if record.passed else 1


if __name__ == "__main__":
    sys.exit(main())
