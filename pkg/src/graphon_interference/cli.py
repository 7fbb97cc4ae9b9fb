"""Command-line interface: simulate, mse-sweep, histogram, sensitivity, presets."""

from __future__ import annotations

import argparse
import json
import sys

from . import harness, sensitivity
from .presets import PRESET_NAMES


def _load_config(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _cmd_simulate(args) -> int:
    config = harness.RunConfig.from_dict(_load_config(args.config))
    table = harness.run_replications(config)
    table.write(args.output)
    print(f"wrote {len(table.rows)} rows to {args.output}")
    print(f"metadata: {harness.metadata_path(args.output)}")
    return 0


def _cmd_mse_sweep(args) -> int:
    config = harness.RunConfig.from_dict(_load_config(args.config))
    result = harness.mse_sweep(config)
    result.write(args.output)
    for name, _, slope, _, stderr in result.slopes:
        print(f"{name}: log-log slope {slope:.4f} (stderr {stderr:.4f})")
    return 0


def _cmd_histogram(args) -> int:
    config = harness.RunConfig.from_dict(_load_config(args.config))
    table = harness.run_replications(config)
    harness.write_histogram(table, args.estimator, args.output, bins=args.bins)
    print(f"wrote histogram for {args.estimator} to {args.output}")
    return 0


def _cmd_sensitivity(args) -> int:
    raw = _load_config(args.config)
    inp = sensitivity.SensitivityInput(
        n=int(raw["n"]),
        pi=float(raw["pi"]),
        tau_hat=float(raw["tau_hat"]),
        se0=float(raw["se0"]),
        sigma0_sq=float(raw.get("sigma0_sq", 0.0)),
        q2_rule=sensitivity.build_q2_rule(raw.get("q2")),
    )
    alphas = raw.get("alphas", [0.05])
    rows = sensitivity.interval_table(inp, alphas)
    harness._write_csv(args.output, ("alpha", "lo", "hi"), rows)
    metadata = {
        "input": {
            "n": inp.n,
            "pi": inp.pi,
            "tau_hat": inp.tau_hat,
            "se0": inp.se0,
            "sigma0_sq": inp.sigma0_sq,
            "q2_rule": getattr(inp.q2_rule, "kind", "zero"),
        },
        "columns": ["alpha", "lo", "hi"],
    }
    try:
        c0, c1, c2 = sensitivity.noise_polynomial(inp)
        metadata["noise_polynomial"] = {"c0": c0, "c1": c1, "c2": c2}
        print(f"noise polynomial: {c0:.6f} + {c1:.6f}|tau0| + {c2:.6f} tau0^2")
    except ValueError:
        pass
    harness._write_metadata(args.output, metadata)
    for alpha, lo, hi in rows:
        print(f"alpha={alpha:g}: ({lo:.6f}, {hi:.6f})")
    return 0


def _cmd_presets(args) -> int:
    if args.action == "list":
        for name in PRESET_NAMES:
            print(name)
        return 0
    raise SystemExit(f"unknown presets action {args.action!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphon-interference",
        description="Monte Carlo experiments for treatment effects under network interference",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run replicated experiments from a JSON config")
    p.add_argument("config")
    p.add_argument("-o", "--output", default="results.csv")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("mse-sweep", help="MSE over an n grid with fitted log-log slopes")
    p.add_argument("config")
    p.add_argument("-o", "--output", default="sweep.csv")
    p.set_defaults(func=_cmd_mse_sweep)

    p = sub.add_parser("histogram", help="replicate histogram with theory overlay metadata")
    p.add_argument("config")
    p.add_argument("estimator")
    p.add_argument("-o", "--output", default="histogram.csv")
    p.add_argument("--bins", type=int, default=30)
    p.set_defaults(func=_cmd_histogram)

    p = sub.add_parser("sensitivity", help="interference-robust confidence intervals")
    p.add_argument("config")
    p.add_argument("-o", "--output", default="sensitivity.csv")
    p.set_defaults(func=_cmd_sensitivity)

    p = sub.add_parser("presets", help="inspect built-in presets")
    p.add_argument("action", choices=["list"])
    p.set_defaults(func=_cmd_presets)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
