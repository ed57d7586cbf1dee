"""Command-line interface: sweeps, strategy tables, closed-form checks.

Exit codes: 0 success, 2 infeasible scenario, 1 any other error.
"""

import argparse
import sys
from dataclasses import replace

import numpy as np

from .channel import ScenarioConfig, build_covariances, load_config
from .coordination import select_strategy
from .errors import InfeasibleScenarioError, SpecShareError
from .harness import ALL_SCHEMES, SweepAxis, SweepSpec, emit_outputs, run_sweep
from .verify import verify_closed_forms

DEFAULT_POINTS = {
    SweepAxis.SNR_DB: tuple(float(x) for x in np.arange(0, 21, 2)),
    SweepAxis.TAU1: tuple(float(x) for x in np.arange(1, 13) * 0.25),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specshare",
        description="Coordinated spectrum-sharing precoding simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep and write a CSV report")
    p_sweep.add_argument("--axis", choices=[a.value for a in SweepAxis], required=True)
    p_sweep.add_argument("--points", type=str, default=None,
                         help="comma-separated grid (default depends on axis)")
    p_sweep.add_argument("--config", type=str, default=None, help="scenario config file")
    p_sweep.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_sweep.add_argument("--samples", type=int, default=None,
                         help="override the Monte Carlo sample count")
    p_sweep.add_argument("--out", type=str, required=True, help="output CSV path")
    p_sweep.add_argument("--plots", type=str, default=None,
                         help="directory for figure output (optional)")
    p_sweep.add_argument("--schemes", type=str, default=",".join(ALL_SCHEMES),
                         help=f"subset of {','.join(ALL_SCHEMES)}")
    p_sweep.add_argument("--workers", type=int, default=1,
                         help="process pool size over sweep points")
    p_sweep.set_defaults(func=cmd_sweep)

    p_strat = sub.add_parser("strategies", help="print the 8-entry strategy table")
    p_strat.add_argument("--config", type=str, default=None)
    p_strat.set_defaults(func=cmd_strategies)

    p_verify = sub.add_parser("verify-lemmas",
                              help="check the closed-form rate expressions against sampling")
    p_verify.add_argument("--samples", type=int, default=1_000_000)
    p_verify.add_argument("--inputs", type=int, default=20,
                          help="randomized inputs per closed form")
    p_verify.add_argument("--seed", type=int, default=20260810)
    p_verify.set_defaults(func=cmd_verify)

    return parser


def _load(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "samples", None) is not None:
        overrides["n_samples"] = args.samples
    return replace(cfg, **overrides) if overrides else cfg


def cmd_sweep(args) -> int:
    cfg = _load(args)
    axis = SweepAxis(args.axis)
    if args.points is None:
        points = DEFAULT_POINTS[axis]
    else:
        points = tuple(float(p) for p in args.points.split(","))
    schemes = tuple(s.strip() for s in args.schemes.split(",") if s.strip())
    spec = SweepSpec(axis=axis, points=points, base=cfg)
    reports = run_sweep(spec, schemes=schemes, workers=args.workers)
    emit_outputs(reports, args.out, schemes=schemes, plots_dir=args.plots,
                 axis=axis, tau1=cfg.tau1)
    print(f"wrote {args.out} ({len(points)} points, {len(schemes)} schemes)")
    if not any(r.feasible for r in reports):
        print("error: every sweep point is infeasible", file=sys.stderr)
        return 2
    return 0


def cmd_strategies(args) -> int:
    cfg = _load(args)
    cov = build_covariances(cfg)
    best, table = select_strategy(cfg, cov)
    header = f"{'strategy':<12}{'p1':>12}{'p2':>12}  {'feasible':<9}" \
             f"{'bound_rx1':>12}{'bound_rx2':>12}  selected"
    print(header)
    print("-" * len(header))
    for s in table:
        mark = "*" if s is best else ""
        print(f"{s.label:<12}{s.resolved_p1:>12.6g}{s.resolved_p2:>12.6g}  "
              f"{str(s.feasible).lower():<9}{s.incumbent_bound.value:>12.6g}"
              f"{s.licensee_bound.value:>12.6g}  {mark}")
    return 0


def cmd_verify(args) -> int:
    records = verify_closed_forms(n_inputs=args.inputs, samples=args.samples,
                                  seed=args.seed)
    failures = 0
    for rec in records:
        status = "PASS" if rec.ok else "FAIL"
        if not rec.ok:
            failures += 1
        print(f"{status} {rec.name:<16} dim={rec.dim}  closed={rec.closed_form:.6f}  "
              f"mc={rec.mc_mean:.6f} (se {rec.mc_se:.2e}, {rec.sigmas:.2f} sigma)")
    print(f"{len(records) - failures}/{len(records)} checks passed")
    return 0 if failures == 0 else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SpecShareError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
