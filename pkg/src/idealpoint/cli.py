"""Command-line interface.

Subcommands: simulate (config-driven sweep), sweep (flag-driven sweep),
waterfill (print an allocation plan), quantize (print a scalar quantizer),
plot (CSV -> SVG).  Exit codes: 0 success, 1 validation error, 2 numerical
failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import load_scenario
from .errors import NumericalError, ValidationError
from .generalprior import PriorSpec
from .harness import Scenario, emit_csv, parse_csv, run_sweep
from .quantize import lloyd_max_normal
from .solicitation import waterfill
from .svgplot import emit_svg


class _Parser(argparse.ArgumentParser):
    # Route argparse's own failures through the validation exit code.
    def error(self, message):
        raise ValidationError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ValidationError(f"expected a comma-separated integer list, got {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ValidationError(f"expected a comma-separated number list, got {text!r}") from exc


def _print_summaries(summaries) -> None:
    header = f"{'mode':<8} {'d':>4} {'m':>4} {'k':>4} {'trials':>7} {'mean':>10} {'p25':>10} {'p75':>10} {'se':>10}"
    print(header)
    for s in summaries:
        print(
            f"{s.mode:<8} {s.d:>4} {s.m:>4} {s.k:>4} {s.trials:>7} "
            f"{s.mean_distance:>10.5f} {s.p25:>10.5f} {s.p75:>10.5f} {s.std_error:>10.5f}"
        )


def _run_scenario(scenario: Scenario, out, svg) -> int:
    summaries = run_sweep(scenario)
    _print_summaries(summaries)
    if out:
        emit_csv(summaries, out)
        print(f"wrote {out}")
    if svg:
        emit_svg(summaries, svg)
        print(f"wrote {svg}")
    return 0


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.config)
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if overrides:
        scenario = Scenario(
            mode=scenario.mode,
            d=scenario.d,
            prior=scenario.prior,
            noise_var=scenario.noise_var,
            values=scenario.values,
            trials=overrides.get("trials", scenario.trials),
            master_seed=overrides.get("master_seed", scenario.master_seed),
            assortment_method=scenario.assortment_method,
        )
    return _run_scenario(scenario, args.out, args.svg)


def cmd_sweep(args) -> int:
    prior = PriorSpec.gaussian(np.zeros(args.d), args.prior_scale**2 * np.eye(args.d))
    scenario = Scenario(
        mode=args.mode,
        d=args.d,
        prior=prior,
        noise_var=args.noise_var,
        values=tuple(_int_list(args.values)),
        trials=args.trials,
        master_seed=args.seed,
        assortment_method=args.method,
    )
    return _run_scenario(scenario, args.out, args.svg)


def cmd_waterfill(args) -> int:
    eigs = _float_list(args.prior_eigs)
    if any(e <= 0 for e in eigs):
        raise ValidationError("prior eigenvalues must be positive")
    plan = waterfill(np.diag(eigs), args.m, args.sigma**2)
    print(f"budget m = {plan.budget}, noise sigma^2 = {plan.noise_var:g}")
    print(f"active rank r* = {plan.active_rank}, common level = {plan.common_level:.10g}")
    print(f"{'dir':>4} {'prior_eig':>12} {'allocation':>12} {'posterior_eig':>14}")
    for i in range(plan.d):
        print(
            f"{i + 1:>4} {plan.prior_eigs[i]:>12.6f} {plan.allocations[i]:>12.6f} "
            f"{plan.posterior_eigs[i]:>14.6f}"
        )
    print("csv: dir,prior_eig,allocation,posterior_eig")
    for i in range(plan.d):
        row = (i + 1, float(plan.prior_eigs[i]), float(plan.allocations[i]), float(plan.posterior_eigs[i]))
        print("csv: " + ",".join(repr(v) for v in row))
    return 0


def cmd_quantize(args) -> int:
    quant = lloyd_max_normal(args.k, args.tol)
    print(f"k = {quant.k}")
    print("centroids: " + " ".join(f"{c:.8f}" for c in quant.centroids))
    print("boundaries: " + " ".join(f"{b:.8f}" for b in quant.boundaries))
    print(f"distortion = {quant.distortion:.10f}")
    print(f"efficiency = {1.0 - quant.distortion:.10f}")
    return 0


def cmd_plot(args) -> int:
    summaries = parse_csv(args.input)
    emit_svg(summaries, args.out)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="idealpoint", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a sweep from a TOML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--svg", default=None, help="optional SVG output path")
    p.add_argument("--trials", type=int, default=None, help="override config trials")
    p.add_argument("--seed", type=int, default=None, help="override config master seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a sweep from flags")
    p.add_argument("--mode", required=True, choices=("depth", "breadth", "joint"))
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--values", required=True, help="comma-separated sweep values")
    p.add_argument("--trials", type=int, default=50_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-var", type=float, default=1.0)
    p.add_argument("--prior-scale", type=float, default=1.0)
    p.add_argument(
        "--method",
        default="product-quantizer",
        choices=("closed-form", "product-quantizer", "lloyd-refined"),
    )
    p.add_argument("--out", default=None, help="CSV output path")
    p.add_argument("--svg", default=None, help="SVG output path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("waterfill", help="print the optimal query allocation")
    p.add_argument("--prior-eigs", required=True, help="comma-separated prior eigenvalues")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--sigma", type=float, required=True, help="noise standard deviation")
    p.set_defaults(func=cmd_waterfill)

    p = sub.add_parser("quantize", help="print the optimal k-point normal quantizer")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("plot", help="render a sweep CSV as SVG")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return int(args.func(args) or 0)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
