"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 failed verification.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

from . import dataio, experiments, valuation
from .exceptions import ConfigError, DataError, DomainError, ModelError, UsageError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_VERIFY = 0, 1, 2, 3
SEED_ENV = "CRELAB_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _pair(text: str) -> tuple:
    vals = _floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return vals


def _budget(text: str) -> int:
    try:
        return int(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid budget {text!r}") from None


def _global_flags(parser: argparse.ArgumentParser) -> None:
    # SUPPRESS lets the flags appear before or after the subcommand
    g = parser.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help=f"RNG seed (default ${SEED_ENV} or 0)")
    g.add_argument("--out", default=argparse.SUPPRESS, help="output file (default standard output)")
    g.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS, help="output format")
    g.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crelab", description="Common ratio effect simulation and testing toolkit.")
    _global_flags(parser)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    d = experiments.FigThreeConfig()
    p = sub.add_parser("simulate", help="prospect-model choice frequency simulation")
    _global_flags(p)
    p.add_argument("--gamma", type=float, default=d.gamma)
    p.add_argument("--sigma", type=float, default=d.sigma)
    p.add_argument("--x", type=float, default=d.x)
    p.add_argument("--y", type=float, default=d.y)
    p.add_argument("--p", type=float, default=d.p)
    p.add_argument("--r", type=float, default=d.r)
    p.add_argument("--noise", type=float, default=d.noise_halfwidth, help="half-width of the uniform errors")
    p.add_argument("--choices", type=int, default=d.choices)
    p.add_argument("--reps", type=int, default=d.replications)

    s = experiments.SweepConfig()
    p = sub.add_parser("sweep", help="deterministic reversal sweep")
    _global_flags(p)
    p.add_argument("--gamma", type=float, default=s.gamma)
    p.add_argument("--sigma", type=float, default=s.sigma)
    p.add_argument("--prizes", type=_floats, default=s.prizes)
    p.add_argument("--probs", type=_floats, default=s.probs)
    p.add_argument("--ratios", type=_floats, default=s.ratios)

    p = sub.add_parser("bounds", help="mean-bound rectangles")
    _global_flags(p)
    p.add_argument("--y", type=float, default=30.0)
    p.add_argument("--p", type=float, default=0.8)
    p.add_argument("--gammas", type=_floats, default=(0.25, 0.5, 0.8, 1.0))

    p = sub.add_parser("construct", help="error laws hitting a mean or sign target")
    _global_flags(p)
    tgt = p.add_mutually_exclusive_group(required=True)
    tgt.add_argument("--target-mean", type=_pair, metavar="Z1,Z2")
    tgt.add_argument("--target-sign", type=float, metavar="Q")
    p.add_argument("--y", type=float, default=30.0)
    p.add_argument("--p", type=float, default=0.8)
    p.add_argument("--r", type=float, default=0.4)
    p.add_argument("--gamma", type=float, default=None, help="fix the CRRA exponent for mean targets")
    p.add_argument("--c", type=float, default=1.0, help="half-width of the wider sign-target error")

    p = sub.add_parser("classify", help="prevalence table for a studies CSV")
    _global_flags(p)
    p.add_argument("--input", required=True)
    p.add_argument("--ci", type=float, default=None, help="confidence level for the interval-aware strong test")
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("--weighting", choices=("unweighted", "participants"), default="unweighted")

    p = sub.add_parser("verify", help="run proposition suites")
    _global_flags(p)
    p.add_argument("--suite", default="all", help=f"one of {', '.join(experiments.SUITES)} or all")
    p.add_argument("--budget", type=_budget, default=10**5, help="samples per assertion (at least 1e5)")
    p.add_argument("--margin", type=float, default=experiments.MARGIN)

    p = sub.add_parser("figure", help="plot-ready long-format CSV")
    _global_flags(p)
    p.add_argument("--id", required=True, choices=("fig1", "fig3"))
    p.add_argument("--reps", type=int, default=d.replications)
    return parser


def resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        seed = args.seed
    else:
        env = os.environ.get(SEED_ENV, "").strip()
        if not env:
            return 0
        try:
            seed = int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None
    if not 0 <= seed < 2**64:
        raise UsageError("seed must be an unsigned 64-bit integer")
    return seed


def _fig3_config(args, seed: int, threads: int) -> experiments.FigThreeConfig:
    return experiments.FigThreeConfig(
        gamma=args.gamma, sigma=args.sigma, x=args.x, y=args.y, p=args.p, r=args.r,
        noise_halfwidth=args.noise, choices=args.choices, replications=args.reps, seed=seed, threads=threads,
    )


def _cmd_simulate(args, seed, threads):
    if args.reps < 1 or args.choices < 1:
        raise UsageError("--reps and --choices must be positive")
    cfg = _fig3_config(args, seed, threads)
    return experiments.run_fig3(cfg), {"seed": seed, "config": {k: v for k, v in vars(cfg).items() if k != "threads"}}


def _cmd_sweep(args, seed, threads):
    cfg = experiments.SweepConfig(args.gamma, args.sigma, args.prizes, args.probs, args.ratios)
    return experiments.run_sweep(cfg), {"seed": seed, "config": vars(cfg)}


def _cmd_bounds(args, seed, threads):
    rects = experiments.fig1_data(args.y, args.p, args.gammas)
    rows = [{"gamma": r.gamma, "e_min": r.e_min, "e_max": r.e_max} for r in rects]
    return rows, {"seed": seed, "config": {"y": args.y, "p": args.p, "gammas": args.gammas}}


def _cmd_construct(args, seed, threads):
    if args.target_mean is not None:
        z1, z2 = args.target_mean
        mc = valuation.construct_mean_target(z1, z2, args.y, args.p, args.r, gamma=args.gamma)
        m_ab, m_cd = mc.means
        result = {
            "kind": "mean", "target_ab": z1, "target_cd": z2, "gamma": mc.gamma,
            "error_ab_halfwidth": mc.c1, "error_cd_halfwidth": mc.c2, "mean_ab": m_ab, "mean_cd": m_cd,
        }
    else:
        ce = valuation.construct_sign_target(args.target_sign, args.c, args.r)
        if isinstance(ce, valuation.Independent):
            result = {"kind": "sign", "q": args.target_sign, "coupling": "independent", "c": args.c}
        else:
            result = {
                "kind": "sign", "q": args.target_sign, "coupling": "coupled", "c": ce.c, "d": ce.d,
                "orientation": ce.orientation, "a": ce.a, "b": ce.b, "prob_ab_gt_cd": ce.prob_ab_gt_cd,
            }
    cfg = {k: getattr(args, k) for k in ("y", "p", "r", "gamma", "c")}
    return result, {"seed": seed, "config": cfg}


def _cmd_classify(args, seed, threads):
    records = dataio.load_studies(args.input)
    table = dataio.classify_studies(records, tol=args.tol, ci_level=args.ci, weighting=args.weighting)
    return table, {"seed": seed, "config": {"input": args.input, **table.options}}


def _cmd_verify(args, seed, threads):
    ids = list(experiments.SUITES) if args.suite == "all" else [args.suite]
    run = lambda sid: experiments.run_prop_suite(sid, seed, args.budget, args.margin)
    if threads > 1 and len(ids) > 1:
        with ThreadPoolExecutor(threads) as pool:
            reports = list(pool.map(run, ids))
    else:
        reports = [run(sid) for sid in ids]
    for rep in reports:
        print(f"{rep.suite_id}: {'pass' if rep.passed else 'FAIL'}", file=sys.stderr)
    meta = {"seed": seed, "config": {"suite": args.suite, "budget": args.budget, "margin": args.margin}}
    result = reports[0] if len(reports) == 1 else {"suites": [r.to_dict() for r in reports]}
    return result, meta, all(r.passed for r in reports)


def _flatten_suites(result) -> list:
    reports = result["suites"] if isinstance(result, dict) else [result.to_dict()]
    return [
        {"suite": r["suite"], "name": a["name"], "passed": a["passed"], "estimate": a["estimate"], "se": a["se"],
         "tolerance": a["tolerance"]}
        for r in reports
        for a in r["assertions"]
    ]


def _figure_csv(args, seed, threads) -> str:
    if args.id == "fig1":
        rows = []
        for rect in experiments.fig1_data():
            lo, hi = rect.e_min, rect.e_max
            for corner, (ab, cd) in zip(("ll", "lu", "uu", "ul"), ((lo, lo), (lo, hi), (hi, hi), (hi, lo))):
                rows.append({"figure": "fig1", "gamma": rect.gamma, "corner": corner, "mean_ab": ab, "mean_cd": cd})
        return dataio.render_report(rows, "csv")
    cfg = experiments.FigThreeConfig(replications=args.reps, seed=seed, threads=threads)
    rc = experiments.run_fig3(cfg)
    from .testkit import classify_arrays

    strong = classify_arrays(rc.rho_ab, rc.rho_cd, "strong")
    band = classify_arrays(rc.rho_ab, rc.rho_cd, "mnoss")
    rows = [
        {"figure": "fig3", "replication": i, "rho_ab": a, "rho_cd": c, "strong": s.value, "mnoss": m.value}
        for i, (a, c, s, m) in enumerate(zip(rc.rho_ab, rc.rho_cd, strong, band))
    ]
    return dataio.render_report(rows, "csv")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise DataError(f"cannot write {out}: {exc.strerror}") from exc
    else:
        sys.stdout.write(text)


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        seed = resolve_seed(args)
        threads = getattr(args, "threads", 1)
        if threads < 1:
            raise UsageError("--threads must be at least 1")
        fmt = getattr(args, "format", "json")
        out = getattr(args, "out", None)
        passed = True
        if args.command == "figure":
            _emit(_figure_csv(args, seed, threads), out)
            return EXIT_OK
        if args.command == "verify":
            if args.suite != "all" and args.suite not in experiments.SUITES:
                raise UsageError(f"unknown suite {args.suite!r}")
            result, meta, passed = _cmd_verify(args, seed, threads)
            if fmt == "csv":
                result = _flatten_suites(result)
        else:
            handler = {
                "simulate": _cmd_simulate,
                "sweep": _cmd_sweep,
                "bounds": _cmd_bounds,
                "construct": _cmd_construct,
                "classify": _cmd_classify,
            }[args.command]
            result, meta = handler(args, seed, threads)
        _emit(dataio.render_report(result, fmt, meta), out)
        return EXIT_OK if passed else EXIT_VERIFY
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, ConfigError, ModelError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main(argv: Optional[Sequence[str]] = None) -> None:
    sys.exit(dispatch(argv))
