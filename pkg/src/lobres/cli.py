"""Command-line front end: `lobres <subcommand> ...`.

Every subcommand prints a JSON summary on stdout and exits nonzero when the
underlying tool reports an error (or, for `run`, when any day failed).
"""

import argparse
import json
import sys

from loguru import logger

from .config import settings
from .tools import events, models, runs, ted


def _covariates(value: str) -> str | list[str]:
    if value in ("full", "fixed_subset"):
        return value
    return [name.strip() for name in value.split(",") if name.strip()]


def _configure_logging(verbose: bool) -> None:
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else settings.log_level)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lobres", description="Liquidity threshold exceedance durations")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate synthetic order flow")
    p.add_argument("--out", required=True)
    p.add_argument("--days", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--preset", help="take the flow settings from a preset")
    p.add_argument("--day-start-ms", type=int, default=28_800_000)
    p.add_argument("--day-end-ms", type=int, default=59_400_000)

    p = sub.add_parser("replay", help="event file -> liquidity series")
    p.add_argument("events")
    p.add_argument("--out", required=True)
    p.add_argument("--measure", choices=["spread", "xlm"], default="spread")
    p.add_argument("--notional", type=float, default=25_000.0)
    p.add_argument("--tick-size", type=float)

    p = sub.add_parser("extract-ted", help="exceedance durations from events or a series")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--events")
    source.add_argument("--series")
    p.add_argument("--index", help="index activity CSV for the indact covariate")
    p.add_argument("--out", required=True)
    p.add_argument("--threshold-q", type=float, default=0.5)
    p.add_argument("--threshold", type=float, help="fixed threshold instead of a daily quantile")
    p.add_argument("--measure", choices=["spread", "xlm"], default="spread")
    p.add_argument("--notional", type=float, default=25_000.0)
    p.add_argument("--window-start-ms", type=int, help="default: LOBRES_WINDOW_START_MS (08:01)")
    p.add_argument("--window-end-ms", type=int, help="default: LOBRES_WINDOW_END_MS (16:29)")

    p = sub.add_parser("fit", help="fit a duration family to a TED table")
    p.add_argument("ted")
    p.add_argument("--family", default="lognormal", choices=["lognormal", "gamma", "weibull", "gengamma"])
    p.add_argument("--link-mode", default="single", choices=["single", "two-link", "three-link"])
    p.add_argument("--covariates", type=_covariates, default="fixed_subset")
    p.add_argument("--include-censored", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("select", help="best covariate subsets per TED table")
    p.add_argument("ted", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--covariates", type=_covariates, default="full")
    p.add_argument("--include-censored", action="store_true")

    p = sub.add_parser("quantile-surface", help="conditional quantiles from a saved model")
    p.add_argument("model")
    p.add_argument("ted")
    p.add_argument("--vary", action="append", required=True, help="covariate to vary (once or twice)")
    p.add_argument("--u", type=float, action="append", help="quantile level (repeatable)")
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--allow-extrapolation", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("report", help="rebuild cross-day tables of a finished run")
    p.add_argument("out")
    p.add_argument("--link-mode", choices=["single", "two-link", "three-link"])

    p = sub.add_parser("run", help="batch run from a config file or preset")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--config")
    source.add_argument("--preset")
    p.add_argument("--threshold-q", type=float, action="append")
    p.add_argument("--family", action="append", choices=["lognormal", "gamma", "weibull", "gengamma"])
    p.add_argument("--link-mode", choices=["single", "two-link", "three-link"])
    p.add_argument("--covariates", type=_covariates)
    p.add_argument("--include-censored", action="store_true", default=None)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    return parser


def _run(args) -> dict:
    overrides = {
        "threshold_qs": args.threshold_q,
        "families": args.family,
        "link_mode": args.link_mode,
        "covariates": args.covariates,
        "include_censored": args.include_censored,
        "seed": args.seed,
        "jobs": args.jobs,
        "out": args.out,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return runs.run_pipeline(preset=args.preset, config_path=args.config, overrides=overrides)


def dispatch(args) -> dict:
    match args.command:
        case "simulate":
            return events.simulate_days(
                args.out, days=args.days, seed=args.seed,
                day_start_ms=args.day_start_ms, day_end_ms=args.day_end_ms, preset=args.preset,
            )
        case "replay":
            return events.replay_events(
                args.events, args.out, measure=args.measure, notional=args.notional, tick_size=args.tick_size,
            )
        case "extract-ted":
            return ted.extract_ted(
                args.out, events_path=args.events, series_path=args.series, index_path=args.index,
                threshold_q=args.threshold_q, threshold=args.threshold, measure=args.measure,
                notional=args.notional, window_start_ms=args.window_start_ms, window_end_ms=args.window_end_ms,
            )
        case "fit":
            return models.fit_model(
                args.ted, family=args.family, link_mode=args.link_mode, covariates=args.covariates,
                include_censored=args.include_censored, out_path=args.out,
            )
        case "select":
            return models.select_subsets(
                args.ted, args.out, covariates=args.covariates, include_censored=args.include_censored,
            )
        case "quantile-surface":
            return models.quantile_surface(
                args.model, args.ted, args.vary, levels=args.u, points=args.points,
                allow_extrapolation=args.allow_extrapolation, out_path=args.out,
            )
        case "report":
            return runs.report(args.out, link_mode=args.link_mode)
        case "run":
            return _run(args)
    raise ValueError(f"unknown command {args.command}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    result = dispatch(args)
    print(json.dumps(result, indent=2, sort_keys=True, default=str))
    if "error" in result:
        logger.error(result["error"])
        return 1
    if args.command == "run" and result.get("errors"):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
