"""Batch runs: per-day extraction and fitting, then cross-day reports.

Output layout under `config.out`:

    dayNN/                      events, index activity, series, occupancy
    q{q}/dayNN/ted.csv          one group per threshold level
    q{q}/dayNN/models/          {family}_{link_mode}.json
    q{q}/dayNN/selection/       subsets.json, full_ols.json
    q{q}/dayNN/surfaces/        {family}_{link_mode}.csv
    q{q}/*.csv                  cross-day tables
    sample/...                  same as q{q}/ for synthetic duration samples
    run_report.json, errors.json, occupancy_profile.csv
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from . import artifacts
from .config import DAY_CLOSE_MS, DAY_OPEN_MS, RunConfig
from .errors import FitError, LobresError, SchemaError
from .fit import FittedModel, fit_loglinear, fit_ml
from .liquidity import daily_threshold, occupancy_profile, quintile_occupancy, spread_series, xlm_series
from .lob_core import parse_events, replay, write_events
from .quantile import default_grid, quantile_surface
from .selection import MAX_COVARIATES, SubsetResult, aggregate_daily, best_subsets, fixed_subset
from .synth import FlowConfig, TedGenConfig, gen_day, gen_index_activity, gen_ted_sample
from .ted import COVARIATE_NAMES, Exceedance, build_covariates, extract_teds

SAMPLE_GROUP = "sample"


@dataclass(frozen=True)
class DayTask:
    index: int
    label: str
    events_path: str | None = None
    index_path: str | None = None


def plan_days(config: RunConfig) -> list[DayTask]:
    if config.synth is not None:
        return [DayTask(d, f"day{d:02d}") for d in range(FlowConfig(**config.synth).days)]
    if config.ted_synth is not None:
        return [DayTask(d, f"day{d:02d}") for d in range(TedGenConfig(**config.ted_synth).days)]
    index_paths = config.index_inputs or [None] * len(config.inputs)
    return [
        DayTask(d, f"day{d:02d}", path, index_path)
        for d, (path, index_path) in enumerate(zip(config.inputs, index_paths))
    ]


def group_name(q: float) -> str:
    return f"q{q:g}"


def covariate_set(config: RunConfig, available: tuple[str, ...]) -> list[str]:
    if config.covariates == "full":
        return list(available)
    names = list(fixed_subset()) if config.covariates == "fixed_subset" else list(config.covariates)
    for name in names:
        if name not in available:
            raise SchemaError(f"covariate '{name}' not in design", column=name)
    return names


# ============================================
# Per-day work
# ============================================

def fit_day(
    config: RunConfig, X: np.ndarray, tau: np.ndarray, names: tuple[str, ...], day_dir: Path,
    fallback_full: bool = False,
) -> dict:
    """Subset search, family fits and quantile surfaces for one day's design.

    A family that cannot be fitted is recorded in the summary and skipped.
    """
    if fallback_full and config.covariates == "fixed_subset":
        selected = list(names)
    else:
        selected = covariate_set(config, names)
    cols = [names.index(n) for n in selected]
    Xs = X[:, cols]
    summary: dict = {"records": int(len(tau)), "fits": {}, "failed": {}}

    if config.subset_search and len(names) <= MAX_COVARIATES and len(tau) > len(names) + 1:
        subsets = best_subsets(X, np.log(tau), names)
        artifacts.write_json({"subsets": [s.to_dict() for s in subsets]}, day_dir / "selection" / "subsets.json")
        fit_loglinear(X, tau, names).save(day_dir / "selection" / "full_ols.json")

    modes = [config.link_mode] if config.link_mode == "single" else ["single", config.link_mode]
    for family in config.families:
        for mode in modes:
            key = f"{family}_{mode}"
            try:
                model = fit_ml(family, Xs, tau, link_mode=mode, names=selected)
            except FitError as e:
                logger.warning("{} {}: {}", day_dir.name, key, e)
                summary["failed"][key] = str(e)
                continue
            model.save(day_dir / "models" / f"{key}.json")
            summary["fits"][key] = {
                "converged": model.converged,
                "deviance": model.deviance,
                "pseudo_r2": model.pseudo_r2,
            }
            if mode != config.link_mode or not model.converged:
                continue
            surface_names = [n for n in config.surface_covariates if n in selected][:2]
            if not surface_names:
                logger.info("{}: no surface covariates in the fitted set", day_dir.name)
                continue
            grids = [default_grid(Xs, selected.index(n), config.surface_points) for n in surface_names]
            try:
                grid = quantile_surface(model, surface_names, grids, config.quantile_levels, X=Xs)
            except LobresError as e:
                logger.warning("{} {} surface: {}", day_dir.name, key, e)
                continue
            artifacts.write_surface(grid.to_frame(), day_dir / "surfaces" / f"{key}.csv")
    return summary


def _day_from_events(config: RunConfig, task: DayTask, out: Path) -> dict:
    raw_dir = out / task.label
    if config.synth is not None:
        flow = FlowConfig(**{**config.synth, "seed": config.seed})
        events = gen_day(flow, task.index)
        index_times = gen_index_activity(flow, task.index)
        write_events(events, _mkdir(raw_dir) / "events.csv")
        artifacts.write_index_activity(index_times, raw_dir / "index.csv")
    else:
        events = parse_events(task.events_path, strict=config.strict)
        index_times = artifacts.read_index_activity(task.index_path) if task.index_path else None

    applied = []

    def snapshots():
        for e, book in replay(events, strict=config.strict):
            applied.append(e)
            yield book

    window = (config.window_start_ms, config.window_end_ms)
    trading = (DAY_OPEN_MS, DAY_CLOSE_MS)
    if config.measure == "spread":
        series = spread_series(snapshots(), trading)
    else:
        series = xlm_series(snapshots(), config.notional, config.tick_size, trading)
    if len(series) == 0:
        raise LobresError(f"{task.label}: liquidity series is empty")
    artifacts.write_series(series, _mkdir(raw_dir) / "series.csv")
    occupancy = quintile_occupancy(series, window)
    artifacts.write_occupancy(occupancy, raw_dir / "occupancy.csv")

    summary: dict = {"day": task.label, "ok": True, "occupancy": occupancy, "groups": {}}
    for q in config.threshold_qs:
        day_dir = out / group_name(q) / task.label
        threshold = daily_threshold(series, q)
        exceedances = extract_teds(series, threshold, window)
        design = build_covariates(exceedances, applied, index_times, window_start=window[0])
        artifacts.write_ted(exceedances, design, day_dir / "ted.csv")
        censored = np.array([x.censored for x in exceedances], dtype=bool)
        tau = np.array([x.duration for x in exceedances], dtype=np.float64)
        keep = np.ones(len(tau), bool) if config.include_censored else ~censored
        group = fit_day(config, design.values[keep], tau[keep], design.names, day_dir)
        group.update({"threshold": threshold.level, "censored": int(censored.sum())})
        summary["groups"][group_name(q)] = group
    return summary


def _day_from_sample(config: RunConfig, task: DayTask, out: Path) -> dict:
    gen = TedGenConfig(**{**config.ted_synth, "seed": config.seed})
    sample = gen_ted_sample(gen, task.index)
    day_dir = out / SAMPLE_GROUP / task.label
    artifacts.write_json(sample.truth, day_dir / "truth.json")
    starts = config.window_start_ms + np.concatenate(([0], np.cumsum(np.round(sample.tau))[:-1]))
    exceedances = [Exceedance(int(s), max(int(round(t)), 1), False) for s, t in zip(starts, sample.tau)]
    _write_sample_ted(exceedances, sample.X, sample.names, day_dir / "ted.csv")
    group = fit_day(config, sample.X, sample.tau, sample.names, day_dir, fallback_full=True)
    return {"day": task.label, "ok": True, "groups": {SAMPLE_GROUP: group}}


def _write_sample_ted(exceedances, X, names, path):
    frame = pd.DataFrame({
        "T_ms": [x.start for x in exceedances],
        "tau_ms": [x.duration for x in exceedances],
        "censored": [0] * len(exceedances),
        "trigger": ["cancel_or_other"] * len(exceedances),
    })
    frame = pd.concat([frame, pd.DataFrame(X, columns=list(names))], axis=1)
    artifacts.write_csv(frame, path)


def _mkdir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def process_day(config: RunConfig, task: DayTask) -> dict:
    """Run one day; failures are returned, not raised."""
    out = Path(config.out)
    try:
        if config.ted_synth is not None:
            return _day_from_sample(config, task, out)
        return _day_from_events(config, task, out)
    except (LobresError, ValueError, FileNotFoundError) as e:
        logger.warning("{} failed: {}", task.label, e)
        return {"day": task.label, "ok": False, "error": str(e)}


# ============================================
# Cross-day reports
# ============================================

def best_family(fits: dict[str, FittedModel]) -> str | None:
    """Lowest-deviance converged family; lognormal when gengamma failed to converge."""
    gengamma = fits.get("gengamma")
    if gengamma is not None and not gengamma.converged:
        lognormal = fits.get("lognormal")
        if lognormal is not None and lognormal.converged:
            return "lognormal"
    converged = {f: m for f, m in fits.items() if m.converged}
    if not converged:
        return None
    return min(sorted(converged), key=lambda f: converged[f].deviance)


def _five_numbers(values) -> dict:
    values = np.asarray(values, dtype=np.float64)
    values = values[np.isfinite(values)]
    if len(values) == 0:
        return {"n": 0, "min": np.nan, "q1": np.nan, "median": np.nan, "q3": np.nan, "max": np.nan}
    q = np.quantile(values, [0.0, 0.25, 0.5, 0.75, 1.0])
    return {"n": len(values), "min": q[0], "q1": q[1], "median": q[2], "q3": q[3], "max": q[4]}


def _load_group(group_dir: Path) -> dict[str, dict[str, FittedModel]]:
    days: dict[str, dict[str, FittedModel]] = {}
    for day_dir in sorted(p for p in group_dir.iterdir() if p.is_dir()):
        models_dir = day_dir / "models"
        if models_dir.is_dir():
            days[day_dir.name] = {p.stem: FittedModel.load(p) for p in sorted(models_dir.glob("*.json"))}
    return days


def report_group(group_dir: Path, link_mode: str | None = None) -> dict[str, str]:
    """Write the cross-day tables of one threshold group; returns their paths."""
    days = _load_group(group_dir)
    written: dict[str, str] = {}
    if days:
        modes = sorted({m.link_mode for models in days.values() for m in models.values()})
        main_mode = link_mode or ("single" if modes == ["single"] else next(m for m in modes if m != "single"))
        written.update(_deviance_tables(group_dir, days, main_mode))
        written.update(_r2_and_coefficients(group_dir, days))
        written.update(_link_comparison(group_dir, days))
    written.update(_selection_tables(group_dir))
    return written


def _deviance_tables(group_dir: Path, days, mode: str) -> dict[str, str]:
    rows = []
    for day, models in days.items():
        fits = {m.family: m for m in models.values() if m.link_mode == mode}
        row = {"day": day}
        for family, model in sorted(fits.items()):
            row[f"{family}_deviance"] = model.deviance
            row[f"{family}_converged"] = int(model.converged)
        row["best"] = best_family(fits) or ""
        rows.append(row)
    table = pd.DataFrame(rows)
    families = sorted({m.family for models in days.values() for m in models.values()})
    share = pd.DataFrame({
        "family": families,
        "share_lowest": [float((table["best"] == f).mean()) for f in families],
        "n_converged": [int(table.get(f"{f}_converged", pd.Series(dtype=int)).sum()) for f in families],
        "n_days": len(table),
    })
    return {
        "deviance_table": str(artifacts.write_csv(table, group_dir / "deviance_table.csv")),
        "deviance_summary": str(artifacts.write_csv(share, group_dir / "deviance_summary.csv")),
    }


def _r2_and_coefficients(group_dir: Path, days) -> dict[str, str]:
    r2: dict[str, list[float]] = {}
    coefs: dict[tuple[str, str, str], list[float]] = {}
    for models in days.values():
        for key, model in models.items():
            if not model.converged:
                continue
            r2.setdefault(key, []).append(model.pseudo_r2)
            for block in ("mu", "sigma"):
                coef = model.coefs[block]
                labels = ("(intercept)",) + model.covariates if len(coef) > 1 else ("(scalar)",)
                for label, value in zip(labels, coef):
                    coefs.setdefault((key, block, label), []).append(value)
    r2_rows = [{"model": key, **_five_numbers(v)} for key, v in sorted(r2.items())]
    coef_rows = [
        {"model": k[0], "block": k[1], "coefficient": k[2], **_five_numbers(v)}
        for k, v in sorted(coefs.items())
    ]
    return {
        "r2_summary": str(artifacts.write_csv(pd.DataFrame(r2_rows), group_dir / "r2_summary.csv")),
        "coef_summary": str(artifacts.write_csv(pd.DataFrame(coef_rows), group_dir / "coef_summary.csv")),
    }


def _link_comparison(group_dir: Path, days) -> dict[str, str]:
    medians: dict[tuple[str, str], list[float]] = {}
    for models in days.values():
        for model in models.values():
            if model.converged:
                medians.setdefault((model.family, model.link_mode), []).append(model.pseudo_r2)
    rows = [
        {"family": f, "link_mode": m, "median_pseudo_r2": float(np.median(v)), "n": len(v)}
        for (f, m), v in sorted(medians.items())
    ]
    path = artifacts.write_csv(pd.DataFrame(rows), group_dir / "link_comparison.csv")
    return {"link_comparison": str(path)}


def _selection_tables(group_dir: Path) -> dict[str, str]:
    day_subsets, full_models = [], []
    names = None
    for day_dir in sorted(p for p in group_dir.iterdir() if p.is_dir()):
        sel = day_dir / "selection"
        if not (sel / "subsets.json").exists():
            continue
        data = artifacts.read_json(sel / "subsets.json")
        day_subsets.append([SubsetResult.from_dict(s) for s in data["subsets"]])
        full = FittedModel.load(sel / "full_ols.json")
        full_models.append(full)
        names = full.covariates
    if not day_subsets:
        return {}
    summary = aggregate_daily(day_subsets, full_models, names or COVARIATE_NAMES)
    return {
        "heatmap_inclusion": str(artifacts.write_frame_table(
            summary.inclusion, group_dir / "heatmap_inclusion.csv", "subset_size")),
        "heatmap_significance": str(artifacts.write_frame_table(
            summary.significance, group_dir / "heatmap_significance.csv", "subset_size")),
        "sign_table": str(artifacts.write_csv(summary.signs, group_dir / "sign_table.csv")),
    }


def write_report(out_dir: str | Path, link_mode: str | None = None) -> dict[str, dict[str, str]]:
    """Cross-day tables for every threshold group found under `out_dir`."""
    out_dir = Path(out_dir)
    if not out_dir.is_dir():
        raise FileNotFoundError(f"output directory not found: {out_dir}")
    groups = sorted(p for p in out_dir.iterdir() if p.is_dir() and (p.name.startswith("q") or p.name == SAMPLE_GROUP))
    return {g.name: report_group(g, link_mode) for g in groups}


# ============================================
# Entry point
# ============================================

def run_pipeline(config: RunConfig) -> dict:
    """Run every day, then the cross-day reports; returns the run report."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    tasks = plan_days(config)
    logger.info("running {} day(s) with {} worker(s)", len(tasks), config.jobs)
    if config.jobs == 1 or len(tasks) == 1:
        results = [process_day(config, task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(process_day, [config] * len(tasks), tasks))

    errors = [{"day": r["day"], "error": r["error"]} for r in results if not r["ok"]]
    artifacts.write_json({"errors": errors}, out / "errors.json")

    occupancies = [r.pop("occupancy") for r in results if r["ok"] and "occupancy" in r]
    if occupancies:
        edges, fraction = occupancy_profile(occupancies, config.occupancy_bucket_ms,
                                            (config.window_start_ms, config.window_end_ms))
        artifacts.write_csv(pd.DataFrame({"bucket_start_ms": edges, "fraction": fraction}),
                            out / "occupancy_profile.csv")

    tables = write_report(out, config.link_mode)
    report = {
        "config": config.model_dump(mode="json"),
        "days": results,
        "errors": len(errors),
        "tables": {g: {k: str(Path(v).relative_to(out)) for k, v in t.items()} for g, t in tables.items()},
    }
    artifacts.write_json(report, out / "run_report.json")
    logger.info("run finished: {} day(s), {} error(s)", len(results), len(errors))
    return report
