"""Model tools: distributional fits, subset search and quantile surfaces."""

from pathlib import Path

import numpy as np

from .. import artifacts
from ..fit import FittedModel, fit_loglinear, fit_ml, unit_change_effects, wald_tests
from ..quantile import baseline_covariates, default_grid, quantile_surface as _surface
from ..selection import aggregate_daily, best_subsets, fixed_subset
from .events import TOOL_ERRORS


def _design(ted_path: str, covariates: list[str] | str, include_censored: bool):
    table = artifacts.read_ted(ted_path)
    if covariates == "full":
        names = list(table.names)
    elif covariates == "fixed_subset":
        names = list(fixed_subset())
    else:
        names = list(covariates)
    X, tau = table.design(names, include_censored)
    return X, tau, names


def fit_model(
    ted_path: str,
    family: str = "lognormal",
    link_mode: str = "single",
    covariates: list[str] | str = "fixed_subset",
    include_censored: bool = False,
    out_path: str | None = None,
) -> dict:
    """Fit a duration family by maximum likelihood to a TED table."""
    try:
        X, tau, names = _design(ted_path, covariates, include_censored)
        model = fit_ml(family, X, tau, link_mode=link_mode, names=names)
        if out_path:
            model.save(out_path)
        result = model.to_dict()
        if model.converged:
            result["tests"] = [t._asdict() for t in wald_tests(model)]
            result["effects_at_median"] = [
                e._asdict() for e in unit_change_effects(model, baseline_covariates(X))
            ]
        return result
    except TOOL_ERRORS as e:
        return {"error": str(e)}


def select_subsets(
    ted_paths: list[str],
    out_dir: str,
    covariates: list[str] | str = "full",
    include_censored: bool = False,
) -> dict:
    """Best covariate subset of every size per TED table, plus cross-day heatmaps."""
    try:
        out = Path(out_dir)
        day_subsets, full_models, files = [], [], []
        names: list[str] = []
        for i, path in enumerate(ted_paths):
            X, tau, names = _design(path, covariates, include_censored)
            subsets = best_subsets(X, np.log(tau), names)
            day_subsets.append(subsets)
            full_models.append(fit_loglinear(X, tau, names))
            target = out / f"day{i:02d}_subsets.json"
            artifacts.write_json({"source": path, "subsets": [s.to_dict() for s in subsets]}, target)
            files.append(str(target))
        if not day_subsets:
            return {"error": "No TED tables given"}
        summary = aggregate_daily(day_subsets, full_models, names)
        files.append(str(artifacts.write_frame_table(summary.inclusion, out / "heatmap_inclusion.csv", "subset_size")))
        files.append(str(artifacts.write_frame_table(
            summary.significance, out / "heatmap_significance.csv", "subset_size")))
        files.append(str(artifacts.write_csv(summary.signs, out / "sign_table.csv")))
        return {"days": len(day_subsets), "covariates": names, "files": files}
    except TOOL_ERRORS as e:
        return {"error": str(e)}


def quantile_surface(
    model_path: str,
    ted_path: str,
    vary: list[str],
    levels: list[float] | None = None,
    points: int = 20,
    allow_extrapolation: bool = False,
    out_path: str | None = None,
) -> dict:
    """Conditional duration quantiles over one or two covariates, others at their medians."""
    try:
        model = FittedModel.load(model_path)
        X, _, names = _design(ted_path, list(model.covariates), include_censored=False)
        levels = levels or [0.5, 0.9]
        for name in vary:
            if name not in names:
                return {"error": f"Model has no covariate '{name}'"}
        grids = [default_grid(X, names.index(name), points) for name in vary]
        grid = _surface(model, vary, grids, levels, X=X, allow_extrapolation=allow_extrapolation)
        frame = grid.to_frame()
        if out_path:
            artifacts.write_surface(frame, out_path)
        return {
            "vary": list(vary),
            "levels": list(levels),
            "baseline": dict(zip(names, grid.baseline.tolist())),
            "rows": len(frame),
            "min_ms": float(frame["quantile_ms"].min()),
            "max_ms": float(frame["quantile_ms"].max()),
            "surface": out_path,
        }
    except TOOL_ERRORS as e:
        return {"error": str(e)}
