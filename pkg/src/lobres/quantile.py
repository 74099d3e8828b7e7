"""Conditional duration quantiles over one or two varying covariates."""

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import FitError
from .fit import FittedModel


@dataclass(frozen=True)
class QuantileGrid:
    names: tuple[str, ...]
    grids: tuple[np.ndarray, ...]
    baseline: np.ndarray
    levels: np.ndarray
    values: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        """Long format: cov1[, cov2], u, quantile_ms."""
        mesh = np.meshgrid(*self.grids, self.levels, indexing="ij")
        columns = {f"cov{i + 1}": m.ravel() for i, m in enumerate(mesh[:-1])}
        columns["u"] = mesh[-1].ravel()
        columns["quantile_ms"] = self.values.ravel()
        return pd.DataFrame(columns)


def baseline_covariates(X) -> np.ndarray:
    """Componentwise medians of a design matrix."""
    return np.median(np.asarray(X, dtype=np.float64), axis=0)


def default_grid(X, column: int, points: int = 20) -> np.ndarray:
    """Evenly spaced values between the column's 1st and 99th percentiles."""
    lo, hi = np.percentile(np.asarray(X, dtype=np.float64)[:, column], [1, 99])
    return np.linspace(lo, hi, points)


def _index(model: FittedModel, name: str) -> int:
    try:
        return model.covariates.index(name)
    except ValueError:
        raise FitError(f"model has no covariate '{name}'") from None


def _check_range(grid, observed, name, allow_extrapolation):
    if observed is None or allow_extrapolation:
        return
    lo, hi = np.min(observed), np.max(observed)
    if np.min(grid) < lo or np.max(grid) > hi:
        raise FitError(f"grid for '{name}' leaves the observed range [{lo:g}, {hi:g}]")


def _evaluate(model: FittedModel, rows: np.ndarray, levels: np.ndarray) -> np.ndarray:
    dist = model.spec.dist
    mu, sigma, nu = model.params(rows)
    nu_col = nu[:, None] if nu is not None else None
    return dist.quantile(levels[None, :], mu[:, None], sigma[:, None], nu_col)


def quantile_surface(
    model: FittedModel,
    names: tuple[str, ...] | list[str],
    grids: tuple | list,
    levels,
    baseline=None,
    X=None,
    allow_extrapolation: bool = False,
) -> QuantileGrid:
    """tau-quantiles on the product grid of one or two covariates.

    The remaining covariates stay at `baseline`, by default the medians of
    `X`. With `X` given, grids outside its observed range are refused unless
    `allow_extrapolation` is set.
    """
    if not model.converged:
        raise FitError("quantiles need a converged model")
    names = tuple(names)
    if not 1 <= len(names) <= 2 or len(grids) != len(names):
        raise FitError("one or two varying covariates, each with a grid")
    levels = np.atleast_1d(np.asarray(levels, dtype=np.float64))
    grids = tuple(np.atleast_1d(np.asarray(g, dtype=np.float64)) for g in grids)
    if baseline is None:
        if X is None:
            raise FitError("either a baseline vector or a design matrix is needed")
        baseline = baseline_covariates(X)
    baseline = np.asarray(baseline, dtype=np.float64)
    columns = [_index(model, name) for name in names]
    for name, col, grid in zip(names, columns, grids):
        _check_range(grid, None if X is None else np.asarray(X)[:, col], name, allow_extrapolation)

    mesh = np.meshgrid(*grids, indexing="ij")
    rows = np.tile(baseline, (mesh[0].size, 1))
    for col, m in zip(columns, mesh):
        rows[:, col] = m.ravel()
    values = _evaluate(model, rows, levels).reshape(*(len(g) for g in grids), len(levels))
    return QuantileGrid(names, grids, baseline, levels, values)


def quantile_curve(
    model: FittedModel,
    name: str,
    grid,
    levels,
    baseline=None,
    X=None,
    allow_extrapolation: bool = False,
) -> QuantileGrid:
    return quantile_surface(model, (name,), (grid,), levels, baseline, X, allow_extrapolation)
