from itertools import combinations

import numpy as np
import pytest
from scipy import linalg

from lobres.errors import SelectionError
from lobres.fit import fit_loglinear, wald_tests
from lobres.selection import (
    MAX_COVARIATES,
    aggregate_daily,
    best_subsets,
    fixed_subset,
    fixed_subset_indices,
)
from lobres.ted import COVARIATE_NAMES


def _rss(X, y, subset):
    D = np.column_stack([np.ones(len(y)), X[:, list(subset)]])
    resid = y - D @ np.linalg.lstsq(D, y, rcond=None)[0]
    return float(resid @ resid)


def _correlated(rng, n, p):
    base = rng.normal(size=(n, p))
    mix = np.eye(p) + 0.4 * rng.normal(size=(p, p))
    return base @ mix


# ============================================
# Best subsets
# ============================================

def test_orthogonal_design_picks_largest_effects(rng):
    X = linalg.hadamard(16)[:, 1:7].astype(float)
    beta = np.array([0.5, -2.5, 2.0, 3.0, -1.0, 1.5])
    y = 0.2 + X @ beta + 0.01 * rng.normal(size=16)
    order = np.argsort(-np.abs(beta))
    for result in best_subsets(X, y):
        assert result.indices == tuple(sorted(order[: result.size].tolist()))


def test_single_covariate(rng):
    X = rng.normal(size=(20, 1))
    y = 1.0 + 0.5 * X[:, 0] + rng.normal(size=20)
    (result,) = best_subsets(X, y, names=["spreads"])
    assert result.indices == (0,)
    assert result.names == ("spreads",)
    assert result.rss == pytest.approx(_rss(X, y, (0,)), rel=1e-10)


def test_matches_exhaustive_search(rng):
    n, p = 60, 8
    X = _correlated(rng, n, p)
    y = X @ np.array([0.8, 0.0, -0.5, 0.3, 0.0, 0.0, 0.2, -0.1]) + rng.normal(size=n)
    results = best_subsets(X, y)
    assert [r.size for r in results] == list(range(1, p + 1))
    for result in results:
        scored = [(_rss(X, y, s), s) for s in combinations(range(p), result.size)]
        best_rss, best_set = min(scored)
        assert result.rss == pytest.approx(best_rss, rel=1e-9)
        assert result.indices == best_set


def test_fit_statistics_consistent(rng):
    n, p = 80, 6
    X = _correlated(rng, n, p)
    y = X[:, 0] - 0.5 * X[:, 3] + rng.normal(size=n)
    results = best_subsets(X, y)
    r2 = [r.r2 for r in results]
    assert all(a <= b + 1e-12 for a, b in zip(r2, r2[1:]))
    for result in results:
        assert result.adj_r2 == pytest.approx(1 - (1 - result.r2) * (n - 1) / (n - result.size - 1))
        refit = fit_loglinear(X[:, list(result.indices)], np.exp(y))
        flags = tuple(t.significant for t in wald_tests(refit) if t.name != "(intercept)" and t.block == "mu")
        assert result.significant == flags


def test_search_limits(rng):
    with pytest.raises(SelectionError):
        best_subsets(rng.normal(size=(100, MAX_COVARIATES + 1)), rng.normal(size=100))
    with pytest.raises(SelectionError):
        best_subsets(rng.normal(size=(5, 4)), rng.normal(size=5))
    with pytest.raises(SelectionError):
        best_subsets(np.zeros((10, 0)), rng.normal(size=10))


def test_subset_result_round_trip(rng):
    X = rng.normal(size=(30, 3))
    result = best_subsets(X, X[:, 1] + rng.normal(size=30))[0]
    assert type(result).from_dict(result.to_dict()) == result


# ============================================
# Fixed subset
# ============================================

def test_fixed_subset_is_part_of_the_covariates():
    names = fixed_subset()
    assert len(names) == len(set(names)) == 9
    assert set(names) <= set(COVARIATE_NAMES)
    assert [COVARIATE_NAMES[j] for j in fixed_subset_indices()] == list(names)


# ============================================
# Cross-day aggregation
# ============================================

def test_aggregate_daily(rng):
    names = ["a", "b", "c", "d"]
    days, full = [], []
    for _ in range(3):
        X = rng.normal(size=(120, 4))
        y = 0.9 * X[:, 0] - 0.6 * X[:, 2] + rng.normal(size=120)
        days.append(best_subsets(X, y, names=names))
        full.append(fit_loglinear(X, np.exp(y), names))
    summary = aggregate_daily(days, full, names=names)
    assert summary.n_days == 3
    assert list(summary.inclusion.index) == ["M1", "M2", "M3", "M4"]
    for v in range(1, 5):
        assert summary.inclusion.loc[f"M{v}"].sum() == pytest.approx(v)
    assert (summary.significance.values <= summary.inclusion.values + 1e-12).all()
    assert summary.inclusion.loc["M4"].tolist() == [1.0, 1.0, 1.0, 1.0]
    assert summary.inclusion.loc["M1", "a"] == 1.0

    signs = summary.signs.set_index("covariate")
    assert signs.loc["a", "pct_significant"] == 100.0
    assert signs.loc["a", "pct_positive"] == 100.0
    assert signs.loc["c", "pct_positive"] == 0.0
    assert ((signs.values >= 0) & (signs.values <= 100)).all()


def test_aggregate_needs_days():
    with pytest.raises(SelectionError):
        aggregate_daily([], [])
