"""Best-subset regression on ln(tau) and its cross-day aggregation."""

from dataclasses import dataclass

import numpy as np
import pandas as pd
from loguru import logger
from scipy import linalg

from .errors import SelectionError
from .fit import FittedModel, fit_loglinear, wald_tests
from .ted import COVARIATE_NAMES

MAX_COVARIATES = 30
FIXED_SUBSET = ("prevTEDavg", "spreads", "prevexceed", "mobuy", "mosell", "ask", "bid", "lask", "lbid")


@dataclass(frozen=True)
class SubsetResult:
    size: int
    indices: tuple[int, ...]
    names: tuple[str, ...]
    rss: float
    r2: float
    adj_r2: float
    significant: tuple[bool, ...]

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "indices": list(self.indices),
            "names": list(self.names),
            "rss": self.rss,
            "r2": self.r2,
            "adj_r2": self.adj_r2,
            "significant": list(self.significant),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SubsetResult":
        return cls(
            size=int(data["size"]),
            indices=tuple(data["indices"]),
            names=tuple(data["names"]),
            rss=float(data["rss"]),
            r2=float(data["r2"]),
            adj_r2=float(data["adj_r2"]),
            significant=tuple(bool(s) for s in data["significant"]),
        )


class _CrossProducts:
    """RSS of any subset from centred cross-products: TSS - b_S' A_SS^-1 b_S."""

    def __init__(self, X: np.ndarray, y: np.ndarray):
        Xc = X - X.mean(axis=0)
        yc = y - y.mean()
        self.A = Xc.T @ Xc
        self.b = Xc.T @ yc
        self.tss = float(yc @ yc)
        self.evaluated = 0

    def rss(self, subset: tuple[int, ...]) -> float:
        self.evaluated += 1
        idx = list(subset)
        A, b = self.A[np.ix_(idx, idx)], self.b[idx]
        try:
            coef = linalg.solve(A, b, assume_a="pos")
        except (linalg.LinAlgError, ValueError):
            coef = np.linalg.lstsq(A, b, rcond=None)[0]
        return max(self.tss - float(b @ coef), 0.0)


def _search(cp: _CrossProducts, order: list[int]) -> list[tuple[int, ...] | None]:
    """Branch and bound over subsets of `order`; returns the best subset per size.

    A node fixes an included set F and leaves the remaining variables U open.
    Every subset in its subtree has RSS >= RSS(F + U), so the node is cut when
    that bound exceeds the incumbent for every size the subtree can reach.
    """
    p = len(order)
    eps = 1e-10 * max(cp.tss, 1e-300)
    best_rss = [np.inf] * (p + 1)
    best_set: list[tuple[int, ...] | None] = [None] * (p + 1)

    def consider(subset: tuple[int, ...]) -> float:
        r = cp.rss(subset)
        v = len(subset)
        key = tuple(sorted(subset))
        if r < best_rss[v] - eps or (abs(r - best_rss[v]) <= eps and key < best_set[v]):
            best_rss[v], best_set[v] = r, key
        return r

    root = tuple(order)
    stack = [((), root, consider(root))]
    while stack:
        included, free, bound = stack.pop()
        if not free:
            continue
        lo, hi = max(len(included), 1), len(included) + len(free)
        if all(bound > best_rss[v] + eps for v in range(lo, hi + 1)):
            continue
        head, rest = free[0], free[1:]
        # the include branch keeps the same F + U, the exclude branch drops head
        if included or rest:
            stack.append((included, rest, consider(included + rest)))
        stack.append((included + (head,), rest, bound))
    return best_set


def best_subsets(X, log_tau, names=None) -> list[SubsetResult]:
    """RSS-optimal covariate subset of every size 1..p for OLS on ln(tau)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(log_tau, dtype=np.float64).ravel()
    n, p = X.shape
    if p > MAX_COVARIATES:
        raise SelectionError(f"best-subset search supports at most {MAX_COVARIATES} covariates, got {p}")
    if p == 0:
        raise SelectionError("no covariates to select from")
    if n <= p + 1:
        raise SelectionError(f"need more observations ({n}) than covariates + 1 ({p + 1})")
    names = tuple(names) if names is not None else tuple(f"x{j + 1}" for j in range(p))

    cp = _CrossProducts(X, y)
    # visiting strong covariates first makes the exclusion bounds bite early
    full = fit_loglinear(X, np.exp(y), names)
    strength = np.abs(full.coefs["mu"][1:] / full.ses["mu"][1:])
    order = sorted(range(p), key=lambda j: (-np.nan_to_num(strength[j], nan=-1.0), j))
    best = _search(cp, order)
    logger.debug("best subsets: {} RSS evaluations for p={}", cp.evaluated, p)

    tss = cp.tss
    out = []
    for v in range(1, p + 1):
        subset = best[v]
        rss = cp.rss(subset)
        r2 = 1.0 - rss / tss if tss > 0 else 0.0
        refit = fit_loglinear(X[:, list(subset)], np.exp(y), [names[j] for j in subset])
        flags = tuple(t.significant for t in wald_tests(refit) if t.block == "mu" and t.name != "(intercept)")
        out.append(SubsetResult(
            size=v,
            indices=subset,
            names=tuple(names[j] for j in subset),
            rss=rss,
            r2=r2,
            adj_r2=1.0 - (1.0 - r2) * (n - 1) / (n - v - 1),
            significant=flags,
        ))
    return out


def fixed_subset() -> tuple[str, ...]:
    """The parsimonious covariate set used for the distributional fits."""
    return FIXED_SUBSET


def fixed_subset_indices(names=COVARIATE_NAMES) -> tuple[int, ...]:
    names = list(names)
    return tuple(names.index(name) for name in FIXED_SUBSET)


@dataclass(frozen=True)
class SelectionSummary:
    inclusion: pd.DataFrame
    significance: pd.DataFrame
    signs: pd.DataFrame
    n_days: int


def aggregate_daily(
    day_subsets: list[list[SubsetResult]],
    full_models: list[FittedModel],
    names=COVARIATE_NAMES,
) -> SelectionSummary:
    """Cross-day inclusion and significance frequencies per subset size, plus a sign table.

    Rows of the frequency matrices are subset sizes M1..Mp and columns are
    covariates. The sign table gives, per covariate, the percentage of daily
    full-model fits where it is significant and where its coefficient is
    positive.
    """
    if not day_subsets:
        raise SelectionError("aggregation needs at least one day")
    names = list(names)
    p = len(names)
    inclusion = np.zeros((p, p))
    significance = np.zeros((p, p))
    for subsets in day_subsets:
        for result in subsets:
            row = result.size - 1
            for name, flag in zip(result.names, result.significant):
                col = names.index(name)
                inclusion[row, col] += 1
                significance[row, col] += flag
    n_days = len(day_subsets)
    rows = [f"M{v}" for v in range(1, p + 1)]

    sig_pct = np.zeros(p)
    pos_pct = np.zeros(p)
    for model in full_models:
        tests = {t.name: t for t in wald_tests(model) if t.block == "mu"}
        for j, name in enumerate(names):
            test = tests.get(name)
            if test is None or not test.testable:
                continue
            sig_pct[j] += test.significant
            pos_pct[j] += test.estimate > 0
    n_models = max(len(full_models), 1)
    signs = pd.DataFrame({
        "covariate": names,
        "pct_significant": 100.0 * sig_pct / n_models,
        "pct_positive": 100.0 * pos_pct / n_models,
    })
    return SelectionSummary(
        inclusion=pd.DataFrame(inclusion / n_days, index=rows, columns=names),
        significance=pd.DataFrame(significance / n_days, index=rows, columns=names),
        signs=signs,
        n_days=n_days,
    )
