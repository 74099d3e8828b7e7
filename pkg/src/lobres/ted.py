"""Threshold exceedance durations and the covariates observed at each exceedance."""

from dataclasses import dataclass
from typing import Literal, NamedTuple, Sequence

import numpy as np
from pydantic import BaseModel, Field

from .config import WINDOW_END_MS, WINDOW_START_MS
from .errors import LobresError
from .liquidity import LiquiditySeries, Threshold, exceedance_intervals
from .lob_core import EventKind, LobEvent, OrderBook, Side, level_stats

Trigger = Literal["mobuy", "mosell", "cancel_or_other"]

BASE_COVARIATES = [
    "ask", "bid", "askVolume", "bidVolume", "bidModified",
    "askModified", "bidAge", "askAge", "spreads",
]
LAGGED_COVARIATES = ["l" + name for name in BASE_COVARIATES]
HISTORY_COVARIATES = ["prevexceed", "timelast", "prevTEDavg", "indact", "mobuy", "mosell"]
COVARIATE_NAMES = BASE_COVARIATES + LAGGED_COVARIATES + HISTORY_COVARIATES


class CovariateSpec(BaseModel):
    n_levels: int = Field(5, ge=1)
    w: float = Field(0.75, gt=0.0, lt=1.0)
    d: int = Field(5, ge=1)
    lag_spacing_ms: int = Field(1000, gt=0)
    recent_window_ms: int = Field(1000, gt=0)
    prev_ted_count: int = Field(5, ge=1)
    index_window_ms: int = Field(1000, gt=0)


class Exceedance(NamedTuple):
    start: int
    duration: int
    censored: bool
    source: int = -1


@dataclass(frozen=True)
class TedRecord:
    start: int
    tau: int
    censored: bool
    trigger: Trigger
    covariates: tuple[float, ...] = ()

    def __post_init__(self):
        if self.tau <= 0:
            raise LobresError(f"TED at {self.start} has non-positive duration {self.tau}")


@dataclass(frozen=True)
class DesignMatrix:
    values: np.ndarray
    names: tuple[str, ...]
    triggers: tuple[Trigger, ...]
    has_history: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]


def extract_teds(
    series: LiquiditySeries,
    threshold: Threshold | float,
    window: tuple[int, int] = (WINDOW_START_MS, WINDOW_END_MS),
) -> list[Exceedance]:
    """Exceedances of the step-valued series strictly above the threshold.

    An exceedance already running at window start begins at window start;
    one still running at window end is censored at window end.
    """
    c = threshold.level if isinstance(threshold, Threshold) else float(threshold)
    start, end = window
    lo, hi = series.trading_window
    if start < lo or end > hi:
        raise LobresError(f"window [{start}, {end}) outside trading window [{lo}, {hi}]")
    starts, durations, censored, points = exceedance_intervals(
        series.times, series.values, c, start, end
    )
    sources = series.sources[points] if series.sources is not None else np.full(len(points), -1)
    return [
        Exceedance(int(s), int(d), bool(cz), int(src))
        for s, d, cz, src in zip(starts, durations, censored, sources)
    ]


def classify_trigger(event: LobEvent | None) -> Trigger:
    """Executions against the asks are buyer-initiated, against the bids seller-initiated."""
    if event is None or event.kind != EventKind.EXECUTE:
        return "cancel_or_other"
    return "mobuy" if event.side == Side.ASK else "mosell"


def _book_row(book: OrderBook, now: int, spread: float, n_levels: int) -> list[float]:
    asks = level_stats(book, Side.ASK, n_levels, now=now)
    bids = level_stats(book, Side.BID, n_levels, now=now)
    return [
        asks.order_count, bids.order_count, asks.total_volume, bids.total_volume,
        bids.modified_count, asks.modified_count, bids.mean_age_ms, asks.mean_age_ms, spread,
    ]


def book_covariates_at(
    events: Sequence[LobEvent], instants: np.ndarray, n_levels: int = 5
) -> np.ndarray:
    """The nine book covariates at each sorted instant, after all events up to it.

    `spreads` holds the last two-sided spread seen, 0 before any.
    """
    out = np.zeros((len(instants), len(BASE_COVARIATES)))
    book = OrderBook(strict=False)
    spread = 0.0
    k = 0
    for e in events:
        while k < len(instants) and instants[k] < e.timestamp:
            out[k] = _book_row(book, int(instants[k]), spread, n_levels)
            k += 1
        if book.apply(e) and book.best_bid is not None and book.best_ask is not None:
            spread = float(book.best_ask - book.best_bid)
    for k in range(k, len(instants)):
        out[k] = _book_row(book, int(instants[k]), spread, n_levels)
    return out


def build_covariates(
    exceedances: Sequence[Exceedance],
    events: Sequence[LobEvent],
    index_times: np.ndarray | None = None,
    spec: CovariateSpec | None = None,
    window_start: int = WINDOW_START_MS,
) -> DesignMatrix:
    """Design matrix of the 24 covariates, one row per exceedance.

    `events` must be the applied event stream the series was built from, so an
    exceedance's source index names the event that pushed the series above the
    threshold. Lag instants before `window_start` are left out of the weighted
    sums.
    """
    spec = spec or CovariateSpec()
    n = len(exceedances)
    starts = np.array([x.start for x in exceedances], dtype=np.int64)
    taus = np.array([x.duration for x in exceedances], dtype=np.float64)

    lag_offsets = spec.lag_spacing_ms * np.arange(1, spec.d + 1, dtype=np.int64)
    lag_weights = spec.w ** np.arange(1, spec.d + 1)
    lag_times = starts[:, None] - lag_offsets[None, :]
    instants = np.unique(np.concatenate([starts, lag_times.ravel()]))
    base = book_covariates_at(events, instants, spec.n_levels)

    current = base[np.searchsorted(instants, starts)]
    lagged = np.zeros_like(current)
    for n_lag in range(spec.d):
        t_lag = lag_times[:, n_lag]
        available = t_lag >= window_start
        rows = base[np.searchsorted(instants, t_lag)]
        lagged += np.where(available[:, None], lag_weights[n_lag] * rows, 0.0)

    history = np.zeros((n, len(HISTORY_COVARIATES)))
    log_tau = np.log(taus) if n else taus
    index_times = np.sort(np.asarray(index_times if index_times is not None else [], dtype=np.int64))
    triggers: list[Trigger] = []
    for i, x in enumerate(exceedances):
        t = x.start
        recent = np.searchsorted(starts[:i], t - spec.recent_window_ms, side="left")
        history[i, 0] = i - recent
        history[i, 1] = t - (starts[i - 1] if i else window_start)
        priors = log_tau[max(0, i - spec.prev_ted_count):i]
        history[i, 2] = priors.mean() if len(priors) else 0.0
        history[i, 3] = np.searchsorted(index_times, t, side="left") - np.searchsorted(
            index_times, t - spec.index_window_ms, side="left"
        )
        event = events[x.source] if 0 <= x.source < len(events) else None
        trigger = classify_trigger(event)
        history[i, 4] = trigger == "mobuy"
        history[i, 5] = trigger == "mosell"
        triggers.append(trigger)

    values = np.hstack([current, lagged, history]) if n else np.zeros((0, len(COVARIATE_NAMES)))
    return DesignMatrix(
        values=values,
        names=tuple(COVARIATE_NAMES),
        triggers=tuple(triggers),
        has_history=np.arange(n) > 0,
    )


def assemble_records(exceedances: Sequence[Exceedance], design: DesignMatrix) -> list[TedRecord]:
    return [
        TedRecord(x.start, x.duration, x.censored, trig, tuple(float(v) for v in row))
        for x, trig, row in zip(exceedances, design.triggers, design.values)
    ]
