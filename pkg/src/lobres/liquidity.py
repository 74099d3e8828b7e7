"""Liquidity measures on the event clock, thresholds and top-quintile occupancy.

A `LiquiditySeries` is step-valued: each point's value holds until the next
point. Only the last book state of a millisecond is kept, and each point
records the position of that state in the snapshot stream so the event that
produced it can be recovered later.
"""

from dataclasses import dataclass, field
from typing import Iterable, Literal

import numpy as np
from loguru import logger

from .config import DAY_CLOSE_MS, DAY_OPEN_MS, settings
from .errors import LobresError
from .lob_core import BookState, OrderBook, Side

MeasureKind = Literal["spread", "xlm"]


@dataclass(frozen=True)
class LiquiditySeries:
    measure_kind: MeasureKind
    times: np.ndarray
    values: np.ndarray
    trading_window: tuple[int, int] = (DAY_OPEN_MS, DAY_CLOSE_MS)
    sources: np.ndarray | None = None
    notional: float | None = None
    skipped: int = 0

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if times.shape != values.shape or times.ndim != 1:
            raise LobresError("times and values must be 1-d arrays of equal length")
        if len(times) > 1 and np.any(np.diff(times) <= 0):
            raise LobresError("series times must be strictly increasing")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise LobresError("series values must be finite and non-negative")
        start, end = self.trading_window
        if len(times) and (times[0] < start or times[-1] > end):
            raise LobresError(f"series points outside trading window [{start}, {end}]")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if self.sources is not None:
            object.__setattr__(self, "sources", np.asarray(self.sources, dtype=np.int64))

    def __len__(self) -> int:
        return len(self.times)

    def value_at(self, t: int) -> float | None:
        """Step value at instant t, None before the first point."""
        j = np.searchsorted(self.times, t, side="right") - 1
        return None if j < 0 else float(self.values[j])


@dataclass(frozen=True)
class Threshold:
    level: float
    kind: Literal["daily_quantile", "fixed"] = "fixed"
    q: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.level):
            raise LobresError("threshold level must be finite")
        if self.kind == "daily_quantile" and not (self.q is not None and 0.0 < self.q < 1.0):
            raise LobresError(f"quantile level {self.q} outside (0, 1)")

    @classmethod
    def fixed(cls, value: float) -> "Threshold":
        return cls(float(value), "fixed")


@dataclass
class _SeriesBuilder:
    """Collects (time, value, source) keeping one point per millisecond."""

    window: tuple[int, int]
    times: list[int] = field(default_factory=list)
    values: list[float] = field(default_factory=list)
    sources: list[int] = field(default_factory=list)

    def push(self, t: int, value: float | None, source: int) -> None:
        if not self.window[0] <= t <= self.window[1]:
            return
        if self.times and self.times[-1] == t:
            self.times.pop()
            self.values.pop()
            self.sources.pop()
        if value is not None:
            self.times.append(t)
            self.values.append(value)
            self.sources.append(source)


def spread_series(
    snapshots: Iterable[BookState | OrderBook],
    trading_window: tuple[int, int] = (DAY_OPEN_MS, DAY_CLOSE_MS),
) -> LiquiditySeries:
    """Best ask minus best bid in ticks at every event time with a two-sided book."""
    builder = _SeriesBuilder(trading_window)
    for i, book in enumerate(snapshots):
        bid, ask = book.best_bid, book.best_ask
        value = float(ask - bid) if bid is not None and ask is not None else None
        builder.push(book.time, value, i)
    return LiquiditySeries(
        "spread", builder.times, builder.values, trading_window, np.array(builder.sources)
    )


def _buy_notional(book: BookState | OrderBook, notional: float, tick_size: float) -> float | None:
    """Shares obtained by spending `notional` on the asks, fractional last fill."""
    remaining = notional
    shares = 0.0
    for price_ticks, orders in book.levels(Side.ASK):
        price = price_ticks * tick_size
        volume = sum(o.remaining_size for o in orders)
        cost = volume * price
        if remaining <= cost:
            return shares + remaining / price
        shares += volume
        remaining -= cost
    return None


def _sell_shares(book: BookState | OrderBook, shares: float, tick_size: float) -> float | None:
    """Proceeds of selling `shares` into the bids."""
    remaining = shares
    proceeds = 0.0
    for price_ticks, orders in book.levels(Side.BID):
        price = price_ticks * tick_size
        volume = sum(o.remaining_size for o in orders)
        take = min(volume, remaining)
        proceeds += take * price
        remaining -= take
        if remaining <= 0:
            return proceeds
    return None


def round_trip_cost(
    book: BookState | OrderBook, notional: float, tick_size: float | None = None
) -> float | None:
    """Cost in basis points of buying then selling `notional`; None if depth runs out."""
    if notional <= 0:
        raise LobresError("notional must be positive")
    tick_size = settings.tick_size if tick_size is None else tick_size
    bid, ask = book.best_bid, book.best_ask
    if bid is None or ask is None:
        return None
    shares = _buy_notional(book, notional, tick_size)
    if shares is None:
        return None
    proceeds = _sell_shares(book, shares, tick_size)
    if proceeds is None:
        return None
    mid = 0.5 * (bid + ask) * tick_size
    return 1e4 * (notional - proceeds) / (shares * mid)


def xlm_series(
    snapshots: Iterable[BookState | OrderBook],
    notional: float,
    tick_size: float | None = None,
    trading_window: tuple[int, int] = (DAY_OPEN_MS, DAY_CLOSE_MS),
) -> LiquiditySeries:
    """Round-trip cost series; states without enough visible depth emit no point."""
    if notional <= 0:
        raise LobresError("notional must be positive")
    builder = _SeriesBuilder(trading_window)
    skipped = 0
    for i, book in enumerate(snapshots):
        value = round_trip_cost(book, notional, tick_size)
        if value is None and book.best_bid is not None and book.best_ask is not None:
            skipped += 1
        builder.push(book.time, value, i)
    if skipped:
        logger.warning("xlm: {} book states lacked depth for notional {}", skipped, notional)
    return LiquiditySeries(
        "xlm", builder.times, builder.values, trading_window,
        np.array(builder.sources), notional=notional, skipped=skipped,
    )


def daily_threshold(series: LiquiditySeries, q: float) -> Threshold:
    """Empirical q-quantile of the series values (linear interpolation)."""
    if len(series) == 0:
        raise LobresError("cannot take a threshold of an empty series")
    if not 0.0 < q < 1.0:
        raise LobresError(f"quantile level {q} outside (0, 1)")
    level = float(np.quantile(series.values, q, method="linear"))
    return Threshold(level, "daily_quantile", q)


def exceedance_intervals(
    times: np.ndarray, values: np.ndarray, c: float, start: int, end: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Maximal intervals in [start, end) where the step function is strictly above c.

    Returns (starts, durations, censored, point_index). The point index is the
    series point that carries the value at each interval start; before the
    first point the function counts as not exceeding.
    """
    if start >= end:
        raise LobresError("window start must precede window end")
    j0 = int(np.searchsorted(times, start, side="right")) - 1
    lo = j0 + 1
    hi = int(np.searchsorted(times, end, side="left"))
    inner_t = times[lo:hi]
    inner_above = values[lo:hi] > c

    init_above = j0 >= 0 and bool(values[j0] > c)
    state_t = np.concatenate(([start], inner_t)).astype(np.int64)
    state = np.concatenate(([init_above], inner_above))
    state_idx = np.concatenate(([j0], np.arange(lo, hi)))

    prev = np.concatenate(([False], state[:-1]))
    rises = np.flatnonzero(state & ~prev)
    falls = np.flatnonzero(~state & prev)

    starts = state_t[rises]
    ends = np.full(len(rises), end, dtype=np.int64)
    ends[: len(falls)] = state_t[falls]
    censored = np.zeros(len(rises), dtype=bool)
    if len(rises) > len(falls):
        censored[-1] = True
    return starts, ends - starts, censored, state_idx[rises]


def quintile_occupancy(
    series: LiquiditySeries, window: tuple[int, int] | None = None
) -> list[tuple[int, int]]:
    """Intervals [start, end) where the series is above its own 0.8-quantile."""
    if len(series) == 0:
        raise LobresError("cannot compute occupancy of an empty series")
    start, end = window or (int(series.times[0]), series.trading_window[1])
    c = daily_threshold(series, 0.8).level
    starts, durations, _, _ = exceedance_intervals(series.times, series.values, c, start, end)
    return [(int(s), int(s + d)) for s, d in zip(starts, durations)]


def occupancy_profile(
    intervals_by_day: list[list[tuple[int, int]]],
    bucket_ms: int,
    window: tuple[int, int] = (DAY_OPEN_MS, DAY_CLOSE_MS),
) -> tuple[np.ndarray, np.ndarray]:
    """Average over days of the share of each intraday bucket spent in the top quintile."""
    if bucket_ms <= 0:
        raise LobresError("bucket_ms must be positive")
    if not intervals_by_day:
        raise LobresError("occupancy profile needs at least one day")
    edges = np.arange(window[0], window[1], bucket_ms, dtype=np.int64)
    bucket_end = np.minimum(edges + bucket_ms, window[1])
    total = np.zeros(len(edges))
    for intervals in intervals_by_day:
        covered = np.zeros(len(edges))
        for s, e in intervals:
            overlap = np.minimum(bucket_end, e) - np.maximum(edges, s)
            covered += np.clip(overlap, 0, None)
        total += covered / (bucket_end - edges)
    return edges, total / len(intervals_by_day)
