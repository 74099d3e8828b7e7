"""Synthetic order flow and synthetic duration samples.

Order flow is a zero-intelligence Poisson stream replayed through a strict
`OrderBook`, so every emitted event is valid. Each day draws from its own
generator seeded with (seed, day), which makes days independent of each
other and of how many workers produce them.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field, field_validator, model_validator

from .config import DAY_CLOSE_MS, DAY_OPEN_MS, Family
from .dist import get_family
from .errors import DistributionError
from .lob_core import EventKind, LobEvent, OrderBook, Side, write_events

INDEX_STREAM = 1


class FlowConfig(BaseModel):
    seed: int = 0
    days: int = Field(1, ge=1)
    day_start_ms: int = DAY_OPEN_MS
    day_end_ms: int = DAY_CLOSE_MS
    # arrivals per second; cancellations per resting order per second
    add_rate: float = Field(5.0, gt=0)
    cancel_rate: float = Field(0.05, ge=0)
    execute_rate: float = Field(0.8, ge=0)
    modify_rate: float = Field(0.5, ge=0)
    index_rate: float = Field(20.0, ge=0)
    mid_price_ticks: int = Field(10_000, gt=100)
    initial_levels: int = Field(10, ge=1)
    offset_mean_ticks: float = Field(2.0, ge=1.0)
    inside_spread_prob: float = Field(0.2, ge=0, le=1)
    lot_size: int = Field(100, ge=1)
    size_mean_lots: float = Field(3.0, ge=1.0)

    @model_validator(mode="after")
    def _day_ordered(self) -> "FlowConfig":
        if self.day_start_ms >= self.day_end_ms:
            raise ValueError("day_start_ms must precede day_end_ms")
        return self


class _FlowGenerator:
    """One day of order flow."""

    def __init__(self, config: FlowConfig, day: int):
        self.config = config
        self.rng = np.random.default_rng([config.seed, day])
        self.book = OrderBook(strict=True)
        self.events: list[LobEvent] = []
        self.next_id = 1
        # integer weights in events per 1000 s
        self.rates = [int(round(r * 1000)) for r in (
            config.add_rate, config.cancel_rate, config.execute_rate, config.modify_rate
        )]

    def _emit(self, t: int, order_id: str, side: Side, price: int, size: int, kind: EventKind):
        e = LobEvent(t, order_id, side, price, size, kind)
        self.book.apply(e)
        self.events.append(e)

    def _lots(self) -> int:
        return self.config.lot_size * int(self.rng.geometric(1.0 / self.config.size_mean_lots))

    def _new_id(self) -> str:
        order_id = str(self.next_id)
        self.next_id += 1
        return order_id

    def _add(self, t: int, side: Side | None = None):
        cfg, rng, book = self.config, self.rng, self.book
        if side is None:
            side = Side.BID if rng.integers(2) == 0 else Side.ASK
        bid, ask = book.best_bid, book.best_ask
        if bid is not None and ask is not None and ask - bid > 1 and rng.random() < cfg.inside_spread_prob:
            price = int(rng.integers(bid + 1, ask))
        else:
            offset = int(rng.geometric(1.0 / cfg.offset_mean_ticks)) - 1
            if side == Side.BID:
                ref = bid if bid is not None else (ask - 1 if ask is not None else cfg.mid_price_ticks - 1)
                price = ref - offset
            else:
                ref = ask if ask is not None else (bid + 1 if bid is not None else cfg.mid_price_ticks + 1)
                price = ref + offset
        self._emit(t, self._new_id(), side, max(price, 1), self._lots(), EventKind.ADD)

    def _cancel(self, t: int):
        ids = self.book.order_ids()
        order = self.book.order(ids[int(self.rng.integers(len(ids)))])
        if self.book.level_count(order.side) < 2:
            return self._add(t, order.side)
        self._emit(t, order.order_id, order.side, order.price, order.remaining_size, EventKind.CANCEL)

    def _execute(self, t: int):
        side = Side.ASK if self.rng.integers(2) == 0 else Side.BID
        if self.book.level_count(side) < 2:
            return self._add(t, side)
        remaining = self._lots()
        price, orders = next(self.book.levels(side))
        for order in list(orders):
            take = min(remaining, order.remaining_size)
            self._emit(t, order.order_id, side, price, take, EventKind.EXECUTE)
            remaining -= take
            if remaining == 0:
                break

    def _modify(self, t: int):
        ids = self.book.order_ids()
        order = self.book.order(ids[int(self.rng.integers(len(ids)))])
        price = order.price + int(self.rng.integers(-1, 2))
        opposite = self.book.best_ask if order.side == Side.BID else self.book.best_bid
        crosses = opposite is not None and (
            price >= opposite if order.side == Side.BID else price <= opposite
        )
        if crosses or price < 1:
            price = order.price
        self._emit(t, order.order_id, order.side, price, self._lots(), EventKind.MODIFY)

    def run(self) -> list[LobEvent]:
        cfg = self.config
        t = cfg.day_start_ms
        for i in range(cfg.initial_levels):
            self._emit(t, self._new_id(), Side.BID, cfg.mid_price_ticks - 1 - i, self._lots(), EventKind.ADD)
            self._emit(t, self._new_id(), Side.ASK, cfg.mid_price_ticks + 1 + i, self._lots(), EventKind.ADD)

        add, cancel, execute, modify = self.rates
        actions = (self._add, self._cancel, self._execute, self._modify)
        while True:
            weights = np.cumsum([add, cancel * len(self.book), execute, modify])
            total = int(weights[-1])
            t += int(self.rng.geometric(min(1.0, total / 1e6)))
            if t >= cfg.day_end_ms:
                break
            if self.book.level_count(Side.BID) == 0:
                self._add(t, Side.BID)
                continue
            if self.book.level_count(Side.ASK) == 0:
                self._add(t, Side.ASK)
                continue
            draw = int(self.rng.integers(total))
            actions[int(np.searchsorted(weights, draw, side="right"))](t)
        return self.events


def gen_day(config: FlowConfig, day: int) -> list[LobEvent]:
    events = _FlowGenerator(config, day).run()
    logger.debug("synthetic day {}: {} events", day, len(events))
    return events


def gen_order_flow(config: FlowConfig) -> list[list[LobEvent]]:
    """Event streams for `config.days` days."""
    return [gen_day(config, day) for day in range(config.days)]


def gen_index_activity(config: FlowConfig, day: int) -> np.ndarray:
    """Timestamps of index order activity, a Poisson stream at `index_rate` per second."""
    rng = np.random.default_rng([config.seed, day, INDEX_STREAM])
    if config.index_rate == 0:
        return np.zeros(0, dtype=np.int64)
    p_ms = min(1.0, config.index_rate / 1000.0)
    span = config.day_end_ms - config.day_start_ms
    n = int(span * p_ms * 1.2) + 100
    times = config.day_start_ms + np.cumsum(rng.geometric(p_ms, size=n))
    while times[-1] < config.day_end_ms:
        times = np.concatenate([times, times[-1] + np.cumsum(rng.geometric(p_ms, size=n))])
    return times[times < config.day_end_ms].astype(np.int64)


def write_order_flow(config: FlowConfig, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for day in range(config.days):
        path = out_dir / f"day{day:02d}_events.csv"
        write_events(gen_day(config, day), path)
        paths.append(path)
    return paths


# ============================================
# Duration samples with known coefficients
# ============================================

class TedGenConfig(BaseModel):
    seed: int = 0
    family: Family = "gengamma"
    beta: list[float] = Field(default_factory=lambda: [7.0, 0.5, -0.3])
    sigma: float = Field(0.6, gt=0)
    alpha: list[float] | None = None
    nu: float = 1.0
    nu_coef: list[float] | None = None
    n_records: int = Field(2000, ge=2)
    days: int = Field(1, ge=1)
    correlation: float = Field(0.3, ge=0, lt=1)
    dummy_columns: list[int] = Field(default_factory=list)
    dummy_prob: float = Field(0.2, gt=0, lt=1)
    max_retries: int = Field(100, ge=1)
    names: list[str] | None = None

    @field_validator("nu")
    @classmethod
    def _nonzero_nu(cls, v: float) -> float:
        if v == 0:
            raise ValueError("nu must be non-zero")
        return v

    @model_validator(mode="after")
    def _lengths(self) -> "TedGenConfig":
        p = len(self.beta) - 1
        for label, coef in (("alpha", self.alpha), ("nu_coef", self.nu_coef)):
            if coef is not None and len(coef) != p + 1:
                raise ValueError(f"{label} needs {p + 1} entries like beta")
        if self.names is not None and len(self.names) != p:
            raise ValueError(f"names needs {p} entries")
        if any(not 0 <= j < p for j in self.dummy_columns):
            raise ValueError("dummy column index out of range")
        return self

    @property
    def covariate_names(self) -> list[str]:
        return self.names or [f"x{j + 1}" for j in range(len(self.beta) - 1)]


@dataclass(frozen=True)
class TedSample:
    X: np.ndarray
    tau: np.ndarray
    names: tuple[str, ...]
    truth: dict


def _covariates(config: TedGenConfig, rng: np.random.Generator, n: int) -> np.ndarray:
    p = len(config.beta) - 1
    if p == 0:
        return np.zeros((n, 0))
    lags = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    chol = np.linalg.cholesky(config.correlation ** lags)
    X = rng.standard_normal((n, p)) @ chol.T
    for j in config.dummy_columns:
        X[:, j] = (rng.random(n) < config.dummy_prob).astype(np.float64)
    return X


def true_params(config: TedGenConfig, X: np.ndarray):
    """(mu, sigma, nu) implied by the true coefficients at each row of X."""
    dist = get_family(config.family)
    beta = np.asarray(config.beta)
    eta = beta[0] + X @ beta[1:]
    mu = eta if dist.mu_link == "identity" else np.exp(eta)
    if config.alpha is not None:
        alpha = np.asarray(config.alpha)
        sigma = np.exp(alpha[0] + X @ alpha[1:])
    else:
        sigma = np.full(len(X), config.sigma)
    nu = None
    if dist.has_nu:
        if config.nu_coef is not None:
            coef = np.asarray(config.nu_coef)
            nu = coef[0] + X @ coef[1:]
        else:
            nu = np.full(len(X), config.nu)
    return mu, sigma, nu


def gen_ted_sample(config: TedGenConfig, day: int = 0) -> TedSample:
    """Covariates and durations drawn from the configured family at the true parameters.

    Rows whose implied parameters or draws are invalid are redrawn, at most
    `max_retries` times.
    """
    rng = np.random.default_rng([config.seed, day])
    dist = get_family(config.family)
    n = config.n_records
    X = _covariates(config, rng, n)
    tau = np.full(n, np.nan)
    todo = np.arange(n)
    for _ in range(config.max_retries):
        with np.errstate(all="ignore"):
            mu, sigma, nu = true_params(config, X[todo])
            ok = np.isfinite(mu) & np.isfinite(sigma) & (sigma > 0)
            if dist.mu_link == "log":
                ok &= mu > 0
            if nu is not None:
                ok &= np.isfinite(nu) & (nu != 0)
            draws = np.full(len(todo), np.nan)
            if np.any(ok):
                draws[ok] = dist.sample(
                    rng, mu[ok], sigma[ok], None if nu is None else nu[ok], size=int(ok.sum())
                )
        good = np.isfinite(draws) & (draws > 0)
        tau[todo[good]] = draws[good]
        todo = todo[~good]
        if len(todo) == 0:
            break
        X[todo] = _covariates(config, rng, len(todo))
    else:
        raise DistributionError(f"{len(todo)} rows still invalid after {config.max_retries} redraws")

    truth = {
        "schema_version": 1,
        "family": config.family,
        "beta": list(config.beta),
        "sigma": config.sigma if config.alpha is None else None,
        "alpha": config.alpha,
        "nu": config.nu if dist.has_nu and config.nu_coef is None else None,
        "nu_coef": config.nu_coef,
        "covariates": config.covariate_names,
        "seed": config.seed,
        "day": day,
    }
    return TedSample(X, tau, tuple(config.covariate_names), truth)
