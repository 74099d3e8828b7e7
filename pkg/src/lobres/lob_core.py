"""Order-event parsing and limit order book reconstruction.

Prices are integer ticks and times integer milliseconds since midnight.
`OrderBook` is the mutable replay engine; `BookState` is the immutable
snapshot it emits. A level is a price with at least one resting order,
level 1 being the one nearest the quote midpoint.
"""

import csv
from bisect import bisect_left, insort
from dataclasses import dataclass, replace
from pathlib import Path
from typing import IO, Iterable, Iterator, NamedTuple

import pandas as pd
from loguru import logger

from .config import SCHEMA_VERSION
from .errors import BookError, EventParseError, SchemaError

try:
    from enum import StrEnum
except ImportError:  # Python < 3.11: equivalent of the stdlib class
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__

        @staticmethod
        def _generate_next_value_(name, start, count, last_values):
            return name.lower()

EVENT_COLUMNS = ["timestamp_ms", "order_id", "side", "price_ticks", "size", "kind"]


class Side(StrEnum):
    BID = "b"
    ASK = "a"


class EventKind(StrEnum):
    ADD = "A"
    CANCEL = "C"
    MODIFY = "M"
    EXECUTE = "E"


@dataclass(frozen=True, slots=True)
class LobEvent:
    timestamp: int
    order_id: str
    side: Side
    price: int
    size: int
    kind: EventKind


@dataclass(frozen=True, slots=True)
class RestingOrder:
    order_id: str
    side: Side
    price: int
    remaining_size: int
    entry_time: int
    modified: bool = False
    last_modify_time: int | None = None


@dataclass(frozen=True, slots=True)
class Level:
    price: int
    orders: tuple[RestingOrder, ...]

    @property
    def volume(self) -> int:
        return sum(o.remaining_size for o in self.orders)


@dataclass(frozen=True, slots=True)
class BookState:
    """Snapshot of the book; bids price-descending, asks price-ascending."""

    time: int
    bids: tuple[Level, ...] = ()
    asks: tuple[Level, ...] = ()

    def levels(self, side: Side) -> Iterator[tuple[int, Iterable[RestingOrder]]]:
        for level in self.bids if side == Side.BID else self.asks:
            yield level.price, level.orders

    @property
    def best_bid(self) -> int | None:
        return self.bids[0].price if self.bids else None

    @property
    def best_ask(self) -> int | None:
        return self.asks[0].price if self.asks else None


class LevelStats(NamedTuple):
    order_count: int
    total_volume: int
    modified_count: int
    mean_age_ms: float


# ============================================
# Parsing
# ============================================

def _read_text(source: str | Path | bytes | IO) -> str:
    if isinstance(source, bytes):
        return source.decode()
    if isinstance(source, Path):
        return source.read_text()
    if isinstance(source, str):
        return Path(source).read_text()
    data = source.read()
    return data.decode() if isinstance(data, bytes) else data


def parse_events(source: str | Path | bytes | IO, strict: bool = False) -> list[LobEvent]:
    """Parse an event CSV into events in file order.

    Malformed rows and cancels/executes/modifies of unknown orders are
    skipped with a warning, or raise in strict mode. A timestamp going
    backwards is always an error.
    """
    def reject(message: str, line: int):
        if strict:
            raise EventParseError(message, line)
        logger.warning("skipping event at line {}: {}", line, message)

    header: list[str] | None = None
    rows: list[list[str]] = []
    line_numbers: list[int] = []
    for number, line in enumerate(_read_text(source).splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = [f.strip() for f in next(csv.reader([line]))]
        if header is None:
            header = fields
            for column in EVENT_COLUMNS:
                if column not in header:
                    raise SchemaError(f"event file missing column '{column}'", column=column)
            continue
        if len(fields) != len(header):
            reject(f"expected {len(header)} fields, got {len(fields)}", number)
            continue
        rows.append(fields)
        line_numbers.append(number)
    if not rows:
        return []

    frame = pd.DataFrame(rows, columns=header, dtype=str)
    timestamps = pd.to_numeric(frame["timestamp_ms"], errors="coerce")
    prices = pd.to_numeric(frame["price_ticks"], errors="coerce")
    sizes = pd.to_numeric(frame["size"], errors="coerce")
    sides = frame["side"].str.lower()
    kinds = frame["kind"].str.upper()

    events: list[LobEvent] = []
    live: dict[str, int] = {}
    last_ts = None

    for i in range(len(frame)):
        line = line_numbers[i]
        ts, price, size = timestamps.iat[i], prices.iat[i], sizes.iat[i]
        side, kind, order_id = sides.iat[i], kinds.iat[i], frame["order_id"].iat[i].strip()
        if pd.isna(ts) or ts != int(ts):
            reject(f"bad timestamp '{frame['timestamp_ms'].iat[i]}'", line)
            continue
        ts = int(ts)
        if last_ts is not None and ts < last_ts:
            raise EventParseError(f"timestamp {ts} precedes {last_ts}", line)
        if side not in ("b", "a") or kind not in ("A", "C", "M", "E") or not order_id:
            reject(f"bad side/kind/order_id ({side!r}, {kind!r}, {order_id!r})", line)
            continue
        if pd.isna(price) or pd.isna(size) or size < 0 or price != int(price) or size != int(size):
            reject("price_ticks and size must be integers with size >= 0", line)
            continue
        price, size = int(price), int(size)
        if kind in ("A", "M") and price <= 0:
            reject(f"price must be positive for kind {kind}", line)
            continue
        if kind == "A":
            if size <= 0:
                reject("add with zero size", line)
                continue
            if order_id in live:
                reject(f"duplicate add for order {order_id}", line)
                continue
            live[order_id] = size
        else:
            if order_id not in live:
                reject(f"unknown order_id {order_id} for kind {kind}", line)
                continue
            if kind == "M":
                live[order_id] = size
                if size == 0:
                    del live[order_id]
            else:
                remaining = live[order_id] - size
                if kind == "C" and size == 0 or remaining <= 0:
                    del live[order_id]
                else:
                    live[order_id] = remaining
        last_ts = ts
        events.append(LobEvent(ts, order_id, Side(side), price, size, EventKind(kind)))
    return events


def write_events(events: Iterable[LobEvent], path: str | Path | None = None) -> str:
    """Serialise events to the event CSV schema; returns the text."""
    lines = [f"# schema_version={SCHEMA_VERSION}", ",".join(EVENT_COLUMNS)]
    for e in events:
        lines.append(f"{e.timestamp},{e.order_id},{e.side.value},{e.price},{e.size},{e.kind.value}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


# ============================================
# Book reconstruction
# ============================================

class OrderBook:
    """Mutable book replayed event by event.

    Orders at a price are kept in an insertion-ordered dict, so iteration
    order is time priority. Sorted price lists are ascending for both sides.
    """

    def __init__(self, strict: bool = False):
        self.strict = strict
        self.time = 0
        self._orders: dict[str, RestingOrder] = {}
        self._levels: dict[Side, dict[int, dict[str, RestingOrder]]] = {Side.BID: {}, Side.ASK: {}}
        self._prices: dict[Side, list[int]] = {Side.BID: [], Side.ASK: []}

    @classmethod
    def from_state(cls, state: BookState, strict: bool = False) -> "OrderBook":
        book = cls(strict=strict)
        book.time = state.time
        for levels in (state.bids, state.asks):
            for level in levels:
                for order in level.orders:
                    book._insert(order)
        return book

    # Queries

    @property
    def best_bid(self) -> int | None:
        prices = self._prices[Side.BID]
        return prices[-1] if prices else None

    @property
    def best_ask(self) -> int | None:
        prices = self._prices[Side.ASK]
        return prices[0] if prices else None

    def levels(self, side: Side) -> Iterator[tuple[int, Iterable[RestingOrder]]]:
        prices = self._prices[side]
        ordered = reversed(prices) if side == Side.BID else iter(prices)
        for price in ordered:
            yield price, self._levels[side][price].values()

    def order(self, order_id: str) -> RestingOrder | None:
        return self._orders.get(order_id)

    def __len__(self) -> int:
        return len(self._orders)

    def order_ids(self) -> list[str]:
        """Resting order ids in arrival order."""
        return list(self._orders)

    def level_count(self, side: Side) -> int:
        return len(self._prices[side])

    def depth(self, side: Side) -> int:
        return sum(o.remaining_size for o in self._orders.values() if o.side == side)

    def snapshot(self) -> BookState:
        def side_levels(side: Side) -> tuple[Level, ...]:
            return tuple(Level(price, tuple(orders)) for price, orders in self.levels(side))

        return BookState(self.time, side_levels(Side.BID), side_levels(Side.ASK))

    # Mutation

    def _insert(self, order: RestingOrder) -> None:
        level = self._levels[order.side].get(order.price)
        if level is None:
            level = self._levels[order.side][order.price] = {}
            insort(self._prices[order.side], order.price)
        level[order.order_id] = order
        self._orders[order.order_id] = order

    def _remove(self, order: RestingOrder) -> None:
        level = self._levels[order.side][order.price]
        del level[order.order_id]
        del self._orders[order.order_id]
        if not level:
            del self._levels[order.side][order.price]
            prices = self._prices[order.side]
            del prices[bisect_left(prices, order.price)]

    def _crosses(self, side: Side, price: int) -> bool:
        if side == Side.BID:
            return self.best_ask is not None and price >= self.best_ask
        return self.best_bid is not None and price <= self.best_bid

    def _fail(self, message: str) -> bool:
        if self.strict:
            raise BookError(message)
        logger.warning("ignoring event: {}", message)
        return False

    def apply(self, e: LobEvent) -> bool:
        """Apply one event; returns False when a lenient book skipped it."""
        if e.timestamp < self.time:
            return self._fail(f"event at {e.timestamp} precedes book time {self.time}")
        self.time = e.timestamp

        if e.kind == EventKind.ADD:
            if e.order_id in self._orders:
                return self._fail(f"duplicate order id {e.order_id}")
            if e.size <= 0 or e.price <= 0:
                return self._fail(f"add {e.order_id} needs positive price and size")
            if self._crosses(e.side, e.price):
                return self._fail(f"add {e.order_id} at {e.price} would cross the book")
            self._insert(RestingOrder(e.order_id, e.side, e.price, e.size, e.timestamp))
            return True

        order = self._orders.get(e.order_id)
        if order is None:
            return self._fail(f"unknown order id {e.order_id} for {e.kind.name.lower()}")

        if e.kind == EventKind.MODIFY:
            if e.size == 0:
                self._remove(order)
                return True
            if self._crosses(order.side, e.price):
                return self._fail(f"modify {e.order_id} to {e.price} would cross the book")
            self._remove(order)
            # a revision loses queue priority and restarts the order's age
            self._insert(replace(
                order, price=e.price, remaining_size=e.size, entry_time=e.timestamp,
                modified=True, last_modify_time=e.timestamp,
            ))
            return True

        if e.kind == EventKind.EXECUTE and e.size > order.remaining_size:
            if self.strict:
                raise BookError(
                    f"execute of {e.size} exceeds remaining {order.remaining_size} on {e.order_id}"
                )
            logger.warning("execute on {} exceeds remaining size; removing order", e.order_id)

        # cancel with size 0 or >= remaining removes the order
        if (e.kind == EventKind.CANCEL and e.size == 0) or e.size >= order.remaining_size:
            self._remove(order)
        else:
            updated = replace(order, remaining_size=order.remaining_size - e.size)
            self._levels[order.side][order.price][order.order_id] = updated
            self._orders[order.order_id] = updated
        return True


def apply_event(state: BookState, e: LobEvent, strict: bool = False) -> BookState:
    """Pure form of `OrderBook.apply`: returns the next snapshot."""
    book = OrderBook.from_state(state, strict=strict)
    book.apply(e)
    return book.snapshot()


def replay(events: Iterable[LobEvent], strict: bool = False) -> Iterator[tuple[LobEvent, OrderBook]]:
    """Yield each applied event with the live book after it."""
    book = OrderBook(strict=strict)
    for e in events:
        if book.apply(e):
            yield e, book


def level_stats(
    book: BookState | OrderBook, side: Side, n_levels: int = 5, now: int | None = None
) -> LevelStats:
    """Order count, volume, modified count and mean age over the nearest levels.

    Ages are measured at `now`, which defaults to the book time.
    """
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    if now is None:
        now = book.time
    count = volume = modified = 0
    age_total = 0
    for i, (_, orders) in enumerate(book.levels(side)):
        if i >= n_levels:
            break
        for o in orders:
            count += 1
            volume += o.remaining_size
            modified += o.modified
            age_total += now - o.entry_time
    if count == 0:
        return LevelStats(0, 0, 0, 0.0)
    return LevelStats(count, volume, modified, age_total / count)
