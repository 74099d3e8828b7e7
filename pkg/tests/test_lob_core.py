import numpy as np
import pytest

from lobres.errors import BookError, EventParseError, SchemaError
from lobres.lob_core import (
    BookState,
    EventKind,
    OrderBook,
    Side,
    apply_event,
    level_stats,
    parse_events,
    replay,
    write_events,
)
from lobres.synth import gen_day

HEADER = "timestamp_ms,order_id,side,price_ticks,size,kind\n"


# ============================================
# Parsing
# ============================================

def test_parse_empty_file():
    assert parse_events(b"") == []


def test_parse_single_add_row():
    events = parse_events((HEADER + "34500000,7,b,10001,100,A\n").encode())
    assert len(events) == 1
    e = events[0]
    assert (e.timestamp, e.order_id, e.side, e.price, e.size, e.kind) == (
        34_500_000, "7", Side.BID, 10001, 100, EventKind.ADD
    )


def test_synthetic_day_survives_write_then_parse(short_flow):
    events = gen_day(short_flow, 0)
    assert len(events) > 500
    assert parse_events(write_events(events).encode(), strict=True) == events


def test_malformed_row_skipped_or_rejected():
    text = HEADER + "1000,1,b,100,10,A\n1001,2,x,100,10,A\n1002,3,a,101,10,A\n"
    assert [e.order_id for e in parse_events(text.encode())] == ["1", "3"]
    with pytest.raises(EventParseError) as info:
        parse_events(text.encode(), strict=True)
    assert info.value.line == 3


@pytest.mark.parametrize("bad_row", ["1001,2,a,101,10,A,junk", "1001,2,a,101"])
def test_wrong_field_count_skipped_or_rejected(bad_row):
    text = "# schema_version=1\n" + HEADER + "1000,1,b,100,10,A\n" + bad_row + "\n1002,3,a,102,10,A\n"
    assert [e.order_id for e in parse_events(text.encode())] == ["1", "3"]
    with pytest.raises(EventParseError) as info:
        parse_events(text.encode(), strict=True)
    assert info.value.line == 4


def test_written_events_carry_schema_version(tmp_path):
    events = parse_events((HEADER + "1000,1,b,100,10,A\n").encode())
    path = tmp_path / "events.csv"
    text = write_events(events, path)
    assert text.splitlines()[0] == "# schema_version=1"
    assert path.read_text() == text
    assert parse_events(path, strict=True) == events


def test_unknown_order_cancel_skipped():
    text = HEADER + "1000,1,b,100,10,A\n1001,9,b,100,10,C\n"
    assert len(parse_events(text.encode())) == 1


def test_backwards_timestamp_always_fails():
    text = HEADER + "2000,1,b,100,10,A\n1000,2,a,101,10,A\n"
    with pytest.raises(EventParseError):
        parse_events(text.encode())


def test_missing_column_named():
    with pytest.raises(SchemaError) as info:
        parse_events(b"timestamp_ms,order_id,side,price_ticks,size\n1,1,b,1,1\n")
    assert info.value.column == "kind"


# ============================================
# Book reconstruction
# ============================================

def test_add_to_empty_book(make_event):
    state = apply_event(BookState(0), make_event(10, 1, "b", 100, 300, "A"))
    assert len(state.bids) == 1 and state.asks == ()
    assert state.bids[0].volume == 300


def test_cancel_only_order_empties_side(make_event):
    book = OrderBook()
    book.apply(make_event(10, 1, "a", 101, 300, "A"))
    book.apply(make_event(20, 1, "a", 101, 0, "C"))
    assert book.best_ask is None and len(book) == 0


def test_partial_execute_and_cancel(make_event):
    book = OrderBook(strict=True)
    book.apply(make_event(10, 1, "a", 101, 300, "A"))
    book.apply(make_event(11, 1, "a", 101, 100, "E"))
    assert book.order("1").remaining_size == 200
    book.apply(make_event(12, 1, "a", 101, 50, "C"))
    assert book.order("1").remaining_size == 150


def test_modify_resets_age_and_flags(make_event):
    book = OrderBook(strict=True)
    book.apply(make_event(10, 1, "b", 100, 300, "A"))
    book.apply(make_event(50, 1, "b", 99, 200, "M"))
    order = book.order("1")
    assert (order.price, order.remaining_size, order.entry_time, order.modified) == (99, 200, 50, True)
    assert book.best_bid == 99


def test_modify_loses_queue_priority(make_event):
    book = OrderBook(strict=True)
    book.apply(make_event(10, 1, "b", 100, 100, "A"))
    book.apply(make_event(11, 2, "b", 100, 100, "A"))
    book.apply(make_event(12, 1, "b", 100, 50, "M"))
    _, orders = next(book.levels(Side.BID))
    assert [o.order_id for o in orders] == ["2", "1"]


def test_strict_execute_overflow_raises(make_event):
    book = OrderBook(strict=True)
    book.apply(make_event(10, 1, "a", 101, 100, "A"))
    with pytest.raises(BookError):
        book.apply(make_event(11, 1, "a", 101, 150, "E"))


def test_crossing_add_rejected(make_event):
    book = OrderBook()
    book.apply(make_event(10, 1, "a", 101, 100, "A"))
    assert not book.apply(make_event(11, 2, "b", 101, 100, "A"))
    with pytest.raises(BookError):
        OrderBook(strict=True).apply(make_event(5, 3, "b", 0, 100, "A"))


def test_rejected_modify_keeps_queue_priority(make_event):
    book = OrderBook()
    book.apply(make_event(10, 1, "b", 100, 100, "A"))
    book.apply(make_event(11, 2, "b", 100, 100, "A"))
    book.apply(make_event(12, 3, "a", 102, 100, "A"))
    before = book.snapshot()
    assert not book.apply(make_event(13, 1, "b", 103, 100, "M"))
    _, orders = next(book.levels(Side.BID))
    assert [o.order_id for o in orders] == ["1", "2"]
    assert book.order_ids() == ["1", "2", "3"]
    assert book.snapshot().bids == before.bids
    book.apply(make_event(14, 1, "b", 100, 40, "E"))
    assert book.order("1").remaining_size == 60
    with pytest.raises(BookError):
        OrderBook.from_state(before, strict=True).apply(make_event(13, 2, "b", 102, 100, "M"))


def _naive_rebuild(events):
    """Dict replay with no price index; dict order is time priority."""
    orders = {}
    for e in events:
        if e.kind == EventKind.ADD:
            orders[e.order_id] = [e.side, e.price, e.size]
        elif e.kind == EventKind.MODIFY:
            side = orders.pop(e.order_id)[0]
            if e.size > 0:
                orders[e.order_id] = [side, e.price, e.size]
        else:
            remaining = orders[e.order_id][2] - e.size
            if (e.kind == EventKind.CANCEL and e.size == 0) or remaining <= 0:
                del orders[e.order_id]
            else:
                orders[e.order_id][2] = remaining
    levels = {Side.BID: {}, Side.ASK: {}}
    for order_id, (side, price, size) in orders.items():
        levels[side].setdefault(price, []).append((order_id, size))
    return levels


def test_replay_matches_naive_rebuild(short_flow):
    events = gen_day(short_flow, 0)
    book = OrderBook(strict=True)
    for e in events:
        assert book.apply(e)
    expected = _naive_rebuild(events)
    for side in (Side.BID, Side.ASK):
        got = {price: [(o.order_id, o.remaining_size) for o in orders] for price, orders in book.levels(side)}
        assert got == expected[side]
        assert book.depth(side) == sum(size for lvl in expected[side].values() for _, size in lvl)


def test_book_never_crossed_during_replay(short_flow):
    for _, book in replay(gen_day(short_flow, 1), strict=True):
        if book.best_bid is not None and book.best_ask is not None:
            assert book.best_bid < book.best_ask


def test_snapshot_round_trip(short_flow):
    events = gen_day(short_flow, 0)[:300]
    book = OrderBook()
    for e in events:
        book.apply(e)
    state = book.snapshot()
    assert OrderBook.from_state(state).snapshot() == state


# ============================================
# Level statistics
# ============================================

def test_level_stats_empty_side():
    assert level_stats(OrderBook(), Side.ASK) == (0, 0, 0, 0.0)


def test_level_stats_mean_age(make_event):
    book = OrderBook()
    for i, t in enumerate((0, 1000, 2000)):
        book.apply(make_event(t, i, "b", 100, 100, "A"))
    assert level_stats(book, Side.BID, now=3000) == (3, 300, 0, 2000.0)


def test_level_stats_nearest_levels_only(make_event, rng):
    book = OrderBook(strict=True)
    t = 0
    for i in range(40):
        t += 1
        book.apply(make_event(t, i, "a", 200 + int(rng.integers(8)), 100 * int(rng.integers(1, 5)), "A"))
    for i in range(10):
        t += 1
        book.apply(make_event(t + 1, 100 + i, "a", 200 + i % 8, 50, "A"))
        book.apply(make_event(t + 2, 100 + i, "a", 200 + i % 8, 60, "M"))
        t += 2
    now = t + 500
    state = book.snapshot()
    assert len(state.asks) == 8
    nearest = [o for level in state.asks[:5] for o in level.orders]
    expected = (
        len(nearest),
        sum(o.remaining_size for o in nearest),
        sum(o.modified for o in nearest),
        float(np.mean([now - o.entry_time for o in nearest])),
    )
    got = level_stats(state, Side.ASK, n_levels=5, now=now)
    assert got[:3] == expected[:3]
    assert got[3] == pytest.approx(expected[3], rel=1e-12)


def test_level_stats_rejects_zero_levels():
    with pytest.raises(ValueError):
        level_stats(OrderBook(), Side.BID, n_levels=0)
