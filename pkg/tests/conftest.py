import numpy as np
import pytest

from lobres.config import DAY_OPEN_MS
from lobres.lob_core import EventKind, LobEvent, Side
from lobres.synth import FlowConfig

# 08:00 to 08:05; the analysis window below sits inside it
SHORT_DAY_END_MS = DAY_OPEN_MS + 5 * 60_000
SHORT_WINDOW = (DAY_OPEN_MS + 60_000, DAY_OPEN_MS + 4 * 60_000)


@pytest.fixture
def make_event():
    def make(t, order_id, side, price, size, kind):
        return LobEvent(int(t), str(order_id), Side(side), int(price), int(size), EventKind(kind))

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def short_flow():
    return FlowConfig(seed=11, day_start_ms=DAY_OPEN_MS, day_end_ms=SHORT_DAY_END_MS)


@pytest.fixture
def short_window():
    return SHORT_WINDOW
