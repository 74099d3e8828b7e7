"""Exceedance extraction tool."""

from .. import artifacts
from ..config import DAY_CLOSE_MS, DAY_OPEN_MS, settings
from ..liquidity import Threshold, daily_threshold, spread_series, xlm_series
from ..lob_core import parse_events, replay
from ..ted import build_covariates, extract_teds
from .events import TOOL_ERRORS


def extract_ted(
    out_path: str,
    events_path: str | None = None,
    series_path: str | None = None,
    index_path: str | None = None,
    threshold_q: float = 0.5,
    threshold: float | None = None,
    measure: str = "spread",
    notional: float = 25_000.0,
    window_start_ms: int | None = None,
    window_end_ms: int | None = None,
) -> dict:
    """Extract threshold exceedance durations and write the TED table.

    From an event file the table carries the 24 covariates; from a series
    file it carries durations only. The window defaults to the
    `LOBRES_WINDOW_START_MS` / `LOBRES_WINDOW_END_MS` settings.
    """
    if (events_path is None) == (series_path is None):
        return {"error": "Give exactly one of events_path or series_path"}
    try:
        trading = (DAY_OPEN_MS, DAY_CLOSE_MS)
        applied = []
        if events_path is not None:
            events = parse_events(events_path, strict=settings.strict)

            def books():
                for e, book in replay(events, strict=settings.strict):
                    applied.append(e)
                    yield book

            if measure == "spread":
                series = spread_series(books(), trading)
            else:
                series = xlm_series(books(), notional, None, trading)
        else:
            series = artifacts.read_series(series_path, measure, trading)

        level = Threshold.fixed(threshold) if threshold is not None else daily_threshold(series, threshold_q)
        window = (
            settings.window_start_ms if window_start_ms is None else window_start_ms,
            settings.window_end_ms if window_end_ms is None else window_end_ms,
        )
        exceedances = extract_teds(series, level, window)
        design = None
        if events_path is not None:
            index_times = artifacts.read_index_activity(index_path) if index_path else None
            design = build_covariates(exceedances, applied, index_times, window_start=window[0])
        artifacts.write_ted(exceedances, design, out_path)
        return {
            "threshold": level.level,
            "threshold_kind": level.kind,
            "records": len(exceedances),
            "censored": sum(x.censored for x in exceedances),
            "covariates": list(design.names) if design is not None else [],
            "ted": out_path,
        }
    except TOOL_ERRORS as e:
        return {"error": str(e)}
