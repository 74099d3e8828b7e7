"""Order flow tools: synthetic days and replay into a liquidity series."""

from pathlib import Path

import numpy as np

from .. import artifacts
from ..config import DAY_CLOSE_MS, DAY_OPEN_MS, settings
from ..errors import LobresError
from ..liquidity import spread_series, xlm_series
from ..lob_core import parse_events, replay, write_events
from ..presets.loader import get_preset
from ..synth import FlowConfig, gen_day, gen_index_activity

TOOL_ERRORS = (LobresError, FileNotFoundError, ValueError)


def simulate_days(
    out_dir: str,
    days: int = 1,
    seed: int = 0,
    day_start_ms: int = DAY_OPEN_MS,
    day_end_ms: int = DAY_CLOSE_MS,
    add_rate: float = 5.0,
    cancel_rate: float = 0.05,
    execute_rate: float = 0.8,
    modify_rate: float = 0.5,
    index_rate: float = 20.0,
    preset: str | None = None,
) -> dict:
    """Generate synthetic order flow and index activity, one CSV pair per day.

    With `preset`, the flow settings come from that preset's `synth` block
    and only `seed` is taken from the arguments.
    """
    try:
        if preset is not None:
            synth = get_preset(preset)["config"].get("synth")
            if synth is None:
                return {"error": f"Preset '{preset}' has no synthetic order flow"}
            config = FlowConfig(**{**synth, "seed": seed})
        else:
            config = FlowConfig(
                seed=seed, days=days, day_start_ms=day_start_ms, day_end_ms=day_end_ms,
                add_rate=add_rate, cancel_rate=cancel_rate, execute_rate=execute_rate,
                modify_rate=modify_rate, index_rate=index_rate,
            )
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = []
        for day in range(config.days):
            events = gen_day(config, day)
            events_path = out / f"day{day:02d}_events.csv"
            index_path = out / f"day{day:02d}_index.csv"
            write_events(events, events_path)
            artifacts.write_index_activity(gen_index_activity(config, day), index_path)
            files.append({"day": day, "events": str(events_path), "index": str(index_path), "n_events": len(events)})
        return {"days": config.days, "seed": seed, "files": files}
    except TOOL_ERRORS as e:
        return {"error": str(e)}


def replay_events(
    events_path: str,
    out_path: str,
    measure: str = "spread",
    notional: float = 25_000.0,
    tick_size: float | None = None,
    strict: bool | None = None,
) -> dict:
    """Replay an event file and write the liquidity series (spread or xlm)."""
    try:
        strict = settings.strict if strict is None else strict
        events = parse_events(events_path, strict=strict)
        books = (book for _, book in replay(events, strict=strict))
        window = (DAY_OPEN_MS, DAY_CLOSE_MS)
        if measure == "spread":
            series = spread_series(books, window)
        elif measure == "xlm":
            series = xlm_series(books, notional, tick_size, window)
        else:
            return {"error": f"Unknown measure '{measure}' (spread or xlm)"}
        artifacts.write_series(series, out_path)
        values = series.values
        return {
            "measure": measure,
            "events": len(events),
            "points": len(series),
            "skipped": series.skipped,
            "mean": float(np.mean(values)) if len(values) else None,
            "max": float(np.max(values)) if len(values) else None,
            "series": out_path,
        }
    except TOOL_ERRORS as e:
        return {"error": str(e)}
