"""Readers and writers for the CSV and JSON artifacts passed between stages.

Written CSVs start with a `# schema_version=1` comment line; readers skip
comment lines so hand-made files without it are accepted too.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .config import SCHEMA_VERSION
from .errors import SchemaError
from .liquidity import LiquiditySeries
from .ted import COVARIATE_NAMES, DesignMatrix, Exceedance

SERIES_COLUMNS = ["timestamp_ms", "value"]
TED_COLUMNS = ["T_ms", "tau_ms", "censored", "trigger"]
SURFACE_COLUMNS = ["cov1", "cov2", "u", "quantile_ms"]


def write_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = frame.to_csv(index=False, lineterminator="\n", float_format="%.17g")
    path.write_text(f"# schema_version={SCHEMA_VERSION}\n{body}")
    return path


def read_csv(path: str | Path, columns: list[str], artifact: str) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{artifact} file not found: {path}")
    frame = pd.read_csv(path, comment="#")
    for column in columns:
        if column not in frame.columns:
            raise SchemaError(f"{artifact} file {path.name} is missing column '{column}'", column=column)
    return frame


def _numeric(frame: pd.DataFrame, column: str, artifact: str) -> np.ndarray:
    values = pd.to_numeric(frame[column], errors="coerce")
    if values.isna().any():
        raise SchemaError(f"{artifact} column '{column}' must be numeric", column=column)
    return values.to_numpy()


def write_json(data: dict, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"schema_version": SCHEMA_VERSION, **data}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def read_json(path: str | Path) -> dict:
    data = json.loads(Path(path).read_text())
    if data.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"{Path(path).name}: unsupported schema_version", column="schema_version")
    return data


# ============================================
# Liquidity series and occupancy
# ============================================

def write_series(series: LiquiditySeries, path: str | Path) -> Path:
    frame = pd.DataFrame({"timestamp_ms": series.times, "value": series.values})
    return write_csv(frame, path)


def read_series(path: str | Path, measure_kind: str = "spread", trading_window=None) -> LiquiditySeries:
    frame = read_csv(path, SERIES_COLUMNS, "series")
    times = _numeric(frame, "timestamp_ms", "series").astype(np.int64)
    values = _numeric(frame, "value", "series").astype(np.float64)
    if trading_window is None:
        trading_window = (int(times.min()), int(times.max())) if len(times) else (0, 0)
    return LiquiditySeries(measure_kind, times, values, trading_window)


def write_occupancy(intervals: list[tuple[int, int]], path: str | Path) -> Path:
    frame = pd.DataFrame(intervals, columns=["start_ms", "end_ms"], dtype=np.int64)
    return write_csv(frame, path)


def read_occupancy(path: str | Path) -> list[tuple[int, int]]:
    frame = read_csv(path, ["start_ms", "end_ms"], "occupancy")
    starts = _numeric(frame, "start_ms", "occupancy").astype(np.int64)
    ends = _numeric(frame, "end_ms", "occupancy").astype(np.int64)
    return [(int(s), int(e)) for s, e in zip(starts, ends)]


def write_index_activity(times: np.ndarray, path: str | Path) -> Path:
    return write_csv(pd.DataFrame({"timestamp_ms": np.asarray(times, dtype=np.int64)}), path)


def read_index_activity(path: str | Path) -> np.ndarray:
    frame = read_csv(path, ["timestamp_ms"], "index activity")
    return _numeric(frame, "timestamp_ms", "index activity").astype(np.int64)


# ============================================
# TED tables
# ============================================

@dataclass(frozen=True)
class TedTable:
    starts: np.ndarray
    taus: np.ndarray
    censored: np.ndarray
    triggers: tuple[str, ...]
    X: np.ndarray | None
    names: tuple[str, ...]

    def responses(self, include_censored: bool = False) -> tuple[np.ndarray | None, np.ndarray]:
        keep = np.ones(len(self.taus), bool) if include_censored else ~self.censored
        X = None if self.X is None else self.X[keep]
        return X, self.taus[keep]

    def design(self, covariates: list[str], include_censored: bool = False):
        if self.X is None:
            raise SchemaError("TED file has no covariate columns", column=COVARIATE_NAMES[0])
        for name in covariates:
            if name not in self.names:
                raise SchemaError(f"TED file is missing covariate column '{name}'", column=name)
        X, tau = self.responses(include_censored)
        cols = [self.names.index(name) for name in covariates]
        return X[:, cols], tau


def write_ted(
    exceedances: list[Exceedance], design: DesignMatrix | None, path: str | Path, triggers=None
) -> Path:
    frame = pd.DataFrame({
        "T_ms": np.array([x.start for x in exceedances], dtype=np.int64),
        "tau_ms": np.array([x.duration for x in exceedances], dtype=np.int64),
        "censored": np.array([int(x.censored) for x in exceedances], dtype=np.int64),
        "trigger": list(design.triggers if design is not None else triggers or ["cancel_or_other"] * len(exceedances)),
    })
    if design is not None:
        covariates = pd.DataFrame(design.values, columns=list(design.names))
        frame = pd.concat([frame, covariates], axis=1)
    return write_csv(frame, path)


def read_ted(path: str | Path) -> TedTable:
    frame = read_csv(path, TED_COLUMNS, "TED")
    covariate_columns = [c for c in frame.columns if c not in TED_COLUMNS]
    X = None
    if covariate_columns:
        X = np.column_stack([_numeric(frame, c, "TED").astype(np.float64) for c in covariate_columns])
    taus = _numeric(frame, "tau_ms", "TED").astype(np.float64)
    if np.any(taus <= 0):
        raise SchemaError("TED column 'tau_ms' must be positive", column="tau_ms")
    return TedTable(
        starts=_numeric(frame, "T_ms", "TED").astype(np.int64),
        taus=taus,
        censored=_numeric(frame, "censored", "TED").astype(bool),
        triggers=tuple(frame["trigger"].astype(str)),
        X=X,
        names=tuple(covariate_columns),
    )


# ============================================
# Subset search results and surfaces
# ============================================

def write_frame_table(frame: pd.DataFrame, path: str | Path, index_label: str | None = None) -> Path:
    if index_label is not None:
        frame = frame.reset_index(names=index_label)
    return write_csv(frame, path)


def write_surface(frame: pd.DataFrame, path: str | Path) -> Path:
    if "cov2" not in frame.columns:
        frame = frame.assign(cov2=np.nan)
    return write_csv(frame[SURFACE_COLUMNS], path)


def read_surface(path: str | Path) -> pd.DataFrame:
    return read_csv(path, SURFACE_COLUMNS, "surface")
