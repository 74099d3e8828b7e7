import json
from pathlib import Path
from typing import Literal

from pydantic import Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

SCHEMA_VERSION = 1

# 08:00, 08:01, 16:29, 16:30 in ms since midnight
DAY_OPEN_MS = 28_800_000
WINDOW_START_MS = 28_860_000
WINDOW_END_MS = 59_340_000
DAY_CLOSE_MS = 59_400_000

Family = Literal["lognormal", "gamma", "weibull", "gengamma"]
LinkMode = Literal["single", "two-link", "three-link"]


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="LOBRES_")

    tick_size: float = 0.005
    window_start_ms: int = WINDOW_START_MS
    window_end_ms: int = WINDOW_END_MS
    strict: bool = False
    log_level: str = "INFO"


settings = Settings()


class RunConfig(BaseSettings):
    """Batch run configuration: JSON file, then LOBRES_* env, then CLI flags."""

    model_config = SettingsConfigDict(env_prefix="LOBRES_", extra="forbid")

    schema_version: int = 1
    inputs: list[str] = Field(default_factory=list)
    synth: dict | None = None
    ted_synth: dict | None = None
    index_inputs: list[str] = Field(default_factory=list)
    measure: Literal["spread", "xlm"] = "spread"
    notional: float = 25_000.0
    tick_size: float = 0.005
    threshold_qs: list[float] = Field(default_factory=lambda: [0.5])
    window_start_ms: int = WINDOW_START_MS
    window_end_ms: int = WINDOW_END_MS
    families: list[Family] = Field(default_factory=lambda: ["lognormal"])
    link_mode: LinkMode = "single"
    covariates: str | list[str] = "fixed_subset"
    include_censored: bool = False
    strict: bool = False
    out: str = "out"
    seed: int = 0
    jobs: int = 1
    quantile_levels: list[float] = Field(default_factory=lambda: [0.5, 0.9])
    surface_covariates: list[str] = Field(default_factory=lambda: ["prevTEDavg", "spreads"])
    surface_points: int = 20
    occupancy_bucket_ms: int = 300_000
    subset_search: bool = True

    @field_validator("threshold_qs", "quantile_levels")
    @classmethod
    def _levels_in_unit_interval(cls, v: list[float]) -> list[float]:
        if not v:
            raise ValueError("at least one level required")
        for q in v:
            if not 0.0 < q < 1.0:
                raise ValueError(f"level {q} outside (0, 1)")
        return v

    @field_validator("jobs")
    @classmethod
    def _positive_jobs(cls, v: int) -> int:
        if v < 1:
            raise ValueError("jobs must be >= 1")
        return v

    @model_validator(mode="after")
    def _window_within_day(self) -> "RunConfig":
        if not DAY_OPEN_MS <= self.window_start_ms < self.window_end_ms <= DAY_CLOSE_MS:
            raise ValueError("window must lie within the 08:00-16:30 trading day")
        sources = [bool(self.inputs), self.synth is not None, self.ted_synth is not None]
        if sum(sources) != 1:
            raise ValueError("exactly one of inputs, synth or ted_synth must be given")
        if self.index_inputs and len(self.index_inputs) != len(self.inputs):
            raise ValueError("index_inputs must pair one-to-one with inputs")
        return self

    @classmethod
    def from_json(cls, path: str | Path, **overrides) -> "RunConfig":
        data = json.loads(Path(path).read_text())
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)
