"""Preset loader: named run configurations shipped with the package."""

import json
from typing import Any

from ..config import RunConfig
from . import PRESETS_DIR


def list_presets() -> list[dict[str, Any]]:
    """List bundled presets with their descriptions."""
    presets = []
    for path in sorted(PRESETS_DIR.glob("*.json")):
        with open(path) as f:
            data = json.load(f)
        presets.append({
            "name": path.stem,
            "description": data.get("description", ""),
            "path": path.name,
        })
    return presets


def get_preset(name: str) -> dict[str, Any]:
    """Load a preset by name: {"description": ..., "config": {...}}."""
    path = PRESETS_DIR / f"{name}.json"
    if not path.exists():
        raise FileNotFoundError(f"Preset not found: {name}")
    with open(path) as f:
        return json.load(f)


def customize_preset(preset: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    """Apply overrides to a preset's config; nested dicts are merged one level deep."""
    config = dict(preset.get("config", {}))
    for key, value in overrides.items():
        if value is None:
            continue
        if key in config and isinstance(config[key], dict) and isinstance(value, dict):
            config[key] = {**config[key], **value}
        else:
            config[key] = value
    return {**preset, "config": config}


def preset_config(name: str, **overrides) -> RunConfig:
    """RunConfig built from a preset with overrides applied."""
    return RunConfig(**customize_preset(get_preset(name), overrides)["config"])
