"""Batch run, report and preset tools."""

from typing import Any

from ..config import RunConfig
from ..pipeline import run_pipeline as _run_pipeline, write_report
from ..presets.loader import customize_preset, get_preset, list_presets
from .events import TOOL_ERRORS


def run_pipeline(
    preset: str | None = None,
    config_path: str | None = None,
    overrides: dict[str, Any] | None = None,
) -> dict:
    """Run a batch from a preset or a JSON config file, with optional overrides."""
    if (preset is None) == (config_path is None):
        return {"error": "Give exactly one of preset or config_path"}
    try:
        if preset is not None:
            config = RunConfig(**customize_preset(get_preset(preset), overrides or {})["config"])
        else:
            config = RunConfig.from_json(config_path, **(overrides or {}))
        report = _run_pipeline(config)
        return {
            "out": config.out,
            "days": len(report["days"]),
            "errors": report["errors"],
            "tables": report["tables"],
        }
    except TOOL_ERRORS as e:
        return {"error": str(e)}


def report(out_dir: str, link_mode: str | None = None) -> dict:
    """Rebuild the cross-day tables of a finished run."""
    try:
        return {"out": out_dir, "tables": write_report(out_dir, link_mode)}
    except TOOL_ERRORS as e:
        return {"error": str(e)}


def preset_list() -> dict[str, Any]:
    """List bundled run presets."""
    presets = list_presets()
    return {"total": len(presets), "presets": presets}


def preset_get(name: str) -> dict[str, Any]:
    """Get a run preset by name."""
    try:
        return {"name": name, "preset": get_preset(name)}
    except FileNotFoundError as e:
        return {"error": str(e)}


def preset_customize(name: str, overrides: dict[str, Any]) -> dict[str, Any]:
    """Apply overrides to a preset and validate the resulting config."""
    try:
        preset = customize_preset(get_preset(name), overrides)
        RunConfig(**preset["config"])
        return {"name": name, "preset": preset}
    except (FileNotFoundError, ValueError) as e:
        return {"error": str(e)}
