"""Bundled run presets."""

from pathlib import Path

PRESETS_DIR = Path(__file__).parent

__all__ = ["PRESETS_DIR"]
