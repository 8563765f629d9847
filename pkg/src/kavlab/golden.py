"""Frozen calibrated constants for theorem-shaped bound checks.

The source never gives numerical constants, only shapes, so the repo freezes
each one as the sup of value/shape observed on a published sweep plus 20%
headroom.  ``scripts/calibrate_golden.py`` regenerates the file; tests then
treat it as immutable ground truth.
"""

from __future__ import annotations

import json
from importlib import resources

_CACHE: dict | None = None


def load() -> dict:
    global _CACHE
    if _CACHE is None:
        text = resources.files("kavlab").joinpath("golden.json").read_text()
        _CACHE = json.loads(text)
    return _CACHE


def get_constant(name: str) -> float:
    table = load()["constants"]
    if name not in table:
        raise KeyError(f"no frozen constant named {name!r}; run scripts/calibrate_golden.py")
    return float(table[name])
