"""Experiment configuration documents (JSON in, lossless round trip)."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .fields import grid_from_config, make_data

CASES = ("g0_stoch", "g0_det", "f0zero", "div", "time_reg", "kernels", "pathwise")

DEFAULT_GRID = {
    "dimension": 1,
    "wavenumbers": [[float(k)] for k in range(1, 17)],
    "xi_range": [-1.0, 1.0],
    "n_xi": 17,
    "horizon": 6.914,
    "n_t": 1024,
    "psi": {"kind": "bump", "radius": 1.0},
    "field": {"mode": "identity"},
}


@dataclass
class ExperimentConfig:
    """One experiment: grid + data + case + sweep + estimator."""

    grid: dict = field(default_factory=lambda: dict(DEFAULT_GRID))
    data: dict = field(default_factory=lambda: {"kind": "gaussian_bump"})
    case: str = "g0_stoch"
    sweep: dict = field(default_factory=dict)  # {"parameter": ..., "values": [...]}
    estimator: dict = field(default_factory=lambda: {"kind": "oracle"})
    lam: float = 1.0
    beta: float = 0.25
    output: str = ""

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"unknown case tag {self.case!r} (one of {CASES})")
        if self.sweep:
            vals = self.sweep.get("values", [])
            if not vals:
                raise ValueError("sweep requires values")
            if any(v <= 0 for v in vals):
                raise ValueError("sweep values must be positive (log-log fits)")
        if self.estimator.get("kind", "oracle") not in ("oracle", "mc"):
            raise ValueError("estimator kind must be oracle or mc")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")

    def build(self):
        grid, psi, vfield = grid_from_config(self.grid)
        data = make_data(grid, self.data.get("kind", "gaussian_bump"), psi=psi, **{
            k: v for k, v in self.data.items() if k != "kind"
        })
        return grid, psi, vfield, data

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"config parse error: {exc}") from exc
        if not isinstance(doc, dict):
            raise ValueError("config parse error: top level must be an object")
        return cls(**doc)

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())
