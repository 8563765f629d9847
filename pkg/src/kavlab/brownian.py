"""Driving paths: exact-increment Brownian samples and the linear ramp.

Sampling is counter-based: each path owns a Philox stream keyed by
(master seed, path index), so ensembles are reproducible independently of
worker count or scheduling.  Gaussians come from the inverse CDF applied to
53-bit uniforms, a portable scheme that pins regression baselines across
platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

from .fields import SpectralGrid

__all__ = ["DrivingPath", "sample_path", "linear_path", "standard_normals"]


@dataclass(frozen=True)
class DrivingPath:
    """One realization of the time change B on the grid's time nodes."""

    times: np.ndarray
    values: np.ndarray
    mode: str  # brownian | linear
    seed: int = 0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if t.shape != v.shape:
            raise ValueError("times/values length mismatch")
        if v[0] != 0.0:
            raise ValueError("paths start at B(0) = 0")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite path values")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


def standard_normals(master_seed: int, path_index: int, n: int) -> np.ndarray:
    """n standard Gaussians from the (master_seed, path_index) Philox stream.

    Uniforms keep the top 53 bits of each 64-bit word, shifted off zero, so
    the inverse CDF never sees the endpoints.
    """
    bits = Philox(key=[np.uint64(master_seed), np.uint64(path_index)]).random_raw(n)
    u = (bits >> np.uint64(11)).astype(np.float64) * 2.0**-53 + 2.0**-54
    return ndtri(u)


def sample_path(grid: SpectralGrid, seed: int, path_index: int = 0) -> DrivingPath:
    """Brownian path on the grid: independent exact increments per panel."""
    t = grid.times
    z = standard_normals(seed, path_index, t.shape[0] - 1)
    incr = np.sqrt(np.diff(t)) * z
    values = np.concatenate([[0.0], np.cumsum(incr)])
    return DrivingPath(times=t, values=values, mode="brownian", seed=seed)


def linear_path(grid: SpectralGrid) -> DrivingPath:
    """The deterministic time change B(t) = t."""
    t = grid.times
    return DrivingPath(times=t, values=t.copy(), mode="linear")
