"""Exponent extraction and damping-rate selection rules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

__all__ = ["ScalingFit", "fit_exponent", "select_lambda", "select_lambda_div", "minimize_two_term"]


@dataclass(frozen=True)
class ScalingFit:
    """Ordinary least squares of log(value) against log(parameter)."""

    exponent: float
    intercept: float
    r_squared: float
    half_width: float  # 95% confidence half width on the slope
    sweep: tuple = field(default_factory=tuple)


def fit_exponent(sweep) -> ScalingFit:
    """Log-log OLS over (parameter, value) pairs; needs >= 3 positive points."""
    pts = [(float(x), float(y)) for x, y in sweep]
    if len(pts) < 3:
        raise ValueError("need at least 3 sweep points")
    if any(x <= 0.0 or y <= 0.0 for x, y in pts):
        raise ValueError("log-log fit needs positive data")
    lx = np.log([x for x, _ in pts])
    ly = np.log([y for _, y in pts])
    n = lx.shape[0]
    mx = lx.mean()
    sxx = float(np.sum((lx - mx) ** 2))
    slope = float(np.sum((lx - mx) * (ly - ly.mean())) / sxx)
    intercept = float(ly.mean() - slope * mx)
    resid = ly - (intercept + slope * lx)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    if n > 2 and sxx > 0.0:
        se = math.sqrt(ss_res / (n - 2) / sxx)
        half = float(stats.t.ppf(0.975, n - 2)) * se
    else:
        half = 0.0
    return ScalingFit(slope, intercept, max(0.0, min(1.0, r2)), half, tuple(pts))


def select_lambda(norm_g: float, norm_f: float) -> float:
    """Damping choice lam = ||g||_2 / ||f||_2 balancing the two-term bound."""
    if norm_g <= 0.0 or norm_f <= 0.0:
        raise ValueError("norms must be positive")
    return norm_g / norm_f


def select_lambda_div(kmag: float) -> float:
    """Balancing damping lam = |k|^{2/3} for the divergence-form estimate."""
    if kmag <= 0.0:
        raise ValueError("kmag must be positive")
    return kmag ** (2.0 / 3.0)


def minimize_two_term(fun, lam_lo: float, lam_hi: float) -> float:
    """1-d line search of a positive two-term bound over [lam_lo, lam_hi]."""
    res = optimize.minimize_scalar(
        lambda t: fun(math.exp(t)),
        bounds=(math.log(lam_lo), math.log(lam_hi)),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return math.exp(res.x)
