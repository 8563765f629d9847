"""Pathwise Fourier-side solution and the velocity average trace.

The characteristics representation is evaluated exactly at the grid nodes;
the only discretization inside a trace is the trapezoid-in-time quadrature
of the source integral.  Damping never enters the trace itself: energies
apply the weight e^{-2 lambda t} afterwards, which is equivalent to the
add-and-subtract split and keeps one representation for all estimates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .brownian import DrivingPath
from .fields import KineticData, SpectralGrid, TestFunction, VelocityField

__all__ = ["AverageTrace", "solve_trace", "damped_time_energy", "DEFAULT_TAIL_TOL"]

DEFAULT_TAIL_TOL = 1e-6


@dataclass(frozen=True)
class AverageTrace:
    """rho_hat_psi(k, t_j) for one driving path."""

    values: np.ndarray  # (n_k, n_t + 1) complex
    times: np.ndarray
    k_mags: np.ndarray
    provenance: tuple  # (data label, path mode/seed, embedded damping = 0.0)

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite trace values")


def _freq_matrix(grid: SpectralGrid, vfield: VelocityField) -> np.ndarray:
    """freq[k, x] = k . a(xi_x)."""
    rows = [vfield.dot_k(k, grid.velocity_nodes) for k in grid.wavenumbers]
    return np.asarray(rows, dtype=np.float64)


def solve_trace(
    grid: SpectralGrid,
    data: KineticData,
    vfield: VelocityField,
    path: DrivingPath,
    psi: TestFunction,
) -> AverageTrace:
    """Velocity average of the characteristics solution along one path.

    rho(k, t_j) = sum_xi w psi [ f0 e^{-i B_j k.a}
                                 + trapz_{s<=t_j} g e^{-i (B_j - B_s) k.a} ],
    with the divergence-form source split as psi div h = -h psi' + (psi h)'
    so the second part picks up the exact xi-derivative of the phase
    (identity field only).
    """
    data.validate_against(grid)
    if path.times.shape != grid.times.shape or not np.array_equal(path.times, grid.times):
        raise ValueError("path sampled on a different time grid")
    nodes = grid.velocity_nodes
    psi_nodes = psi(nodes)
    w = grid.velocity_weights
    bvals = path.values
    cw = (w * psi_nodes)[None, :] * data.f0_hat

    uniform_1d = nodes.ndim == 1 and vfield.mode == "identity"
    if uniform_1d:
        dxi = grid.xi_spacing()
        kvals = grid.wavenumbers[:, 0].copy()
        rho = _accel.trace_g0_uniform(cw, kvals, float(nodes[0]), dxi, bvals)
    else:
        freq = _freq_matrix(grid, vfield)
        rho = _accel.trace_g0_generic(cw, freq, bvals)

    if data.source_kind == "plain":
        freq = _freq_matrix(grid, vfield)
        gw = (w * psi_nodes)[None, :, None] * data.g_hat
        dt = float(grid.times[1] - grid.times[0])
        rho = rho + _accel.trace_source_generic(gw, freq, bvals, dt)
    elif data.source_kind == "div_xi":
        if vfield.mode != "identity":
            raise ValueError("divergence-form sources need the identity field")
        if nodes.ndim != 1:
            raise ValueError("divergence-form sources need a scalar velocity grid")
        freq = _freq_matrix(grid, vfield)
        dt = float(grid.times[1] - grid.times[0])
        gw1 = (-w * psi.grad(nodes))[None, :, None] * data.h_hat
        rho = rho + _accel.trace_source_generic(gw1, freq, bvals, dt)
        hw = (w * psi_nodes)[None, :, None] * data.h_hat
        kvals = grid.wavenumbers[:, 0].copy()
        rho = rho + _accel.trace_div_extra(hw, freq, kvals, bvals, dt)

    prov = (data.label, f"{path.mode}:{path.seed}", 0.0)
    return AverageTrace(values=rho, times=grid.times, k_mags=grid.k_mags, provenance=prov)


def damped_time_energy(
    trace: AverageTrace, lam: float, tail_tol: float = DEFAULT_TAIL_TOL
) -> tuple[np.ndarray, bool]:
    """Per-k trapezoid value of int_0^T e^{-2 lam t} |rho(k, t)|^2 dt.

    The boolean flags horizon truncation: e^{-2 lam T} above ``tail_tol``
    means the infinite-time energy is not fully resolved on this grid.
    """
    if lam < 0.0:
        raise ValueError("lambda must be nonnegative")
    energies = _accel.damped_energy(trace.values, trace.times, lam)
    truncated = bool(np.exp(-2.0 * lam * trace.times[-1]) > tail_tol)
    return energies, truncated
