"""Discrete norms on traces: Sobolev weights, Gagliardo sums, pathwise bounds.

The temporal Gagliardo estimator is the plain off-diagonal double Riemann
sum with flat cell measure dt^2; its diagonal-exclusion bias vanishes under
refinement for beta < 1/2 and is measured, never modeled.  Physical space
appears only in the pathwise L1/Linf check, on a periodic torus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .brownian import DrivingPath
from .fields import TestFunction, VelocityField

__all__ = [
    "SobolevWeight",
    "weighted_space_energy",
    "gagliardo_seminorm",
    "pathwise_bounds_check",
]

PATHWISE_SLACK = 1e-8


@dataclass(frozen=True)
class SobolevWeight:
    """Per-wavenumber weight of a spatial regularity norm.

    plain           |k|^{2s}
    thm41           (|k| sqrt(lam) / (sqrt(lam) + |k|))^2, saturating at lam
    thm41_general   the alpha version, saturating at lam^{1/alpha}
    """

    mode: str = "plain"
    s: float = 0.5
    lam: float = 1.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.mode not in ("plain", "thm41", "thm41_general"):
            raise ValueError(f"unknown weight mode {self.mode!r}")
        if self.mode != "plain" and self.lam <= 0.0:
            raise ValueError("weight needs lambda > 0")
        if self.alpha < 1.0:
            raise ValueError("alpha must be >= 1")

    def __call__(self, kmag) -> np.ndarray:
        kmag = np.asarray(kmag, dtype=np.float64)
        if self.mode == "plain":
            return kmag ** (2.0 * self.s)
        if self.mode == "thm41":
            sq = np.sqrt(self.lam)
            return (kmag * sq / (sq + kmag)) ** 2
        ia = 1.0 / self.alpha
        la = self.lam ** (0.5 * ia)
        ka = kmag**ia
        return (ka * la / (la + ka)) ** 2


def weighted_space_energy(per_k_energies, weight: SobolevWeight, k_mags) -> float:
    """Weighted wavenumber sum of per-k energies."""
    e = np.asarray(per_k_energies, dtype=np.float64)
    if np.any(e < 0.0):
        raise ValueError("energies must be nonnegative")
    return float(np.sum(weight(k_mags) * e))


def gagliardo_seminorm(samples, times, beta: float) -> float:
    """Off-diagonal double Riemann sum of |u(t)-u(s)|^2 / |t-s|^{1+2 beta}.

    Uniform time grids only; cell measure dt^2, diagonal cells excluded.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    u = np.asarray(samples, dtype=np.complex128)
    t = np.asarray(times, dtype=np.float64)
    if u.ndim != 1 or u.shape != t.shape or u.shape[0] < 2:
        raise ValueError("need matching 1-d samples/times with >= 2 nodes")
    steps = np.diff(t)
    if not np.allclose(steps, steps[0], rtol=1e-12, atol=1e-15):
        raise ValueError("time grid must be uniform")
    return float(_accel.gagliardo_direct(u, t, beta))


def pathwise_bounds_check(
    f0_phys: np.ndarray,
    x_length: float,
    xi_nodes: np.ndarray,
    xi_weights: np.ndarray,
    psi: TestFunction,
    path: DrivingPath,
    vfield: VelocityField | None = None,
) -> tuple[bool, bool]:
    """Pathwise L1 and Linf bounds of the average on a periodic x-torus.

    f0_phys has shape (n_x, n_xi) on the uniform torus [0, x_length).  The
    average is evolved spectrally (exact shifts x - B(t) a(xi)); at every
    grid time the checks are

        int |rho(x, t)| dx <= iint |f0| dx dxi
        sup |rho(x, t)|    <= ||psi||_1 sup |f0|

    with 1e-8 relative slack for quadrature and FFT rounding.
    """
    f0 = np.asarray(f0_phys, dtype=np.float64)
    if not np.all(np.isfinite(f0)):
        raise ValueError("non-finite physical data")
    n_x, n_xi = f0.shape
    if xi_nodes.shape[0] != n_xi:
        raise ValueError("xi node count mismatch")
    if vfield is None:
        vfield = VelocityField("identity")
    avals = np.atleast_1d(vfield(xi_nodes)).astype(np.float64)
    dx = x_length / n_x
    kx = 2.0 * np.pi * np.fft.fftfreq(n_x, d=dx)
    f0_hat = np.fft.fft(f0, axis=0)
    psi_w = psi(xi_nodes) * xi_weights

    mass_bound = dx * float(np.sum(np.abs(f0) @ xi_weights))
    sup_bound = psi.l1_norm() * float(np.max(np.abs(f0)))
    slack = 1.0 + PATHWISE_SLACK
    pad = PATHWISE_SLACK * max(mass_bound, sup_bound, 1e-300)

    l1_ok = linf_ok = True
    for b in path.values:
        phase = np.exp(-1j * b * np.outer(kx, avals))
        rho = np.fft.ifft((f0_hat * phase) @ psi_w)
        rho_abs = np.abs(rho)
        if dx * float(np.sum(rho_abs)) > mass_bound * slack + pad:
            l1_ok = False
        if float(np.max(rho_abs)) > sup_bound * slack + pad:
            linf_ok = False
    return l1_ok, linf_ok
