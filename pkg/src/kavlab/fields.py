"""Discretization containers: grids, test functions, velocity fields, data.

Everything here is immutable after construction and shares one fixed
trapezoid quadrature in velocity, so simulated and closed-form energies see
exactly the same nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "SpectralGrid",
    "TestFunction",
    "VelocityField",
    "KineticData",
    "DampedWeight",
    "build_grid",
    "check_nondegeneracy",
    "grid_from_config",
    "psi_from_config",
    "field_from_config",
    "make_data",
]

_NONDEG_RTOL = 1e-9
_N_DIRECTIONS_2D = 64  # unit-direction sample count for d=2 checks


@dataclass(frozen=True)
class SpectralGrid:
    """Shared discretization: wavenumbers, velocity quadrature, time grid.

    ``wavenumbers`` has shape (n_k, d).  ``velocity_nodes`` has shape
    (n_xi,) for scalar velocity variables (general curves) or (n_xi, d) for
    identity transport in d dimensions.  ``times`` is the uniform grid
    0 = t_0 < ... < t_{n_t} = T with n_t panels.
    """

    dimension: int
    wavenumbers: np.ndarray
    velocity_nodes: np.ndarray
    velocity_weights: np.ndarray
    times: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "wavenumbers", _freeze(self.wavenumbers, np.float64))
        object.__setattr__(self, "velocity_nodes", _freeze(self.velocity_nodes, np.float64))
        object.__setattr__(self, "velocity_weights", _freeze(self.velocity_weights, np.float64))
        object.__setattr__(self, "times", _freeze(self.times, np.float64))
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if self.wavenumbers.ndim != 2 or self.wavenumbers.shape[1] != self.dimension:
            raise ValueError("wavenumbers must have shape (n_k, d)")
        if self.wavenumbers.shape[0] == 0:
            raise ValueError("empty wavenumber list")
        uniq = {tuple(row) for row in self.wavenumbers}
        if len(uniq) != self.wavenumbers.shape[0]:
            raise ValueError("duplicate wavenumbers")
        if np.any(self.velocity_weights <= 0.0):
            raise ValueError("velocity weights must be positive")
        t = self.times
        if t[0] != 0.0 or np.any(np.diff(t) <= 0.0):
            raise ValueError("time grid must start at 0 and increase strictly")

    @property
    def n_k(self) -> int:
        return self.wavenumbers.shape[0]

    @property
    def n_xi(self) -> int:
        return self.velocity_nodes.shape[0]

    @property
    def n_t(self) -> int:
        return self.times.shape[0] - 1

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def k_mags(self) -> np.ndarray:
        return np.sqrt(np.sum(self.wavenumbers**2, axis=1))

    def xi_spacing(self) -> float:
        """Node spacing of a uniform scalar velocity grid."""
        nodes = self.velocity_nodes
        if nodes.ndim != 1 or nodes.shape[0] < 2:
            raise ValueError("needs a 1-d velocity grid with >= 2 nodes")
        steps = np.diff(nodes)
        if not np.allclose(steps, steps[0], rtol=1e-12, atol=1e-15):
            raise ValueError("velocity grid is not uniform")
        return float(steps[0])


def _freeze(arr, dtype) -> np.ndarray:
    out = np.asarray(arr, dtype=dtype)
    if not np.all(np.isfinite(out)):
        raise ValueError("non-finite grid entries")
    out = out.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TestFunction:
    """Compactly supported velocity cutoff psi with an analytic gradient."""

    kind: str  # bump | hat | indicator
    radius: float

    def __post_init__(self):
        if self.kind not in ("bump", "hat", "indicator"):
            raise ValueError(f"unknown test function kind {self.kind!r}")
        if self.radius <= 0.0:
            raise ValueError("support radius must be positive")

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=np.float64)
        if xi.ndim <= 1:
            r = np.abs(xi) / self.radius
        else:
            r = np.sqrt(np.sum(xi**2, axis=-1)) / self.radius
        inside = r < 1.0
        if self.kind == "indicator":
            return inside.astype(np.float64)
        if self.kind == "hat":
            return np.where(inside, 1.0 - r, 0.0)
        out = np.zeros_like(r)
        rs = r[inside]
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - rs**2))
        return out

    def grad(self, xi) -> np.ndarray:
        """d psi / d xi for scalar xi (exact, used by the div-form source)."""
        xi = np.asarray(xi, dtype=np.float64)
        r = xi / self.radius
        inside = np.abs(r) < 1.0
        if self.kind == "indicator":
            return np.zeros_like(xi)
        if self.kind == "hat":
            return np.where(inside, -np.sign(r) / self.radius, 0.0)
        out = np.zeros_like(xi)
        rs = r[inside]
        val = np.exp(1.0 - 1.0 / (1.0 - rs**2))
        out[inside] = val * (-2.0 * rs / (1.0 - rs**2) ** 2) / self.radius
        return out

    def l1_norm(self) -> float:
        """Exact integral of |psi| over its support (scalar argument)."""
        if self.kind == "indicator":
            return 2.0 * self.radius
        if self.kind == "hat":
            return self.radius
        # smooth bump: one-time dense quadrature of a fixed analytic profile
        x = np.linspace(-1.0, 1.0, 20001)
        y = np.zeros_like(x)
        inner = np.abs(x) < 1.0
        y[inner] = np.exp(1.0 - 1.0 / (1.0 - x[inner] ** 2))
        return float(np.trapezoid(y, x)) * self.radius


_CURVES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "identity": lambda xi: xi,
    "cubic": lambda xi: xi**3,
    "quadratic": lambda xi: xi**2,
}


@dataclass(frozen=True)
class VelocityField:
    """Transport velocity a(xi) with its declared non-degeneracy (alpha, A)."""

    mode: str  # identity | general
    alpha: float = 1.0
    lower_const: float = 1.0
    curve: str = "identity"

    def __post_init__(self):
        if self.mode not in ("identity", "general"):
            raise ValueError(f"unknown field mode {self.mode!r}")
        if self.mode == "identity" and (self.alpha != 1.0 or self.lower_const != 1.0):
            raise ValueError("identity field has alpha = 1 and A = 1")
        if self.alpha < 1.0:
            raise ValueError("alpha must be >= 1")
        if self.lower_const <= 0.0:
            raise ValueError("A must be positive")
        if self.curve not in _CURVES:
            raise ValueError(f"unknown curve {self.curve!r}")
        if self.mode == "identity" and self.curve != "identity":
            raise ValueError("identity mode requires the identity curve")

    def __call__(self, xi) -> np.ndarray:
        return _CURVES[self.curve](np.asarray(xi, dtype=np.float64))

    def dot_k(self, k: np.ndarray, nodes: np.ndarray) -> np.ndarray:
        """k . a(xi) per velocity node; k is a d-vector, nodes per the grid."""
        a = self(nodes)
        if a.ndim == 1:  # scalar velocity variable, a maps into R^d = R
            return float(k[0]) * a
        return a @ np.asarray(k, dtype=np.float64)


@dataclass(frozen=True)
class DampedWeight:
    """Damping rate lambda of the exponential time weight e^{-lambda t}."""

    lam: float

    def __post_init__(self):
        if self.lam < 0.0:
            raise ValueError("lambda must be nonnegative")

    def require_positive(self) -> float:
        if self.lam <= 0.0:
            raise ValueError("this estimate requires lambda > 0")
        return self.lam


@dataclass(frozen=True)
class KineticData:
    """Fourier-in-x data: initial datum and at most one source."""

    f0_hat: np.ndarray  # (n_k, n_xi) complex
    g_hat: np.ndarray | None = None  # (n_k, n_xi, n_t+1) complex
    h_hat: np.ndarray | None = None  # (n_k, n_xi, n_t+1) complex, div-form
    dh_dxi: np.ndarray | None = None  # analytic xi-derivative of h_hat
    label: str = "data"

    def __post_init__(self):
        object.__setattr__(self, "f0_hat", _freeze(self.f0_hat, np.complex128))
        for name in ("g_hat", "h_hat", "dh_dxi"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, _freeze(val, np.complex128))
        if self.g_hat is not None and self.h_hat is not None:
            raise ValueError("at most one of g_hat / h_hat may be present")

    @property
    def source_kind(self) -> str:
        if self.g_hat is not None:
            return "plain"
        if self.h_hat is not None:
            return "div_xi"
        return "none"

    def validate_against(self, grid: SpectralGrid) -> None:
        if self.f0_hat.shape != (grid.n_k, grid.n_xi):
            raise ValueError("f0_hat shape does not match the grid")
        for name in ("g_hat", "h_hat", "dh_dxi"):
            val = getattr(self, name)
            if val is not None and val.shape != (grid.n_k, grid.n_xi, grid.n_t + 1):
                raise ValueError(f"{name} shape does not match the grid")


def build_grid(d, k_list, xi_range, n_xi, T, n_t, psi: TestFunction | None = None) -> SpectralGrid:
    """Uniform trapezoid velocity grid plus uniform time grid.

    ``n_t`` counts time panels (the grid carries n_t + 1 nodes).  When a test
    function is supplied the velocity range must cover its support.
    """
    k_arr = np.atleast_2d(np.asarray(k_list, dtype=np.float64))
    if k_arr.shape[0] == 1 and k_arr.shape[1] != d:
        k_arr = k_arr.reshape(-1, 1)
    if k_arr.size == 0:
        raise ValueError("empty wavenumber list")
    lo, hi = float(xi_range[0]), float(xi_range[1])
    if not hi > lo:
        raise ValueError("degenerate velocity range")
    if n_xi < 2 or n_t < 2:
        raise ValueError("need n_xi >= 2 and n_t >= 2")
    if T <= 0.0:
        raise ValueError("horizon must be positive")
    if psi is not None and (lo > -psi.radius or hi < psi.radius):
        raise ValueError("velocity range narrower than the test function support")
    nodes = np.linspace(lo, hi, n_xi)
    dxi = (hi - lo) / (n_xi - 1)
    weights = np.full(n_xi, dxi)
    weights[0] = weights[-1] = 0.5 * dxi
    times = np.linspace(0.0, T, n_t + 1)
    if d == 2:
        xx, yy = np.meshgrid(nodes, nodes, indexing="ij")
        nodes2 = np.stack([xx.ravel(), yy.ravel()], axis=1)
        weights2 = np.outer(weights, weights).ravel()
        return SpectralGrid(2, k_arr, nodes2, weights2, times)
    return SpectralGrid(1, k_arr, nodes, weights, times)


def _unit_directions(d: int) -> np.ndarray:
    if d == 1:
        return np.array([[1.0]])
    ang = 2.0 * np.pi * np.arange(_N_DIRECTIONS_2D) / _N_DIRECTIONS_2D
    return np.stack([np.cos(ang), np.sin(ang)], axis=1)


def check_nondegeneracy(vfield: VelocityField, nodes) -> tuple[float, bool]:
    """Empirical non-degeneracy constant over the node pairs.

    Returns (A_empirical, pass) with A_empirical the minimum over distinct
    node pairs and sampled unit directions of |e.(a(x1) - a(x2))| /
    |x1 - x2|^alpha, and pass true when it reaches the declared constant up
    to relative tolerance 1e-9.  The check covers the node range only.
    """
    nodes = np.asarray(nodes, dtype=np.float64)
    if nodes.shape[0] < 2:
        raise ValueError("need at least 2 velocity nodes")
    avals = vfield(nodes)
    if avals.ndim == 1:
        avals = avals[:, None]
        xi_vecs = nodes[:, None]
    else:
        xi_vecs = nodes
    dirs = _unit_directions(avals.shape[1])
    best = math.inf
    n = nodes.shape[0]
    proj = avals @ dirs.T  # (n, n_dir)
    for i in range(n):
        dxi = np.sqrt(np.sum((xi_vecs[i] - xi_vecs) ** 2, axis=1))
        mask = dxi > 0.0
        if not np.any(mask):
            continue
        num = np.abs(proj[i] - proj[mask])  # (n_masked, n_dir)
        # log-space ratio avoids underflow of dxi**alpha for near-coincident
        # nodes; num = 0 maps to ratio 0 as it should
        with np.errstate(divide="ignore"):
            ratio = np.exp(np.log(num) - vfield.alpha * np.log(dxi[mask, None]))
        best = min(best, float(ratio.min()))
    ok = best >= vfield.lower_const * (1.0 - _NONDEG_RTOL)
    return best, ok


# ---------------------------------------------------------------------------
# construction from config documents
# ---------------------------------------------------------------------------


def psi_from_config(cfg: dict) -> TestFunction:
    return TestFunction(kind=cfg.get("kind", "bump"), radius=float(cfg.get("radius", 1.0)))


def field_from_config(cfg: dict) -> VelocityField:
    mode = cfg.get("mode", "identity")
    if mode == "identity":
        return VelocityField("identity")
    return VelocityField(
        "general",
        alpha=float(cfg.get("alpha", 1.0)),
        lower_const=float(cfg.get("A", 1.0)),
        curve=cfg.get("curve", "identity"),
    )


def grid_from_config(cfg: dict) -> tuple[SpectralGrid, TestFunction, VelocityField]:
    psi = psi_from_config(cfg.get("psi", {}))
    vfield = field_from_config(cfg.get("field", {}))
    grid = build_grid(
        int(cfg.get("dimension", 1)),
        cfg["wavenumbers"],
        cfg.get("xi_range", [-1.0, 1.0]),
        int(cfg.get("n_xi", 17)),
        float(cfg.get("horizon", 1.0)),
        int(cfg.get("n_t", 256)),
        psi=psi,
    )
    return grid, psi, vfield


# ---------------------------------------------------------------------------
# named data generators
# ---------------------------------------------------------------------------


def _gauss_profile(nodes, center=0.3, width=0.25):
    return np.exp(-((nodes - center) ** 2) / (2.0 * width**2))


def make_data(grid: SpectralGrid, kind: str, psi: TestFunction | None = None, **kw) -> KineticData:
    """Built-in data generators shared by the CLI and the test battery.

    gaussian_bump   f0 only, slightly off-center so odd velocity moments
                    survive.
    two_point       f0 concentrated on the two nodes nearest +-xi0.
    time_box_source f0 = 0, separable source gamma(xi) 1_{[0,t_box]}(t).
    div_source      f0 = 0, divergence-form source h = gamma(xi) 1_{[0,t_box]}
                    with its analytic xi-derivative attached.
    """
    nodes = grid.velocity_nodes
    if nodes.ndim != 1:
        raise ValueError("data generators expect a scalar velocity grid")
    nk, nx, ntp = grid.n_k, grid.n_xi, grid.n_t + 1
    if kind == "gaussian_bump":
        prof = _gauss_profile(nodes, kw.get("center", 0.3), kw.get("width", 0.25))
        f0 = np.tile(prof, (nk, 1)).astype(np.complex128)
        return KineticData(f0_hat=f0, label=kind)
    if kind == "two_point":
        xi0 = kw.get("xi0", 0.5)
        f0 = np.zeros((nk, nx), dtype=np.complex128)
        i_plus = int(np.argmin(np.abs(nodes - xi0)))
        i_minus = int(np.argmin(np.abs(nodes + xi0)))
        f0[:, i_plus] = 1.0
        f0[:, i_minus] = 1.0
        return KineticData(f0_hat=f0, label=kind)
    if kind in ("time_box_source", "div_source"):
        t_box = kw.get("t_box", 1.0)
        prof = _gauss_profile(nodes, kw.get("center", 0.3), kw.get("width", 0.25))
        box = (grid.times <= t_box).astype(np.float64)
        cube = (prof[None, :, None] * box[None, None, :]).astype(np.complex128)
        cube = np.tile(cube, (nk, 1, 1))
        f0 = np.zeros((nk, nx), dtype=np.complex128)
        if kind == "time_box_source":
            return KineticData(f0_hat=f0, g_hat=cube, label=kind)
        width = kw.get("width", 0.25)
        dprof = prof * (-(nodes - kw.get("center", 0.3)) / width**2)
        dcube = (dprof[None, :, None] * box[None, None, :]).astype(np.complex128)
        dcube = np.tile(dcube, (nk, 1, 1))
        return KineticData(f0_hat=f0, h_hat=cube, dh_dxi=dcube, label=kind)
    raise ValueError(f"unknown data generator {kind!r}")
