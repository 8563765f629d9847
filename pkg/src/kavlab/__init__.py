"""Numerical verification lab for kinetic velocity averages under a
Brownian time change: pathwise Fourier-side solver, closed-form expectation
oracles, Monte-Carlo estimator, and the exponent/bound battery."""

from .brownian import DrivingPath, linear_path, sample_path
from .fields import (
    DampedWeight,
    KineticData,
    SpectralGrid,
    TestFunction,
    VelocityField,
    build_grid,
    check_nondegeneracy,
    make_data,
)
from .mc import NormEstimate, estimate
from .norms import SobolevWeight, gagliardo_seminorm, pathwise_bounds_check, weighted_space_energy
from .oracle import (
    OracleResult,
    div_case_bound,
    energy_f0zero_stochastic,
    energy_g0_deterministic,
    energy_g0_stochastic,
    gagliardo_g0,
    gagliardo_g0_discrete,
)
from .scaling import ScalingFit, fit_exponent, select_lambda, select_lambda_div
from .solver import AverageTrace, damped_time_energy, solve_trace

__version__ = "0.1.0"

__all__ = [
    "AverageTrace",
    "DampedWeight",
    "DrivingPath",
    "KineticData",
    "NormEstimate",
    "OracleResult",
    "ScalingFit",
    "SobolevWeight",
    "SpectralGrid",
    "TestFunction",
    "VelocityField",
    "build_grid",
    "check_nondegeneracy",
    "damped_time_energy",
    "div_case_bound",
    "energy_f0zero_stochastic",
    "energy_g0_deterministic",
    "energy_g0_stochastic",
    "estimate",
    "fit_exponent",
    "gagliardo_g0",
    "gagliardo_g0_discrete",
    "gagliardo_seminorm",
    "linear_path",
    "make_data",
    "pathwise_bounds_check",
    "sample_path",
    "select_lambda",
    "select_lambda_div",
    "solve_trace",
    "weighted_space_energy",
]
