"""Numba kernels against their pure-numpy twins."""

import numpy as np
import pytest

from kavlab import _accel

RNG = np.random.default_rng(123)


def _case(nk=3, nx=9, nt=33):
    cw = RNG.normal(size=(nk, nx)) + 1j * RNG.normal(size=(nk, nx))
    freq = RNG.normal(size=(nk, nx)) * 3.0
    times = np.linspace(0.0, 2.0, nt)
    b = np.concatenate([[0.0], np.cumsum(RNG.normal(size=nt - 1) * np.sqrt(np.diff(times)))])
    return cw, freq, times, b


needs_numba = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba backend disabled")


@needs_numba
class TestBackendEquivalence:
    def setup_method(self):
        self.nb = _accel.impls("numba")
        self.np_ = _accel.impls("numpy")

    def test_trace_g0_generic(self):
        cw, freq, times, b = _case()
        a = self.nb["trace_g0_generic"](cw, freq, b)
        c = self.np_["trace_g0_generic"](cw, freq, b)
        assert np.allclose(a, c, rtol=1e-12, atol=1e-14)

    def test_trace_g0_uniform(self):
        cw, _, times, b = _case()
        kv = np.array([1.0, 2.0, 5.0])
        a = self.nb["trace_g0_uniform"](cw, kv, -1.0, 0.25, b)
        c = self.np_["trace_g0_uniform"](cw, kv, -1.0, 0.25, b)
        assert np.allclose(a, c, rtol=1e-11, atol=1e-13)

    def test_uniform_consistent_with_generic(self):
        cw, _, times, b = _case()
        kv = np.array([1.0, 2.0, 5.0])
        nodes = -1.0 + 0.25 * np.arange(cw.shape[1])
        freq = kv[:, None] * nodes[None, :]
        a = self.nb["trace_g0_uniform"](cw, kv, -1.0, 0.25, b)
        c = self.nb["trace_g0_generic"](cw, freq, b)
        assert np.allclose(a, c, rtol=1e-10, atol=1e-12)

    def test_trace_source(self):
        cw, freq, times, b = _case()
        gw = RNG.normal(size=(3, 9, 33)) + 1j * RNG.normal(size=(3, 9, 33))
        dt = times[1] - times[0]
        a = self.nb["trace_source_generic"](gw, freq, b, dt)
        c = self.np_["trace_source_generic"](gw, freq, b, dt)
        assert np.allclose(a, c, rtol=1e-12, atol=1e-14)

    def test_trace_div_extra(self):
        cw, freq, times, b = _case()
        hw = RNG.normal(size=(3, 9, 33)) + 1j * RNG.normal(size=(3, 9, 33))
        kv = np.array([1.0, 2.0, 5.0])
        dt = times[1] - times[0]
        a = self.nb["trace_div_extra"](hw, freq, kv, b, dt)
        c = self.np_["trace_div_extra"](hw, freq, kv, b, dt)
        assert np.allclose(a, c, rtol=1e-12, atol=1e-13)

    def test_damped_energy(self):
        cw, freq, times, b = _case()
        rho = RNG.normal(size=(3, 33)) + 1j * RNG.normal(size=(3, 33))
        a = self.nb["damped_energy"](rho, times, 0.7)
        c = self.np_["damped_energy"](rho, times, 0.7)
        assert np.allclose(a, c, rtol=1e-13)

    def test_gagliardo_direct(self):
        times = np.linspace(0.0, 1.0, 65)
        u = RNG.normal(size=65) + 1j * RNG.normal(size=65)
        a = self.nb["gagliardo_direct"](u, times, 0.3)
        c = self.np_["gagliardo_direct"](u, times, 0.3)
        assert np.isclose(a, c, rtol=1e-12)

    def test_double_sums(self):
        cw = RNG.normal(size=17) + 1j * RNG.normal(size=17)
        ka = RNG.normal(size=17) * 4.0
        for name, args in [
            ("stoch_double_sum", (cw, ka, 0.6)),
            ("stoch_double_sum_horizon", (cw, ka, 0.0, 3.0)),
            ("det_double_sum", (cw, ka, 0.6)),
        ]:
            a = self.nb[name](cw, ka, *args[2:])
            c = self.np_[name](cw, ka, *args[2:])
            assert np.isclose(a, c, rtol=1e-12), name

    def test_f0zero_oracle(self):
        gw = RNG.normal(size=(9, 33)) + 1j * RNG.normal(size=(9, 33))
        wts = np.full(9, 0.25)
        times = np.linspace(0.0, 2.0, 33)
        ka = RNG.normal(size=9) * 3.0
        for inf_t, lam in ((True, 0.8), (False, 0.0), (False, 0.5)):
            a = self.nb["f0zero_oracle"](gw, wts, times, ka, lam, inf_t)
            c = self.np_["f0zero_oracle"](gw, wts, times, ka, lam, inf_t)
            assert np.isclose(a, c, rtol=1e-11), (inf_t, lam)

    def test_gagliardo_expectation(self):
        cw = RNG.normal(size=7) + 1j * RNG.normal(size=7)
        ka = RNG.normal(size=7) * 2.0
        times = np.linspace(0.0, 3.0, 129)
        a = self.nb["gagliardo_expectation"](cw, ka, times, 0.9, 0.25)
        c = self.np_["gagliardo_expectation"](cw, ka, times, 0.9, 0.25)
        assert np.isclose(a, c, rtol=1e-11)


def test_uniform_pair_sum_matches_double_sum():
    n = 101
    cw = RNG.normal(size=n) + 1j * RNG.normal(size=n)
    dxi, kmag, lam = 0.02, 3.0, 0.4
    ka = kmag * dxi * np.arange(n)
    gaps = kmag * dxi * np.arange(n)
    row_s = (2.0 / (4.0 * lam + gaps**2)).astype(np.complex128)
    fast = _accel.uniform_pair_sum(cw, row_s)
    direct = _accel.stoch_double_sum(np.ascontiguousarray(cw), ka, lam)
    assert np.isclose(fast, direct, rtol=1e-11)
    row_d = 1.0 / (2.0 * lam - 1j * gaps)
    fast_d = _accel.uniform_pair_sum(cw, row_d)
    direct_d = _accel.det_double_sum(np.ascontiguousarray(cw), ka, lam)
    assert np.isclose(fast_d, direct_d, rtol=1e-11)


def test_gagliardo_expectation_against_mc():
    # tiny Monte-Carlo cross-check of the exact discrete expectation
    from kavlab.brownian import sample_path
    from kavlab.fields import TestFunction, VelocityField, build_grid, make_data
    from kavlab.norms import gagliardo_seminorm
    from kavlab.oracle import gagliardo_g0_discrete
    from kavlab.solver import solve_trace

    psi = TestFunction("bump", 1.0)
    grid = build_grid(1, [[3.0]], (-1, 1), 9, 2.0, 64)
    data = make_data(grid, "gaussian_bump")
    lam, beta = 1.0, 0.3
    exact = gagliardo_g0_discrete(grid, data, VelocityField("identity"), psi, lam, beta).per_k[0]
    vals = []
    for i in range(800):
        tr = solve_trace(grid, data, VelocityField("identity"), sample_path(grid, 31, i), psi)
        u = np.exp(-lam * grid.times) * tr.values[0]
        vals.append(gagliardo_seminorm(u, grid.times, beta))
    mc = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / np.sqrt(len(vals)))
    assert abs(mc - exact) <= 4.0 * se
