import math

import numpy as np
import pytest
from scipy.integrate import dblquad

from kavlab import _accel
from kavlab.fields import KineticData, TestFunction, VelocityField, build_grid, make_data
from kavlab.kernels import multiplier_stochastic
from kavlab.oracle import (
    div_case_bound,
    energy_f0zero_stochastic,
    energy_g0_deterministic,
    energy_g0_stochastic,
    expected_duhamel_l2,
    gagliardo_g0,
    gagliardo_g0_discrete,
    psi_f0_norm_sq,
)

PSI = TestFunction("bump", 1.0)
IDENT = VelocityField("identity")
CUBIC = VelocityField("general", alpha=3.0, lower_const=0.25, curve="cubic")


def unit_coefficient_data(grid, node_index, k_rows=None):
    """f0 with w * psi * f0 = 1 at one velocity node, 0 elsewhere."""
    f0 = np.zeros((grid.n_k, grid.n_xi), dtype=complex)
    w = grid.velocity_weights[node_index]
    p = PSI(grid.velocity_nodes[node_index : node_index + 1])[0]
    rows = range(grid.n_k) if k_rows is None else k_rows
    for i in rows:
        f0[i, node_index] = 1.0 / (w * p)
    return KineticData(f0_hat=f0)


class TestG0Stochastic:
    def test_single_node_half(self):
        grid = build_grid(1, [[2.0]], (-1, 1), 9, 1.0, 2)
        data = unit_coefficient_data(grid, 4)
        val = energy_g0_stochastic(grid, data, IDENT, PSI, 1.0).per_k[0]
        assert np.isclose(val, 0.5, rtol=1e-12)

    def test_two_node_hand_sum(self):
        # diagonal 2 * [2/(4 lam)] = 4, off-diagonal 2 * [2/(4 lam + 1)] = 2
        cw = np.array([1.0 + 0j, 1.0 + 0j])
        ka = np.array([0.0, 1.0])
        assert np.isclose(_accel.stoch_double_sum(cw, ka, 0.25), 6.0, rtol=1e-14)

    def test_monotone_in_lambda(self):
        grid = build_grid(1, [[3.0]], (-1, 1), 17, 1.0, 2)
        data = make_data(grid, "gaussian_bump")
        vals = [energy_g0_stochastic(grid, data, IDENT, PSI, lam).per_k[0] for lam in (0.25, 0.5, 1.0, 2.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_identity_field_routes_agree(self):
        grid = build_grid(1, [[3.0]], (-1, 1), 17, 1.0, 2)
        data = make_data(grid, "gaussian_bump")
        gen = energy_g0_stochastic(grid, data, VelocityField("identity"), PSI, 0.7).per_k[0]
        psi_nodes = PSI(grid.velocity_nodes)
        cw = grid.velocity_weights * psi_nodes * data.f0_hat[0]
        direct = _accel.stoch_double_sum(np.ascontiguousarray(cw), 3.0 * grid.velocity_nodes, 0.7)
        assert np.isclose(gen, direct, rtol=1e-13)

    def test_autocorr_path_matches_direct(self):
        grid = build_grid(1, [[5.0]], (-1, 1), 1025, 1.0, 2, psi=PSI)
        data = make_data(grid, "gaussian_bump")
        fast = energy_g0_stochastic(grid, data, IDENT, PSI, 0.5).per_k[0]
        psi_nodes = PSI(grid.velocity_nodes)
        cw = np.ascontiguousarray(grid.velocity_weights * psi_nodes * data.f0_hat[0])
        direct = _accel.stoch_double_sum(cw, 5.0 * grid.velocity_nodes, 0.5)
        assert np.isclose(fast, direct, rtol=1e-11)

    def test_hermitian_real_result(self):
        grid = build_grid(1, [[2.0]], (-1, 1), 9, 1.0, 2)
        rng = np.random.default_rng(0)
        cw = rng.normal(size=9) + 1j * rng.normal(size=9)
        ka = 2.0 * grid.velocity_nodes
        full = sum(
            cw[i] * np.conj(cw[j]) * multiplier_stochastic(0.8, (ka[i] - ka[j]) ** 2)
            for i in range(9)
            for j in range(9)
        )
        assert abs(full.imag) <= 1e-10 * abs(full.real)

    def test_horizon_version_matches_quadrature(self):
        grid = build_grid(1, [[2.0]], (-1, 1), 9, 1.0, 2)
        data = make_data(grid, "gaussian_bump")
        T = 3.0
        val = energy_g0_stochastic(grid, data, IDENT, PSI, 0.0, horizon=T).per_k[0]
        psi_nodes = PSI(grid.velocity_nodes)
        cw = grid.velocity_weights * psi_nodes * data.f0_hat[0]
        ka = 2.0 * grid.velocity_nodes
        t = np.linspace(0.0, T, 20001)
        brute = 0.0
        for i in range(9):
            for j in range(9):
                q = (ka[i] - ka[j]) ** 2
                brute += (cw[i] * np.conj(cw[j])).real * np.trapezoid(np.exp(-0.5 * q * t), t)
        assert np.isclose(val, brute, rtol=1e-7)

    def test_requires_source_free(self):
        grid = build_grid(1, [[2.0]], (-1, 1), 9, 1.0, 8)
        data = make_data(grid, "time_box_source")
        with pytest.raises(ValueError):
            energy_g0_stochastic(grid, data, IDENT, PSI, 1.0)

    def test_lambda_validation(self):
        grid = build_grid(1, [[2.0]], (-1, 1), 9, 1.0, 2)
        data = make_data(grid, "gaussian_bump")
        with pytest.raises(ValueError):
            energy_g0_stochastic(grid, data, IDENT, PSI, 0.0)


class TestG0Deterministic:
    def test_single_node(self):
        grid = build_grid(1, [[2.0]], (-1, 1), 9, 1.0, 2)
        data = unit_coefficient_data(grid, 4)
        val = energy_g0_deterministic(grid, data, PSI, 1.0).per_k[0]
        assert np.isclose(val, 0.5, rtol=1e-12)

    def test_real_nonnegative(self):
        grid = build_grid(1, [[4.0]], (-1, 1), 17, 1.0, 2)
        data = make_data(grid, "gaussian_bump")
        for lam in (0.1, 1.0, 5.0):
            assert energy_g0_deterministic(grid, data, PSI, lam).per_k[0] >= -1e-12

    def test_autocorr_matches_direct(self):
        grid = build_grid(1, [[4.0]], (-1, 1), 1025, 1.0, 2)
        data = make_data(grid, "gaussian_bump")
        fast = energy_g0_deterministic(grid, data, PSI, 0.3).per_k[0]
        psi_nodes = PSI(grid.velocity_nodes)
        cw = np.ascontiguousarray(grid.velocity_weights * psi_nodes * data.f0_hat[0])
        direct = _accel.det_double_sum(cw, 4.0 * grid.velocity_nodes, 0.3)
        assert np.isclose(fast, direct, rtol=1e-10)

    def test_operator_norm_lambda_uniform(self):
        # Toeplitz symbol of the discrete convolution: |k| * norm stays
        # bounded uniformly as lambda drops (the Calderon-Zygmund content,
        # checked on lambda-resolving finite grids only)
        kmag = 4.0
        sups = []
        for lam in (1e-2, 1e-3, 1e-4):
            n = 2 * math.ceil(2.0 / (lam / kmag / 4.0)) + 1
            dxi = 2.0 / (n - 1)
            gaps = kmag * dxi * np.arange(-(n - 1), n)
            kern = 1.0 / (2.0 * lam - 1j * gaps) * dxi
            symbol = np.abs(np.fft.fft(np.fft.ifftshift(kern))).max()
            sups.append(kmag * symbol)
        assert max(sups) <= 2.0 * math.pi * 1.25  # Gibbs-level slack
        assert max(sups) / min(sups) <= 1.3


class TestF0Zero:
    def test_zero_source(self):
        grid = build_grid(1, [[2.0]], (-1, 1), 9, 1.0, 8)
        g = np.zeros((1, 9, 9), dtype=complex)
        data = KineticData(f0_hat=np.zeros((1, 9), dtype=complex), g_hat=g)
        assert energy_f0zero_stochastic(grid, data, IDENT, PSI, 1.0).per_k[0] == 0.0

    def test_single_node_vs_dblquad(self):
        lam, k, xi0 = 0.7, 3.0, 0.4
        grid = build_grid(1, [[k]], (-1, 1), 9, 1.0, 512)
        i0 = int(np.argmin(np.abs(grid.velocity_nodes - xi0)))
        g = np.zeros((1, grid.n_xi, grid.n_t + 1), dtype=complex)
        g[0, i0, :] = 1.0
        data = KineticData(f0_hat=np.zeros((1, grid.n_xi), dtype=complex), g_hat=g)
        val = energy_f0zero_stochastic(grid, data, IDENT, PSI, lam).per_k[0]
        w = grid.velocity_weights[i0]
        p = PSI(grid.velocity_nodes[i0 : i0 + 1])[0]
        pph = k * grid.velocity_nodes[i0]
        pref = w * w * p * p * 2.0 / (4.0 * lam)
        f = lambda t2, t1: np.exp(-lam * (t1 + t2)) * np.exp(-(t1 - t2) * (2 * lam + pph**2) / 2)
        inner, _ = dblquad(f, 0, 1, 0, lambda t1: t1, epsabs=1e-12)
        exact = 2.0 * pref * inner
        assert abs(val - exact) / exact <= 0.005

    def test_requires_source(self):
        grid = build_grid(1, [[2.0]], (-1, 1), 9, 1.0, 8)
        data = make_data(grid, "gaussian_bump")
        with pytest.raises(ValueError):
            energy_f0zero_stochastic(grid, data, IDENT, PSI, 1.0)

    def test_gemm_route_matches_kernel(self):
        grid = build_grid(1, [[7.0]], (-1, 1), 33, 3.0, 128)
        data = make_data(grid, "time_box_source")
        via_gemm = energy_f0zero_stochastic(grid, data, IDENT, PSI, 0.7).per_k[0]
        psin = PSI(grid.velocity_nodes)
        gw = np.ascontiguousarray(psin[:, None] * data.g_hat[0])
        via_kernel = _accel.f0zero_oracle(
            gw, grid.velocity_weights, grid.times, 7.0 * grid.velocity_nodes, 0.7, True
        )
        assert np.isclose(via_gemm, via_kernel, rtol=1e-12)


class TestGagliardoOracles:
    def test_single_node_reduction(self):
        grid = build_grid(1, [[2.0]], (-1, 1), 9, 1.0, 2)
        data = unit_coefficient_data(grid, 6)
        lam, beta = 0.8, 0.25
        val = gagliardo_g0(grid, data, IDENT, PSI, lam, beta).per_k[0]
        p = 2.0 * grid.velocity_nodes[6]
        from kavlab.kernels import bracket_closed_form

        pair = 4.0 / (4.0 * lam) * float(bracket_closed_form(lam, p, p, 0.0, beta))
        assert np.isclose(val, pair, rtol=1e-12)

    def test_zero_data(self):
        grid = build_grid(1, [[2.0]], (-1, 1), 9, 1.0, 2)
        data = KineticData(f0_hat=np.zeros((1, 9), dtype=complex))
        assert gagliardo_g0(grid, data, IDENT, PSI, 1.0, 0.25).per_k[0] == 0.0

    def test_quadrature_route_agrees(self):
        grid = build_grid(1, [[3.0]], (-1, 1), 9, 1.0, 2)
        data = make_data(grid, "gaussian_bump")
        cf = gagliardo_g0(grid, data, IDENT, PSI, 1.0, 0.3).per_k[0]
        qd = gagliardo_g0(grid, data, IDENT, PSI, 1.0, 0.3, method="quadrature").per_k[0]
        assert np.isclose(cf, qd, rtol=1e-9)

    def test_discrete_expectation_converges_to_continuum(self):
        lam, beta = 1.0, 0.25
        cont = None
        prev = -np.inf
        for nt in (256, 512, 1024):
            grid = build_grid(1, [[4.0]], (-1, 1), 17, 6.914, nt)
            data = make_data(grid, "gaussian_bump")
            disc = gagliardo_g0_discrete(grid, data, IDENT, PSI, lam, beta).per_k[0]
            if cont is None:
                cont = gagliardo_g0(grid, data, IDENT, PSI, lam, beta).per_k[0]
            assert prev < disc <= cont
            prev = disc

    def test_beta_validation(self):
        grid = build_grid(1, [[2.0]], (-1, 1), 9, 1.0, 2)
        data = make_data(grid, "gaussian_bump")
        with pytest.raises(ValueError):
            gagliardo_g0(grid, data, IDENT, PSI, 1.0, 0.6)


class TestDuhamelNorm:
    def test_against_brute_force(self):
        grid = build_grid(1, [[2.0]], (-1, 1), 5, 1.5, 256)
        nodes = grid.velocity_nodes
        prof = np.exp(-((nodes - 0.2) ** 2) / 0.1)
        tt = np.exp(-grid.times)
        cube = (prof[:, None] * tt[None, :]).astype(complex)
        psin = PSI(nodes)
        val = expected_duhamel_l2(grid, cube, 2.0 * nodes, psin)
        # brute force: per xi, iint g(s1) g(s2) e^{-|s1-s2| p^2/2} (T - max)
        T = grid.horizon
        brute = 0.0
        for x in range(5):
            p2 = (2.0 * nodes[x]) ** 2 / 2.0
            f = lambda s2, s1: (
                prof[x] ** 2
                * math.exp(-s1 - s2)
                * math.exp(-abs(s1 - s2) * p2)
                * (T - max(s1, s2))
            )
            inner, _ = dblquad(f, 0, T, 0, T, epsabs=1e-10)
            brute += grid.velocity_weights[x] * psin[x] ** 2 * inner
        assert abs(val - brute) / brute <= 2e-3


class TestDivBound:
    def test_zero_data(self):
        grid = build_grid(1, [[2.0]], (-1, 1), 9, 1.0, 8)
        z = np.zeros((1, 9, 9), dtype=complex)
        data = KineticData(f0_hat=np.zeros((1, 9), dtype=complex), h_hat=z, dh_dxi=z)
        bound, comp = div_case_bound(grid, data, PSI, 0)
        assert bound == 0.0 and comp["main"] == 0.0

    def test_balance_rule_components(self):
        grid = build_grid(1, [[8.0]], (-1, 1), 17, 2.0, 64)
        data = make_data(grid, "div_source")
        bound, comp = div_case_bound(grid, data, PSI, 0)
        assert np.isclose(comp["lambda"], 4.0)  # 8^{2/3}
        assert bound > comp["grad"] > 0.0

    def test_fixed_norm_power_law(self):
        grid = build_grid(1, [[k] for k in (2.0, 4.0, 8.0)], (-1, 1), 17, 2.0, 64)
        data = make_data(grid, "div_source")
        mains = []
        for i in range(3):
            _, comp = div_case_bound(grid, data, PSI, i, f_norm_sq=1.0, h_norm_sq=1.0, grad_norm_sq=0.0)
            mains.append(comp["main"])
        kmags = grid.k_mags
        for i in range(2):
            ratio = mains[i + 1] / mains[i]
            assert np.isclose(ratio, (kmags[i + 1] / kmags[i]) ** (-2.0 / 3.0), rtol=1e-12)


def test_psi_f0_norm():
    grid = build_grid(1, [[1.0]], (-1, 1), 9, 1.0, 2)
    data = unit_coefficient_data(grid, 4)
    w = grid.velocity_weights[4]
    assert np.isclose(psi_f0_norm_sq(grid, data, PSI)[0], 1.0 / w, rtol=1e-12)
