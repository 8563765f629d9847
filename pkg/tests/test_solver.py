import numpy as np
import pytest

from kavlab.brownian import DrivingPath, linear_path, sample_path
from kavlab.fields import KineticData, TestFunction, VelocityField, build_grid, make_data
from kavlab.solver import damped_time_energy, solve_trace

PSI = TestFunction("bump", 1.0)
IDENT = VelocityField("identity")


def frozen_path(grid):
    return DrivingPath(times=grid.times, values=np.zeros_like(grid.times), mode="linear")


class TestSolveTrace:
    def test_frozen_path_constant_trace(self):
        grid = build_grid(1, [[1.0], [3.0]], (-1, 1), 9, 1.0, 16)
        data = make_data(grid, "gaussian_bump")
        tr = solve_trace(grid, data, IDENT, frozen_path(grid), PSI)
        assert np.max(np.abs(tr.values - tr.values[:, :1])) == 0.0

    def test_single_node_modulus_constant(self):
        grid = build_grid(1, [[2.0]], (-1, 1), 9, 1.0, 16)
        f0 = np.zeros((1, 9), dtype=complex)
        f0[0, 3] = 1.0
        data = KineticData(f0_hat=f0)
        tr = solve_trace(grid, data, IDENT, sample_path(grid, 5, 1), PSI)
        mods = np.abs(tr.values[0])
        assert np.allclose(mods, mods[0], rtol=1e-13)

    def test_two_node_cosine(self):
        grid = build_grid(1, [[2.0]], (-1, 1), 9, 1.0, 8)
        data = make_data(grid, "two_point", xi0=0.5)
        tr = solve_trace(grid, data, IDENT, linear_path(grid), PSI)
        i = int(np.argmin(np.abs(grid.velocity_nodes - 0.5)))
        c = grid.velocity_weights[i] * PSI(grid.velocity_nodes[i : i + 1])[0]
        expect = 2.0 * c * np.cos(grid.times * 2.0 * 0.5)
        assert np.max(np.abs(tr.values[0] - expect)) <= 1e-12

    def test_linearity(self):
        grid = build_grid(1, [[1.0], [4.0]], (-1, 1), 9, 1.0, 16)
        d1 = make_data(grid, "gaussian_bump")
        d2 = make_data(grid, "two_point")
        path = sample_path(grid, 17, 3)
        a, b = 2.0 - 1.0j, 0.5
        mix = KineticData(f0_hat=a * d1.f0_hat + b * d2.f0_hat)
        t_mix = solve_trace(grid, mix, IDENT, path, PSI)
        t1 = solve_trace(grid, d1, IDENT, path, PSI)
        t2 = solve_trace(grid, d2, IDENT, path, PSI)
        assert np.allclose(t_mix.values, a * t1.values + b * t2.values, rtol=1e-12, atol=1e-15)

    def test_hermitian_pair_symmetry(self):
        grid = build_grid(1, [[2.0], [-2.0]], (-1, 1), 9, 1.0, 16)
        data = make_data(grid, "gaussian_bump")  # real f0_hat, equal across k
        tr = solve_trace(grid, data, IDENT, sample_path(grid, 8, 0), PSI)
        assert np.allclose(tr.values[1], np.conj(tr.values[0]), rtol=1e-12)

    def test_deterministic_transport_conserves_weighted_mass(self):
        grid = build_grid(1, [[3.0]], (-1, 1), 9, 1.0, 16)
        data = make_data(grid, "gaussian_bump")
        psi_nodes = PSI(grid.velocity_nodes)
        path = linear_path(grid)
        # per (k, xi) the evolved f is f0 times a unimodular phase
        for t, b in zip(grid.times, path.values):
            evolved = data.f0_hat[0] * np.exp(-1j * b * 3.0 * grid.velocity_nodes)
            mass = np.sum(grid.velocity_weights * np.abs(psi_nodes * evolved) ** 2)
            mass0 = np.sum(grid.velocity_weights * np.abs(psi_nodes * data.f0_hat[0]) ** 2)
            assert np.isclose(mass, mass0, rtol=1e-14)

    def test_source_second_order_in_dt(self):
        # smooth source, linear path: Richardson ratio of endpoint errors ~ 4
        def trace_at(n_t):
            grid = build_grid(1, [[2.0]], (-1, 1), 9, 1.0, n_t)
            nodes = grid.velocity_nodes
            prof = np.exp(-((nodes - 0.2) ** 2) / 0.08)
            tt = np.sin(2.0 * grid.times) + 0.5
            g = (prof[None, :, None] * tt[None, None, :]).astype(complex)
            data = KineticData(f0_hat=np.zeros((1, 9), dtype=complex), g_hat=g)
            tr = solve_trace(grid, data, IDENT, linear_path(grid), PSI)
            return tr.values[0, -1]

        ref = trace_at(4096)
        errs = [abs(trace_at(n) - ref) for n in (64, 128, 256)]
        ratios = [errs[i] / errs[i + 1] for i in range(2)]
        assert all(3.0 < r < 5.0 for r in ratios)

    def test_div_split_matches_analytic_divergence(self):
        grid = build_grid(1, [[3.0]], (-1, 1), 257, 2.0, 128)
        data = make_data(grid, "div_source")
        plain = KineticData(f0_hat=data.f0_hat, g_hat=data.dh_dxi)
        path = sample_path(grid, 42, 0)
        t_split = solve_trace(grid, data, IDENT, path, PSI)
        t_plain = solve_trace(grid, plain, IDENT, path, PSI)
        scale = np.max(np.abs(t_plain.values))
        assert np.max(np.abs(t_split.values - t_plain.values)) <= 1e-6 * scale

    def test_div_requires_identity_field(self):
        grid = build_grid(1, [[2.0]], (-1, 1), 9, 1.0, 8)
        data = make_data(grid, "div_source")
        cubic = VelocityField("general", alpha=3.0, lower_const=0.25, curve="cubic")
        with pytest.raises(ValueError):
            solve_trace(grid, data, cubic, sample_path(grid, 1, 0), PSI)

    def test_shape_mismatch_rejected(self):
        grid = build_grid(1, [[2.0]], (-1, 1), 9, 1.0, 8)
        narrower = build_grid(1, [[2.0]], (-1, 1), 11, 1.0, 8)
        with pytest.raises(ValueError):
            solve_trace(grid, make_data(narrower, "gaussian_bump"), IDENT, sample_path(grid, 1, 0), PSI)
        finer_t = build_grid(1, [[2.0]], (-1, 1), 9, 1.0, 16)
        with pytest.raises(ValueError):
            solve_trace(grid, make_data(finer_t, "time_box_source"), IDENT, sample_path(grid, 1, 0), PSI)


class TestDampedEnergy:
    def _unit_trace(self, T, n_t):
        grid = build_grid(1, [[1.0]], (-1, 1), 3, T, n_t)
        values = np.ones((1, n_t + 1), dtype=complex)
        from kavlab.solver import AverageTrace

        return AverageTrace(values=values, times=grid.times, k_mags=grid.k_mags, provenance=("u", "x", 0.0))

    def test_zero_trace(self):
        tr = self._unit_trace(1.0, 8)
        zero = type(tr)(
            values=np.zeros_like(tr.values), times=tr.times, k_mags=tr.k_mags, provenance=tr.provenance
        )
        e, _ = damped_time_energy(zero, 1.0)
        assert e[0] == 0.0

    def test_unit_trace_lambda_zero(self):
        e, flagged = damped_time_energy(self._unit_trace(1.0, 64), 0.0)
        assert np.isclose(e[0], 1.0, rtol=1e-12)
        assert flagged  # undamped horizons always truncate

    def test_unit_trace_half(self):
        e, flagged = damped_time_energy(self._unit_trace(9.0, 8192), 1.0)
        assert abs(e[0] - 0.5) <= 1e-6
        assert not flagged

    def test_negative_lambda_rejected(self):
        with pytest.raises(ValueError):
            damped_time_energy(self._unit_trace(1.0, 8), -0.5)
