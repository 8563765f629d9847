import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kavlab.fields import (
    KineticData,
    TestFunction,
    VelocityField,
    build_grid,
    check_nondegeneracy,
    grid_from_config,
    make_data,
)

PSI = TestFunction("bump", 1.0)


class TestBuildGrid:
    def test_three_node_trapezoid(self):
        g = build_grid(1, [[1.0]], (-1.0, 1.0), 3, 1.0, 2)
        assert np.allclose(g.velocity_nodes, [-1.0, 0.0, 1.0])
        assert np.allclose(g.velocity_weights, [0.5, 1.0, 0.5])
        assert np.allclose(g.times, [0.0, 0.5, 1.0])

    def test_two_node_equal_weights(self):
        g = build_grid(1, [[1.0]], (-1.0, 1.0), 2, 1.0, 2)
        assert np.allclose(g.velocity_weights, [1.0, 1.0])

    def test_degenerate_range_rejected(self):
        with pytest.raises(ValueError):
            build_grid(1, [[1.0]], (0.0, 0.0), 3, 1.0, 2)

    def test_empty_k_list_rejected(self):
        with pytest.raises(ValueError):
            build_grid(1, [], (-1.0, 1.0), 3, 1.0, 2)

    def test_nonpositive_horizon_rejected(self):
        with pytest.raises(ValueError):
            build_grid(1, [[1.0]], (-1.0, 1.0), 3, 0.0, 2)

    def test_range_must_cover_psi_support(self):
        with pytest.raises(ValueError):
            build_grid(1, [[1.0]], (-0.5, 1.0), 9, 1.0, 2, psi=PSI)

    def test_duplicate_wavenumbers_rejected(self):
        with pytest.raises(ValueError):
            build_grid(1, [[1.0], [1.0]], (-1.0, 1.0), 3, 1.0, 2)

    def test_deterministic_construction(self):
        a = build_grid(1, [[1.0], [2.0]], (-1.0, 1.0), 9, 2.0, 16)
        b = build_grid(1, [[1.0], [2.0]], (-1.0, 1.0), 9, 2.0, 16)
        assert np.array_equal(a.velocity_nodes, b.velocity_nodes)
        assert np.array_equal(a.velocity_weights, b.velocity_weights)
        assert np.array_equal(a.times, b.times)

    @given(
        n_xi=st.integers(min_value=2, max_value=200),
        lo=st.floats(min_value=-5.0, max_value=-1.0),
        hi=st.floats(min_value=1.0, max_value=5.0),
    )
    @settings(max_examples=50, deadline=None)
    def test_weights_sum_to_range_length(self, n_xi, lo, hi):
        g = build_grid(1, [[1.0]], (lo, hi), n_xi, 1.0, 2)
        assert np.isclose(g.velocity_weights.sum(), hi - lo, rtol=1e-12)

    def test_2d_tensor_grid(self):
        g = build_grid(2, [[1.0, 0.0], [0.0, 1.0]], (-1.0, 1.0), 5, 1.0, 2)
        assert g.velocity_nodes.shape == (25, 2)
        assert np.isclose(g.velocity_weights.sum(), 4.0)


class TestTestFunction:
    def test_bump_support_and_peak(self):
        psi = TestFunction("bump", 1.0)
        assert psi(np.array([1.0]))[0] == 0.0
        assert psi(np.array([-1.2]))[0] == 0.0
        assert np.isclose(psi(np.array([0.0]))[0], 1.0)

    def test_pure_evaluation(self):
        psi = TestFunction("bump", 0.7)
        x = np.linspace(-1, 1, 11)
        assert np.array_equal(psi(x), psi(x))

    def test_gradient_matches_finite_difference(self):
        psi = TestFunction("bump", 1.0)
        x = np.linspace(-0.9, 0.9, 21)
        h = 1e-6
        fd = (psi(x + h) - psi(x - h)) / (2 * h)
        assert np.allclose(psi.grad(x), fd, atol=1e-6)

    def test_indicator_and_hat(self):
        ind = TestFunction("indicator", 0.5)
        assert ind(np.array([0.4]))[0] == 1.0 and ind(np.array([0.6]))[0] == 0.0
        hat = TestFunction("hat", 1.0)
        assert np.isclose(hat(np.array([0.5]))[0], 0.5)
        assert np.isclose(hat.l1_norm(), 1.0)

    def test_bad_kind(self):
        with pytest.raises(ValueError):
            TestFunction("gauss", 1.0)


class TestVelocityField:
    def test_identity_constraints(self):
        f = VelocityField("identity")
        assert f.alpha == 1.0 and f.lower_const == 1.0
        with pytest.raises(ValueError):
            VelocityField("identity", alpha=2.0)

    def test_dot_k_identity_2d(self):
        f = VelocityField("identity")
        nodes = np.array([[0.5, 0.5], [1.0, -1.0]])
        out = f.dot_k(np.array([2.0, 1.0]), nodes)
        assert np.allclose(out, [1.5, 1.0])

    def test_cubic_curve(self):
        f = VelocityField("general", alpha=3.0, lower_const=0.25, curve="cubic")
        assert np.allclose(f(np.array([2.0])), [8.0])


class TestNondegeneracy:
    def test_identity_gives_one(self):
        a_emp, ok = check_nondegeneracy(VelocityField("identity"), np.linspace(-1, 1, 9))
        assert np.isclose(a_emp, 1.0) and ok

    def test_cubic_quarter_bound(self):
        f = VelocityField("general", alpha=3.0, lower_const=0.25, curve="cubic")
        a_emp, ok = check_nondegeneracy(f, np.linspace(-1.0, 1.0, 41))
        assert a_emp >= 0.25 - 1e-12 and ok

    def test_quadratic_symmetric_collision(self):
        f = VelocityField("general", alpha=1.0, lower_const=1.0, curve="quadratic")
        a_emp, ok = check_nondegeneracy(f, np.array([-1.0, 1.0]))
        assert a_emp == 0.0 and not ok

    def test_needs_two_nodes(self):
        with pytest.raises(ValueError):
            check_nondegeneracy(VelocityField("identity"), np.array([0.0]))

    @given(st.lists(st.floats(min_value=-1, max_value=1), min_size=2, max_size=8, unique=True))
    @settings(max_examples=40, deadline=None)
    def test_monotone_under_node_addition(self, nodes):
        f = VelocityField("general", alpha=3.0, lower_const=1e-9, curve="cubic")
        base = np.sort(np.asarray(nodes))
        a0, _ = check_nondegeneracy(f, base)
        a1, _ = check_nondegeneracy(f, np.concatenate([base, [0.123]]))
        assert a1 <= a0 + 1e-12


class TestKineticData:
    def test_shape_validation(self):
        g = build_grid(1, [[1.0]], (-1, 1), 5, 1.0, 4)
        d = make_data(g, "gaussian_bump")
        d.validate_against(g)
        bad = KineticData(f0_hat=np.zeros((2, 5), dtype=complex))
        with pytest.raises(ValueError):
            bad.validate_against(g)

    def test_single_source_only(self):
        cube = np.zeros((1, 5, 5), dtype=complex)
        with pytest.raises(ValueError):
            KineticData(f0_hat=np.zeros((1, 5), dtype=complex), g_hat=cube, h_hat=cube)

    def test_nonfinite_rejected(self):
        arr = np.full((1, 5), np.nan, dtype=complex)
        with pytest.raises(ValueError):
            KineticData(f0_hat=arr)

    def test_generators(self):
        g = build_grid(1, [[1.0], [2.0]], (-1, 1), 9, 1.0, 8)
        for kind in ("gaussian_bump", "two_point", "time_box_source", "div_source"):
            d = make_data(g, kind)
            d.validate_against(g)
        assert make_data(g, "div_source").source_kind == "div_xi"
        with pytest.raises(ValueError):
            make_data(g, "no_such_generator")


def test_damped_weight():
    from kavlab.fields import DampedWeight

    w = DampedWeight(0.5)
    assert w.require_positive() == 0.5
    with pytest.raises(ValueError):
        DampedWeight(-0.1)
    with pytest.raises(ValueError):
        DampedWeight(0.0).require_positive()


def test_config_construction_round_trip():
    cfg = {
        "dimension": 1,
        "wavenumbers": [[1.0], [2.0]],
        "xi_range": [-1.0, 1.0],
        "n_xi": 9,
        "horizon": 2.0,
        "n_t": 16,
        "psi": {"kind": "bump", "radius": 1.0},
        "field": {"mode": "general", "alpha": 3.0, "A": 0.25, "curve": "cubic"},
    }
    grid, psi, vfield = grid_from_config(cfg)
    assert grid.n_k == 2 and grid.n_xi == 9 and grid.n_t == 16
    assert psi.kind == "bump" and vfield.curve == "cubic"
