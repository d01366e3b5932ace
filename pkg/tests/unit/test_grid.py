"""
Tests for the periodic spectral grid and operator functions.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discretization.grid import (
    FieldState,
    GridError,
    OperatorKind,
    apply_operator_function,
    build_grid,
    free_energy,
    free_propagator,
    l2_distance,
)

pytestmark = pytest.mark.unit


class TestBuildGrid:
    def test_nodes_exclude_right_end(self):
        grid = build_grid(-10.0, 10.0, 200)
        assert grid.nodes[0] == -10.0
        assert grid.dx == pytest.approx(0.1)
        assert grid.nodes[-1] == pytest.approx(10.0 - 0.1)
        assert grid.length == 20.0

    def test_symbols_follow_fft_ordering(self, periodic_grid):
        g = periodic_grid.symbols_g
        assert g[0] == 0.0
        assert g[1] == pytest.approx(1.0)
        assert g[-1] == pytest.approx(1.0)
        assert g[16] == pytest.approx(16.0)  # Nyquist k = -M/2
        assert periodic_grid.g_max == pytest.approx(g.max())

    @pytest.mark.parametrize("M", [3, 2, 7, 0])
    def test_rejects_bad_node_count(self, M):
        with pytest.raises(GridError, match="even integer"):
            build_grid(0.0, 1.0, M)

    def test_rejects_empty_interval(self):
        with pytest.raises(GridError, match="x1 > x0"):
            build_grid(1.0, 1.0, 8)

    def test_arrays_are_read_only(self, grid):
        with pytest.raises(ValueError):
            grid.nodes[0] = 1.0

    def test_length_mismatch(self, grid):
        with pytest.raises(GridError, match="length 200"):
            grid.forward(np.zeros(10))


class TestOperatorFunctions:
    def test_zero_mode_limits(self, grid):
        symbols = grid.operator_symbols(0.37)
        assert symbols.cos[0] == 1.0
        assert symbols.sinc_scaled[0] == pytest.approx(0.37, rel=1e-15)
        assert symbols.g_sin[0] == 0.0

    def test_identity_at_zero_time(self, gaussian, grid):
        np.testing.assert_allclose(
            apply_operator_function(grid, OperatorKind.COS, 0.0, gaussian.psi), gaussian.psi, atol=1e-14
        )
        np.testing.assert_allclose(
            apply_operator_function(grid, OperatorKind.SINC_SCALED, 0.0, gaussian.psi), 0.0, atol=1e-14
        )

    @pytest.mark.parametrize("kind, factor", [
        (OperatorKind.COS, lambda k, t: np.cos(k * t)),
        (OperatorKind.SINC_SCALED, lambda k, t: np.sin(k * t) / k),
        (OperatorKind.G_SIN, lambda k, t: k * np.sin(k * t)),
    ])
    def test_single_mode(self, periodic_grid, kind, factor):
        k, t = 3, 0.7
        mode = np.exp(1j * k * periodic_grid.nodes)
        result = apply_operator_function(periodic_grid, kind, t, mode)
        np.testing.assert_allclose(result, factor(k, t) * mode, atol=1e-13)

    def test_laplacian_of_sine(self, periodic_grid):
        v = np.sin(2 * periodic_grid.nodes)
        np.testing.assert_allclose(periodic_grid.laplacian(v), -4 * v, atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(
        a=st.floats(-3, 3, allow_nan=False),
        b=st.floats(-3, 3, allow_nan=False),
        t=st.floats(0, 2, allow_nan=False),
    )
    def test_linearity(self, a, b, t):
        grid = build_grid(0.0, 2.0 * np.pi, 32)
        u = np.cos(grid.nodes) + 0.5j * np.sin(3 * grid.nodes)
        v = np.exp(np.sin(grid.nodes))
        lhs = apply_operator_function(grid, OperatorKind.SINC_SCALED, t, a * u + b * v)
        rhs = (a * apply_operator_function(grid, OperatorKind.SINC_SCALED, t, u)
               + b * apply_operator_function(grid, OperatorKind.SINC_SCALED, t, v))
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


class TestFreePropagator:
    def test_semigroup(self, grid, gaussian):
        once = free_propagator(grid, 0.7, gaussian)
        twice = free_propagator(grid, 0.3, free_propagator(grid, 0.4, gaussian))
        np.testing.assert_allclose(twice.psi, once.psi, atol=1e-12)
        np.testing.assert_allclose(twice.dpsi, once.dpsi, atol=1e-12)
        assert twice.t == pytest.approx(0.7)

    def test_constant_data_moves_linearly(self, grid):
        state = FieldState(psi=np.full(grid.M, 2.0), dpsi=np.full(grid.M, 0.5))
        out = free_propagator(grid, 1.5, state)
        np.testing.assert_allclose(out.psi, 2.0 + 1.5 * 0.5, atol=1e-13)
        np.testing.assert_allclose(out.dpsi, 0.5, atol=1e-13)

    def test_conserves_free_energy(self, grid, gaussian):
        start = FieldState(psi=gaussian.psi, dpsi=np.sin(np.pi * grid.nodes / 10))
        end = free_propagator(grid, 3.0, start)
        assert free_energy(grid, end) == pytest.approx(free_energy(grid, start), rel=1e-12)


class TestFieldState:
    def test_coerces_to_complex(self):
        state = FieldState(psi=[1.0, 2.0], dpsi=[0.0, 0.0])
        assert state.psi.dtype == complex
        assert state.size == 2

    def test_shape_mismatch(self):
        with pytest.raises(GridError):
            FieldState(psi=np.zeros(4), dpsi=np.zeros(5))

    def test_from_functions_defaults_to_rest(self, grid):
        state = FieldState.from_functions(grid, lambda x: x, t=0.5)
        assert np.all(state.dpsi == 0)
        assert state.t == 0.5

    def test_check_on_other_grid(self, gaussian, periodic_grid):
        with pytest.raises(GridError):
            gaussian.check_on(periodic_grid)

    def test_diagnostics(self):
        state = FieldState(psi=[1.0, 1.0 + 1e-9j], dpsi=[0.0, 2e-9j])
        assert state.imag_drift() == pytest.approx(2e-9)
        assert state.is_finite()
        assert not FieldState(psi=[np.nan, 0.0], dpsi=[0.0, 0.0]).is_finite()


def test_l2_distance_is_unweighted():
    assert l2_distance(np.ones(4)) == pytest.approx(2.0)
    assert l2_distance(np.ones(4), np.zeros(4)) == pytest.approx(2.0)
