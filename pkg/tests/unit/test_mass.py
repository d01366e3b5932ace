"""
Tests for mass models, presets and the envelope sampler.
"""

import numpy as np
import pytest

from discretization.mass import (
    EnvelopeSampler,
    MassModel,
    MassModelError,
    MassTerm,
    constant_envelope,
    preset_constant,
    preset_example1,
    preset_example2,
    preset_free,
    quadratic_envelope,
)

pytestmark = pytest.mark.unit


class CountingEnvelope:
    """Time-dependent envelope t * x that counts its evaluations."""

    def __init__(self):
        self.calls = 0

    def __call__(self, grid, t):
        self.calls += 1
        return t * grid.nodes.astype(complex)


class TestPresets:
    def test_example1_matches_closed_form(self, grid):
        model = preset_example1(10.0)
        t = 0.3
        expected = -(1.0 + np.cos(10.0 * t)) * grid.nodes**2
        np.testing.assert_allclose(model.evaluate(grid, t), expected, rtol=1e-12, atol=1e-12)
        assert model.omega_max == 10.0
        assert sorted(model.omegas) == [-10.0, 0.0, 10.0]
        assert model.real_valued

    def test_example1_accepts_zero_frequency(self, grid):
        model = preset_example1(0.0)
        np.testing.assert_allclose(model.evaluate(grid, 1.7), -2.0 * grid.nodes**2, atol=1e-12)

    @pytest.mark.parametrize("omega", [-1.0, np.inf, np.nan])
    def test_example1_rejects_bad_frequency(self, omega):
        with pytest.raises(MassModelError):
            preset_example1(omega)

    def test_example2_matches_closed_form(self, grid):
        model = preset_example2()
        t = 0.123
        expected = -sum(1.0 + np.cos(10.0**n * t) for n in range(6)) * grid.nodes**2
        np.testing.assert_allclose(model.evaluate(grid, t), expected, rtol=1e-11, atol=1e-10)
        assert len(model) == 13
        assert model.omega_max == 1e5

    def test_constant_and_free(self, grid):
        np.testing.assert_allclose(preset_constant().evaluate(grid, 5.0), -1.0)
        np.testing.assert_allclose(preset_free().evaluate(grid, 5.0), 0.0)


class TestMassModel:
    def test_needs_a_term(self):
        with pytest.raises(MassModelError, match="at least one term"):
            MassModel(terms=())

    def test_truncated_keeps_slow_terms(self):
        low = preset_example2().truncated(10.0)
        assert sorted(low.omegas) == [-10.0, -1.0, 0.0, 1.0, 10.0]
        assert preset_example2().truncated(0.5).omega_max == 0.0

    def test_truncated_without_slow_terms(self):
        fast = MassModel(terms=(MassTerm(100.0, constant_envelope(1.0)),))
        with pytest.raises(MassModelError, match="No term"):
            fast.truncated(10.0)

    def test_envelope_length_is_checked(self, grid):
        bad = MassModel(terms=(MassTerm(0.0, lambda g, t: np.zeros(3)),))
        with pytest.raises(MassModelError, match="expected \\(200,\\)"):
            bad.evaluate(grid, 0.0)

    def test_check_negative(self, grid):
        assert preset_example1(10.0).check_negative(grid, 0.4) == 0.0
        assert preset_constant(2.5).check_negative(grid, 0.0) == pytest.approx(2.5)

    def test_quadratic_envelope(self, grid):
        envelope = quadratic_envelope(-0.5)
        np.testing.assert_allclose(envelope(grid, 0.0), -0.5 * grid.nodes**2)


class TestEnvelopeSampler:
    def test_stacks_values_and_rates(self, grid):
        model = preset_example1(10.0)
        samples = EnvelopeSampler(model, grid).sample(0.2)
        assert samples.values.shape == (3, grid.M)
        assert samples.rates.shape == (3, grid.M)
        np.testing.assert_allclose(samples.values[0], -grid.nodes**2)
        assert np.all(samples.rates == 0)

    def test_static_terms_evaluated_once(self, grid):
        counter = CountingEnvelope()
        model = MassModel(terms=(MassTerm(0.0, counter, static=True),))
        sampler = EnvelopeSampler(model, grid)
        for t in (0.0, 0.1, 0.2, 0.3):
            sampler.sample(t)
        assert counter.calls == 1

    def test_dynamic_levels_are_cached(self, grid):
        counter = CountingEnvelope()
        rate = constant_envelope(0.0)
        model = MassModel(terms=(MassTerm(1.0, counter, rate),))
        sampler = EnvelopeSampler(model, grid, capacity=2)

        first = sampler.sample(0.1)
        assert sampler.sample(0.1) is first
        assert counter.calls == 1
        np.testing.assert_allclose(first.values[0], 0.1 * grid.nodes)

        sampler.sample(0.2)
        sampler.sample(0.3)  # evicts 0.1
        sampler.sample(0.1)
        assert counter.calls == 4


def growing_term(omega):
    """Envelope (1 + t^2) x^2 / 2 with its exact time derivative."""

    def envelope(grid, t):
        return (1.0 + t**2) * 0.5 * grid.nodes.astype(complex) ** 2

    def envelope_dt(grid, t):
        return t * grid.nodes.astype(complex) ** 2

    return MassTerm(omega, envelope, envelope_dt)


class TestInvariants:
    @pytest.mark.parametrize("model", [
        preset_example1(10.0),
        preset_example2(),
        preset_constant(),
        MassModel(terms=(MassTerm(0.0, quadratic_envelope(-1.0), static=True),
                         growing_term(50.0), growing_term(-50.0)), name="growing"),
    ], ids=["example1", "example2", "constant", "growing"])
    def test_rates_are_time_derivatives(self, grid, model):
        sampler = EnvelopeSampler(model, grid)
        delta = 1e-5
        for t in (0.0, 0.37, 0.9):
            ahead, behind = sampler.sample(t + delta), sampler.sample(t - delta)
            rates = sampler.sample(t).rates
            for i in range(len(model)):
                difference = (ahead.values[i] - behind.values[i]) / (2 * delta)
                norm = np.linalg.norm(rates[i])
                assert np.linalg.norm(difference - rates[i]) <= 1e-6 * (1.0 + norm)

    def test_dynamic_rates_are_nonzero(self, grid):
        samples = EnvelopeSampler(MassModel(terms=(growing_term(1.0),)), grid).sample(0.5)
        np.testing.assert_allclose(samples.rates[0], 0.5 * grid.nodes**2)

    @pytest.mark.parametrize("model", [preset_example1(1500.0), preset_example2()],
                             ids=["example1", "example2"])
    def test_conjugate_pairs_evaluate_real(self, grid, model):
        for t in np.random.default_rng(3).uniform(0.0, 1.0, size=50):
            m = model.evaluate(grid, t)
            assert np.max(np.abs(m.imag)) <= 1e-13 * (1.0 + np.max(np.abs(m.real)))

    def test_complex_conjugate_envelopes_evaluate_real(self, grid):
        a = 0.3 - 0.7j
        model = MassModel(terms=(
            MassTerm(0.0, quadratic_envelope(-1.0), static=True),
            MassTerm(123.0, quadratic_envelope(a), static=True),
            MassTerm(-123.0, quadratic_envelope(np.conj(a)), static=True),
        ), name="pair")
        for t in np.random.default_rng(4).uniform(0.0, 1.0, size=50):
            m = model.evaluate(grid, t)
            assert np.max(np.abs(m.imag)) <= 1e-13 * (1.0 + np.max(np.abs(m.real)))
