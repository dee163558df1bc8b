"""Gaussian-mechanism calibration against high-precision oracles."""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest

from privform import (
    NoiseModel,
    PrivacySpec,
    check_adjacency,
    kappa,
    min_sigma,
    q_function,
    q_inverse,
    sample_privacy_noise,
)
from privform.privacy import kappa_derivative


def oracle_q(y: float) -> float:
    """Tail probability by adaptive quadrature of the density (50 digits)."""
    with mp.workdps(50):
        val = mp.quad(lambda z: mp.exp(-z * z / 2) / mp.sqrt(2 * mp.pi), [y, mp.inf])
        return float(val)


def oracle_quantile(p: float) -> float:
    """Root of Q(y) = p via mpmath's inverse error function (50 digits)."""
    with mp.workdps(50):
        return float(mp.sqrt(2) * mp.erfinv(1 - 2 * mp.mpf(p)))


class TestQFunction:
    def test_symmetry_at_zero(self):
        assert q_function(0.0) == 0.5

    def test_far_tail_vanishes(self):
        assert q_function(40.0) < 1e-300

    def test_matches_integration_oracle(self):
        # oracle_q(1.6449) = 0.04999, i.e. 0.05 to 4 decimal places
        assert q_function(1.6449) == pytest.approx(oracle_q(1.6449), abs=1e-12)
        assert round(q_function(1.6449), 4) == 0.05

    @pytest.mark.parametrize("y", [-3.0, -0.7, 0.3, 1.0, 2.5, 6.0])
    def test_absolute_accuracy(self, y):
        assert abs(q_function(y) - oracle_q(y)) <= 1e-12


class TestQInverse:
    def test_median(self):
        assert q_inverse(0.5) == 0.0

    def test_round_trip_identity(self):
        assert q_inverse(q_function(1.234)) == pytest.approx(1.234, abs=1e-9)

    def test_known_quantile(self):
        assert q_inverse(0.05) == pytest.approx(oracle_quantile(0.05), abs=1e-9)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
    def test_domain_errors(self, p):
        with pytest.raises(ValueError):
            q_inverse(p)

    def test_round_trip_on_log_grid(self):
        for p in np.geomspace(1e-8, 0.49, 60):
            assert abs(q_function(q_inverse(float(p))) - p) <= 1e-10


class TestKappa:
    def test_reference_value(self):
        k = oracle_quantile(0.05)
        expected = (k + math.sqrt(k * k + 2.0)) / 2.0
        assert kappa(0.05, 1.0) == pytest.approx(expected, abs=1e-10)
        assert kappa(0.05, 1.0) == pytest.approx(1.9070, abs=1e-4)

    def test_lower_bound_from_quantile(self):
        for delta in (0.01, 0.05, 0.2):
            for eps in (0.1, 1.0, 5.0):
                assert kappa(delta, eps) >= q_inverse(delta) / (2 * eps)

    def test_monotone_decreasing_in_epsilon(self):
        assert kappa(0.05, 0.1) > kappa(0.05, 0.5) > kappa(0.05, 1.0)

    def test_monotone_on_full_grid(self):
        deltas = np.linspace(0.01, 0.49, 100)
        epsilons = np.geomspace(0.01, 10.0, 100)
        table = np.array(
            [[kappa(float(d), float(e)) for e in epsilons] for d in deltas]
        )
        assert np.all(np.diff(table, axis=1) < 0), "decreasing in epsilon"
        assert np.all(np.diff(table, axis=0) < 0), "increasing as delta -> 0"

    def test_derivative_matches_finite_differences(self):
        for eps in (0.05, 0.4, 2.0):
            h = 1e-7 * eps
            fd = (kappa(0.05, eps + h) - kappa(0.05, eps - h)) / (2 * h)
            assert kappa_derivative(0.05, eps) == pytest.approx(fd, rel=1e-6)

    @pytest.mark.parametrize("delta,eps", [(0.0, 1.0), (0.5, 1.0), (0.05, 0.0), (0.05, -1.0)])
    def test_domain_errors(self, delta, eps):
        with pytest.raises(ValueError):
            kappa(delta, eps)


class TestMinSigma:
    def test_reference_value(self):
        spec = PrivacySpec(epsilon=1.0, delta=0.05, adjacency_bound=1.0)
        assert min_sigma(spec) == pytest.approx(1.9070, abs=1e-4)

    def test_linear_in_adjacency_bound(self):
        one = min_sigma(PrivacySpec(1.0, 0.05, 1.0))
        two = min_sigma(PrivacySpec(1.0, 0.05, 2.0))
        assert two == 2.0 * one

    def test_weak_privacy_limit(self):
        assert min_sigma(PrivacySpec(1e6, 0.05, 1.0)) < 0.01

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            PrivacySpec(-1.0, 0.05, 1.0)
        with pytest.raises(ValueError):
            PrivacySpec(1.0, 0.6, 1.0)
        with pytest.raises(ValueError):
            PrivacySpec(1.0, 0.05, 0.0)


class TestNoiseModel:
    def test_from_specs_sets_exact_equality(self):
        specs = [PrivacySpec(0.5, 0.05, 1.0), PrivacySpec(1.0, 0.01, 2.0)]
        model = NoiseModel.from_specs(specs, [0.1, 0.2])
        for i, spec in enumerate(specs):
            assert model.privacy_sigmas[i] == min_sigma(spec)

    def test_undershooting_sigma_rejected(self):
        spec = PrivacySpec(1.0, 0.05, 1.0)
        with pytest.raises(ValueError, match="below calibrated"):
            NoiseModel([1.0], [0.0], specs=[spec])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            NoiseModel([1.0, 2.0], [0.0])


class TestSampling:
    def test_zero_sigma_gives_zero_vector(self):
        rng = np.random.default_rng(0)
        assert np.array_equal(sample_privacy_noise(0.0, 4, rng), np.zeros(4))

    def test_deterministic_for_fixed_seed(self):
        a = sample_privacy_noise(1.5, 6, np.random.default_rng(42))
        b = sample_privacy_noise(1.5, 6, np.random.default_rng(42))
        assert np.array_equal(a, b)

    def test_moments_of_large_sample(self):
        rng = np.random.default_rng(2024)
        draws = np.concatenate(
            [sample_privacy_noise(2.0, 1000, rng) for _ in range(1000)]
        )
        assert draws.size == 1_000_000
        assert 3.98 <= draws.var() <= 4.02
        assert abs(draws.mean()) <= 5 * 2.0 / 1e3

    def test_domain_errors(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            sample_privacy_noise(-1.0, 3, rng)
        with pytest.raises(ValueError):
            sample_privacy_noise(1.0, 0, rng)


class TestAdjacency:
    def test_identical_trajectories(self):
        v = np.ones((10, 2))
        assert check_adjacency(v, v, 1e-6)

    def test_boundary_exceeded(self):
        assert not check_adjacency([0.0], [1.001], 1.0)

    def test_inclusive_boundary(self):
        # ||(0.6, 0.8)|| is exactly 1 and <= is inclusive
        assert check_adjacency([0.0, 0.0], [0.6, 0.8], 1.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="shapes differ"):
            check_adjacency([0.0, 0.0], [0.0], 1.0)

    def test_nonpositive_bound(self):
        with pytest.raises(ValueError):
            check_adjacency([0.0], [0.0], 0.0)
