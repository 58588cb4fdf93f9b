"""Infinite-server queue: simulation invariants and Laplace-transform
analytics for the first return time and busy period."""

import dataclasses
import math

import numpy as np
import pytest
from scipy.integrate import quad

from hawkes_renewal import (
    ServiceModel,
    first_return_times,
    hitting_after_bound,
    simulate_mg_infty,
    tail_rate,
    takacs_laplace_B,
    takacs_laplace_T1,
    theta_abscissa,
)

DET1 = ServiceModel.deterministic(1.0)


def _j_integral(lam, service, s):
    """Independent quadrature oracle for the condition integral
    lam * int_0^inf (1-G(t)) exp(-s t - lam int_0^t (1-G)) dt."""
    def inner(t):
        if service.kind == "deterministic":
            d = service.duration
            tail = 1.0 if t < d else 0.0
            cum = min(t, d)
        else:
            mu = service.rate
            tail = math.exp(-mu * t)
            cum = (1.0 - math.exp(-mu * t)) / mu
        return lam * tail * math.exp(-s * t - lam * cum)

    val, _ = quad(inner, 0.0, 60.0, limit=400)
    return val


class TestServiceModel:
    def test_deterministic_moments(self):
        assert DET1.mean() == 1.0
        assert DET1.tail(0.5) == 1.0
        assert DET1.tail(1.0) == 0.0
        assert DET1.tail_rate == math.inf

    def test_exponential_declares_its_rate(self):
        sv = ServiceModel.exponential(2.0)
        assert sv.mean() == 0.5
        assert sv.tail(1.0) == pytest.approx(math.exp(-2.0), rel=1e-12)
        assert sv.tail_rate == 2.0

    def test_empirical_sorted_and_mean(self):
        sv = ServiceModel.empirical([3.0, 1.0, 2.0])
        assert sv.samples == (1.0, 2.0, 3.0)
        assert sv.mean() == 2.0
        assert sv.tail(2.0) == pytest.approx(1.0 / 3.0, rel=1e-12)

    def test_empirical_of_constant_matches_deterministic_transform(self):
        sv = ServiceModel.empirical([1.0] * 5)
        for s in (0.5, 1.0, -0.3):
            assert takacs_laplace_T1(1.0, sv, s) == pytest.approx(
                takacs_laplace_T1(1.0, DET1, s), rel=1e-12)

    def test_sampling_deterministic(self):
        rng = np.random.default_rng(0)
        assert np.all(DET1.sample(rng, 5) == 1.0)


class TestSimulateMgInfty:
    def test_counts_nonnegative_and_zero_at_returns(self):
        traj = simulate_mg_infty(1.0, DET1, 500.0, seed=3)
        grid = np.linspace(0.0, 500.0, 2001)
        assert np.all(traj.count_at(grid) >= 0)
        assert np.all(traj.count_at(traj.return_times) == 0)
        assert np.all(traj.count_before(traj.return_times) > 0)

    def test_empty_fraction_hand_value(self):
        # stationary void probability exp(-lam E[H]) = 1/e
        traj = simulate_mg_infty(1.0, DET1, 1e5, seed=11)
        frac = traj.fraction_empty()
        assert abs(frac - math.exp(-1.0)) < 0.01

    def test_zero_service_degenerates(self):
        sv = ServiceModel.deterministic(0.0)
        traj = simulate_mg_infty(1.0, sv, 200.0, seed=5)
        assert np.array_equal(traj.return_times, traj.arrivals)
        assert np.all(traj.busy_periods == 0.0)
        assert traj.fraction_empty() == pytest.approx(1.0, rel=1e-9)

    def test_final_busy_period_certified_by_horizon(self):
        traj = simulate_mg_infty(1.0, DET1, 50.0, seed=7)
        assert np.all(traj.return_times <= 50.0)


class TestFirstReturnTimes:
    def test_mean_t1_hand_value(self):
        # E[T1] = exp(lam E[H]) / lam = e for lam = 1, H = 1
        _, t1 = first_return_times(1.0, DET1, 20000, seed=13)
        se = np.std(t1, ddof=1) / math.sqrt(t1.size)
        assert abs(np.mean(t1) - math.e) <= 3.0 * se

    def test_zero_service_t1_equals_v1(self):
        sv = ServiceModel.deterministic(0.0)
        v1, t1 = first_return_times(1.0, sv, 500, seed=2)
        assert np.array_equal(v1, t1)
        assert abs(np.mean(t1) - 1.0) <= 3.0 * np.std(t1, ddof=1) / math.sqrt(500)

    def test_arrival_and_busy_period_uncorrelated(self):
        v1, t1 = first_return_times(1.0, DET1, 20000, seed=19)
        b = t1 - v1
        r = np.corrcoef(v1, b)[0, 1]
        assert abs(r) <= 3.0 / math.sqrt(v1.size)


class TestTakacsTransforms:
    def test_t1_hand_value(self):
        # lam=1, deterministic 1, s=1: 1 - J = (1 + e^-2)/2, giving 1/(1+e^2)
        expected = 1.0 / (1.0 + math.exp(2.0))
        assert takacs_laplace_T1(1.0, DET1, 1.0) == pytest.approx(expected,
                                                                  rel=1e-9)

    def test_b_hand_value(self):
        expected = 2.0 / (1.0 + math.exp(2.0))
        assert takacs_laplace_B(1.0, DET1, 1.0) == pytest.approx(expected,
                                                                 rel=1e-9)

    def test_total_mass_at_zero(self):
        assert takacs_laplace_T1(1.0, DET1, 0.0) == 1.0
        assert takacs_laplace_B(1.0, DET1, 0.0) == 1.0
        assert takacs_laplace_T1(0.7, ServiceModel.exponential(2.0), 0.0) == 1.0

    def test_decay_as_s_grows(self):
        vals = [takacs_laplace_T1(1.0, DET1, s) for s in (1.0, 10.0, 100.0)]
        assert vals[0] > vals[1] > vals[2]
        assert vals[2] < 1e-2

    def test_independence_factorisation(self):
        # T1 = V1 + B with V1 ~ Exp(lam) independent of B
        for s in (0.5, 1.0, 2.0):
            t1 = takacs_laplace_T1(1.0, DET1, s)
            b = takacs_laplace_B(1.0, DET1, s)
            assert t1 == pytest.approx(b / (1.0 + s), rel=1e-12)

    def test_matches_monte_carlo(self):
        _, t1 = first_return_times(1.0, DET1, 20000, seed=23)
        for s in (0.5, 1.0, 2.0):
            vals = np.exp(-s * t1)
            se = np.std(vals, ddof=1) / math.sqrt(vals.size)
            assert abs(np.mean(vals) - takacs_laplace_T1(1.0, DET1, s)) <= 3.0 * se

    def test_negative_s_gives_exponential_moment(self):
        # beta = 0.3 < |theta| = 1: E[e^(0.3 B)] finite, matches Monte Carlo
        beta = 0.3
        analytic = takacs_laplace_B(1.0, DET1, -beta)
        assert analytic >= 1.0
        v1, t1 = first_return_times(1.0, DET1, 100000, seed=29)
        vals = np.exp(beta * (t1 - v1))
        se = np.std(vals, ddof=1) / math.sqrt(vals.size)
        assert abs(np.mean(vals) - analytic) <= 3.0 * se

    def test_exponential_service_against_quadrature_oracle(self):
        sv = ServiceModel.exponential(1.5)
        for s in (0.4, 1.0):
            t1 = takacs_laplace_T1(0.8, sv, s)
            j = _j_integral(0.8, sv, s)
            expected = 1.0 - s / ((0.8 + s) * (1.0 - j))
            assert t1 == pytest.approx(expected, rel=1e-8)

    def test_t1_rejects_s_at_or_below_minus_lam(self):
        with pytest.raises(ValueError, match="-lam|arrival"):
            takacs_laplace_T1(0.5, DET1, -0.5)

    def test_rejects_s_below_abscissa(self):
        with pytest.raises(ValueError, match="abscissa"):
            takacs_laplace_B(1.0, DET1, -1.5)


class TestThetaAbscissa:
    def test_deterministic_hand_value(self):
        # lam=1, d=1: J(s) = (1 - e^-(s+1))/(s+1) < 1 iff s > -1
        theta = theta_abscissa(1.0, DET1)
        assert theta == pytest.approx(-1.0, abs=1e-6)

    def test_root_self_consistency(self):
        # lam=0.5, d=1: theta solves J(theta) = 1 with theta < -lam allowed
        from hawkes_renewal.queueing import _condition_integral
        theta = theta_abscissa(0.5, DET1)
        assert theta < -0.5
        assert _condition_integral(0.5, DET1, theta) == pytest.approx(1.0,
                                                                      abs=1e-6)

    def test_declared_tail_rate_floor(self):
        # the J-root sits near -0.95; the declared service tail rate 0.5
        # floors the abscissa at exactly -0.5
        sv = dataclasses.replace(ServiceModel.exponential(1.0), tail_rate=0.5)
        assert theta_abscissa(0.05, sv) == -0.5

    def test_monotone_condition_integral(self):
        from hawkes_renewal.queueing import _condition_integral
        vals = [_condition_integral(1.0, DET1, s)
                for s in np.linspace(-0.9, 2.0, 12)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_transform_finite_above_theta_on_grid(self):
        theta = theta_abscissa(1.0, DET1)
        for s in (theta + 0.05, theta + 0.3, -0.2):
            assert math.isfinite(takacs_laplace_B(1.0, DET1, s))


class TestTailRate:
    def test_attained_branch(self):
        assert tail_rate(0.5, 1.0) == (0.5, True)

    def test_open_branch(self):
        assert tail_rate(2.0, 1.0) == (1.0, False)

    def test_boundary_is_open(self):
        assert tail_rate(1.0, 1.0) == (1.0, False)


class TestHittingAfterBound:
    def test_zero_wait_zero_bound(self):
        assert hitting_after_bound(1.0, 2.0, 1.0, 0.0, 5.0) == 0.0

    def test_left_endpoint(self):
        assert hitting_after_bound(1.0, 2.0, 1.0, 2.0, 2.0) == pytest.approx(
            2.0, rel=1e-12)

    def test_hand_value(self):
        # lam=1 < gamma=2: attained rate alpha = 1, bound = 2 e^-2
        val = hitting_after_bound(1.0, 2.0, 1.0, 2.0, 4.0)
        assert val == pytest.approx(2.0 * math.exp(-2.0), rel=1e-12)
        assert val == pytest.approx(0.2706705664732254, rel=1e-12)

    def test_open_branch_uses_fraction(self):
        # lam=2 >= gamma=1: alpha = 0.95 * 1
        val = hitting_after_bound(2.0, 1.0, 1.0, 1.0, 3.0)
        assert val == pytest.approx(2.0 * math.exp(-0.95 * 2.0), rel=1e-12)

    def test_rejects_t_before_e(self):
        with pytest.raises(ValueError):
            hitting_after_bound(1.0, 2.0, 1.0, 3.0, 2.0)
