"""Sliding-window states, renewal detection, and excursion splitting."""

import math

import numpy as np
import pytest
from scipy import stats

from hawkes_renewal import (
    PointConfiguration,
    SignedKernel,
    SimulationPath,
    WindowConfig,
    cycle_durations,
    detect_renewals,
    estimate_exp_moment,
    first_return,
    simulate_coupled,
    simulate_hawkes,
    split_excursions,
    window_state,
)

EXCIT = SignedKernel.from_pieces([(0.0, 1.0, 0.5)])
MIXED = SignedKernel.from_pieces([(0.0, 1.0, -0.3), (1.0, 2.0, 0.4)])


def _path(events, horizon, initial=None):
    return SimulationPath.from_events(np.asarray(events, dtype=float),
                                      horizon, initial=initial)


class TestWindowConfig:
    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            WindowConfig(0.0)

    def test_validates_against_kernel_support(self):
        cfg = WindowConfig(1.0)
        with pytest.raises(ValueError, match="support"):
            cfg.validate_against(MIXED)
        WindowConfig(2.0).validate_against(MIXED)


class TestWindowState:
    def test_initial_condition_at_zero(self):
        init = PointConfiguration(np.array([-1.5, -0.5]), window=(-2.0, 0.0))
        state = window_state(_path([], 10.0, init), 0.0, 2.0)
        assert state.atoms.tolist() == [-1.5, -0.5]
        assert state.window == (-2.0, 0.0)

    def test_empty_when_no_recent_atoms(self):
        state = window_state(_path([1.0], 10.0), 5.0, 2.0)
        assert state.is_empty

    def test_hand_shift(self):
        # events {1.0, 2.5}, A=2, t=3: only 2.5 in (1, 3], shifted to -0.5
        state = window_state(_path([1.0, 2.5], 10.0), 3.0, 2.0)
        assert state.atoms.tolist() == [-0.5]

    def test_half_open_boundaries(self):
        # atom exactly at t - A is excluded; atom exactly at t is included
        state = window_state(_path([1.0, 3.0], 10.0), 3.0, 2.0)
        assert state.atoms.tolist() == [0.0]


class TestDetectRenewals:
    def test_empty_path(self):
        times = detect_renewals(_path([], 10.0), 2.0)
        assert times.tau0 == 0.0
        assert times.renewals.size == 0

    def test_single_event_hand_case(self):
        times = detect_renewals(_path([1.0], 10.0), 2.0)
        assert times.tau0 == 0.0
        assert times.renewals.tolist() == [3.0]

    def test_nonempty_initial_hand_case(self):
        # initial atom -0.7 empties at 1.3 (next atom 1.5 > 1.3), then the
        # window refills and empties again at 3.5
        init = PointConfiguration(np.array([-0.7]), window=(-2.0, 0.0))
        times = detect_renewals(_path([1.5], 10.0, init), 2.0)
        assert times.tau0 == pytest.approx(1.3, rel=1e-15)
        assert times.renewals.tolist() == pytest.approx([3.5], rel=1e-15)

    def test_blocked_emptying_is_skipped(self):
        # successor within the window cancels the emptying at u + A
        init = PointConfiguration(np.array([-0.7]), window=(-2.0, 0.0))
        times = detect_renewals(_path([1.0], 10.0, init), 2.0)
        assert times.tau0 == 3.0
        assert times.renewals.size == 0

    def test_never_empties(self):
        init = PointConfiguration(np.array([-0.5]), window=(-2.0, 0.0))
        times = detect_renewals(_path([1.0], 2.5, init), 2.0)
        assert times.tau0 is None

    def test_horizon_certification(self):
        # the emptying at 3.0 is not certified when the horizon stops at 2.5
        times = detect_renewals(_path([1.0], 2.5), 2.0)
        assert times.tau0 == 0.0
        assert times.renewals.size == 0

    def test_window_empty_at_each_renewal(self):
        path = simulate_hawkes(EXCIT, 1.0, 300.0, seed=15)
        times = detect_renewals(path, 1.0)
        atoms = path.events
        for tk in times.renewals:
            assert window_state(path, tk, 1.0).is_empty
            prev = atoms[np.searchsorted(atoms, tk) - 1]
            eps = 0.5 * (tk - prev)
            assert not window_state(path, tk - eps, 1.0).is_empty


class TestFirstReturn:
    def test_empty_initial_uses_first_renewal(self):
        path = _path([1.0], 10.0)
        assert first_return(path, 2.0) == 3.0

    def test_nonempty_initial_uses_tau0(self):
        init = PointConfiguration(np.array([-0.7]), window=(-2.0, 0.0))
        path = _path([1.5], 10.0, init)
        assert first_return(path, 2.0) == pytest.approx(1.3, rel=1e-15)

    def test_none_when_unobserved(self):
        init = PointConfiguration(np.array([-0.5]), window=(-2.0, 0.0))
        assert first_return(_path([1.0], 2.5, init), 2.0) is None

    def test_dominated_by_coupled_first_return(self):
        # thinned window empties no later than the dominating window
        for seed in range(20):
            path = simulate_coupled(MIXED, 1.0, 400.0, seed=seed)
            dom = SimulationPath.from_events(path.dominating_events, 400.0)
            thin_ret = first_return(path, 2.0)
            dom_ret = first_return(dom, 2.0)
            assert thin_ret is not None and dom_ret is not None
            assert thin_ret <= dom_ret


class TestSplitExcursions:
    def test_hand_split(self):
        # tau0 = 0, renewals {3, 7} on horizon 10: cycles 3 and 4, partial 3
        path = _path([1.0, 4.0, 5.0, 8.5], 10.0)
        parts = split_excursions(path, 2.0)
        assert parts.delay.duration == 0.0
        assert [c.duration for c in parts.cycles] == [3.0, 4.0]
        assert parts.partial.duration == 3.0
        assert parts.partial.start == 7.0

    def test_cycle_events_are_relative(self):
        path = _path([1.0, 4.0, 5.0, 8.5], 10.0)
        parts = split_excursions(path, 2.0)
        assert parts.cycles[0].events.tolist() == [1.0]
        assert parts.cycles[1].events.tolist() == [1.0, 2.0]
        assert parts.partial.events.tolist() == [1.5]

    def test_no_renewals_whole_path_is_delay(self):
        init = PointConfiguration(np.array([-0.5]), window=(-2.0, 0.0))
        parts = split_excursions(_path([1.0], 2.5, init), 2.0)
        assert parts.delay.duration == 2.5
        assert parts.cycles == []
        assert parts.partial is None

    def test_delay_keeps_initial_atoms(self):
        init = PointConfiguration(np.array([-0.7]), window=(-2.0, 0.0))
        parts = split_excursions(_path([1.5], 10.0, init), 2.0)
        assert parts.delay.events.tolist() == [-0.7]
        assert parts.delay.duration == pytest.approx(1.3, rel=1e-15)

    def test_durations_sum_to_horizon(self):
        path = simulate_hawkes(EXCIT, 1.0, 500.0, seed=3)
        parts = split_excursions(path, 1.0)
        total = parts.delay.duration + sum(c.duration for c in parts.cycles)
        total += parts.partial.duration
        assert total == pytest.approx(500.0, rel=1e-12)

    def test_kinds(self):
        path = simulate_hawkes(EXCIT, 1.0, 200.0, seed=3)
        parts = split_excursions(path, 1.0)
        assert parts.delay.kind == "delay"
        assert all(c.kind == "cycle" for c in parts.cycles)
        assert parts.partial.kind == "partial"

    def test_cycle_durations_exchangeable(self):
        # split-half KS over pooled i.i.d. cycles
        durs = []
        for seed in range(40):
            path = simulate_hawkes(EXCIT, 1.0, 250.0, seed=seed)
            durs.extend(c.duration for c in split_excursions(path, 1.0).cycles)
        durs = np.asarray(durs)
        half = durs.size // 2
        res = stats.ks_2samp(durs[:half], durs[half:2 * half])
        assert res.pvalue > 0.01


class TestExpMoment:
    def _cycles(self, horizon=2000.0, seed=12):
        path = simulate_hawkes(EXCIT, 1.0, horizon, seed=seed)
        return split_excursions(path, 1.0).cycles

    def test_alpha_zero_is_one(self):
        est = estimate_exp_moment(self._cycles(200.0), 0.0, 1.0, math.inf)
        assert est.value == 1.0
        assert est.n > 0

    def test_guard_rejects_alpha_at_limit(self):
        cycles = self._cycles(200.0)
        with pytest.raises(ValueError, match="min\\(lam, gamma_plus\\)"):
            estimate_exp_moment(cycles, 0.5, 1.0, 0.5)
        with pytest.raises(ValueError):
            estimate_exp_moment(cycles, 1.0, 1.0, math.inf)

    def test_poisson_case_matches_transform_oracle(self):
        # h = 0: cycle lengths are first return times of the M/D/inf queue
        # with deterministic service A, so E[e^(alpha tau)] is the Takacs
        # transform at s = -alpha
        from hawkes_renewal import ServiceModel, takacs_laplace_T1
        alpha = 0.2
        path = simulate_hawkes(SignedKernel.zero(), 1.0, 3e4, seed=31)
        cycles = split_excursions(path, 1.0).cycles
        est = estimate_exp_moment(cycles, alpha, 1.0, math.inf)
        oracle = takacs_laplace_T1(1.0, ServiceModel.deterministic(1.0), -alpha)
        assert abs(est.value - oracle) <= 3.0 * est.se

    def test_stable_under_sample_doubling(self):
        half = estimate_exp_moment(self._cycles(2000.0), 0.2, 1.0, math.inf)
        full = estimate_exp_moment(self._cycles(4000.0, seed=13), 0.2, 1.0,
                                   math.inf)
        combined_se = math.hypot(half.se, full.se)
        assert abs(half.value - full.value) <= 4.0 * combined_se

    def test_cycle_durations_helper(self):
        cycles = self._cycles(200.0)
        durs = cycle_durations(cycles)
        assert durs.size == len(cycles)
        assert np.all(durs > 1.0)    # every cycle spans at least the window
