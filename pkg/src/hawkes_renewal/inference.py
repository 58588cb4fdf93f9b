"""Estimators and concentration bounds built on the renewal decomposition.

All time integrals of window functionals are computed exactly: the window
count only changes when an atom enters (at its own time) or leaves (its time
plus the window length), so integrating a count-measurable functional is a
finite sum over the piecewise-constant count profile.  User functionals are
therefore functions of the window count; shift-dependent functionals would
require discretisation, which this package avoids by design.
"""

import math
import warnings
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, NamedTuple

import numpy as np

from .renewal import cycle_durations, estimate_exp_moment
from .simulation import SimulationPath

__all__ = [
    "WindowFunctional",
    "EstimatorReport",
    "BernsteinRadius",
    "CycleMoments",
    "DelayMoments",
    "InsufficientCyclesError",
    "count_profile",
    "time_average",
    "cycle_integrals",
    "estimate_pi",
    "estimate_sigma2",
    "clt_interval",
    "normal_quantile",
    "bernstein_epsilon",
    "bernstein_bound",
    "cycle_moments",
    "delay_moments",
    "concentration_bound_full",
    "estimate_report",
]


class InsufficientCyclesError(RuntimeError):
    """Raised when an estimator needs complete cycles and none are given."""


@dataclass(frozen=True)
class WindowFunctional:
    """Bounded functional of the window state, evaluated on the atom count.

    Built-ins: ``count`` (unbounded), ``indicator_empty`` (1 on the empty
    window), ``count_capped(n)`` (count clipped at n).  ``user`` wraps any
    callable on the count; supply ``bounds`` when the concentration bounds
    are needed.
    """

    kind: str
    cap: int | None = None
    fn: Callable | None = None
    bounds: tuple | None = None

    @classmethod
    def count(cls) -> "WindowFunctional":
        return cls(kind="count")

    @classmethod
    def indicator_empty(cls) -> "WindowFunctional":
        return cls(kind="indicator_empty", bounds=(0.0, 1.0))

    @classmethod
    def count_capped(cls, cap: int) -> "WindowFunctional":
        if cap < 0:
            raise ValueError("cap must be nonnegative")
        return cls(kind="count_capped", cap=cap, bounds=(0.0, float(cap)))

    @classmethod
    def user(cls, fn: Callable, bounds: tuple | None = None) -> "WindowFunctional":
        return cls(kind="user", fn=fn, bounds=bounds)

    def values(self, counts: np.ndarray) -> np.ndarray:
        counts = np.asarray(counts)
        if self.kind == "count":
            return counts.astype(float)
        if self.kind == "indicator_empty":
            return (counts == 0).astype(float)
        if self.kind == "count_capped":
            return np.minimum(counts, self.cap).astype(float)
        if self.kind == "user":
            return np.asarray([self.fn(int(c)) for c in counts], dtype=float)
        raise ValueError(f"unknown functional kind {self.kind!r}")

    def require_bounds(self) -> tuple:
        if self.bounds is None:
            raise ValueError(
                f"functional {self.kind!r} has no declared bounds [a, b]"
            )
        return self.bounds


def count_profile(atoms, window: float, start: float, stop: float):
    """Breakpoints and values of ``t -> #atoms in (t - window, t]`` on
    ``[start, stop]``.  Returns ``(edges, counts)`` with ``len(edges) ==
    len(counts) + 1``; the count is constant on each ``[edges[i],
    edges[i+1])``."""
    atoms = np.asarray(atoms, dtype=float)
    entries = atoms[(atoms > start) & (atoms <= stop)]
    exits = atoms + window
    exits = exits[(exits > start) & (exits <= stop)]
    base = int(np.count_nonzero((atoms > start - window) & (atoms <= start)))
    times = np.concatenate([entries, exits])
    deltas = np.concatenate([np.ones(entries.size, dtype=np.int64),
                             -np.ones(exits.size, dtype=np.int64)])
    order = np.argsort(times, kind="stable")
    edges = np.concatenate([[start], times[order], [stop]])
    counts = base + np.concatenate([[0], np.cumsum(deltas[order])])
    return edges, counts


def _profile_integral(f: WindowFunctional, edges, counts) -> float:
    return float(np.dot(f.values(counts), np.diff(edges)))


def time_average(path: SimulationPath, f: WindowFunctional, window: float,
                 up_to: float | None = None) -> float:
    """Exact time average of ``f`` over ``[0, up_to]`` (default: horizon)."""
    from .renewal import _window_atoms
    t_max = path.horizon if up_to is None else float(up_to)
    if not 0.0 < t_max <= path.horizon:
        raise ValueError("up_to must lie in (0, horizon]")
    edges, counts = count_profile(_window_atoms(path, window), window, 0.0, t_max)
    return _profile_integral(f, edges, counts) / t_max


def cycle_integrals(cycles, f: WindowFunctional) -> np.ndarray:
    """Exact integral of ``f`` over each excursion."""
    out = np.empty(len(cycles))
    for i, ex in enumerate(cycles):
        edges, counts = count_profile(ex.events, ex.window, 0.0, ex.duration)
        out[i] = _profile_integral(f, edges, counts)
    return out


def estimate_pi(cycles, f: WindowFunctional) -> float:
    """Ratio estimator of the stationary mean of ``f``: summed cycle
    integrals over summed cycle durations."""
    if not cycles:
        raise InsufficientCyclesError("no complete cycles; extend the horizon")
    return float(np.sum(cycle_integrals(cycles, f))
                 / np.sum(cycle_durations(cycles)))


def estimate_sigma2(cycles, f: WindowFunctional, pi_hat: float) -> float:
    """Asymptotic variance of the time average: mean squared centred cycle
    integral over mean cycle duration."""
    if len(cycles) < 2:
        raise InsufficientCyclesError("need at least two complete cycles")
    integrals = cycle_integrals(cycles, f)
    durations = cycle_durations(cycles)
    centred = integrals - pi_hat * durations
    return float(np.mean(centred ** 2) / np.mean(durations))


def normal_quantile(p: float) -> float:
    """Standard normal quantile (rational approximation, stdlib-backed)."""
    return NormalDist().inv_cdf(p)


def clt_interval(pi_hat: float, sigma2_hat: float, t_horizon: float,
                 level: float = 0.95) -> tuple:
    """Central-limit interval ``pi_hat +- z * sqrt(sigma2_hat / T)``."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    if sigma2_hat < 0.0:
        raise ValueError("sigma2_hat must be nonnegative")
    z = normal_quantile(0.5 * (1.0 + level))
    half = z * math.sqrt(sigma2_hat / t_horizon)
    return pi_hat - half, pi_hat + half


class BernsteinRadius(NamedTuple):
    epsilon: float
    v: float
    c: float


def _bernstein_vc(span: float, alpha: float, mean_tau: float,
                  exp_moment: float, t_horizon: float) -> tuple:
    v = (2.0 * span * span / (alpha * alpha)) * math.floor(t_horizon / mean_tau) \
        * exp_moment * math.exp(alpha * mean_tau)
    c = span / alpha
    return v, c


def _bernstein_radius(span: float, mean_tau: float, c: float, v: float,
                      log_eta_4: float, t_horizon: float) -> float:
    disc = 4.0 * c * c * log_eta_4 * log_eta_4 - 8.0 * v * log_eta_4
    return (span * mean_tau - 2.0 * c * log_eta_4 + math.sqrt(disc)) / t_horizon


def bernstein_epsilon(a: float, b: float, alpha: float, mean_tau: float,
                      exp_moment: float, t_horizon: float,
                      eta: float) -> BernsteinRadius:
    """Smallest deviation radius at which the Bernstein-type bound for the
    empty-initial estimator reaches confidence level ``eta``; also returns
    the variance proxy ``v`` and scale ``c`` used in the bound."""
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must be in (0, 1]")
    if alpha <= 0.0 or mean_tau <= 0.0 or t_horizon <= 0.0:
        raise ValueError("alpha, mean_tau and T must be positive")
    span = abs(b - a)
    v, c = _bernstein_vc(span, alpha, mean_tau, exp_moment, t_horizon)
    eps = _bernstein_radius(span, mean_tau, c, v, math.log(eta / 4.0), t_horizon)
    return BernsteinRadius(epsilon=eps, v=v, c=c)


def bernstein_bound(a: float, b: float, alpha: float, mean_tau: float,
                    exp_moment: float, t_horizon: float,
                    epsilon: float) -> float:
    """Bernstein-type deviation bound ``4 exp(-x^2 / (4 (2v + c x)))`` with
    ``x = T eps - |b - a| mean_tau``; 1 when the bound is vacuous."""
    span = abs(b - a)
    v, c = _bernstein_vc(span, alpha, mean_tau, exp_moment, t_horizon)
    x = t_horizon * epsilon - span * mean_tau
    if x <= 0.0:
        return 1.0
    return min(1.0, 4.0 * math.exp(-x * x / (4.0 * (2.0 * v + c * x))))


@dataclass(frozen=True)
class CycleMoments:
    """Empirical cycle moments feeding the full concentration bound."""

    n: int
    mean_tau: float
    var_tau: float
    sigma2: float
    c_f_plus: float
    c_f_minus: float
    c_tau_plus: float
    c_tau_minus: float
    k_max: int


@dataclass(frozen=True)
class DelayMoments:
    mean: float
    var: float
    c_plus: float


def _sup_moment_constant(samples: np.ndarray, denom: float, k_max: int) -> float:
    """``sup_k ((2/k!) E[x^k] / denom)^(1/(k-2))`` over ``3 <= k <= k_max``
    for a nonnegative sample ``x``."""
    if denom <= 0.0:
        return 0.0
    best = 0.0
    fact = 2.0     # k! running from k = 2
    for k in range(3, k_max + 1):
        fact *= k
        mk = float(np.mean(samples ** k))
        if mk == 0.0:
            continue
        best = max(best, ((2.0 / fact) * mk / denom) ** (1.0 / (k - 2)))
    return best


def _effective_k_max(n: int, k_max: int) -> int:
    if n < k_max:
        warnings.warn(
            f"only {n} cycles for moments up to order {k_max}; "
            f"falling back to order {max(3, n)}",
            stacklevel=3,
        )
        return max(3, n)
    return k_max


def cycle_moments(cycles, f: WindowFunctional, pi_hat: float | None = None,
                  k_max: int = 12) -> CycleMoments:
    """Centred-moment summary of the cycles for ``concentration_bound_full``."""
    if len(cycles) < 2:
        raise InsufficientCyclesError("need at least two complete cycles")
    k_max = _effective_k_max(len(cycles), k_max)
    integrals = cycle_integrals(cycles, f)
    durations = cycle_durations(cycles)
    if pi_hat is None:
        pi_hat = float(np.sum(integrals) / np.sum(durations))
    centred_f = integrals - pi_hat * durations
    mean_tau = float(np.mean(durations))
    var_tau = float(np.var(durations, ddof=1))
    sigma2 = float(np.mean(centred_f ** 2) / mean_tau)
    denom_f = mean_tau * sigma2
    centred_tau = durations - mean_tau
    denom_tau = mean_tau * var_tau
    return CycleMoments(
        n=len(cycles),
        mean_tau=mean_tau,
        var_tau=var_tau,
        sigma2=sigma2,
        c_f_plus=_sup_moment_constant(np.clip(centred_f, 0.0, None), denom_f, k_max),
        c_f_minus=_sup_moment_constant(np.clip(-centred_f, 0.0, None), denom_f, k_max),
        c_tau_plus=_sup_moment_constant(np.clip(centred_tau, 0.0, None), denom_tau, k_max),
        c_tau_minus=_sup_moment_constant(np.clip(-centred_tau, 0.0, None), denom_tau, k_max),
        k_max=k_max,
    )


def delay_moments(tau0_samples, k_max: int = 12) -> DelayMoments:
    """Moment summary of delay lengths (for paths started nonempty)."""
    samples = np.asarray(tau0_samples, dtype=float)
    if samples.size < 2:
        raise InsufficientCyclesError("need at least two delay samples")
    k_max = _effective_k_max(samples.size, k_max)
    mean = float(np.mean(samples))
    var = float(np.var(samples, ddof=1))
    centred = samples - mean
    c_plus = _sup_moment_constant(np.clip(centred, 0.0, None), var, k_max)
    return DelayMoments(mean=mean, var=var, c_plus=c_plus)


def concentration_bound_full(f: WindowFunctional, moments: CycleMoments,
                             t_horizon: float, epsilon: float,
                             delay: DelayMoments | None = None) -> float:
    """Nonasymptotic deviation bound for the time average of ``f``.

    Sums four exponential terms controlling the centred cycle integrals and
    the cycle-count fluctuation; paths started from a nonempty window add a
    fifth term for the delay (and lose ``sqrt(T)`` of effective horizon).
    Returns 1 when any required numerator is nonpositive (vacuous regime).
    """
    a, b = f.require_bounds()
    span = abs(b - a)
    t = t_horizon
    adj = t if delay is None else t - math.sqrt(t)
    x = adj * epsilon - span * moments.mean_tau
    if x <= 0.0:
        return 1.0
    terms = []
    if moments.sigma2 > 0.0:
        for c in (moments.c_f_plus, moments.c_f_minus):
            terms.append(math.exp(-x * x / (8.0 * t * moments.sigma2 + 4.0 * c * x)))
    if moments.var_tau > 0.0:
        den_base = 8.0 * t * span * span * moments.var_tau / moments.mean_tau
        for c in (moments.c_tau_plus, moments.c_tau_minus):
            terms.append(math.exp(-x * x / (den_base + 4.0 * span * c * x)))
    if delay is not None:
        x5 = math.sqrt(t) * epsilon - 2.0 * span * delay.mean
        if x5 <= 0.0:
            return 1.0
        den5 = 8.0 * span * span * delay.var + 4.0 * span * delay.c_plus * x5
        if den5 > 0.0:
            terms.append(math.exp(-x5 * x5 / den5))
    return min(1.0, sum(terms))


@dataclass(frozen=True)
class EstimatorReport:
    """Point estimates with a central-limit interval and, when requested,
    the Bernstein deviation radius at confidence ``eta``."""

    pi_hat: float
    sigma2_hat: float
    mean_tau: float
    var_tau: float
    n_cycles: int
    ci_low: float
    ci_high: float
    level: float
    t_horizon: float
    epsilon_eta: float | None = None


def estimate_report(cycles, f: WindowFunctional, t_horizon: float,
                    level: float = 0.95, eta: float | None = None,
                    alpha: float | None = None, lam: float | None = None,
                    gamma_plus: float | None = None) -> EstimatorReport:
    """One-stop summary over pooled complete cycles.

    Passing ``eta`` requests the Bernstein radius, which needs ``alpha``
    (below ``min(lam, gamma_plus)``), the baseline rate and the positive-part
    decay rate, and declared bounds on ``f``.
    """
    pi_hat = estimate_pi(cycles, f)
    sigma2_hat = estimate_sigma2(cycles, f, pi_hat)
    durations = cycle_durations(cycles)
    lo, hi = clt_interval(pi_hat, sigma2_hat, t_horizon, level)
    epsilon_eta = None
    if eta is not None:
        if alpha is None or lam is None or gamma_plus is None:
            raise ValueError("Bernstein radius needs alpha, lam and gamma_plus")
        a, b = f.require_bounds()
        moment = estimate_exp_moment(cycles, alpha, lam, gamma_plus)
        epsilon_eta = bernstein_epsilon(
            a, b, alpha, float(np.mean(durations)), moment.value, t_horizon, eta
        ).epsilon
    return EstimatorReport(
        pi_hat=pi_hat,
        sigma2_hat=sigma2_hat,
        mean_tau=float(np.mean(durations)),
        var_tau=float(np.var(durations, ddof=1)),
        n_cycles=len(cycles),
        ci_low=lo,
        ci_high=hi,
        level=level,
        t_horizon=t_horizon,
        epsilon_eta=epsilon_eta,
    )
