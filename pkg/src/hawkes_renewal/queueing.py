"""M/G/inf queue simulation and busy-period Laplace-transform analytics.

For arrival rate ``lam`` and service tail ``1 - G``, the transform of the
first return time T1 of the queue-length process to zero is

    E[exp(-s T1)] = 1 - s / ((lam + s) * (1 - J(s))),

and of the first busy period B = T1 - V1,

    E[exp(-s B)] = (lam + s)/lam - (s/lam) / (1 - J(s)),

where ``J(s) = lam * int_0^inf (1-G(t)) exp(-s t - lam int_0^t (1-G)) dt``.
This is the integrated-by-parts form of the classical transform; it stays
stable near s = 0 and continues to negative s, giving exponential moments.
The abscissa reported by :func:`theta_abscissa` is ``max(s*, -gamma)`` where
``s*`` is the root of the monotone condition ``J(s) = 1`` and ``gamma`` a
declared service tail rate.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .kernel import SignedKernel
from .simulation import _poisson_times

__all__ = [
    "ServiceModel",
    "QueueTrajectory",
    "QuadratureError",
    "simulate_mg_infty",
    "first_return_times",
    "takacs_laplace_T1",
    "takacs_laplace_B",
    "theta_abscissa",
    "tail_rate",
    "hitting_after_bound",
]

_REL_TOL = 1e-9


class QuadratureError(RuntimeError):
    """Raised when a Laplace integral cannot be evaluated to tolerance."""


def _int_exp(q: float, a: float, b: float) -> float:
    """``int_a^b exp(-q t) dt`` with a stable q -> 0 limit."""
    width = b - a
    if q == 0.0:
        return width
    x = q * width
    if abs(x) < 1e-12:
        return width * math.exp(-q * a) * (1.0 - 0.5 * x)
    return -math.expm1(-x) * math.exp(-q * a) / q


def _int_exp_np(q, a, b):
    width = b - a
    x = q * width
    small = np.abs(x) < 1e-12
    safe = np.where(small, 1.0, q)
    out = -np.expm1(-x) * np.exp(-q * a) / safe
    return np.where(small, width * np.exp(-q * a) * (1.0 - 0.5 * x), out)


@dataclass(frozen=True)
class ServiceModel:
    """Service-duration model for the M/G/inf queue.

    Variants: ``deterministic`` (fixed duration), ``exponential`` (rate),
    ``shifted_cluster`` (cluster length plus a fixed window; sampling only),
    and ``empirical`` (resampling from a frozen sample).  ``tail_rate`` is a
    declared exponential decay rate of the service tail; ``+inf`` marks
    bounded-support services.
    """

    kind: str
    duration: float | None = None
    rate: float | None = None
    kernel: SignedKernel | None = None
    window: float | None = None
    samples: tuple | None = None
    tail_rate: float = math.inf

    @classmethod
    def deterministic(cls, duration: float) -> "ServiceModel":
        if duration < 0.0:
            raise ValueError("service duration must be nonnegative")
        return cls(kind="deterministic", duration=float(duration))

    @classmethod
    def exponential(cls, rate: float) -> "ServiceModel":
        if rate <= 0.0:
            raise ValueError("service rate must be positive")
        return cls(kind="exponential", rate=float(rate), tail_rate=float(rate))

    @classmethod
    def shifted_cluster(cls, kernel: SignedKernel, window: float) -> "ServiceModel":
        if window < 0.0:
            raise ValueError("window must be nonnegative")
        gamma = kernel.summarize().gamma
        return cls(kind="shifted_cluster", kernel=kernel, window=float(window),
                   tail_rate=gamma)

    @classmethod
    def empirical(cls, samples, tail_rate: float = math.inf) -> "ServiceModel":
        arr = tuple(sorted(float(x) for x in samples))
        if not arr:
            raise ValueError("empirical service model needs at least one sample")
        if arr[0] < 0.0:
            raise ValueError("service samples must be nonnegative")
        return cls(kind="empirical", samples=arr, tail_rate=float(tail_rate))

    def sample(self, rng, n: int) -> np.ndarray:
        rng = np.random.default_rng(rng)
        if self.kind == "deterministic":
            return np.full(n, self.duration)
        if self.kind == "exponential":
            return rng.exponential(1.0 / self.rate, n)
        if self.kind == "empirical":
            return rng.choice(np.asarray(self.samples), size=n)
        if self.kind == "shifted_cluster":
            from .cluster import sample_cluster
            lengths = [sample_cluster(self.kernel, rng).length for _ in range(n)]
            return self.window + np.asarray(lengths)
        raise ValueError(f"unknown service kind {self.kind!r}")

    def sample_one(self, rng) -> float:
        if self.kind == "deterministic":
            return self.duration
        if self.kind == "exponential":
            return rng.standard_exponential() / self.rate
        return float(self.sample(rng, 1)[0])

    def mean(self) -> float:
        if self.kind == "deterministic":
            return self.duration
        if self.kind == "exponential":
            return 1.0 / self.rate
        if self.kind == "empirical":
            return float(np.mean(self.samples))
        raise NotImplementedError(
            "mean service duration of a shifted_cluster model is not available "
            "in closed form; convert with to_empirical() first"
        )

    def tail(self, t: float) -> float:
        """P(service > t)."""
        if t < 0.0:
            return 1.0
        if self.kind == "deterministic":
            return 1.0 if t < self.duration else 0.0
        if self.kind == "exponential":
            return math.exp(-self.rate * t)
        if self.kind == "empirical":
            arr = np.asarray(self.samples)
            return float(np.count_nonzero(arr > t)) / arr.size
        raise NotImplementedError(
            "shifted_cluster services have no closed-form tail; "
            "convert with to_empirical() first"
        )

    def to_empirical(self, n: int, rng=None) -> "ServiceModel":
        """Freeze ``n`` draws into an empirical model (for the transforms)."""
        rng = np.random.default_rng(rng)
        return ServiceModel.empirical(self.sample(rng, n), tail_rate=self.tail_rate)


def _dtilde(lam: float, service: ServiceModel, s: float) -> float:
    """``int_0^inf (1-G(t)) exp(-s t - lam int_0^t (1-G)) dt``."""
    if service.kind == "deterministic":
        return _int_exp(s + lam, 0.0, service.duration)
    if service.kind == "empirical":
        arr = np.asarray(service.samples)
        n = arr.size
        u = np.concatenate([[0.0], arr])
        p = (n - np.arange(n, dtype=float)) / n     # tail on [u_j, u_{j+1})
        lo, hi = u[:-1], u[1:]
        cum = np.concatenate([[0.0], np.cumsum(lam * p * (hi - lo))])[:-1]
        q = s + lam * p
        parts = p * np.exp(-cum + lam * p * lo) * _int_exp_np(q, lo, hi)
        return float(np.sum(parts))
    if service.kind == "exponential":
        mu = service.rate
        if s <= -mu:
            return math.inf
        cut = 37.0 / mu
        ratio = lam / mu

        def integrand(t):
            return math.exp(-mu * t - s * t - ratio * (1.0 - math.exp(-mu * t)))

        value, err = quad(integrand, 0.0, cut, epsabs=1e-14, epsrel=1e-10,
                          limit=200)
        tail = math.exp(-ratio) * _int_exp(s + mu, cut, math.inf) if s + mu > 0 \
            else math.inf
        if not math.isfinite(tail):
            return math.inf
        total = value + tail
        if total != 0.0 and err / abs(total) > _REL_TOL:
            raise QuadratureError(
                f"Laplace integral achieved relative error {err / abs(total):.2e}, "
                f"needed {_REL_TOL:.0e}"
            )
        return total
    raise NotImplementedError(
        "Laplace transforms need a computable service tail; convert "
        "shifted_cluster models with to_empirical() first"
    )


def _condition_integral(lam: float, service: ServiceModel, s: float) -> float:
    value = lam * _dtilde(lam, service, s)
    return value if math.isfinite(value) else math.inf


@lru_cache(maxsize=256)
def theta_abscissa(lam: float, service: ServiceModel, gamma: float | None = None) -> float:
    """Abscissa ``max(s*, -gamma)`` with ``s*`` the root of ``J(s) = 1``.

    ``gamma`` defaults to the service model's declared tail rate.  Bisection
    runs on the monotone condition ``J(s) < 1`` to absolute tolerance 1e-9.
    """
    if gamma is None:
        gamma = service.tail_rate
    hi = 0.0
    if _condition_integral(lam, service, hi) >= 1.0:
        raise ValueError("condition integral must be below 1 at s = 0")
    lo = -1.0
    for _ in range(80):
        if _condition_integral(lam, service, lo) >= 1.0:
            break
        if lo <= -gamma - 1.0:
            return -gamma
        hi = lo
        lo *= 2.0
    else:
        return -gamma if math.isfinite(gamma) else -math.inf
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        if _condition_integral(lam, service, mid) < 1.0:
            hi = mid
        else:
            lo = mid
    s_star = 0.5 * (lo + hi)
    return max(s_star, -gamma)


def _check_domain(lam: float, service: ServiceModel, s: float):
    if s >= 0.0:
        return
    theta = theta_abscissa(lam, service, service.tail_rate)
    if s <= theta:
        raise ValueError(
            f"s={s} is outside the transform domain (must exceed the "
            f"abscissa {theta:.9g})"
        )


def takacs_laplace_T1(lam: float, service: ServiceModel, s: float) -> float:
    """``E[exp(-s T1)]`` for the first return time of the queue to zero."""
    if lam <= 0.0:
        raise ValueError("arrival rate must be positive")
    if s == 0.0:
        return 1.0
    if s <= -lam:
        raise ValueError("transform of T1 requires s > -lam (arrival factor)")
    _check_domain(lam, service, s)
    j = _condition_integral(lam, service, s)
    if not j < 1.0:
        raise ValueError("condition integral is not below 1 at this s")
    return 1.0 - s / ((lam + s) * (1.0 - j))


def takacs_laplace_B(lam: float, service: ServiceModel, s: float) -> float:
    """``E[exp(-s B)]`` for the first busy period ``B = T1 - V1``."""
    if lam <= 0.0:
        raise ValueError("arrival rate must be positive")
    if s == 0.0:
        return 1.0
    _check_domain(lam, service, s)
    j = _condition_integral(lam, service, s)
    if not j < 1.0:
        raise ValueError("condition integral is not below 1 at this s")
    return (lam + s) / lam - (s / lam) / (1.0 - j)


def tail_rate(lam: float, gamma: float) -> tuple:
    """Exponential decay rate of P(T1 > t): ``(lam, True)`` when ``lam <
    gamma`` (rate attained), otherwise ``(gamma, False)`` (any rate below
    ``gamma`` is achievable but the bound is open)."""
    if lam < gamma:
        return lam, True
    return gamma, False


def hitting_after_bound(lam: float, gamma: float, c_const: float, e_time: float,
                        t: float, open_rate_fraction: float = 0.95) -> float:
    """Upper bound ``lam * C * E * exp(-alpha (t - E))`` on the probability
    that the first arrival whose service outlasts ``E`` has not occurred by
    ``t``; ``alpha`` is the attained tail rate, or ``open_rate_fraction *
    gamma`` on the open branch."""
    if e_time < 0.0 or t < e_time:
        raise ValueError("need 0 <= E <= t")
    rate, attained = tail_rate(lam, gamma)
    alpha = rate if attained else open_rate_fraction * gamma
    return lam * c_const * e_time * math.exp(-alpha * (t - e_time))


@dataclass(frozen=True)
class QueueTrajectory:
    """Arrivals, departures and zero-hitting times of one M/G/inf path.

    ``return_times`` contains every time the queue empties within the
    horizon; ``busy_periods`` the matching busy-period durations.
    """

    arrivals: np.ndarray
    departures: np.ndarray
    return_times: np.ndarray
    busy_periods: np.ndarray
    horizon: float

    def count_at(self, t) -> np.ndarray:
        """Queue length at time(s) t (right-continuous)."""
        t = np.asarray(t, dtype=float)
        return (np.searchsorted(self.arrivals, t, side="right")
                - np.searchsorted(self.departures, t, side="right"))

    def count_before(self, t) -> np.ndarray:
        """Left limit of the queue length at time(s) t."""
        t = np.asarray(t, dtype=float)
        return (np.searchsorted(self.arrivals, t, side="left")
                - np.searchsorted(self.departures, t, side="left"))

    def fraction_empty(self, up_to: float | None = None) -> float:
        """Fraction of ``[0, up_to]`` the queue spends at zero."""
        t_max = self.horizon if up_to is None else float(up_to)
        if self.arrivals.size == 0:
            return 1.0
        idle = min(self.arrivals[0], t_max)
        for r in self.return_times:
            if r >= t_max:
                break
            # next arrival strictly after the return ends the idle stretch
            idx = np.searchsorted(self.arrivals, r, side="right")
            nxt = self.arrivals[idx] if idx < self.arrivals.size else t_max
            idle += min(nxt, t_max) - r
        return idle / t_max


def simulate_mg_infty(lam: float, service: ServiceModel, horizon: float,
                      seed=None) -> QueueTrajectory:
    """Simulate arrivals on ``(0, horizon]`` with i.i.d. service durations.

    Only certain zero-hitting times are reported: the final busy period is
    included only if it ends within the horizon (arrivals beyond the horizon
    cannot extend it)."""
    if lam <= 0.0:
        raise ValueError("arrival rate must be positive")
    rng = np.random.default_rng(seed)
    arrivals = _poisson_times(lam, horizon, rng)
    services = service.sample(rng, arrivals.size)
    departures = arrivals + services
    rets, busies = [], []
    busy_start = None
    busy_end = -math.inf
    for a, d in zip(arrivals.tolist(), departures.tolist()):
        if busy_start is None:
            busy_start, busy_end = a, d
        elif a > busy_end:
            rets.append(busy_end)
            busies.append(busy_end - busy_start)
            busy_start, busy_end = a, d
        else:
            busy_end = max(busy_end, d)
    if busy_start is not None and busy_end <= horizon:
        rets.append(busy_end)
        busies.append(busy_end - busy_start)
    return QueueTrajectory(
        arrivals=arrivals,
        departures=np.sort(departures),
        return_times=np.asarray(rets),
        busy_periods=np.asarray(busies),
        horizon=float(horizon),
    )


def first_return_times(lam: float, service: ServiceModel, n: int,
                       seed=None) -> tuple:
    """``n`` independent draws of ``(V1, T1)``: first arrival and first
    return of the queue to zero, simulated to completion."""
    rng = np.random.default_rng(seed)
    v1s = np.empty(n)
    t1s = np.empty(n)
    for i in range(n):
        v = rng.standard_exponential() / lam
        v1s[i] = v
        end = v + service.sample_one(rng)
        a = v
        while True:
            a += rng.standard_exponential() / lam
            if a > end:
                break
            end = max(end, a + service.sample_one(rng))
        t1s[i] = end
    return v1s, t1s
