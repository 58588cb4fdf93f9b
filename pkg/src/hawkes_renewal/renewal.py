"""Renewal structure of the sliding-window process of a simulated path.

The auxiliary process carries, at time t, the atoms of the path inside the
half-open window ``(t - A, t]``.  Whenever the window empties (the atom that
just aged out is not followed by another within ``A``), the process hits its
regeneration state and the path splits into an initial delay, i.i.d. cycles,
and a trailing partial segment.  Detection is a single gap scan over the
sorted atoms, with no tolerance parameters.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .simulation import PointConfiguration, SimulationPath

__all__ = [
    "WindowConfig",
    "Excursion",
    "RenewalTimes",
    "window_state",
    "detect_renewals",
    "first_return",
    "split_excursions",
    "estimate_exp_moment",
]


@dataclass(frozen=True)
class WindowConfig:
    """Window length of the auxiliary process; must cover the kernel support
    so the window determines the future evolution."""

    length: float

    def __post_init__(self):
        if not self.length > 0.0:
            raise ValueError("window length must be positive")

    def validate_against(self, kernel):
        if self.length < kernel.support_bound:
            raise ValueError(
                f"window length {self.length} is below the kernel support "
                f"bound {kernel.support_bound}"
            )


@dataclass(frozen=True)
class Excursion:
    """Piece of a path between renewal boundaries.

    ``events`` are atom times relative to ``start``; for a delay segment they
    include the in-window initial atoms (negative relative times).  ``kind``
    is one of ``delay``, ``cycle``, ``partial``.
    """

    start: float
    duration: float
    events: np.ndarray
    kind: str
    window: float


class RenewalTimes(NamedTuple):
    tau0: float | None
    renewals: np.ndarray


class Excursions(NamedTuple):
    delay: Excursion
    cycles: list
    partial: Excursion | None


def _window_atoms(path: SimulationPath, window: float) -> np.ndarray:
    """Atoms that can appear in some window after time 0, sorted."""
    init = path.initial.atoms
    return np.concatenate([init[init > -window], path.events])


def window_state(path: SimulationPath, t: float, window: float) -> PointConfiguration:
    """Window contents at time ``t`` shifted to the reference window
    ``(-window, 0]``."""
    atoms = _window_atoms(path, window)
    lo = np.searchsorted(atoms, t - window, side="right")
    hi = np.searchsorted(atoms, t, side="right")
    return PointConfiguration(atoms=atoms[lo:hi] - t, window=(-window, 0.0))


def _empty_times(atoms: np.ndarray, window: float, horizon: float) -> np.ndarray:
    """Times ``u + window`` at which the window empties: atom ``u`` has no
    successor within ``window`` and the emptying is certified by the horizon."""
    if atoms.size == 0:
        return np.empty(0)
    nxt = np.append(atoms[1:], math.inf)
    times = atoms + window
    times = times[nxt > times]
    return times[times <= horizon]


def detect_renewals(path: SimulationPath, window: float) -> RenewalTimes:
    """First emptying time of the window and all subsequent renewal times.

    ``tau0`` is 0 when the initial window is empty, the first emptying time
    otherwise, or None when the window never empties within the horizon.
    ``renewals`` are the strictly later emptying times, all within the
    horizon.
    """
    atoms = _window_atoms(path, window)
    empties = _empty_times(atoms, window, path.horizon)
    initial_count = np.count_nonzero(path.initial.atoms > -window)
    if initial_count == 0:
        return RenewalTimes(tau0=0.0, renewals=empties)
    if empties.size == 0:
        return RenewalTimes(tau0=None, renewals=np.empty(0))
    return RenewalTimes(tau0=float(empties[0]), renewals=empties[1:])


def first_return(path: SimulationPath, window: float) -> float | None:
    """First time the window empties with a nonempty left limit: the first
    emptying when the path starts nonempty, the first re-emptying otherwise."""
    times = detect_renewals(path, window)
    if np.count_nonzero(path.initial.atoms > -window) > 0:
        return times.tau0
    return float(times.renewals[0]) if times.renewals.size else None


def _events_between(atoms, lo, hi):
    i = np.searchsorted(atoms, lo, side="right")
    j = np.searchsorted(atoms, hi, side="left")
    return atoms[i:j]


def split_excursions(path: SimulationPath, window: float) -> Excursions:
    """Split a path at its renewal times.

    Returns the delay ``[0, tau0)`` (the whole path when the window never
    empties), the list of complete cycles ``[tau_{k-1}, tau_k)``, and the
    trailing partial segment ``[tau_K, horizon]`` (None when no renewal
    structure exists)."""
    times = detect_renewals(path, window)
    atoms = _window_atoms(path, window)
    if times.tau0 is None:
        delay = Excursion(start=0.0, duration=path.horizon, events=atoms,
                          kind="delay", window=window)
        return Excursions(delay=delay, cycles=[], partial=None)
    tau0 = times.tau0
    delay = Excursion(start=0.0, duration=tau0,
                      events=atoms[atoms < tau0], kind="delay", window=window)
    bounds = np.concatenate([[tau0], times.renewals])
    cycles = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        cycles.append(Excursion(start=float(lo), duration=float(hi - lo),
                                events=_events_between(atoms, lo, hi) - lo,
                                kind="cycle", window=window))
    last = float(bounds[-1])
    partial = Excursion(start=last, duration=path.horizon - last,
                        events=_events_between(atoms, last, np.inf) - last,
                        kind="partial", window=window)
    return Excursions(delay=delay, cycles=cycles, partial=partial)


class ExpMomentEstimate(NamedTuple):
    value: float
    se: float
    n: int


def cycle_durations(cycles) -> np.ndarray:
    return np.asarray([c.duration for c in cycles])


def estimate_exp_moment(cycles, alpha: float, lam: float,
                        gamma_plus: float) -> ExpMomentEstimate:
    """Empirical mean of ``exp(alpha * cycle duration)`` with its standard
    error.  ``alpha`` must lie below ``min(lam, gamma_plus)``, the range on
    which the exponential moment is guaranteed finite."""
    limit = min(lam, gamma_plus)
    if not 0.0 <= alpha < limit:
        raise ValueError(
            f"alpha must lie in [0, {limit:.6g}) = [0, min(lam, gamma_plus))"
        )
    durations = cycle_durations(cycles)
    if durations.size == 0:
        raise ValueError("no complete cycles; extend the horizon")
    vals = np.exp(alpha * durations)
    se = float(np.std(vals, ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else math.nan
    return ExpMomentEstimate(value=float(np.mean(vals)), se=se, n=int(vals.size))
