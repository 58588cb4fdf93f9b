"""Immigration-branching representation for nonnegative kernels.

Ancestors arrive as a homogeneous Poisson process; each atom independently
produces a Poisson number of children (mean: the kernel mass) at age offsets
drawn from the kernel normalised to a density.  The union of all births has
the same law as the Hawkes process with that kernel, and a cluster's length
is the largest birth offset among the progeny of one ancestor.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .kernel import KernelSummary, SignedKernel
from .simulation import PointConfiguration, _poisson_times

__all__ = [
    "Cluster",
    "sample_cluster",
    "simulate_hawkes_cluster",
    "cluster_tail_bound",
]


@dataclass(frozen=True)
class Cluster:
    """Progeny of a single ancestor: birth offsets from the ancestor (the
    ancestor itself is offset 0), generation numbers, and parent indices
    (-1 for the ancestor)."""

    births: np.ndarray
    generations: np.ndarray
    parents: np.ndarray

    @property
    def size(self) -> int:
        return int(self.births.size)

    @property
    def length(self) -> float:
        """Largest birth offset (0 for a childless ancestor)."""
        return float(self.births.max())


def _branching_arrays(kernel: SignedKernel):
    """Piece data of the normalised age density (positive-width pieces only)."""
    starts, ends, masses = [], [], []
    for s, e, v in kernel.pieces:
        if v > 0.0:
            starts.append(s)
            ends.append(e)
            masses.append(v * (e - s))
    return np.asarray(starts), np.asarray(ends), np.asarray(masses)


def _check_branching_kernel(kernel: SignedKernel) -> float:
    if not kernel.is_nonnegative:
        raise ValueError("cluster sampling requires a nonnegative kernel")
    mass = kernel.l1_positive
    if mass >= 1.0:
        raise ValueError("kernel mass must be < 1 for finite clusters")
    return mass


def sample_cluster(kernel: SignedKernel, rng=None) -> Cluster:
    """Sample one cluster of the branching process defined by ``kernel``."""
    mass = _check_branching_kernel(kernel)
    rng = np.random.default_rng(rng)
    births = [0.0]
    gens = [0]
    parents = [-1]
    if mass == 0.0:
        return Cluster(np.asarray(births), np.asarray(gens), np.asarray(parents))
    starts, ends, piece_mass = _branching_arrays(kernel)
    cum = np.cumsum(piece_mass) / mass
    cum[-1] = 1.0
    widths = ends - starts
    queue = deque([0])
    while queue:
        idx = queue.popleft()
        n = int(rng.poisson(mass))
        if n == 0:
            continue
        picks = np.searchsorted(cum, rng.random(n), side="right")
        ages = ends[picks] - rng.random(n) * widths[picks]
        off = births[idx]
        gen = gens[idx] + 1
        for age in ages.tolist():
            queue.append(len(births))
            births.append(off + age)
            gens.append(gen)
            parents.append(idx)
    return Cluster(np.asarray(births), np.asarray(gens), np.asarray(parents))


def simulate_hawkes_cluster(kernel: SignedKernel, lam: float, horizon: float,
                            seed=None) -> PointConfiguration:
    """Simulate a path on ``(0, horizon]`` by superposing ancestor clusters.

    Starts from the empty configuration (the representation has no notion of
    an initial condition).  Births beyond the horizon are discarded.
    """
    _check_branching_kernel(kernel)
    if lam <= 0.0:
        raise ValueError("baseline intensity must be positive")
    if not horizon > 0.0:
        raise ValueError("horizon must be positive")
    rng = np.random.default_rng(seed)
    ancestors = _poisson_times(lam, horizon, rng)
    chunks = []
    for v in ancestors.tolist():
        cluster = sample_cluster(kernel, rng)
        times = v + cluster.births
        chunks.append(times[times <= horizon])
    atoms = np.sort(np.concatenate(chunks)) if chunks else np.empty(0)
    return PointConfiguration(atoms=atoms, window=(0.0, float(horizon)))


def first_return_coupled(kernel: SignedKernel, lam: float, window: float, rng=None):
    """Shared-randomness construction of one busy cycle of the queue whose
    customers are ancestors with service "cluster length plus window".

    Returns ``(atoms, first_return)`` where ``atoms`` are all births of the
    clusters making up the first busy period and ``first_return`` is the time
    the queue first empties.  Each departure is computed as last-birth-time
    plus ``window`` so the value is bit-comparable with gap scanning over the
    same atoms.
    """
    _check_branching_kernel(kernel)
    rng = np.random.default_rng(rng)
    atoms = []
    busy_end = None
    v = 0.0
    while True:
        v += rng.standard_exponential() / lam
        if busy_end is not None and v > busy_end:
            break
        cluster = sample_cluster(kernel, rng)
        births = v + cluster.births
        last = float(births.max())
        departure = last + window
        busy_end = departure if busy_end is None else max(busy_end, departure)
        atoms.extend(births.tolist())
    return np.sort(np.asarray(atoms)), busy_end


def cluster_tail_bound(summary: KernelSummary, x) -> float | np.ndarray:
    """Exponential upper bound on P(cluster length > x) for a subcritical
    nonnegative kernel: ``exp(-gamma * x + 1 - mass)``."""
    m = summary.l1_positive
    if not 0.0 < m < 1.0:
        raise ValueError("tail bound requires kernel mass strictly in (0, 1)")
    return np.exp(-summary.gamma * np.asarray(x, dtype=float) + (1.0 - m))
