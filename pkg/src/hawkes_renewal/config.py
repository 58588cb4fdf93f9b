"""Run-configuration loading and validation for the command-line interface.

Configurations are JSON.  Validation collects every problem before failing
so a bad file is fixed in one round trip.
"""

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .inference import WindowFunctional
from .kernel import SignedKernel
from .queueing import ServiceModel
from .simulation import PointConfiguration

__all__ = ["RunConfig", "ConfigError", "load_config", "config_hash",
           "replica_seed"]

_MAX_SEED = 2 ** 64 - 1


class ConfigError(Exception):
    """Validation failure; ``errors`` lists every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class RunConfig:
    kernel: SignedKernel
    lam: float
    window: float
    horizon: float
    seed: int
    replicas: int
    initial: PointConfiguration | None
    functional: WindowFunctional
    service: ServiceModel | None
    level: float
    eta: float | None
    alpha: float | None
    s_grid: tuple
    mc_samples: int
    cluster_samples: int
    raw: dict = field(repr=False, default_factory=dict)


def config_hash(raw: dict) -> str:
    """Short stable hash of the raw configuration dictionary."""
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def replica_seed(master_seed: int, replica: int) -> np.random.SeedSequence:
    """Deterministic per-replica seed derived from the master seed."""
    return np.random.SeedSequence((master_seed, replica))


def _parse_kernel(raw, errors):
    entry = raw.get("kernel", [])
    if entry in (None, []):
        return SignedKernel.zero()
    try:
        return SignedKernel.from_pieces(entry)
    except (ValueError, TypeError) as exc:
        errors.append(f"kernel: {exc}")
        return None


def _parse_functional(raw, errors):
    entry = raw.get("functional", "indicator_empty")
    if isinstance(entry, str):
        if entry == "count":
            return WindowFunctional.count()
        if entry == "indicator_empty":
            return WindowFunctional.indicator_empty()
        errors.append(f"functional: unknown name {entry!r}")
        return None
    if isinstance(entry, dict) and "count_capped" in entry:
        try:
            return WindowFunctional.count_capped(int(entry["count_capped"]))
        except (ValueError, TypeError) as exc:
            errors.append(f"functional: {exc}")
            return None
    errors.append(f"functional: unrecognised specification {entry!r}")
    return None


def _parse_service(raw, kernel, window, errors):
    entry = raw.get("service")
    if entry is None:
        return None
    try:
        kind = entry.get("kind")
        if kind == "deterministic":
            return ServiceModel.deterministic(float(entry["duration"]))
        if kind == "exponential":
            return ServiceModel.exponential(float(entry["rate"]))
        if kind == "shifted_cluster":
            if kernel is None or window is None:
                errors.append("service: shifted_cluster needs kernel and window")
                return None
            return ServiceModel.shifted_cluster(kernel, window)
        if kind == "empirical":
            samples = entry.get("samples")
            if isinstance(samples, str):
                samples = _read_times_csv(samples)
            return ServiceModel.empirical(samples,
                                          tail_rate=float(entry.get("tail_rate", math.inf)))
        errors.append(f"service: unknown kind {kind!r}")
    except (KeyError, ValueError, TypeError) as exc:
        errors.append(f"service: {exc}")
    return None


def _read_times_csv(path) -> list:
    times = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                times.append(float(row[0]))
            except ValueError:
                continue    # header row
    return times


def _parse_initial(raw, window, errors):
    path = raw.get("initial")
    if path is None:
        return None
    try:
        times = sorted(_read_times_csv(path))
    except OSError as exc:
        errors.append(f"initial: {exc}")
        return None
    try:
        return PointConfiguration(atoms=np.asarray(times), window=(-window, 0.0))
    except ValueError as exc:
        errors.append(f"initial: atoms must lie in (-window, 0]: {exc}")
        return None


def load_config(path: str) -> RunConfig:
    """Load and validate a JSON run configuration, collecting all errors."""
    with open(path) as fh:
        raw = json.load(fh)
    errors: list = []
    kernel = _parse_kernel(raw, errors)

    lam = float(raw.get("lambda", 0.0))
    if lam <= 0.0:
        errors.append("lambda: baseline intensity must be positive")

    window = raw.get("window")
    if window is None:
        window = kernel.support_bound if kernel is not None else 0.0
    window = float(window)
    if window <= 0.0:
        errors.append("window: must be positive")
    if kernel is not None and window < kernel.support_bound:
        errors.append(
            f"window: must be at least the kernel support bound "
            f"({window} < {kernel.support_bound})"
        )
    if kernel is not None and kernel.l1_positive >= 1.0:
        errors.append(
            f"kernel: positive-part mass {kernel.l1_positive} must be < 1"
        )

    horizon = float(raw.get("horizon", 0.0))
    if horizon <= 0.0:
        errors.append("horizon: must be positive")

    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or not 0 <= seed <= _MAX_SEED:
        errors.append("seed: must be an integer in [0, 2^64)")
        seed = 0

    replicas = raw.get("replicas", 1)
    if not isinstance(replicas, int) or replicas < 1:
        errors.append("replicas: must be a positive integer")
        replicas = 1

    level = float(raw.get("level", 0.95))
    if not 0.0 < level < 1.0:
        errors.append("level: must be in (0, 1)")

    eta = raw.get("eta")
    if eta is not None:
        eta = float(eta)
        if not 0.0 < eta <= 1.0:
            errors.append("eta: must be in (0, 1]")

    alpha = raw.get("alpha")
    if alpha is not None:
        alpha = float(alpha)
        if alpha <= 0.0:
            errors.append("alpha: must be positive")

    s_grid = tuple(float(s) for s in raw.get("s_grid", (0.5, 1.0, 2.0)))
    mc_samples = int(raw.get("mc_samples", 20000))
    if mc_samples < 0:
        errors.append("mc_samples: must be nonnegative")
    cluster_samples = int(raw.get("cluster_samples", 10000))
    if cluster_samples < 1:
        errors.append("cluster_samples: must be positive")

    functional = _parse_functional(raw, errors)
    service = _parse_service(raw, kernel, window, errors)
    initial = _parse_initial(raw, window, errors)

    if errors:
        raise ConfigError(errors)
    return RunConfig(
        kernel=kernel, lam=lam, window=window, horizon=horizon, seed=seed,
        replicas=replicas, initial=initial, functional=functional,
        service=service, level=level, eta=eta, alpha=alpha, s_grid=s_grid,
        mc_samples=mc_samples, cluster_samples=cluster_samples, raw=raw,
    )
