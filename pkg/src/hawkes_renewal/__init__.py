"""Hawkes processes with signed piecewise-constant kernels: exact simulation
by thinning against a coupled dominating process, cluster sampling, M/G/infinity
busy-period analytics, renewal detection via a sliding window, and
excursion-based estimation with normal and Bernstein-type error control."""

from .cluster import (
    Cluster,
    cluster_tail_bound,
    first_return_coupled,
    sample_cluster,
    simulate_hawkes_cluster,
)
from .config import ConfigError, RunConfig, config_hash, load_config, replica_seed
from .inference import (
    BernsteinRadius,
    CycleMoments,
    DelayMoments,
    EstimatorReport,
    InsufficientCyclesError,
    WindowFunctional,
    bernstein_bound,
    bernstein_epsilon,
    clt_interval,
    concentration_bound_full,
    count_profile,
    cycle_integrals,
    cycle_moments,
    delay_moments,
    estimate_pi,
    estimate_report,
    estimate_sigma2,
    normal_quantile,
    time_average,
)
from .kernel import KernelSummary, SignedKernel, decay_rate
from .queueing import (
    QuadratureError,
    QueueTrajectory,
    ServiceModel,
    first_return_times,
    hitting_after_bound,
    simulate_mg_infty,
    tail_rate,
    takacs_laplace_B,
    takacs_laplace_T1,
    theta_abscissa,
)
from .renewal import (
    Excursion,
    Excursions,
    ExpMomentEstimate,
    RenewalTimes,
    WindowConfig,
    cycle_durations,
    detect_renewals,
    estimate_exp_moment,
    first_return,
    split_excursions,
    window_state,
)
from .simulation import (
    PointConfiguration,
    SimulationPath,
    intensity_at,
    simulate_coupled,
    simulate_hawkes,
)

__version__ = "0.1.0"

__all__ = [
    "BernsteinRadius",
    "Cluster",
    "ConfigError",
    "CycleMoments",
    "DelayMoments",
    "EstimatorReport",
    "Excursion",
    "Excursions",
    "ExpMomentEstimate",
    "InsufficientCyclesError",
    "KernelSummary",
    "PointConfiguration",
    "QuadratureError",
    "QueueTrajectory",
    "RenewalTimes",
    "RunConfig",
    "ServiceModel",
    "SignedKernel",
    "SimulationPath",
    "WindowConfig",
    "WindowFunctional",
    "bernstein_bound",
    "bernstein_epsilon",
    "clt_interval",
    "cluster_tail_bound",
    "concentration_bound_full",
    "config_hash",
    "count_profile",
    "cycle_durations",
    "cycle_integrals",
    "cycle_moments",
    "decay_rate",
    "delay_moments",
    "detect_renewals",
    "estimate_exp_moment",
    "estimate_pi",
    "estimate_report",
    "estimate_sigma2",
    "first_return",
    "first_return_coupled",
    "first_return_times",
    "hitting_after_bound",
    "intensity_at",
    "load_config",
    "normal_quantile",
    "replica_seed",
    "sample_cluster",
    "simulate_coupled",
    "simulate_hawkes",
    "simulate_hawkes_cluster",
    "simulate_mg_infty",
    "tail_rate",
    "takacs_laplace_B",
    "takacs_laplace_T1",
    "theta_abscissa",
    "time_average",
    "window_state",
]
