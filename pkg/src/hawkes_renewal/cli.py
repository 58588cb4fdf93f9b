"""Command-line interface.

Subcommands: ``simulate``, ``cluster-stats``, ``queue-tail``,
``renewal-stats``, ``estimate``, ``ci``.  Every run is driven by a JSON
configuration file; replicas use seeds derived from the master seed, so any
replica count reproduces the same pooled data.  Output files are CSV (floats
printed with 17 significant digits, first line carrying the configuration
hash) and JSON summaries.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import cluster as cluster_mod
from . import inference, queueing, renewal
from .config import ConfigError, config_hash, load_config, replica_seed
from .inference import InsufficientCyclesError
from .queueing import QuadratureError
from .simulation import simulate_coupled, simulate_hawkes

__all__ = ["main", "run_main"]


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write_csv(path, header, rows, cfg_hash):
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={cfg_hash}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([x if isinstance(x, (str, int)) else _fmt(x)
                             for x in row])


def _write_json(path, payload, cfg_hash):
    payload = dict(payload)
    payload["config_hash"] = cfg_hash
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _simulate_replicas(cfg, coupled=False):
    paths = []
    for r in range(cfg.replicas):
        seed = replica_seed(cfg.seed, r)
        sim = simulate_coupled if coupled else simulate_hawkes
        paths.append(sim(cfg.kernel, cfg.lam, cfg.horizon,
                         initial=cfg.initial, seed=seed))
    return paths


def _pooled_cycles(cfg):
    cycles = []
    for path in _simulate_replicas(cfg):
        cycles.extend(renewal.split_excursions(path, cfg.window).cycles)
    return cycles


def _cmd_simulate(cfg, out_dir, coupled):
    rows = []
    for r, path in enumerate(_simulate_replicas(cfg, coupled=coupled)):
        if coupled:
            dom = path.dominating_events
            accepted = np.isin(dom, path.events, assume_unique=True)
            for t, ok in zip(dom, accepted):
                rows.append((r, t, int(ok)))
        else:
            rows.extend((r, t) for t in path.events)
    header = ("replica", "event_time", "accepted") if coupled \
        else ("replica", "event_time")
    _write_csv(os.path.join(out_dir, "events.csv"), header, rows,
               config_hash(cfg.raw))
    print(f"wrote {len(rows)} events for {cfg.replicas} replica(s)")
    return 0


def _cmd_cluster_stats(cfg, out_dir):
    rng = np.random.default_rng(replica_seed(cfg.seed, 0))
    n = cfg.cluster_samples
    sizes = np.empty(n, dtype=np.int64)
    lengths = np.empty(n)
    for i in range(n):
        c = cluster_mod.sample_cluster(cfg.kernel, rng)
        sizes[i] = c.size
        lengths[i] = c.length
    cfg_hash = config_hash(cfg.raw)
    _write_csv(os.path.join(out_dir, "clusters.csv"),
               ("sample_index", "size", "length"),
               [(i, int(s), l) for i, (s, l) in enumerate(zip(sizes, lengths))],
               cfg_hash)
    summary = cfg.kernel.summarize()
    grid = np.linspace(0.0, max(float(np.max(lengths)), 1.0), 20)
    tail = [float(np.mean(lengths > x)) for x in grid]
    bound = [float(min(1.0, cluster_mod.cluster_tail_bound(summary, x)))
             for x in grid]
    _write_json(os.path.join(out_dir, "cluster_summary.json"), {
        "n": n,
        "mean_size": float(np.mean(sizes)),
        "mean_length": float(np.mean(lengths)),
        "tail_grid": [{"x": float(x), "empirical": p, "bound": b}
                      for x, p, b in zip(grid, tail, bound)],
    }, cfg_hash)
    print(f"sampled {n} clusters, mean size {np.mean(sizes):.4f}")
    return 0


def _cmd_queue_tail(cfg, out_dir):
    service = cfg.service
    if service is None:
        raise ConfigError(["service: required for queue-tail"])
    cfg_hash = config_hash(cfg.raw)
    theta = queueing.theta_abscissa(cfg.lam, service)
    rate, attained = queueing.tail_rate(cfg.lam, service.tail_rate)
    mc_v1 = mc_t1 = None
    if cfg.mc_samples > 0:
        mc_v1, mc_t1 = queueing.first_return_times(
            cfg.lam, service, cfg.mc_samples, seed=replica_seed(cfg.seed, 0))
    rows = []
    for s in cfg.s_grid:
        t1 = queueing.takacs_laplace_T1(cfg.lam, service, s)
        b = queueing.takacs_laplace_B(cfg.lam, service, s)
        if mc_t1 is not None:
            vals = np.exp(-s * mc_t1)
            rows.append((s, t1, b, float(np.mean(vals)),
                         float(np.std(vals, ddof=1) / math.sqrt(vals.size))))
        else:
            rows.append((s, t1, b, "", ""))
    header = ("s", "laplace_T1", "laplace_B", "mc_mean_exp_neg_sT1", "mc_se")
    _write_csv(os.path.join(out_dir, "queue_tail.csv"), header, rows, cfg_hash)
    payload = {
        "theta": theta,
        "tail_rate": rate,
        "tail_rate_attained": attained,
    }
    if mc_t1 is not None:
        payload["mc_mean_T1"] = float(np.mean(mc_t1))
        payload["mc_se_T1"] = float(np.std(mc_t1, ddof=1) / math.sqrt(mc_t1.size))
    _write_json(os.path.join(out_dir, "queue_tail_summary.json"), payload,
                cfg_hash)
    print(f"theta = {theta:.9g}, tail rate {rate:.9g} "
          f"({'attained' if attained else 'open'})")
    return 0


def _cmd_renewal_stats(cfg, out_dir):
    cfg_hash = config_hash(cfg.raw)
    rows = []
    all_cycles = []
    for r, path in enumerate(_simulate_replicas(cfg)):
        parts = renewal.split_excursions(path, cfg.window)
        t = parts.delay.duration
        for k, cyc in enumerate(parts.cycles, start=1):
            t += cyc.duration
            rows.append((r, k, t, cyc.duration, len(cyc.events)))
        all_cycles.extend(parts.cycles)
    _write_csv(os.path.join(out_dir, "renewal_cycles.csv"),
               ("replica", "k", "tau_k", "duration", "events_in_cycle"),
               rows, cfg_hash)
    if not all_cycles:
        raise InsufficientCyclesError(
            "no complete cycles detected; extend the horizon")
    durations = renewal.cycle_durations(all_cycles)
    gamma_plus = cfg.kernel.summarize().gamma
    alpha_cap = min(cfg.lam, gamma_plus)
    moments = {}
    for frac in (0.25, 0.5):
        alpha = frac * alpha_cap
        est = renewal.estimate_exp_moment(all_cycles, alpha, cfg.lam, gamma_plus)
        moments[f"alpha_{frac}"] = {"alpha": alpha, "value": est.value,
                                    "se": est.se}
    _write_json(os.path.join(out_dir, "renewal_summary.json"), {
        "n_cycles": len(all_cycles),
        "mean_tau": float(np.mean(durations)),
        "var_tau": float(np.var(durations, ddof=1)) if durations.size > 1 else None,
        "exp_moments": moments,
    }, cfg_hash)
    print(f"{len(all_cycles)} cycles, mean duration {np.mean(durations):.6g}")
    return 0


def _report_payload(report):
    return {
        "pi_hat": report.pi_hat,
        "sigma2_hat": report.sigma2_hat,
        "mean_tau": report.mean_tau,
        "var_tau": report.var_tau,
        "n_cycles": report.n_cycles,
        "ci_low": report.ci_low,
        "ci_high": report.ci_high,
        "level": report.level,
        "t_horizon": report.t_horizon,
        "epsilon_eta": report.epsilon_eta,
    }


def _cmd_estimate(cfg, out_dir):
    cfg_hash = config_hash(cfg.raw)
    cycles = _pooled_cycles(cfg)
    if not cycles:
        raise InsufficientCyclesError(
            "no complete cycles detected; extend the horizon")
    report = inference.estimate_report(
        cycles, cfg.functional, cfg.horizon * cfg.replicas, level=cfg.level)
    integrals = inference.cycle_integrals(cycles, cfg.functional)
    durations = renewal.cycle_durations(cycles)
    _write_csv(os.path.join(out_dir, "cycle_integrals.csv"),
               ("k", "integral", "duration"),
               [(k, i, d) for k, (i, d) in enumerate(zip(integrals, durations), 1)],
               cfg_hash)
    _write_json(os.path.join(out_dir, "estimate_report.json"),
                _report_payload(report), cfg_hash)
    print(f"pi_hat = {report.pi_hat:.9g} "
          f"[{report.ci_low:.9g}, {report.ci_high:.9g}] "
          f"({report.n_cycles} cycles)")
    return 0


def _cmd_ci(cfg, out_dir):
    cfg_hash = config_hash(cfg.raw)
    cycles = _pooled_cycles(cfg)
    if not cycles:
        raise InsufficientCyclesError(
            "no complete cycles detected; extend the horizon")
    gamma_plus = cfg.kernel.summarize().gamma
    alpha = cfg.alpha if cfg.alpha is not None \
        else 0.5 * min(cfg.lam, gamma_plus)
    eta = cfg.eta if cfg.eta is not None else 0.05
    report = inference.estimate_report(
        cycles, cfg.functional, cfg.horizon * cfg.replicas, level=cfg.level,
        eta=eta, alpha=alpha, lam=cfg.lam, gamma_plus=gamma_plus)
    payload = _report_payload(report)
    payload["eta"] = eta
    payload["alpha"] = alpha
    _write_json(os.path.join(out_dir, "ci_report.json"), payload, cfg_hash)
    print(f"pi_hat = {report.pi_hat:.9g}, "
          f"clt [{report.ci_low:.9g}, {report.ci_high:.9g}], "
          f"bernstein radius {report.epsilon_eta:.9g} at eta={eta}")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="hawkes-renewal",
        description="Hawkes-process simulation with renewal-based estimation",
    )
    parser.add_argument("command", choices=[
        "simulate", "cluster-stats", "queue-tail", "renewal-stats",
        "estimate", "ci",
    ])
    parser.add_argument("--config", required=True, help="JSON configuration file")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override seed")
    parser.add_argument("--replicas", type=int, default=None,
                        help="override replica count")
    parser.add_argument("--coupled", action="store_true",
                        help="simulate: also run the dominating process")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None or args.replicas is not None:
            raw = dict(cfg.raw)
            if args.seed is not None:
                raw["seed"] = args.seed
            if args.replicas is not None:
                raw["replicas"] = args.replicas
            import dataclasses
            cfg = dataclasses.replace(
                cfg,
                seed=raw["seed"],
                replicas=raw["replicas"],
                raw=raw,
            )
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    out_dir = args.out or os.environ.get("HAWKES_RENEWAL_OUT") \
        or cfg.raw.get("out") or "."
    os.makedirs(out_dir, exist_ok=True)

    try:
        if args.command == "simulate":
            return _cmd_simulate(cfg, out_dir, args.coupled)
        if args.command == "cluster-stats":
            return _cmd_cluster_stats(cfg, out_dir)
        if args.command == "queue-tail":
            return _cmd_queue_tail(cfg, out_dir)
        if args.command == "renewal-stats":
            return _cmd_renewal_stats(cfg, out_dir)
        if args.command == "estimate":
            return _cmd_estimate(cfg, out_dir)
        if args.command == "ci":
            return _cmd_ci(cfg, out_dir)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (QuadratureError, InsufficientCyclesError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    return 0


def run_main():
    sys.exit(main())


if __name__ == "__main__":
    run_main()
