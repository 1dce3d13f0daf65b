"""Seeded experiment runners behind the command-line interface.

Each ``run_*`` function takes a resolved :class:`ExperimentConfig`, writes
``manifest.txt`` before anything else, then its CSV outputs. All outputs are
a pure function of the configuration: replications derive their seeds from
``(seed, replication)`` and results are written in (replication, policy, t)
order whatever order workers finish in.
"""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .analysis import (
    greedy_gamma,
    rank_estimate,
    rearrangement_check,
    regret_bound_curve,
    regret_trace,
    theorem2_bound,
)
from .config import ConfigError
from .environments import load_replay, sample_synthetic
from .kernels import PeriodicTime, Product
from .policies import FiniteArm, uniform_grid

__all__ = [
    "derive_seed",
    "simulate",
    "run_synthetic",
    "run_replay",
    "run_sweep_tau",
    "run_info_gain",
    "run",
]


def derive_seed(master, index):
    """Independent 32-bit seed for replication/trial ``index``."""
    return int(np.random.SeedSequence([int(master), int(index)]).generate_state(1)[0])


def simulate(policy, env, grid, horizon, start=1):
    """Play ``horizon`` steps from ``start``; returns the chosen grid indices.

    ``policy`` must already be reset (and optionally warm-started).
    """
    chosen = []
    for t in range(start, start + horizon):
        j = policy.select_index(t, grid)
        reward = env.query(j, t).value
        policy.update(t, grid[j], reward)
        chosen.append(j)
    return chosen


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path


def _write_manifest(cfg, out, seeds):
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "manifest.txt")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# periodic_gp {__version__}\n")
        fh.write(f"# created {datetime.now(timezone.utc).isoformat(timespec='seconds')}\n")
        for label, seed in seeds:
            fh.write(f"# derived_seed {label} = {seed}\n")
        for line in cfg.to_lines():
            fh.write(line + "\n")
        fh.flush()
        os.fsync(fh.fileno())
    return path


def _regret_rows(traces):
    for tr in traces:
        for k, (r, R) in enumerate(zip(tr.instantaneous, tr.cumulative)):
            yield (tr.replication, tr.policy, tr.start + k, r, R)


def _summary_rows(traces, order):
    totals = {}
    for tr in traces:
        totals.setdefault(tr.policy, []).append(tr.total)
    for name in order:
        x = np.asarray(totals[name])
        std = float(x.std(ddof=1)) if x.size > 1 else 0.0
        yield (name, float(x.mean()), std, std / math.sqrt(x.size), int(x.size))


SUMMARY_HEADER = ["policy", "mean_R_T", "std_R_T", "se_R_T", "replications"]

PLOT_SCRIPT = '''\
"""Mean cumulative regret against time, one curve per policy."""
import csv
import os
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
sums, counts = defaultdict(dict), defaultdict(dict)
with open(os.path.join(here, "regret.csv"), newline="") as fh:
    for row in csv.DictReader(fh):
        p, t = row["policy"], int(row["t"])
        sums[p][t] = sums[p].get(t, 0.0) + float(row["R_t"])
        counts[p][t] = counts[p].get(t, 0) + 1

fig, ax = plt.subplots(figsize=(6, 4))
for p in sums:
    ts = sorted(sums[p])
    ax.plot(ts, [sums[p][t] / counts[p][t] for t in ts], label=p)
ax.set_xlabel("t")
ax.set_ylabel("mean cumulative regret")
ax.legend()
fig.tight_layout()
target = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "regret.png")
fig.savefig(target, dpi=150)
print(target)
'''


def _write_plot_script(out):
    path = os.path.join(out, "plot_regret.py")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(PLOT_SCRIPT)
    return path


def _map(fn, args, jobs):
    if jobs <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(fn, *a) for a in args]
        return [f.result() for f in futures]


# ---------------------------------------------------------------------------
# synthetic
# ---------------------------------------------------------------------------


def _synthetic_grid(cfg):
    return uniform_grid(cfg["env.box_width"], cfg["env.grid_size"], 1)


def _synthetic_env(cfg, seed, grid):
    kernel = Product(
        cfg.action_kernel(prefix="env"),
        PeriodicTime(cfg["env.time_length_scale"], cfg["env.tau"]),
    )
    return sample_synthetic(grid, cfg["env.tau"], kernel, cfg["env.noise_variance"], seed)


def _run_one(cfg, name, env, grid, rep, seed, *, start=1, horizon=None, period=None,
             label=None, warm=None):
    policy = cfg.build_policy(
        name, arm_count=grid.shape[0], d=grid.shape[1],
        box_width=cfg["env.box_width"], env=env, period=period,
    ).reset()
    if warm is not None:
        policy.warm_start(*warm)
    horizon = cfg["horizon"] if horizon is None else horizon
    chosen = simulate(policy, env, grid, horizon, start)
    return regret_trace(env, chosen, horizon, start=start, policy=label or name,
                        replication=rep, seed=seed)


def _synthetic_replication(cfg, rep, names, periods):
    seed = derive_seed(cfg["seed"], rep)
    grid = _synthetic_grid(cfg)
    env = _synthetic_env(cfg, seed, grid)
    traces = [_run_one(cfg, name, env, grid, rep, seed) for name in names]
    sweep = [
        _run_one(cfg, "periodic", env, grid, rep, seed, period=tau,
                 label=f"periodic[tau={tau}]")
        for tau in periods
    ]
    return traces, sweep


def _replication_seeds(cfg):
    return [(f"replication {r}", derive_seed(cfg["seed"], r)) for r in range(cfg["reps"])]


def run_synthetic(cfg, out=None):
    """Every configured policy on ``reps`` sampled periodic environments."""
    out = out or cfg["out"]
    files = {"manifest": _write_manifest(cfg, out, _replication_seeds(cfg))}
    names = list(cfg["policies"])
    results = _map(
        _synthetic_replication,
        [(cfg, r, names, ()) for r in range(cfg["reps"])],
        cfg["jobs"],
    )
    traces = [tr for res, _ in results for tr in res]
    files["regret"] = _write_csv(
        os.path.join(out, "regret.csv"), ["replication", "policy", "t", "r_t", "R_t"],
        _regret_rows(traces),
    )
    files["summary"] = _write_csv(
        os.path.join(out, "summary.csv"), SUMMARY_HEADER, _summary_rows(traces, names)
    )
    files["plot"] = _write_plot_script(out)
    return files


def run_sweep_tau(cfg, out=None):
    """Periodic policy under each assumed period in ``sweep.taus`` plus baselines.

    All variants share each replication's environment (period ``env.tau``).
    """
    out = out or cfg["out"]
    files = {"manifest": _write_manifest(cfg, out, _replication_seeds(cfg))}
    periods = tuple(cfg["sweep.taus"])
    baselines = [n for n in cfg["policies"] if n != "periodic"]
    results = _map(
        _synthetic_replication,
        [(cfg, r, baselines, periods) for r in range(cfg["reps"])],
        cfg["jobs"],
    )
    base = [tr for res, _ in results for tr in res]
    sweep = [tr for _, sw in results for tr in sw]

    def sweep_rows():
        for _, sw in results:
            for tau, tr in zip(periods, sw):
                for k, R in enumerate(tr.cumulative):
                    yield (tau, tr.replication, tr.start + k, R)

    files["sweep"] = _write_csv(
        os.path.join(out, "sweep.csv"), ["tau", "replication", "t", "R_t"], sweep_rows()
    )
    files["regret"] = _write_csv(
        os.path.join(out, "regret.csv"), ["replication", "policy", "t", "r_t", "R_t"],
        _regret_rows(base + sweep),
    )
    order = [f"periodic[tau={tau}]" for tau in periods] + baselines
    files["summary"] = _write_csv(
        os.path.join(out, "summary.csv"), SUMMARY_HEADER, _summary_rows(base + sweep, order)
    )
    files["plot"] = _write_plot_script(out)
    return files


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------


def _arm_grid(n_arms, encoding):
    if encoding == "onehot":
        return np.eye(n_arms)
    return np.arange(n_arms, dtype=float)[:, None]


def _warm_triples(env, grid, warmup, mode):
    actions, times, rewards = [], [], []
    for t in range(1, warmup + 1):
        arms = [env.best_mean(t)[0]] if mode == "best" else range(env.n_actions)
        for j in arms:
            actions.append(grid[j])
            times.append(t)
            rewards.append(env.query(j, t).value)
    if not actions:
        return None
    return np.asarray(actions), times, rewards


def run_replay(cfg, out=None):
    """Replay recorded rewards after a warm-start window.

    Replay is deterministic, so a single pass is made whatever ``reps`` says.
    """
    out = out or cfg["out"]
    try:
        env = load_replay(cfg["env.replay_path"], cfg["env.standardize"], cfg["env.warmup"])
    except OSError as exc:
        raise ConfigError(f"env.replay_path: {exc}") from None
    warmup, horizon = cfg["env.warmup"], cfg["horizon"]
    if warmup + horizon > env.n_steps:
        raise ConfigError(
            f"horizon: warmup {warmup} + horizon {horizon} exceeds the "
            f"{env.n_steps} recorded steps"
        )
    files = {"manifest": _write_manifest(cfg, out, [])}
    grid = _arm_grid(env.n_actions, cfg["env.arm_encoding"])
    warm = _warm_triples(env, grid, warmup, cfg["env.warm_start"])
    names = list(cfg["policies"])
    traces = [
        _run_one(cfg, name, env, grid, 0, None, start=warmup + 1, horizon=horizon, warm=warm)
        for name in names
    ]
    files["regret"] = _write_csv(
        os.path.join(out, "regret.csv"), ["replication", "policy", "t", "r_t", "R_t"],
        _regret_rows(traces),
    )
    files["summary"] = _write_csv(
        os.path.join(out, "summary.csv"), SUMMARY_HEADER, _summary_rows(traces, names)
    )
    totals = {tr.policy: tr.total for tr in traces}
    ref = totals.get("gp")

    def improvement_rows():
        for name in names:
            if ref is None or ref == 0:
                pct = math.nan
            else:
                pct = 100.0 * (ref - totals[name]) / ref
            yield (name, totals[name], pct)

    files["improvement"] = _write_csv(
        os.path.join(out, "improvement.csv"), ["policy", "R_T", "improvement_vs_gp_pct"],
        improvement_rows(),
    )
    files["plot"] = _write_plot_script(out)
    return files


# ---------------------------------------------------------------------------
# information gain diagnostics
# ---------------------------------------------------------------------------


def run_info_gain(cfg, out=None):
    """Joint vs per-phase information gain on random action sequences.

    Each trial draws ``horizon`` actions uniformly from the grid, pairs them
    with times ``1..horizon`` and compares the joint gain under the periodic
    product kernel with the per-phase action-kernel gains. Also reported:
    the greedy per-phase gain estimate, ``tau`` times it, the numerical rank of
    the time Gram and the regret bound at the horizon.
    """
    out = out or cfg["out"]
    T, tau = cfg["horizon"], cfg["env.tau"]
    if T % tau:
        raise ConfigError(f"horizon: {T} is not a multiple of env.tau={tau}")
    trials = cfg["infogain.trials"]
    seeds = [(f"trial {i}", derive_seed(cfg["seed"], i)) for i in range(trials)]
    files = {"manifest": _write_manifest(cfg, out, seeds)}

    grid = _synthetic_grid(cfg)
    noise = cfg["gp.noise_variance"]
    action_kernel = cfg.action_kernel()
    time_kernel = PeriodicTime(
        cfg.policy_param("periodic", "time_length_scale"), tau, cfg["kernel.form"]
    )
    kernel = Product(action_kernel, time_kernel)
    times = np.arange(1, T + 1, dtype=float)

    gamma = greedy_gamma(action_kernel, grid, T // tau, noise)
    bound_gamma = theorem2_bound(gamma, tau)
    rank = rank_estimate(time_kernel(times))
    curve = regret_bound_curve(T, FiniteArm(grid.shape[0], cfg["bound.delta"]), bound_gamma, noise)

    rows = []
    for i, seed in seeds:
        rng = np.random.default_rng(seed)
        actions = grid[rng.integers(0, grid.shape[0], T)]
        X = np.column_stack([actions, times])
        rep = rearrangement_check(X, kernel, noise, tau, strict=False)
        status = "ok" if rep.observed_gain <= bound_gamma else "inconclusive"
        rows.append((
            int(i.split()[1]), rep.observed_gain, sum(rep.phase_gains), rep.bound_slack,
            gamma, bound_gamma, status, rank, curve[-1],
            ";".join(_fmt(g) for g in rep.phase_gains),
        ))
    files["infogain"] = _write_csv(
        os.path.join(out, "infogain.csv"),
        ["trial", "observed_gain", "sum_phase_gains", "slack", "greedy_gamma",
         "tau_times_gamma", "bound_check", "rank_k_tau", "regret_bound_T", "phase_gains"],
        rows,
    )
    files["bound"] = _write_csv(
        os.path.join(out, "regret_bound.csv"), ["t", "bound"],
        ((t, b) for t, b in enumerate(curve, start=1)),
    )
    return files


RUNNERS = {
    "synthetic": run_synthetic,
    "replay": run_replay,
    "sweep-tau": run_sweep_tau,
    "info-gain": run_info_gain,
}


def run(cfg, out=None):
    return RUNNERS[cfg.mode](cfg, out)
