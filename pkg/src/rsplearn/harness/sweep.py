"""Seeded sample-size sweeps over the grid world.

Every (m, run) trial draws its own seed from the master seed, so trials
can run in any order or in parallel; rows are always merged sorted by
``(m, run, policy)``.
"""

import csv
import dataclasses
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from ..errors import NotErgodicError, NumericalConditioningError
from ..gridworld import build_feature_map, build_grid_mdp, greedy_policy
from ..learner import train_algorithm1, train_unregularized
from ..markov import average_reward, value_iteration
from ..policy import Rsp, sample_demonstrations
from ..perturbation import regret_certificate
from .config import POLICIES, split_seed, target_seed, trial_seed

log = logging.getLogger(__name__)

ROW_FIELDS = (
    "m", "run", "policy", "average_reward", "holdout_logloss", "chosen_budget",
    "kl_term", "true_regret", "min_bound", "error",
)
SUMMARY_FIELDS = ("m", "policy", "count", "mean_reward", "std_reward")
WORKERS_ENV = "RSPLEARN_WORKERS"


@dataclasses.dataclass
class Environment:
    mdp: object
    features: object
    target: object
    greedy: np.ndarray
    target_reward: float
    greedy_reward: float


def synthetic_target(features, r, k, seed):
    """Sparse parameter vector with *r* non-zeros drawn uniformly from ``[-k, k]``."""
    rng = np.random.default_rng(seed)
    theta = np.zeros(features.num_features)
    support = np.sort(rng.choice(features.num_features, size=r, replace=False))
    theta[support] = rng.uniform(-k, k, size=r)
    return Rsp(theta, features)


def build_environment(config):
    mdp = build_grid_mdp(config.grid)
    features = build_feature_map(config.grid, mdp)
    if config.mode == "theorem":
        target = synthetic_target(
            features, config.sparsity_r, config.sparsity_k, target_seed(config.master_seed)
        )
    else:
        target, _ = value_iteration(mdp, config.discount)
    greedy = greedy_policy(mdp, config.grid)
    return Environment(
        mdp, features, target, greedy, average_reward(mdp, target), average_reward(mdp, greedy)
    )


def _row(m, run, policy, **values):
    row = dict.fromkeys(ROW_FIELDS, "")
    row.update(m=m, run=run, policy=policy)
    row.update({k: v for k, v in values.items() if v is not None})
    return row


def run_trial(config, env, m_index, run):
    """All requested policies for one (m, run) pair; returns (rows, seconds per policy)."""
    m = config.sample_sizes[m_index]
    seed = trial_seed(config.master_seed, m_index, run)
    train_cfg = dataclasses.replace(config.train, seed=split_seed(seed))
    rows, timing = [], []
    samples = None
    for policy in config.policies:
        start = time.perf_counter()
        try:
            if policy == "target":
                row = _row(m, run, policy, average_reward=env.target_reward)
            elif policy == "greedy":
                row = _row(m, run, policy, average_reward=env.greedy_reward)
            else:
                if samples is None:
                    samples = sample_demonstrations(env.mdp, env.target, m, seed)
                trainer = train_algorithm1 if policy == "l1" else train_unregularized
                trained = trainer(samples, env.features, train_cfg)
                extra = {}
                if config.mode == "theorem":
                    # a failed certificate keeps the reward; only the bound columns go missing
                    try:
                        cert = regret_certificate(env.mdp, env.target, trained.rsp)
                        extra = dict(
                            kl_term=cert.kl_term, true_regret=cert.true_regret,
                            min_bound=cert.min_bound,
                        )
                    except (NotErgodicError, NumericalConditioningError) as exc:
                        log.warning("certificate m=%d run=%d policy=%s failed: %s", m, run, policy, exc)
                        extra = dict(error=f"certificate {type(exc).__name__}: {exc}")
                row = _row(
                    m, run, policy,
                    average_reward=average_reward(env.mdp, trained.rsp),
                    holdout_logloss=trained.holdout_logloss,
                    chosen_budget=trained.chosen_budget,
                    **extra,
                )
        except Exception as exc:  # recorded per row; the sweep continues
            log.warning("trial m=%d run=%d policy=%s failed: %s", m, run, policy, exc)
            row = _row(m, run, policy, error=f"{type(exc).__name__}: {exc}")
        rows.append(row)
        timing.append({"m": m, "run": run, "policy": policy,
                       "seconds": time.perf_counter() - start})
    return rows, timing


def _run_chunk(args):
    config, env, keys = args
    out = []
    for m_index, run in keys:
        out.append(run_trial(config, env, m_index, run))
    return out


def worker_count():
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_sweep(config, workers=None):
    """Run every (m, run) trial; returns (rows, timing) sorted by key."""
    env = build_environment(config)
    keys = [(i, r) for i in range(len(config.sample_sizes)) for r in range(config.runs)]
    workers = worker_count() if workers is None else workers
    if workers == 1:
        results = _run_chunk((config, env, keys))
    else:
        chunks = [keys[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for part in pool.map(_run_chunk, [(config, env, c) for c in chunks]) for r in part]
    order = {p: i for i, p in enumerate(POLICIES)}
    rows = sorted((row for rs, _ in results for row in rs),
                  key=lambda r: (r["m"], r["run"], order[r["policy"]]))
    timing = sorted((t for _, ts in results for t in ts),
                    key=lambda t: (t["m"], t["run"], order[t["policy"]]))
    return rows, timing


def _fmt(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def summarize(rows):
    """Mean and sample standard deviation of the reward per (m, policy).

    Rows without a reward are skipped; a row whose only failure is the
    certificate still counts.
    """
    groups = {}
    for row in rows:
        if row["average_reward"] == "":
            continue
        groups.setdefault((row["m"], row["policy"]), []).append(float(row["average_reward"]))
    order = {p: i for i, p in enumerate(POLICIES)}
    out = []
    for (m, policy) in sorted(groups, key=lambda k: (k[0], order[k[1]])):
        vals = np.array(groups[(m, policy)])
        std = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
        out.append({"m": m, "policy": policy, "count": int(vals.size),
                    "mean_reward": float(np.mean(vals)), "std_reward": std})
    return out


def write_csv(path, fields, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_fmt(row[f]) for f in fields])


def output_paths(out):
    out = Path(out)
    stem = out.with_suffix("")
    return {
        "rows": out,
        "summary": Path(f"{stem}_summary.csv"),
        "timing": Path(f"{stem}_timing.csv"),
        "figure": Path(f"{stem}.png"),
    }
