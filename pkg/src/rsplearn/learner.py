"""L1-constrained maximum-likelihood fitting of Boltzmann policies.

The average log-likelihood is maximised by projected gradient ascent with
Armijo backtracking; the budget grid and hold-out selection follow the
train/validate loop in :func:`train_algorithm1`.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .policy import Rsp, sample_log_loss


def project_onto_l1_ball(v, radius):
    """Euclidean projection of *v* onto ``{u : ||u||_1 <= radius}``.

    Soft-thresholds at the level found from the sorted absolute values
    (Duchi et al., 2008). Vectors already inside the ball are returned
    unchanged.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    v = np.asarray(v, dtype=float)
    # slack absorbs the rounding of a previous projection, making the map idempotent
    if math.isinf(radius) or np.abs(v).sum() <= radius + 1e-12 * max(1.0, radius):
        return v.copy()
    if radius == 0:
        return np.zeros_like(v)
    u = np.sort(np.abs(v))[::-1]
    css = np.cumsum(u)
    k = np.arange(1, u.size + 1)
    # the first coordinate always qualifies; a radius below the spacing of u[0] can hide that
    active = np.nonzero(u * k > css - radius)[0]
    rho = active[-1] if active.size else 0
    lam = (css[rho] - radius) / (rho + 1.0)
    return np.sign(v) * np.maximum(np.abs(v) - lam, 0.0)


class LogLikelihood:
    """Average log-likelihood of a sample set under ``Rsp(theta, features)``.

    Samples are aggregated into per-(state, action) counts so each
    evaluation costs one pass over the visited states.
    """

    def __init__(self, samples, features):
        if len(samples) == 0:
            raise ValueError("cannot fit on an empty sample set")
        counts = samples.counts(features.num_states, features.num_actions)
        visited = counts.sum(axis=1) > 0
        self.m = float(len(samples))
        self.counts = counts[visited]
        self.state_counts = self.counts.sum(axis=1)
        self.phi = features.values[visited]
        # sum_i phi(x_i, a_i) / m is constant in theta
        self.empirical_mean = np.einsum("xa,xai->i", self.counts, self.phi) / self.m

    def _log_probs(self, theta):
        z = self.phi @ theta
        z = z - z.max(axis=1, keepdims=True)
        return z - np.log(np.exp(z).sum(axis=1, keepdims=True))

    def value(self, theta):
        return float(np.sum(self.counts * self._log_probs(theta)) / self.m)

    def value_and_gradient(self, theta):
        logp = self._log_probs(theta)
        mu = np.exp(logp)
        expected = np.einsum("x,xa,xai->i", self.state_counts, mu, self.phi) / self.m
        return float(np.sum(self.counts * logp) / self.m), self.empirical_mean - expected

    def gradient(self, theta):
        return self.value_and_gradient(theta)[1]


@dataclass
class FitResult:
    rsp: Rsp
    budget: float
    objective: float
    iterations: int
    pg_norm: float
    converged: bool
    history: list = field(default_factory=list, repr=False)

    def diagnostics(self):
        return {
            "objective": self.objective,
            "iterations": self.iterations,
            "pg_norm": self.pg_norm,
            "converged": self.converged,
        }


def fit_constrained_mle(samples, features, budget, tol=1e-6, max_iters=2000, theta0=None):
    """Maximise the average log-likelihood subject to ``||theta||_1 <= budget``.

    ``budget=math.inf`` gives the unconstrained fit. The stopping rule uses
    the unit-step gradient mapping ``theta - proj(theta + grad)``.
    Hitting *max_iters* with a residual above ``100 * tol`` issues a
    ``RuntimeWarning`` and still returns the last iterate.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    loglik = LogLikelihood(samples, features)
    n = features.num_features
    theta = np.zeros(n) if theta0 is None else project_onto_l1_ball(theta0, budget)
    f, g = loglik.value_and_gradient(theta)
    history = [f]
    if budget == 0:
        pg = float(np.linalg.norm(theta - project_onto_l1_ball(theta + g, budget)))
        return FitResult(Rsp(theta, features), budget, f, 0, pg, True, history)

    step = 1.0
    pg_norm = math.inf
    iters = 0
    for iters in range(1, max_iters + 1):
        pg_norm = float(np.linalg.norm(theta - project_onto_l1_ball(theta + g, budget)))
        if pg_norm < tol:
            iters -= 1
            break
        while True:
            cand = project_onto_l1_ball(theta + step * g, budget)
            d = cand - theta
            f_new, g_new = loglik.value_and_gradient(cand)
            if f_new >= f + g @ d - (d @ d) / (2.0 * step):
                break
            step *= 0.5
            if step < 1e-20:
                # numerically stationary: no ascent step is representable
                cand, f_new, g_new = theta, f, g
                break
        if f_new < f:
            # the Armijo test admits at most round-off level decreases
            cand, f_new, g_new = theta, f, g
        theta, f, g = cand, f_new, g_new
        history.append(f)
        step = min(step * 2.0, 1e6)
    else:
        pg_norm = float(np.linalg.norm(theta - project_onto_l1_ball(theta + g, budget)))

    converged = pg_norm < tol
    if not converged and pg_norm > 100 * tol:
        warnings.warn(
            f"projected gradient ascent stopped after {iters} iterations with "
            f"residual {pg_norm:.3e} (budget {budget})",
            RuntimeWarning,
            stacklevel=2,
        )
    return FitResult(Rsp(theta, features), budget, f, iters, pg_norm, converged, history)


@dataclass(frozen=True)
class TrainConfig:
    gamma: float = 0.3
    budget_cap: float = 16.0
    tol: float = 1e-6
    max_iters: int = 2000
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if not self.budget_cap >= 0 or math.isinf(self.budget_cap):
            raise ValueError("budget cap must be a finite non-negative number")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class TrainedPolicy:
    rsp: Rsp
    chosen_budget: float
    per_budget_holdout: list
    diagnostics: dict

    @property
    def holdout_logloss(self):
        """Hold-out loss of the selected budget."""
        for entry in self.per_budget_holdout:
            if entry["budget"] == self.chosen_budget:
                return entry["holdout_logloss"]
        raise LookupError("chosen budget missing from the hold-out table")

    def to_dict(self, feature_map_ref=None):
        """JSON-ready document; a superset of the RSP document."""
        return {
            "theta": self.rsp.theta.tolist(),
            "feature_map": feature_map_ref if feature_map_ref is not None
            else self.rsp.features.to_dict(),
            "chosen_budget": self.chosen_budget,
            "holdout_logloss": self.holdout_logloss,
            "per_budget_holdout": self.per_budget_holdout,
            "diagnostics": self.diagnostics,
        }


def budget_grid(cap):
    """``0, 1, 2, 4, ...`` up to *cap*, with *cap* appended when not on the grid."""
    grid = [0.0]
    b = 1.0
    while b <= cap:
        grid.append(b)
        b *= 2.0
    if grid[-1] != cap:
        grid.append(float(cap))
    return grid


def split_sizes(m, gamma):
    n_train = math.ceil(round((1.0 - gamma) * m, 9))
    return n_train, m - n_train


def split_samples(samples, gamma, seed):
    """Seeded shuffle, then the first ``ceil((1-gamma) m)`` pairs train and the rest validate."""
    m = len(samples)
    if m < 2:
        raise ValueError("need at least two samples to split")
    n_train, n_hold = split_sizes(m, gamma)
    if n_train == 0 or n_hold == 0:
        raise ValueError(f"gamma={gamma} leaves an empty split for m={m}")
    perm = np.random.default_rng(seed).permutation(m)
    return samples.subset(perm[:n_train]), samples.subset(perm[n_train:])


def train_algorithm1(samples, features, config):
    """Fit one constrained MLE per budget on the training split; keep the best on hold-out.

    Ties in hold-out loss go to the smaller budget.
    """
    train, hold = split_samples(samples, config.gamma, config.seed)
    table = []
    best = None
    for b in budget_grid(config.budget_cap):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            fit = fit_constrained_mle(train, features, b, config.tol, config.max_iters)
        loss = sample_log_loss(fit.rsp, hold)
        table.append({"budget": b, "holdout_logloss": loss, **fit.diagnostics()})
        if best is None or loss < best[0]:
            best = (loss, fit)
    _, fit = best
    diag = fit.diagnostics()
    diag["warning"] = None if fit.converged or fit.pg_norm <= 100 * config.tol else (
        f"not converged: residual {fit.pg_norm:.3e}"
    )
    diag["num_train"], diag["num_holdout"] = len(train), len(hold)
    return TrainedPolicy(fit.rsp, fit.budget, table, diag)


def train_unregularized(samples, features, config):
    """The same split and optimiser with the L1 constraint removed.

    The budget loop collapses to a single unconstrained fit on the
    training split; the hold-out loss is still reported.
    """
    train, hold = split_samples(samples, config.gamma, config.seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        fit = fit_constrained_mle(train, features, math.inf, config.tol, config.max_iters)
    loss = sample_log_loss(fit.rsp, hold)
    diag = fit.diagnostics()
    diag["num_train"], diag["num_holdout"] = len(train), len(hold)
    diag["warning"] = None if fit.converged else f"not converged: residual {fit.pg_norm:.3e}"
    table = [{"budget": math.inf, "holdout_logloss": loss, **fit.diagnostics()}]
    return TrainedPolicy(fit.rsp, math.inf, table, diag)
