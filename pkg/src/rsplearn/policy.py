"""Feature maps, Boltzmann policies, demonstrations and log-loss functionals.

Logarithms are natural throughout.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .markov import action_probabilities, induced_chain, stationary_distribution

PROB_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Features ``values[x, a, i] = phi_i(x, a)``, each component in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.ndim != 3 or 0 in v.shape:
            raise ConfigurationError(f"feature values must have shape (X, H, n), got {v.shape}")
        if not np.all(np.isfinite(v)) or v.min() < 0.0 or v.max() > 1.0:
            raise ConfigurationError("features must lie in [0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def num_states(self):
        return self.values.shape[0]

    @property
    def num_actions(self):
        return self.values.shape[1]

    @property
    def num_features(self):
        return self.values.shape[2]

    def to_dict(self):
        return {
            "num_features": self.num_features,
            "num_states": self.num_states,
            "num_actions": self.num_actions,
            "values": self.values.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            n = int(doc["num_features"])
            vals = np.asarray(doc["values"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed feature map document: {exc}") from exc
        if "num_states" in doc and "num_actions" in doc:
            shape = (int(doc["num_states"]), int(doc["num_actions"]), n)
        else:
            raise ConfigurationError("feature map document needs num_states and num_actions")
        if vals.size != shape[0] * shape[1] * shape[2]:
            raise ConfigurationError("feature map values have the wrong length")
        return cls(vals.reshape(shape))


@dataclass(frozen=True, eq=False)
class Rsp:
    """Boltzmann randomized stationary policy ``mu(a|x) ~ exp(theta' phi(x, a))``."""

    theta: np.ndarray
    features: FeatureMap = field(repr=False)

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float, copy=True).reshape(-1)
        if theta.shape[0] != self.features.num_features:
            raise ConfigurationError(
                f"theta has {theta.shape[0]} entries, feature map has "
                f"{self.features.num_features} features"
            )
        if not np.all(np.isfinite(theta)):
            raise ConfigurationError("theta must be finite")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    def logits(self):
        return self.features.values @ self.theta

    def log_action_probabilities(self):
        z = self.logits()
        z = z - z.max(axis=1, keepdims=True)
        return z - np.log(np.exp(z).sum(axis=1, keepdims=True))

    def action_probabilities(self):
        z = self.logits()
        z = z - z.max(axis=1, keepdims=True)
        w = np.exp(z)
        return w / w.sum(axis=1, keepdims=True)

    def action_distribution(self, x):
        if not 0 <= x < self.features.num_states:
            raise IndexError(f"state {x} out of range")
        return softmax(self.features.values[x] @ self.theta)


def softmax(logits):
    z = np.asarray(logits, dtype=float)
    z = z - z.max()
    w = np.exp(z)
    return w / w.sum()


def action_distribution(rsp, x):
    """Action probabilities of *rsp* at state *x*."""
    return rsp.action_distribution(x)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Ordered state-action demonstrations and the seed that produced them."""

    states: np.ndarray
    actions: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        s = np.asarray(self.states, dtype=np.int64).reshape(-1)
        a = np.asarray(self.actions, dtype=np.int64).reshape(-1)
        if s.shape != a.shape:
            raise ValueError("states and actions must have equal length")
        s.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "states", s)
        object.__setattr__(self, "actions", a)

    def __len__(self):
        return self.states.shape[0]

    @property
    def pairs(self):
        return list(zip(self.states.tolist(), self.actions.tolist()))

    def subset(self, index):
        return SampleSet(self.states[index], self.actions[index], self.seed)

    def counts(self, num_states, num_actions):
        """Occurrence counts ``N[x, a]``."""
        if len(self) and (
            self.states.max() >= num_states or self.actions.max() >= num_actions
            or self.states.min() < 0 or self.actions.min() < 0
        ):
            raise ConfigurationError("sample indices fall outside the MDP")
        N = np.zeros((num_states, num_actions))
        np.add.at(N, (self.states, self.actions), 1.0)
        return N


def sample_demonstrations(mdp, expert, m, seed):
    """Draw *m* i.i.d. pairs: states from the expert's stationary law, actions from the expert.

    Both draws use inverse-CDF sampling on uniforms from
    ``numpy.random.default_rng(seed)``: first *m* uniforms for states, then
    *m* uniforms for actions.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    mu = action_probabilities(expert, mdp)
    pi = stationary_distribution(np.einsum("xa,xay->xy", mu, mdp.transition))
    rng = np.random.default_rng(seed)
    u_state = rng.random(m)
    u_action = rng.random(m)
    states = _inverse_cdf(np.cumsum(pi), u_state)
    action_cdf = np.cumsum(mu, axis=1)
    actions = np.empty(m, dtype=np.int64)
    for i in range(m):
        actions[i] = _inverse_cdf(action_cdf[states[i]], u_action[i])
    return SampleSet(states, actions, seed)


def _inverse_cdf(cdf, u):
    # searchsorted alone could return len(cdf) when rounding leaves cdf[-1] < 1.
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(cdf) - 1)


def log_action_probabilities(policy, mdp):
    """Log action matrix; exact log-softmax for an RSP, ``-inf`` at structural zeros otherwise."""
    if hasattr(policy, "log_action_probabilities"):
        return policy.log_action_probabilities()
    mu = action_probabilities(policy, mdp)
    with np.errstate(divide="ignore"):
        return np.where(mu > 0, np.log(np.maximum(mu, PROB_FLOOR)), -np.inf)


def log_loss(rsp, reference, mdp):
    """Exact expected negative log-likelihood of *rsp* under the reference's stationary joint.

    Returns ``math.inf`` when *rsp* gives zero probability to a pair the
    reference visits.
    """
    mu_ref = action_probabilities(reference, mdp)
    pi = stationary_distribution(induced_chain(mdp, mu_ref))
    eta = pi[:, None] * mu_ref
    logp = log_action_probabilities(rsp, mdp)
    support = eta > 0
    if np.any(np.isneginf(logp[support])):
        return math.inf
    return float(-np.sum(eta[support] * logp[support]))


def sample_log_loss(rsp, samples):
    """Average of ``-log mu(a_i | x_i)`` over the sample set."""
    if len(samples) == 0:
        raise ValueError("sample log-loss of an empty sample set is undefined")
    logp = rsp.log_action_probabilities()
    return float(-np.mean(logp[samples.states, samples.actions]))


def kl_divergence(p, q):
    """``sum_a p(a) log(p(a)/q(a))`` with ``0 log 0 = 0``.

    Returns ``math.inf`` when ``p(a) > 0`` somewhere ``q(a) = 0``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    support = p > 0
    if np.any(q[support] <= 0.0):
        return math.inf
    return float(np.sum(p[support] * (np.log(p[support]) - np.log(q[support]))))


def averaged_kl(base, other, mdp):
    """KL between action distributions averaged over *base*'s stationary states."""
    mu_b = action_probabilities(base, mdp)
    pi = stationary_distribution(induced_chain(mdp, mu_b))
    log_b = log_action_probabilities(base, mdp)
    log_o = log_action_probabilities(other, mdp)
    support = (pi[:, None] * mu_b) > 0
    if np.any(np.isneginf(log_o[support])):
        return math.inf
    terms = np.zeros_like(mu_b)
    terms[support] = mu_b[support] * (log_b[support] - log_o[support])
    return float(pi @ terms.sum(axis=1))
