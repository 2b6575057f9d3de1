"""Finite MDPs, policy-induced Markov chains and average-reward evaluation.

All matrices are dense numpy arrays. A transition kernel is stored as an
array of shape ``(num_states, num_actions, num_states)`` so that
``transition[x, a, y] = P(y | x, a)``.

A *policy* argument may be any of

* an object with an ``action_probabilities()`` method returning a
  ``(num_states, num_actions)`` matrix (e.g. :class:`rsplearn.policy.Rsp`),
* a 1-D integer array of actions (a deterministic policy),
* a 2-D ``(num_states, num_actions)`` row-stochastic matrix.
"""

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import ConfigurationError, DiagnosticsError, NotErgodicError

ROW_SUM_TOL = 1e-12


def _frozen(array, dtype=float):
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Mdp:
    """A finite MDP with kernel ``transition[x, a, y]`` and reward ``reward[x, a]``."""

    transition: np.ndarray
    reward: np.ndarray

    def __post_init__(self):
        P = _frozen(self.transition)
        R = _frozen(self.reward)
        if P.ndim != 3 or P.shape[0] != P.shape[2]:
            raise ConfigurationError(f"transition must have shape (X, H, X), got {P.shape}")
        if R.shape != P.shape[:2]:
            raise ConfigurationError(
                f"reward shape {R.shape} does not match transition shape {P.shape}"
            )
        if P.shape[0] == 0 or P.shape[1] == 0:
            raise ConfigurationError("MDP needs at least one state and one action")
        if np.any(P < 0):
            raise ConfigurationError("transition probabilities must be non-negative")
        worst = np.max(np.abs(P.sum(axis=2) - 1.0))
        if worst > ROW_SUM_TOL:
            raise ConfigurationError(f"transition rows do not sum to 1 (max error {worst:.3e})")
        if not np.all(np.isfinite(R)):
            raise ConfigurationError("rewards must be finite")
        object.__setattr__(self, "transition", P)
        object.__setattr__(self, "reward", R)

    @property
    def num_states(self):
        return self.transition.shape[0]

    @property
    def num_actions(self):
        return self.transition.shape[1]

    @property
    def r_max(self):
        """Largest absolute one-step reward."""
        return float(np.max(np.abs(self.reward)))

    def to_dict(self):
        return {
            "num_states": self.num_states,
            "num_actions": self.num_actions,
            "transition": self.transition.ravel().tolist(),
            "reward": self.reward.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            X, H = int(doc["num_states"]), int(doc["num_actions"])
            P = np.asarray(doc["transition"], dtype=float)
            R = np.asarray(doc["reward"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed MDP document: {exc}") from exc
        if X <= 0 or H <= 0 or P.size != X * H * X or R.size != X * H:
            raise ConfigurationError("MDP document sizes are inconsistent")
        return cls(P.reshape(X, H, X), R.reshape(X, H))


def action_probabilities(policy, mdp):
    """Return the ``(num_states, num_actions)`` action matrix of *policy* on *mdp*."""
    X, H = mdp.num_states, mdp.num_actions
    if hasattr(policy, "action_probabilities"):
        probs = policy.action_probabilities()
    else:
        arr = np.asarray(policy)
        if arr.ndim == 1:
            if not np.issubdtype(arr.dtype, np.integer):
                raise ConfigurationError("deterministic policy must be an integer array")
            if arr.shape[0] != X or np.any(arr < 0) or np.any(arr >= H):
                raise ConfigurationError("deterministic policy does not match the MDP")
            probs = np.zeros((X, H))
            probs[np.arange(X), arr] = 1.0
        else:
            probs = arr.astype(float)
    if probs.shape != (X, H):
        raise ConfigurationError(
            f"policy defines {probs.shape} action probabilities, MDP has {(X, H)}"
        )
    return probs


def induced_chain(mdp, policy):
    """Transition matrix ``P_theta(y|x) = sum_a mu(a|x) P(y|x,a)`` of the policy."""
    mu = action_probabilities(policy, mdp)
    return np.einsum("xa,xay->xy", mu, mdp.transition)


def closed_classes(chain):
    """Closed communicating classes of the chain, as arrays of state indices."""
    P = np.asarray(chain)
    n_comp, labels = connected_components(P > 0, directed=True, connection="strong")
    out = []
    for c in range(n_comp):
        members = labels == c
        if not np.any(P[np.ix_(members, ~members)] > 0):
            out.append(np.flatnonzero(members))
    return out


def stationary_distribution(chain):
    """Unique stationary distribution of a row-stochastic matrix with one closed class.

    Transient states get probability zero. On the closed class, one balance
    equation of ``(I - P')pi = 0`` is replaced by the normalisation
    ``e'pi = 1`` and the square system is solved directly.

    Raises
    ------
    NotErgodicError
        If there is more than one closed class or the reduced system is
        numerically rank deficient.
    """
    P = np.asarray(chain, dtype=float)
    n = P.shape[0]
    classes = closed_classes(P)
    if len(classes) != 1:
        raise NotErgodicError(f"chain has {len(classes)} closed classes; no unique stationary law")
    idx = classes[0]
    Q = P[np.ix_(idx, idx)]
    k = idx.size
    M = np.eye(k) - Q.T
    M[-1, :] = 1.0
    rhs = np.zeros(k)
    rhs[-1] = 1.0
    if np.linalg.cond(M) > 1e14:
        raise NotErgodicError("stationary system is numerically singular")
    sub = np.linalg.solve(M, rhs)
    if np.min(sub) < -1e-10:
        raise NotErgodicError(f"stationary solve produced negative mass {np.min(sub):.3e}")
    pi = np.zeros(n)
    pi[idx] = np.clip(sub, 0.0, None)
    pi /= pi.sum()
    if np.abs(pi @ P - pi).sum() > 1e-8:
        raise NotErgodicError("stationary residual exceeds 1e-8")
    return pi


def state_action_distribution(mdp, policy):
    """Stationary joint ``eta(x, a) = pi(x) mu(a|x)``."""
    mu = action_probabilities(policy, mdp)
    pi = stationary_distribution(np.einsum("xa,xay->xy", mu, mdp.transition))
    return pi[:, None] * mu


def average_reward(mdp, policy):
    """Long-run average reward ``sum_{x,a} eta(x,a) R(x,a)``."""
    return float(np.sum(state_action_distribution(mdp, policy) * mdp.reward))


def value_iteration(mdp, discount=0.95, tol=1e-10, max_iters=100_000):
    """Greedy policy of the discounted Bellman fixed point.

    Iterates ``V <- max_a R + discount * P V`` until successive iterates
    differ by less than *tol* in max-norm. Ties go to the lowest action
    index.

    Returns
    -------
    policy : ndarray of int, shape (num_states,)
    residuals : list of float
        Max-norm change at each sweep.
    """
    if not 0.0 < discount < 1.0:
        raise ValueError("discount must lie in (0, 1)")
    if tol <= 0:
        raise ValueError("tol must be positive")
    P, R = mdp.transition, mdp.reward
    V = np.zeros(mdp.num_states)
    residuals = []
    for _ in range(max_iters):
        Q = R + discount * (P @ V)
        V_new = Q.max(axis=1)
        residual = float(np.max(np.abs(V_new - V)))
        residuals.append(residual)
        V = V_new
        if residual < tol:
            Q = R + discount * (P @ V)
            return np.argmax(Q, axis=1), residuals
    raise DiagnosticsError(
        f"value iteration did not converge in {max_iters} sweeps", residual=residuals[-1]
    )


def simulate_states(chain, steps, rng, start=0):
    """Sample a state trajectory of the chain (used as a Monte-Carlo oracle)."""
    cdf = np.cumsum(np.asarray(chain, dtype=float), axis=1)
    u = rng.random(steps)
    states = np.empty(steps, dtype=np.int64)
    x = start
    for t in range(steps):
        x = min(int(np.searchsorted(cdf[x], u[t], side="right")), cdf.shape[0] - 1)
        states[t] = x
    return states
