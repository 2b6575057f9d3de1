"""Random instance generators shared by the property and acceptance tests."""

import numpy as np

from rsplearn import FeatureMap, Mdp, Rsp


def random_chain(rng, n, alpha=1.0):
    return rng.dirichlet(np.full(n, alpha), size=n)


def random_mdp(rng, num_states, num_actions, alpha=None):
    alpha = rng.choice([0.2, 1.0]) if alpha is None else alpha
    P = rng.dirichlet(np.full(num_states, alpha), size=(num_states, num_actions))
    R = rng.uniform(-1.0, 1.0, size=(num_states, num_actions)) * rng.choice([0.5, 1.0, 5.0])
    return Mdp(P, R)


def random_features(rng, num_states, num_actions, n):
    return FeatureMap(rng.random((num_states, num_actions, n)))


def sparse_theta(rng, n, r, k):
    theta = np.zeros(n)
    support = rng.choice(n, size=r, replace=False)
    theta[support] = rng.uniform(-k, k, size=r)
    return theta


def random_triple(rng, max_states=20, max_actions=4):
    """(mdp, target RSP with sparse parameters, perturbed estimate)."""
    X = int(rng.integers(2, max_states + 1))
    H = int(rng.integers(2, max_actions + 1))
    n = int(rng.integers(2, 11))
    mdp = random_mdp(rng, X, H)
    features = random_features(rng, X, H, n)
    theta_star = sparse_theta(rng, n, int(rng.integers(1, max(2, n // 2) + 1)), 3.0)
    scale = rng.choice([0.01, 0.1, 0.5, 2.0])
    theta_hat = theta_star + scale * rng.normal(size=n)
    return mdp, Rsp(theta_star, features), Rsp(theta_hat, features)
