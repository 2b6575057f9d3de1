"""Stationary-distribution sensitivity and the regret certificate.

Matrix norms written ``||M||`` here are the max absolute row sum, the norm
for which ``||v'M||_1 <= ||v||_1 ||M||`` holds for row vectors.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import NotErgodicError, NumericalConditioningError
from .markov import action_probabilities, induced_chain, stationary_distribution
from .policy import averaged_kl

AXIOM_TOL = 1e-8
KAPPA_NAMES = ("norm_Z", "norm_group_inverse", "inv_one_minus_tau_P", "tau_Z")


def fundamental_matrix(chain, pi):
    """``Z = (I - P + e pi')^{-1}``."""
    P = np.asarray(chain, dtype=float)
    n = P.shape[0]
    M = np.eye(n) - P + np.outer(np.ones(n), pi)
    if np.linalg.cond(M) > 1e12:
        raise NotErgodicError("I - P + e pi' is singular: chain is not ergodic")
    return np.linalg.inv(M)


def group_inverse(chain, pi, Z=None):
    """Group inverse of ``A = I - P`` via ``A# = Z - e pi'``, checked against its three axioms."""
    P = np.asarray(chain, dtype=float)
    n = P.shape[0]
    if Z is None:
        Z = fundamental_matrix(P, pi)
    G = Z - np.outer(np.ones(n), pi)
    A = np.eye(n) - P
    residuals = group_inverse_residuals(A, G)
    worst = max(residuals.values())
    if worst > AXIOM_TOL:
        raise NumericalConditioningError(
            f"group inverse violates its defining equations (residual {worst:.3e})"
        )
    return G


def group_inverse_residuals(A, G):
    """Max-abs residuals of ``AGA = A``, ``GAG = G`` and ``AG = GA``."""
    return {
        "AGA=A": float(np.max(np.abs(A @ G @ A - A))),
        "GAG=G": float(np.max(np.abs(G @ A @ G - G))),
        "AG=GA": float(np.max(np.abs(A @ G - G @ A))),
    }


def row_sum_norm(M):
    return float(np.max(np.abs(np.asarray(M)).sum(axis=1)))


def ergodic_coefficient(B, tol=1e-8):
    """``tau(B) = 1/2 max_{i,j} sum_s |b_is - b_js|`` for a matrix with equal row sums."""
    B = np.asarray(B, dtype=float)
    sums = B.sum(axis=1)
    if np.max(sums) - np.min(sums) > tol:
        raise ValueError("ergodic coefficient needs equal row sums")
    n = B.shape[0]
    best = 0.0
    for i in range(n - 1):
        best = max(best, float(np.abs(B[i + 1:] - B[i]).sum(axis=1).max()))
    return 0.5 * best


@dataclass(frozen=True)
class ChainAnalysis:
    fundamental: np.ndarray
    group_inverse: np.ndarray
    tau_P: float
    tau_Z: float
    norm_Z: float
    norm_group_inverse: float

    def kappas(self):
        """The four condition numbers; the third is ``inf`` when ``tau(P) = 1``."""
        kappa3 = math.inf if self.tau_P >= 1.0 else 1.0 / (1.0 - self.tau_P)
        return {
            "norm_Z": self.norm_Z,
            "norm_group_inverse": self.norm_group_inverse,
            "inv_one_minus_tau_P": kappa3,
            "tau_Z": self.tau_Z,
        }


def analyze_chain(chain, pi=None):
    P = np.asarray(chain, dtype=float)
    if pi is None:
        pi = stationary_distribution(P)
    Z = fundamental_matrix(P, pi)
    G = group_inverse(P, pi, Z)
    tau_Z = ergodic_coefficient(Z)
    tau_G = ergodic_coefficient(G)
    if abs(tau_Z - tau_G) > AXIOM_TOL:
        raise NumericalConditioningError(f"tau(Z)={tau_Z} differs from tau(A#)={tau_G}")
    return ChainAnalysis(Z, G, ergodic_coefficient(P), tau_Z, row_sum_norm(Z), row_sum_norm(G))


def condition_numbers(chain, pi=None):
    return analyze_chain(chain, pi).kappas()


def perturbation_bound_check(chain_a, chain_b):
    """Both sides of ``||pi_a - pi_b||_1 <= kappa ||pi_a' E||_1`` with ``E = P_a - P_b``.

    The condition numbers are those of *chain_b*.

    Returns
    -------
    lhs : float
    rhs : dict mapping condition-number name to ``kappa * ||pi_a' E||_1``
    """
    Pa = np.asarray(chain_a, dtype=float)
    Pb = np.asarray(chain_b, dtype=float)
    if Pa.shape != Pb.shape:
        raise ValueError("chains must have the same dimension")
    pi_a = stationary_distribution(Pa)
    pi_b = stationary_distribution(Pb)
    lhs = float(np.abs(pi_a - pi_b).sum())
    drift = float(np.abs(pi_a @ (Pa - Pb)).sum())
    return lhs, {k: _times(v, drift) for k, v in condition_numbers(Pb, pi_b).items()}


def _times(kappa, x):
    # inf * 0 must stay 0: an unperturbed chain has zero drift
    return 0.0 if x == 0.0 else kappa * x


@dataclass
class RegretCertificate:
    kl_term: float
    true_regret: float
    estimation_term: float
    perturbation_term: float
    kappas: dict
    bound_per_kappa: dict
    pinsker_bound_per_kappa: dict
    r_max: float
    average_reward_target: float
    average_reward_estimate: float

    @property
    def best_kappa(self):
        return min(self.bound_per_kappa, key=lambda k: (self.bound_per_kappa[k], k))

    @property
    def min_bound(self):
        return self.bound_per_kappa[self.best_kappa]

    def to_dict(self):
        doc = asdict(self)
        doc["best_kappa"] = self.best_kappa
        doc["min_bound"] = self.min_bound
        return doc


def regret_bound(kl, r_max, kappa):
    """``sqrt(2 kl log 2) * R_max * (1 + kappa)``; ``inf`` if the KL or kappa is infinite."""
    if kl == 0.0:
        return 0.0
    if math.isinf(kl) or math.isinf(kappa):
        return math.inf
    return math.sqrt(2.0 * kl * math.log(2.0)) * r_max * (1.0 + kappa)


def pinsker_regret_bound(kl, r_max, kappa):
    """``sqrt(2 kl) * R_max * (1 + kappa)``: the same chain with the natural-log Pinsker constant."""
    if kl == 0.0:
        return 0.0
    if math.isinf(kl) or math.isinf(kappa):
        return math.inf
    return math.sqrt(2.0 * kl) * r_max * (1.0 + kappa)


def regret_certificate(mdp, target, estimate):
    """Exact regret of *estimate* against *target* with its two-term split and bounds.

    ``estimation_term`` is ``|sum_x pi*(x) sum_a (mu* - mu^)(a|x) R(x,a)|`` and
    ``perturbation_term`` is ``|sum_x (pi^ - pi*)(x) sum_a mu^(a|x) R(x,a)|``.
    Condition numbers are evaluated on the estimated chain.
    """
    mu_t = action_probabilities(target, mdp)
    mu_e = action_probabilities(estimate, mdp)
    P_t = induced_chain(mdp, mu_t)
    P_e = induced_chain(mdp, mu_e)
    pi_t = stationary_distribution(P_t)
    pi_e = stationary_distribution(P_e)
    R = mdp.reward
    avg_t = float(pi_t @ (mu_t * R).sum(axis=1))
    avg_e = float(pi_e @ (mu_e * R).sum(axis=1))
    estimation = abs(float(pi_t @ ((mu_t - mu_e) * R).sum(axis=1)))
    perturbation = abs(float((pi_e - pi_t) @ (mu_e * R).sum(axis=1)))
    kl = averaged_kl(target, estimate, mdp)
    kappas = condition_numbers(P_e, pi_e)
    r_max = mdp.r_max
    bounds = {k: regret_bound(kl, r_max, v) for k, v in kappas.items()}
    return RegretCertificate(
        kl_term=kl,
        true_regret=abs(avg_t - avg_e),
        estimation_term=estimation,
        perturbation_term=perturbation,
        kappas=kappas,
        bound_per_kappa=bounds,
        pinsker_bound_per_kappa={k: pinsker_regret_bound(kl, r_max, v) for k, v in kappas.items()},
        r_max=r_max,
        average_reward_target=avg_t,
        average_reward_estimate=avg_e,
    )
