"""Sparse Boltzmann policies learned from demonstrations, with exact regret certificates."""

from .errors import ConfigurationError, DiagnosticsError, NotErgodicError, NumericalConditioningError
from .gridworld import GridSpec, build_feature_map, build_grid_mdp, greedy_policy, reward_field
from .learner import (
    TrainConfig,
    TrainedPolicy,
    fit_constrained_mle,
    project_onto_l1_ball,
    train_algorithm1,
    train_unregularized,
)
from .markov import Mdp, average_reward, induced_chain, stationary_distribution, value_iteration
from .perturbation import (
    RegretCertificate,
    condition_numbers,
    ergodic_coefficient,
    fundamental_matrix,
    group_inverse,
    perturbation_bound_check,
    regret_certificate,
)
from .policy import (
    FeatureMap,
    Rsp,
    SampleSet,
    action_distribution,
    averaged_kl,
    kl_divergence,
    log_loss,
    sample_demonstrations,
    sample_log_loss,
)

__version__ = "0.1.0"
