import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from helpers import random_features, random_mdp
from rsplearn import ConfigurationError, FeatureMap, Mdp, Rsp, SampleSet
from rsplearn.markov import stationary_distribution
from rsplearn.policy import (
    action_distribution,
    averaged_kl,
    kl_divergence,
    log_loss,
    sample_demonstrations,
    sample_log_loss,
)

TWO_STATE = np.array([[0.9, 0.1], [0.2, 0.8]])


def chain_as_mdp(P, H=1):
    return Mdp(np.repeat(np.asarray(P)[:, None, :], H, axis=1), np.zeros((len(P), H)))


def probability_vectors(size):
    return arrays(np.float64, size, elements=st.floats(1e-6, 1.0)).map(lambda v: v / v.sum())


class TestFeatureMap:
    def test_rejects_out_of_range(self):
        with pytest.raises(ConfigurationError):
            FeatureMap(np.full((2, 2, 1), 1.5))
        with pytest.raises(ConfigurationError):
            FeatureMap(np.full((2, 2, 1), -0.1))

    def test_round_trip(self):
        fm = random_features(np.random.default_rng(0), 3, 2, 4)
        back = FeatureMap.from_dict(fm.to_dict())
        np.testing.assert_array_equal(back.values, fm.values)
        assert fm.to_dict()["values"][(1 * 2 + 1) * 4 + 2] == fm.values[1, 1, 2]


class TestActionDistribution:
    def test_zero_theta_is_uniform(self):
        fm = random_features(np.random.default_rng(1), 3, 4, 5)
        np.testing.assert_allclose(action_distribution(Rsp(np.zeros(5), fm), 2), np.full(4, 0.25))

    def test_identical_features_are_uniform(self):
        fm = FeatureMap(np.full((1, 3, 2), 0.4))
        np.testing.assert_allclose(action_distribution(Rsp([5.0, -7.0], fm), 0), np.full(3, 1 / 3))

    def test_log3_gives_three_quarters(self):
        fm = FeatureMap(np.array([[[1.0], [0.0]]]))
        np.testing.assert_allclose(action_distribution(Rsp([math.log(3)], fm), 0), [0.75, 0.25], atol=1e-15)

    def test_no_overflow_for_huge_theta(self):
        fm = FeatureMap(np.array([[[1.0], [0.0]]]))
        p = action_distribution(Rsp([1e4], fm), 0)
        assert np.all(np.isfinite(p)) and p[0] == 1.0

    def test_state_out_of_range(self):
        fm = FeatureMap(np.zeros((2, 2, 1)))
        with pytest.raises(IndexError):
            action_distribution(Rsp([0.0], fm), 2)

    @given(
        logits=arrays(np.float64, 4, elements=st.floats(-50, 50)),
        c=st.floats(-100, 100),
    )
    def test_softmax_shift_invariance(self, logits, c):
        from rsplearn.policy import softmax

        np.testing.assert_allclose(softmax(logits + c), softmax(logits), atol=1e-12)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(3)
        rsp = Rsp(rng.normal(size=6) * 10, random_features(rng, 20, 4, 6))
        assert np.max(np.abs(rsp.action_probabilities().sum(axis=1) - 1)) <= 1e-12


class TestSampleDemonstrations:
    def test_zero_samples(self):
        s = sample_demonstrations(chain_as_mdp(TWO_STATE), np.array([0, 0]), 0, seed=1)
        assert len(s) == 0

    def test_single_state_deterministic_expert(self):
        mdp = Mdp(np.ones((1, 3, 1)), np.zeros((1, 3)))
        s = sample_demonstrations(mdp, np.array([2]), 25, seed=4)
        assert s.pairs == [(0, 2)] * 25

    def test_state_frequencies_match_stationary_law(self):
        # binomial sd at m=60000 is ~0.0019, so 0.01 is > 5 sd
        s = sample_demonstrations(chain_as_mdp(TWO_STATE), np.array([0, 0]), 60_000, seed=8)
        freq = np.bincount(s.states, minlength=2) / len(s)
        np.testing.assert_allclose(freq, [2 / 3, 1 / 3], atol=0.01)

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(0)
        mdp = random_mdp(rng, 6, 3)
        rsp = Rsp(rng.normal(size=3), random_features(rng, 6, 3, 3))
        a = sample_demonstrations(mdp, rsp, 500, seed=123)
        b = sample_demonstrations(mdp, rsp, 500, seed=123)
        c = sample_demonstrations(mdp, rsp, 500, seed=124)
        assert a.pairs == b.pairs and a.pairs != c.pairs
        assert a.seed == 123

    def test_action_frequencies_follow_expert(self):
        mdp = Mdp(np.ones((1, 2, 1)), np.zeros((1, 2)))
        rsp = Rsp([math.log(3)], FeatureMap(np.array([[[1.0], [0.0]]])))
        s = sample_demonstrations(mdp, rsp, 40_000, seed=2)
        assert np.mean(s.actions == 0) == pytest.approx(0.75, abs=0.01)


class TestLogLoss:
    def test_uniform_policy(self):
        rng = np.random.default_rng(0)
        mdp = random_mdp(rng, 5, 4)
        rsp = Rsp(np.zeros(3), random_features(rng, 5, 4, 3))
        assert log_loss(rsp, rsp, mdp) == pytest.approx(math.log(4), abs=1e-14)

    def test_self_loss_is_expected_entropy(self):
        rng = np.random.default_rng(1)
        mdp = random_mdp(rng, 6, 3)
        rsp = Rsp(rng.normal(size=4) * 2, random_features(rng, 6, 3, 4))
        mu = rsp.action_probabilities()
        pi = stationary_distribution(np.einsum("xa,xay->xy", mu, mdp.transition))
        entropy = -(mu * np.log(mu)).sum(axis=1)
        assert log_loss(rsp, rsp, mdp) == pytest.approx(pi @ entropy, abs=1e-12)

    def test_agrees_with_sampled_loss(self):
        rng = np.random.default_rng(2)
        mdp = random_mdp(rng, 5, 3)
        fm = random_features(rng, 5, 3, 3)
        reference = Rsp(rng.normal(size=3) * 2, fm)
        other = Rsp(rng.normal(size=3), fm)
        s = sample_demonstrations(mdp, reference, 100_000, seed=5)
        assert log_loss(other, reference, mdp) == pytest.approx(sample_log_loss(other, s), abs=0.01)

    def test_structural_zero_gives_inf(self):
        mdp = chain_as_mdp(TWO_STATE, H=2)
        assert log_loss(np.array([0, 0]), np.array([1, 1]), mdp) == math.inf


class TestSampleLogLoss:
    def test_zero_theta(self):
        fm = random_features(np.random.default_rng(3), 4, 3, 2)
        s = SampleSet([0, 1, 3, 2], [2, 0, 1, 1])
        assert sample_log_loss(Rsp(np.zeros(2), fm), s) == pytest.approx(math.log(3), abs=1e-15)

    def test_single_half_probability_sample(self):
        fm = FeatureMap(np.array([[[0.5], [0.5]]]))
        assert sample_log_loss(Rsp([2.0], fm), SampleSet([0], [1])) == pytest.approx(math.log(2))

    def test_duplication_invariance(self):
        rng = np.random.default_rng(4)
        fm = random_features(rng, 4, 3, 2)
        rsp = Rsp(rng.normal(size=2), fm)
        s = SampleSet([0, 1, 2, 3, 1], [1, 1, 0, 2, 2])
        doubled = SampleSet(np.tile(s.states, 2), np.tile(s.actions, 2))
        assert sample_log_loss(rsp, doubled) == pytest.approx(sample_log_loss(rsp, s), abs=1e-15)

    def test_empty_set(self):
        fm = FeatureMap(np.zeros((1, 2, 1)))
        with pytest.raises(ValueError):
            sample_log_loss(Rsp([0.0], fm), SampleSet([], []))


class TestKlDivergence:
    def test_equal(self):
        assert kl_divergence([0.2, 0.3, 0.5], [0.2, 0.3, 0.5]) == 0.0

    def test_point_mass_against_uniform(self):
        assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-15)

    def test_hand_value(self):
        expected = 0.5 * math.log(2) + 0.5 * math.log(2 / 3)
        assert kl_divergence([0.5, 0.5], [0.25, 0.75]) == pytest.approx(expected, abs=1e-15)
        assert expected == pytest.approx(0.1438, abs=1e-4)

    def test_missing_support(self):
        assert kl_divergence([0.5, 0.5], [1.0, 0.0]) == math.inf

    @given(probability_vectors(4), probability_vectors(4))
    def test_nonnegative_and_zero_only_on_equality(self, p, q):
        d = kl_divergence(p, q)
        assert d >= -1e-15
        if np.abs(p - q).max() > 1e-6:
            assert d > 0
        assert kl_divergence(p, p) == pytest.approx(0.0, abs=1e-12)

    def test_pinsker_in_both_log_conventions(self):
        # natural log: D >= ||p-q||^2 / 2; base 2: D_bits >= ||p-q||^2 / (2 ln 2); the two are one statement
        rng = np.random.default_rng(6)
        for _ in range(10_000):
            k = int(rng.integers(2, 6))
            p, q = rng.dirichlet(np.ones(k) * rng.choice([0.3, 1.0, 5.0]), size=2)
            d = kl_divergence(p, q)
            l1 = np.abs(p - q).sum()
            assert d >= 0.5 * l1**2 - 1e-15
            assert d / math.log(2) >= l1**2 / (2 * math.log(2)) - 1e-15

    def test_mixed_convention_is_not_valid_with_natural_logs(self):
        # a nat-valued KL against the base-2 constant fails near the uniform distribution
        p, q = np.array([0.5, 0.5]), np.array([0.51, 0.49])
        l1 = np.abs(p - q).sum()
        assert kl_divergence(p, q) < l1**2 / (2 * math.log(2))


class TestAveragedKl:
    def test_self_is_zero(self):
        rng = np.random.default_rng(0)
        mdp = random_mdp(rng, 5, 3)
        rsp = Rsp(rng.normal(size=2), random_features(rng, 5, 3, 2))
        assert averaged_kl(rsp, rsp, mdp) == 0.0

    def test_single_state_reduces_to_kl(self):
        mdp = Mdp(np.ones((1, 3, 1)), np.zeros((1, 3)))
        fm = random_features(np.random.default_rng(1), 1, 3, 2)
        a, b = Rsp([1.0, -2.0], fm), Rsp([0.3, 0.1], fm)
        expected = kl_divergence(a.action_distribution(0), b.action_distribution(0))
        assert averaged_kl(a, b, mdp) == pytest.approx(expected, abs=1e-15)

    def test_log_loss_gap_identity(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            X, H, n = int(rng.integers(2, 15)), int(rng.integers(2, 5)), int(rng.integers(1, 6))
            mdp = random_mdp(rng, X, H)
            fm = random_features(rng, X, H, n)
            base, other = Rsp(rng.normal(size=n) * 3, fm), Rsp(rng.normal(size=n) * 3, fm)
            gap = log_loss(other, base, mdp) - log_loss(base, base, mdp)
            assert averaged_kl(base, other, mdp) == pytest.approx(gap, abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sample_set_counts(seed):
    rng = np.random.default_rng(seed)
    s = SampleSet(rng.integers(0, 4, 30), rng.integers(0, 3, 30))
    N = s.counts(4, 3)
    assert N.sum() == 30
    assert all(N[x, a] >= 1 for x, a in s.pairs)
