import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphsan.scoring import (
    THETA_FLOOR,
    allocate_budgets,
    build_scores,
    floor_scores,
    importance_scores,
    sensitivity_scores,
    unify_scores,
)

positive_vectors = st.lists(
    st.floats(1e-6, 1e3, allow_nan=False), min_size=1, max_size=12
).map(np.array)


class TestSensitivityScores:
    def test_single_differing_coordinate(self):
        beta = sensitivity_scores(np.array([1.0, 0, 0]), np.array([0.0, 0, 0]))
        assert np.allclose(beta, [1, 0, 0])

    def test_symmetric_difference(self):
        beta = sensitivity_scores(np.array([1.0, 0]), np.array([0.0, 1]))
        assert np.allclose(beta, [0.5, 0.5])

    def test_direct_arithmetic(self):
        beta = sensitivity_scores(np.array([0.2, 0.5, 0.9]), np.array([0.1, 0.5, 0.6]))
        assert np.allclose(beta, [0.25, 0, 0.75])

    def test_identical_vectors_rejected(self):
        with pytest.raises(ValueError):
            sensitivity_scores(np.array([1.0, 2.0]), np.array([1.0, 2.0]))


class TestImportanceScores:
    def test_single_nonzero(self):
        assert np.allclose(importance_scores(np.array([2.0, 0, 0])), [1, 0, 0])

    def test_absolute_values(self):
        assert np.allclose(importance_scores(np.array([-1.0, 1.0])), [0.5, 0.5])

    def test_direct_arithmetic(self):
        assert np.allclose(importance_scores(np.array([3.0, -1.0, 1.0])), [0.6, 0.2, 0.2])

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            importance_scores(np.zeros(3))


class TestUnifyScores:
    def test_gamma_one_collapses_to_alpha(self):
        theta = unify_scores(np.array([0.7, 0.3]), np.array([0.9, 0.1]), 1.0)
        assert np.allclose(theta, [0.7, 0.3])

    def test_gamma_zero_uniform_beta(self):
        theta = unify_scores(np.array([0.7, 0.3]), np.array([0.5, 0.5]), 0.0)
        assert np.allclose(theta, [0.5, 0.5])

    def test_blend_arithmetic(self):
        theta = unify_scores(np.array([0.8, 0.2]), np.array([0.2, 0.8]), 0.5)
        assert np.allclose(theta, [0.8, 0.2])

    def test_gamma_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            unify_scores(np.array([1.0]), np.array([1.0]), 1.5)

    @given(st.integers(0, 2**31), st.floats(0, 1))
    def test_sums_to_one(self, seed, gamma):
        gen = np.random.default_rng(seed)
        d = int(gen.integers(1, 10))
        alpha = importance_scores(gen.random(d) + 1e-9)
        beta = sensitivity_scores(gen.random(d) + 1.0, np.zeros(d))
        theta = unify_scores(alpha, beta, gamma)
        assert abs(theta.sum() - 1.0) < 1e-9
        assert (theta >= 0).all()

    def test_lower_beta_higher_alpha_wins(self):
        # pre-normalization theta must reward low sensitivity and high importance
        alpha = np.array([0.6, 0.4])
        beta = np.array([0.1, 0.9])
        theta = unify_scores(alpha, beta, 0.5)
        assert theta[0] > theta[1]

    def test_permutation_equivariance(self):
        gen = np.random.default_rng(5)
        alpha = importance_scores(gen.random(6))
        beta = sensitivity_scores(gen.random(6) + 0.5, np.zeros(6))
        perm = gen.permutation(6)
        direct = unify_scores(alpha, beta, 0.3)[perm]
        permuted = unify_scores(alpha[perm], beta[perm], 0.3)
        assert np.allclose(direct, permuted)


class TestFloorScores:
    def test_zero_entries_floored(self):
        theta = floor_scores(np.array([1.0, 0.0]))
        # default floor is THETA_FLOOR/d, then the vector is renormalized
        assert theta[1] == pytest.approx(THETA_FLOOR / 2, rel=1e-3)
        assert abs(theta.sum() - 1.0) < 1e-12
        assert (theta > 0).all()

    def test_untouched_when_above_floor(self):
        theta = np.array([0.4, 0.6])
        assert np.allclose(floor_scores(theta), theta)


class TestAllocateBudgets:
    def test_single_feature(self):
        b = allocate_budgets(np.array([1.0]), 1.0, 10)
        assert b.eps[0] == 1.0
        assert b.sigma[0] == pytest.approx(0.9, abs=1e-12)

    def test_even_split(self):
        b = allocate_budgets(np.array([0.5, 0.5]), 2.0, 2)
        assert np.allclose(b.eps, [1.0, 1.0])
        assert np.allclose(b.sigma, [0.5, 0.5])

    def test_large_k_limit(self):
        # sigma -> 1/eps from below as k grows
        sigmas = [allocate_budgets(np.array([1.0]), 1.0, k).sigma[0] for k in (2, 10, 1000)]
        assert sigmas == sorted(sigmas)
        assert sigmas[-1] < 1.0

    def test_zero_theta_rejected_with_index(self):
        with pytest.raises(ValueError, match="1"):
            allocate_budgets(np.array([1.0, 0.0]), 1.0, 2)

    def test_bad_k_rejected(self):
        with pytest.raises(ValueError):
            allocate_budgets(np.array([1.0]), 1.0, 1)

    @given(positive_vectors, st.floats(1e-3, 50), st.integers(2, 64))
    def test_budget_conservation(self, raw, eps_f, k):
        theta = raw / raw.sum()
        theta = floor_scores(theta)
        b = allocate_budgets(theta, eps_f, k)
        assert abs(b.eps.sum() - eps_f) < 1e-9
        assert np.allclose(b.sigma, (k - 1) / (k * b.eps))


class TestBuildScores:
    def test_end_to_end_scoreset(self):
        z = np.array([0.9, 0.4, 0.7])
        zm = np.array([0.5, 0.3, 0.2])
        shap = np.array([0.2, -0.5, 0.3])
        s = build_scores(z, zm, shap, 0.5)
        assert np.allclose(s.beta, [0.4, 0.1, 0.5])
        assert np.allclose(s.alpha, [0.2, 0.5, 0.3])
        assert np.allclose(s.theta, [2 / 9, 5 / 9, 2 / 9])
        assert s.gamma == 0.5
