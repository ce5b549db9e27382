from __future__ import annotations

import math

import numpy as np
import pytest

from rfsenergy import (
    DegenerateInputWarning,
    ModelParams,
    PointPatternSet,
    ScoringConfig,
    ScoringError,
    ValidationError,
    fit_model,
    mahalanobis_sq,
    rfs_energy,
    rfs_log_likelihood,
    score_as,
    score_batch,
    score_set,
)

from conftest import random_set, random_spd


def make_model(dim: int, rho: float = math.e, mu: np.ndarray | None = None,
               sigma: np.ndarray | None = None) -> ModelParams:
    mu = np.zeros(dim) if mu is None else np.asarray(mu, dtype=np.float64)
    sigma = np.eye(dim) if sigma is None else np.asarray(sigma, dtype=np.float64)
    return ModelParams(
        dim=dim,
        rho=rho,
        mu=mu,
        sigma_shrunk=sigma,
        alpha=0.0,
        chol_lower=np.linalg.cholesky(sigma),
        n_train_sets=1,
        n_train_points=1,
    )


def model_with_distances(m2_values) -> tuple[PointPatternSet, ModelParams]:
    """1-D identity model plus a set whose squared distances are m2_values."""
    points = np.sqrt(np.asarray(m2_values, dtype=np.float64)).reshape(-1, 1)
    return PointPatternSet(points), make_model(1)


class TestMahalanobisSq:
    def test_identity_reduces_to_euclidean(self):
        model = make_model(2)
        assert mahalanobis_sq(np.array([3.0, 4.0]), model) == pytest.approx(25.0)

    def test_zero_at_mean(self, rng):
        mu = rng.uniform(-3, 3, size=5)
        model = make_model(5, mu=mu, sigma=random_spd(rng, 5))
        assert mahalanobis_sq(mu.copy(), model) <= 1e-12

    def test_dim_mismatch(self):
        with pytest.raises(ScoringError):
            mahalanobis_sq(np.array([1.0, 2.0, 3.0]), make_model(2))

    @pytest.mark.parametrize("seed", range(25))
    def test_matches_explicit_inverse(self, seed):
        rng = np.random.default_rng(3000 + seed)
        dim = int(rng.integers(2, 33))
        sigma = random_spd(rng, dim, 0.1, 10.0)
        mu = rng.uniform(-1, 1, size=dim)
        model = make_model(dim, mu=mu, sigma=sigma)
        for _ in range(4):
            x = rng.uniform(-4, 4, size=dim)
            naive = (x - mu) @ np.linalg.inv(sigma) @ (x - mu)
            assert mahalanobis_sq(x, model) == pytest.approx(naive, rel=1e-9)

    def test_nonnegative(self, rng):
        sigma = random_spd(rng, 6)
        model = make_model(6, sigma=sigma)
        for _ in range(50):
            assert mahalanobis_sq(rng.standard_normal(6), model) >= 0.0


class TestRfsEnergy:
    def test_direct_substitution(self):
        # rho=e, |X|=2, M^2={1,2}, k=100: -2 + ln 2 + 3
        # points (1,0) and (1,1) realize the distances exactly at any precision
        model = make_model(2)
        s = PointPatternSet(np.array([[1.0, 0.0], [1.0, 1.0]]))
        expected = -2.0 + math.log(2.0) + 3.0
        assert rfs_energy(s, model, 100.0) == pytest.approx(expected, rel=1e-12)

    def test_top_k_rule(self):
        # M^2 {9,4,1} at k=34: kappa = ceil(0.34*3) = 2, feature term 13
        s, model = model_with_distances([9.0, 4.0, 1.0])
        expected = -3.0 + math.lgamma(4.0) + 13.0
        assert rfs_energy(s, model, 34.0) == pytest.approx(expected, rel=1e-12)

    def test_kappa_floor_of_one(self):
        s, model = model_with_distances([9.0, 4.0, 1.0])
        expected = -3.0 + math.lgamma(4.0) + 9.0
        assert rfs_energy(s, model, 1e-9) == pytest.approx(expected, rel=1e-12)

    def test_full_sum_identity_bitwise(self, rng):
        sigma = random_spd(rng, 6)
        model = make_model(6, rho=20.0, sigma=sigma)
        for _ in range(20):
            s = random_set(rng, int(rng.integers(1, 80)), 6)
            # independently coded full-sum reference
            diff = s.descriptors.astype(np.float64) - model.mu
            from scipy.linalg import solve_triangular

            z = solve_triangular(model.chol_lower, diff.T, lower=True)
            m2 = np.sort((z * z).sum(axis=0))[::-1]
            full = -len(s) * math.log(model.rho) + math.lgamma(len(s) + 1) + m2.sum()
            assert rfs_energy(s, model, 100.0) == full

    def test_empty_set_scores_zero_with_warning(self):
        model = make_model(3)
        s = PointPatternSet(np.empty((0, 3)))
        with pytest.warns(DegenerateInputWarning):
            assert rfs_energy(s, model) == 0.0

    def test_nonpositive_rho_rejected(self):
        model = make_model(1, rho=0.0)
        s = PointPatternSet(np.array([[1.0]]))
        with pytest.raises(ScoringError):
            rfs_energy(s, model)

    def test_bad_topk_rejected(self):
        s, model = model_with_distances([1.0])
        for bad in (0.0, -5.0, 100.5):
            with pytest.raises(ValidationError):
                rfs_energy(s, model, bad)

    def test_monotone_growth_identity(self, rng):
        sigma = random_spd(rng, 4)
        model = make_model(4, rho=7.0, sigma=sigma)
        for _ in range(20):
            s = random_set(rng, int(rng.integers(1, 40)), 4)
            x = rng.standard_normal(4).astype(np.float32)
            grown = PointPatternSet(np.vstack([s.descriptors, x[None, :]]))
            lhs = rfs_energy(grown, model, 100.0) - rfs_energy(s, model, 100.0)
            rhs = (
                -math.log(model.rho)
                + math.log(len(s) + 1)
                + mahalanobis_sq(x.astype(np.float64), model)
            )
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)

    def test_smaller_k_never_increases_feature_term(self, rng):
        model = make_model(3, rho=5.0)
        s = random_set(rng, 37, 3)
        card = -37 * math.log(5.0) + math.lgamma(38.0)
        feature = [rfs_energy(s, model, k) - card for k in (100.0, 60.0, 30.0, 5.0)]
        assert all(a >= b - 1e-12 for a, b in zip(feature, feature[1:]))


class TestScoreAs:
    def test_point_at_mean(self):
        model = make_model(2)
        s = PointPatternSet(np.zeros((1, 2)))
        assert score_as(s, model) == pytest.approx(0.0, abs=1e-9)

    def test_unsquared_sum(self):
        s, model = model_with_distances([9.0, 16.0])
        assert score_as(s, model) == pytest.approx(7.0, rel=1e-12)

    def test_squared_flag(self):
        s, model = model_with_distances([9.0, 16.0])
        assert score_as(s, model, squared=True) == pytest.approx(25.0, rel=1e-12)

    def test_empty_set(self):
        model = make_model(2)
        with pytest.warns(DegenerateInputWarning):
            assert score_as(PointPatternSet(np.empty((0, 2))), model) == 0.0


class TestRfsLogLikelihood:
    def test_direct_substitution(self):
        # |X|=1 at the mean, Sigma=I, rho=1, D=1
        model = make_model(1, rho=1.0)
        s = PointPatternSet(np.array([[0.0]]))
        expected = (0.0 - 1.0 - 0.0) + 0.0 + (-0.5 * math.log(2 * math.pi))
        assert rfs_log_likelihood(s, model) == pytest.approx(expected, rel=1e-12)

    def test_requires_positive_rho(self):
        model = make_model(1, rho=0.0)
        with pytest.raises(ScoringError):
            rfs_log_likelihood(PointPatternSet(np.array([[1.0]])), model)

    def test_empty_set_is_minus_rho(self):
        model = make_model(2, rho=4.0)
        with pytest.warns(DegenerateInputWarning):
            assert rfs_log_likelihood(PointPatternSet(np.empty((0, 2))), model) == -4.0

    def test_loglik_energy_affine_at_fixed_cardinality(self, rng):
        """At constant |X|, energy and log-likelihood differ by an affine
        map with slope -2 on the distance sum."""
        sigma = random_spd(rng, 3)
        model = make_model(3, rho=9.0, sigma=sigma)
        n = 12
        base_e = []
        base_l = []
        for _ in range(10):
            s = random_set(rng, n, 3)
            base_e.append(rfs_energy(s, model, 100.0))
            base_l.append(rfs_log_likelihood(s, model))
        e = np.asarray(base_e)
        l = np.asarray(base_l)
        card_e = -n * math.log(9.0) + math.lgamma(n + 1)
        log_norm = -0.5 * 3 * math.log(2 * math.pi) - np.log(np.diag(model.chol_lower)).sum()
        card_l = n * math.log(9.0) - 9.0 + n * log_norm
        assert np.allclose(l, card_l - 0.5 * (e - card_e), rtol=1e-10)


class TestOrderInvariance:
    def test_all_scores_bitwise_under_shuffles(self):
        rng = np.random.default_rng(42)
        sigma = random_spd(rng, 8)
        model = make_model(8, rho=15.0, sigma=sigma)
        for _ in range(20):
            s = random_set(rng, int(rng.integers(2, 60)), 8)
            ref = (
                rfs_energy(s, model, 73.0),
                score_as(s, model),
                rfs_log_likelihood(s, model),
            )
            for _ in range(100):
                shuffled = PointPatternSet(s.descriptors[rng.permutation(len(s))])
                got = (
                    rfs_energy(shuffled, model, 73.0),
                    score_as(shuffled, model),
                    rfs_log_likelihood(shuffled, model),
                )
                assert got == ref

    def test_scaling_leaves_distances_invariant(self):
        rng = np.random.default_rng(31)
        sets = [random_set(rng, 40, 4) for _ in range(8)]
        model = fit_model(sets)
        # power-of-two scaling is lossless on the float32 payload
        c = 2.0
        scaled_sets = [PointPatternSet(s.descriptors.astype(np.float64) * c) for s in sets]
        scaled_model = fit_model(scaled_sets)
        for s, sc in zip(sets, scaled_sets):
            for row, row_c in zip(s.descriptors, sc.descriptors):
                d0 = mahalanobis_sq(row.astype(np.float64), model)
                d1 = mahalanobis_sq(row_c.astype(np.float64), scaled_model)
                assert d1 == pytest.approx(d0, rel=1e-9)


class TestScoreBatch:
    def test_empty_input(self):
        model = make_model(2)
        assert score_batch([], model, ScoringConfig()) == []

    def test_elementwise_equality(self, rng):
        model = make_model(3, rho=5.0)
        sets = [random_set(rng, 10, 3) for _ in range(3)]
        for config in (
            ScoringConfig("energy", 50.0),
            ScoringConfig("as"),
            ScoringConfig("as", as_squared=True),
            ScoringConfig("loglik"),
        ):
            batch = score_batch(sets, model, config)
            singles = [score_set(s, model, config) for s in sets]
            assert batch == singles

    def test_failure_carries_index(self, rng):
        model = make_model(3, rho=5.0)
        sets = [random_set(rng, 4, 3), random_set(rng, 4, 2)]
        with pytest.raises(ScoringError, match="set 1"):
            score_batch(sets, model, ScoringConfig())

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            ScoringConfig(method="nope")
        with pytest.raises(ValidationError):
            ScoringConfig(top_k_percent=0.0)
