import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.linear_model import Ridge

from qsvm_omics.ranking import (
    RidgeModel,
    RidgeRanker,
    fit_ridge,
    partition_groups,
    rank_features,
    repeated_groupings,
    ridge_objective,
    stable_common_features,
    stratified_subsample,
)


def centered_gradient(X, y, beta, lam):
    Xc, yc = X - X.mean(axis=0), y - y.mean()
    return 2 * (Xc.T @ (Xc @ beta - yc) + lam * beta)


def test_matches_sklearn_ridge():
    rng = np.random.default_rng(0)
    X, y = rng.normal(size=(30, 6)), rng.normal(size=30)
    for lam in (0.1, 1.0, 10.0):
        ours = fit_ridge(X, y, lam)
        ref = Ridge(alpha=lam).fit(X, y)
        np.testing.assert_allclose(ours.coefficients, ref.coef_, atol=1e-10)
        assert ours.intercept == pytest.approx(ref.intercept_, abs=1e-10)


def test_objective_is_minimized_by_finite_differences():
    rng = np.random.default_rng(1)
    X, y = rng.normal(size=(20, 4)), rng.normal(size=20)
    beta = fit_ridge(X, y, 2.0, fit_intercept=False).coefficients
    base = ridge_objective(X, y, beta, 2.0)
    for j in range(4):
        for h in (1e-4, -1e-4):
            step = np.zeros(4)
            step[j] = h
            assert ridge_objective(X, y, beta + step, 2.0) >= base


def test_high_dimensional_zero_lambda_is_minimum_norm():
    rng = np.random.default_rng(2)
    X, y = rng.normal(size=(5, 12)), rng.normal(size=5)
    beta = fit_ridge(X, y, 0.0).coefficients
    Xc = X - X.mean(axis=0)
    np.testing.assert_allclose(beta, np.linalg.pinv(Xc) @ (y - y.mean()), atol=1e-10)
    assert np.max(np.abs(centered_gradient(X, y, beta, 0.0))) <= 1e-9


def test_input_validation():
    with pytest.raises(ValueError):
        fit_ridge(np.ones((3, 2)), np.ones(3), -1.0)
    with pytest.raises(ValueError):
        fit_ridge(np.ones((1, 2)), np.ones(1))
    with pytest.raises(ValueError):
        fit_ridge(np.ones((3, 2)), np.ones(4))


def test_rank_ties_break_on_index():
    m = RidgeModel(np.array([0.5, -2.0, 2.0, 0.1, -0.5]), 0.0, 1.0)
    np.testing.assert_array_equal(rank_features(m), [1, 2, 0, 4, 3])


@pytest.mark.parametrize("P, G, sizes", [(10, 3, (4, 3, 3)), (10, 6, (2, 2, 2, 2, 1, 1)), (50, 4, (13, 13, 12, 12)), (7, 7, (1,) * 7)])
def test_partition_sizes(P, G, sizes):
    fg = partition_groups(np.arange(P)[::-1], G)
    assert fg.sizes() == sizes
    assert sorted(i for g in fg.groups for i in g) == list(range(P))
    assert fg.groups[0][0] == P - 1


def test_partition_rejects_bad_counts():
    with pytest.raises(ValueError):
        partition_groups(np.arange(5), 0)
    with pytest.raises(ValueError):
        partition_groups(np.arange(5), 6)


def test_group_of_inverts_partition():
    fg = partition_groups(np.array([3, 0, 4, 1, 2]), 2)
    np.testing.assert_array_equal(fg.group_of(), [0, 1, 1, 0, 0])


def test_stable_common_features():
    a = partition_groups(np.array([0, 1, 2, 3]), 2)
    b = partition_groups(np.array([1, 0, 3, 2]), 2)
    c = partition_groups(np.array([0, 2, 1, 3]), 2)
    assert stable_common_features([a, b]).common == ((0, 1), (2, 3))
    assert stable_common_features([a, b, c]).common == ((0,), (3,))
    with pytest.raises(ValueError):
        stable_common_features([])


def test_stratified_subsample_keeps_class_fractions():
    y = np.r_[np.ones(50), -np.ones(30)]
    idx = stratified_subsample(y, 0.8, 3)
    assert (y[idx] > 0).sum() == 40 and (y[idx] < 0).sum() == 24
    assert np.all(np.diff(idx) > 0)


def test_informative_features_rank_first():
    rng = np.random.default_rng(4)
    y = np.repeat([1.0, -1.0], 50)
    X = rng.normal(size=(100, 20))
    X[:, [3, 7]] += 1.5 * y[:, None]
    ranker = RidgeRanker(lam=1.0, n_groups=4, n_repeats=5).fit(X, y)
    assert set(ranker.ranking_[:2]) == {3, 7}
    assert {3, 7} <= set(ranker.stability_.common[0])
    np.testing.assert_array_equal(ranker.group_features(1), ranker.ranking_[:5])
    with pytest.raises(ValueError):
        ranker.group_features(5)
    assert len(repeated_groupings(X, y, 1.0, 4, reps=3)) == 3


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 25), st.integers(1, 10))
def test_gradient_vanishes_and_shrinkage_is_monotone(seed, n, P):
    rng = np.random.default_rng(seed)
    X, y = rng.normal(size=(n, P)), rng.normal(size=n)
    norms = []
    for lam in (0.0, 0.1, 1.0, 10.0, 100.0):
        beta = fit_ridge(X, y, lam).coefficients
        assert np.max(np.abs(centered_gradient(X, y, beta, lam))) <= 1e-6
        norms.append(np.linalg.norm(beta))
    assert all(b <= a + 1e-10 for a, b in zip(norms, norms[1:]))
