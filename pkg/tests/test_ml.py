import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from persimg.core import ParameterError, PersistenceDiagram
from persimg.ml import (
    Clustering,
    KMedoids,
    _voronoi_iteration,
    clustering_accuracy,
    exhaustive_kmedoids,
    kmedoids,
    parameter_sweep,
    pi_accuracy,
)


def _random_matrix(rng, n):
    X = rng.random((n, 2))
    return np.linalg.norm(X[:, None] - X[None], axis=2)


def _brute_force_score(D, k):
    # independent of the package: try every medoid set directly
    return min(D[:, list(m)].min(axis=1).sum() for m in itertools.combinations(range(len(D)), k))


def test_k_equals_n():
    D = _random_matrix(np.random.default_rng(0), 5)
    c = kmedoids(D, 5, restarts=3, seed=0)
    assert c.score == 0 and list(c.medoid_indices) == list(range(5))
    assert list(c.assignment) == list(range(5))


def test_two_pairs():
    eps = 0.01
    D = np.array([[0, eps, 1, 1], [eps, 0, 1, 1], [1, 1, 0, eps], [1, 1, eps, 0]])
    c = kmedoids(D, 2, restarts=20, seed=1)
    assert c.score == pytest.approx(2 * eps)
    assert c.assignment[0] == c.assignment[1] != c.assignment[2] == c.assignment[3]


def test_matches_exhaustive_search():
    rng = np.random.default_rng(42)
    for _ in range(30):
        n = int(rng.integers(3, 9))
        k = int(rng.integers(1, min(3, n) + 1))
        D = _random_matrix(rng, n)
        best = _brute_force_score(D, k)
        assert kmedoids(D, k, restarts=200, seed=3).score == pytest.approx(best, abs=1e-12)
        assert exhaustive_kmedoids(D, k).score == pytest.approx(best, abs=1e-12)


def test_five_objects_two_medoids():
    rng = np.random.default_rng(5)
    for _ in range(10):
        D = _random_matrix(rng, 5)
        assert kmedoids(D, 2, restarts=50, seed=0).score == pytest.approx(_brute_force_score(D, 2))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(4, 15), st.integers(1, 4))
def test_voronoi_history_is_monotone(seed, n, k):
    rng = np.random.default_rng(seed)
    D = _random_matrix(rng, n)
    init = rng.choice(n, size=min(k, n), replace=False)
    medoids, assignment, score, history = _voronoi_iteration(D, init, 100)
    assert all(b < a for a, b in zip(history, history[1:]))
    assert score == history[-1]
    # every object sits with a nearest medoid and the score is the recomputed sum
    np.testing.assert_allclose(D[np.arange(n), assignment], D[:, medoids].min(axis=1))
    assert score == pytest.approx(D[np.arange(n), assignment].sum())


def test_determinism():
    D = _random_matrix(np.random.default_rng(9), 20)
    a, b = kmedoids(D, 3, 30, seed=7), kmedoids(D, 3, 30, seed=7)
    assert np.array_equal(a.medoid_indices, b.medoid_indices) and a.score == b.score


def test_tie_goes_to_lowest_medoid():
    D = np.array([[0, 1, 1], [1, 0, 2], [1, 2, 0]], dtype=float)
    _, assignment, _, _ = _voronoi_iteration(D, np.array([2, 1]), 10)
    assert assignment[0] == 1


def test_bad_arguments():
    D = _random_matrix(np.random.default_rng(0), 4)
    with pytest.raises(ParameterError):
        kmedoids(D, 5)
    with pytest.raises(ParameterError):
        kmedoids(D, 2, restarts=0)
    with pytest.raises(ParameterError):
        kmedoids(np.ones((3, 3)), 1)


def test_accuracy_examples():
    labels = list("abcdef")
    perfect = Clustering(np.arange(6), np.arange(6), 0.0)
    assert clustering_accuracy(perfect, labels) == 1.0
    one_off = Clustering(np.array([0, 1, 2, 3, 4]), np.array([0, 1, 2, 3, 4, 4]), 0.0)
    assert clustering_accuracy(one_off, labels) == pytest.approx(5 / 6)
    many = np.repeat(list("abcdef"), 10)
    single = Clustering(np.array([0]), np.zeros(60, dtype=int), 0.0)
    assert clustering_accuracy(single, many) == pytest.approx(1 / 6)
    with pytest.raises(ParameterError):
        clustering_accuracy(perfect, labels[:5])


def test_estimator():
    eps = 0.01
    D = np.array([[0, eps, 1, 1], [eps, 0, 1, 1], [1, 1, 0, eps], [1, 1, eps, 0]])
    km = KMedoids(n_clusters=2, n_restarts=10, random_state=0).fit(D)
    assert km.inertia_ == pytest.approx(2 * eps)
    assert km.labels_[0] == km.labels_[1] != km.labels_[2]
    assert list(km.predict(D)) == list(km.labels_)
    assert km.score(D, ["x", "x", "y", "y"]) == 1.0
    assert km.get_params()["n_clusters"] == 2


def _toy_diagrams():
    rng = np.random.default_rng(0)
    dgs, labels = [], []
    for label, center in (("low", 0.2), ("high", 0.8)):
        for _ in range(6):
            births = rng.random(3) * 0.1
            dgs.append(PersistenceDiagram(np.column_stack([births, births + center + rng.normal(0, 0.02, 3)])))
            labels.append(label)
    return dgs, labels


def test_sweep_structure_and_consistency():
    dgs, labels = _toy_diagrams()
    rows = parameter_sweep(dgs, labels, [10, 20], [0.05, 0.1], n_clusters=2, restarts=10)
    assert len(rows) == 4 and all(0 <= r["accuracy"] <= 1 for r in rows)
    direct = pi_accuracy(dgs, labels, (10, 10), 0.05, "l2", 2, 10, 0)
    assert rows[0]["accuracy"] == direct
    assert direct == 1.0
