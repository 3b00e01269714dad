"""K-medoids clustering on precomputed distance matrices, and the PI parameter sweep."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from .core import ImageSpec, ParameterError
from .image import PersistenceImager
from .metrics import build_distance_matrix
from .validation import check_diagrams, check_distance_matrix


@dataclass
class Clustering:
    """Medoids (sorted object indices), each object's medoid, and the total distance."""

    medoid_indices: np.ndarray
    assignment: np.ndarray
    score: float
    history: List[float] = field(default_factory=list)


def _assign(D: np.ndarray, medoids: np.ndarray):
    # argmin picks the first medoid on ties; medoids are sorted so that is the lowest index
    sub = D[:, medoids]
    nearest = np.argmin(sub, axis=1)
    nearest[medoids] = np.arange(len(medoids))
    assignment = medoids[nearest]
    return assignment, float(D[np.arange(len(D)), assignment].sum())


def _voronoi_iteration(D: np.ndarray, medoids: np.ndarray, max_iter: int):
    medoids = np.sort(medoids)
    assignment, score = _assign(D, medoids)
    history = [score]
    for _ in range(max_iter):
        new = medoids.copy()
        for k, m in enumerate(medoids):
            members = np.flatnonzero(assignment == m)
            costs = D[np.ix_(members, members)].sum(axis=1)
            best = members[np.argmin(costs)]
            # strict improvement only, so equal-cost swaps cannot cycle
            if costs.min() < D[m, members].sum():
                new[k] = best
        new = np.sort(new)
        if np.array_equal(new, medoids):
            break
        new_assignment, new_score = _assign(D, new)
        if not new_score < score:
            break
        medoids, assignment, score = new, new_assignment, new_score
        history.append(score)
    return medoids, assignment, score, history


def kmedoids(D, n_clusters: int, restarts: int = 1000, seed=None, max_iter: int = 100) -> Clustering:
    """Best of ``restarts`` Voronoi-iteration runs from random distinct medoids.

    The restart with the lowest score wins; the earliest restart wins ties.
    """
    D = check_distance_matrix(D)
    n = len(D)
    if not 1 <= n_clusters <= n:
        raise ParameterError(f"n_clusters must be in [1, {n}], got {n_clusters}")
    if restarts < 1:
        raise ParameterError("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        init = rng.choice(n, size=n_clusters, replace=False)
        medoids, assignment, score, history = _voronoi_iteration(D, init, max_iter)
        if best is None or score < best.score:
            best = Clustering(medoids, assignment, score, history)
    return best


def exhaustive_kmedoids(D, n_clusters: int) -> Clustering:
    """Global optimum by trying every medoid set; only for small inputs."""
    D = check_distance_matrix(D)
    best = None
    for combo in itertools.combinations(range(len(D)), n_clusters):
        medoids = np.array(combo)
        assignment, score = _assign(D, medoids)
        if best is None or score < best.score:
            best = Clustering(medoids, assignment, score, [score])
    return best


def clustering_accuracy(clustering: Clustering, labels: Sequence) -> float:
    """Fraction of objects whose medoid carries the same label."""
    labels = np.asarray(labels)
    if len(labels) != len(clustering.assignment):
        raise ParameterError(f"{len(labels)} labels for {len(clustering.assignment)} objects")
    return float(np.mean(labels == labels[clustering.assignment]))


class KMedoids(ClusterMixin, BaseEstimator):
    """K-medoids on a precomputed distance matrix.

    ``fit`` takes an ``(n, n)`` matrix; ``predict`` takes distances from new
    objects to the training objects, shape ``(m, n)``, and returns the index
    of the nearest medoid's cluster.
    """

    def __init__(self, n_clusters=6, n_restarts=1000, max_iter=100, random_state=None):
        self.n_clusters = n_clusters
        self.n_restarts = n_restarts
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y=None):
        c = kmedoids(X, self.n_clusters, self.n_restarts, self.random_state, self.max_iter)
        self.clustering_ = c
        self.medoid_indices_ = c.medoid_indices
        self.labels_ = np.searchsorted(c.medoid_indices, c.assignment)
        self.inertia_ = c.score
        return self

    def predict(self, X):
        check_is_fitted(self, "medoid_indices_")
        X = np.asarray(getattr(X, "values", X), dtype=np.float64)
        return np.argmin(X[:, self.medoid_indices_], axis=1)

    def score(self, X, y):
        """Medoid-label accuracy on the training matrix."""
        check_is_fitted(self, "clustering_")
        return clustering_accuracy(self.clustering_, y)


def pi_accuracy(diagrams, labels, resolution, sigma, metric: str = "l2", n_clusters: int = 6,
                restarts: int = 100, seed=0, one_dimensional: bool = False) -> float:
    """Images -> distance matrix -> K-medoids -> medoid-label accuracy, for one setting."""
    imager = PersistenceImager(resolution=resolution, sigma=sigma, one_dimensional=one_dimensional)
    X = imager.fit_transform(diagrams)
    dm = build_distance_matrix(X, metric, {"representation": "pi", "sigma": sigma,
                                           "resolution": list(np.atleast_1d(resolution))})
    return clustering_accuracy(kmedoids(dm.values, n_clusters, restarts, seed), labels)


def parameter_sweep(diagrams, labels, resolutions: Sequence[int], sigmas: Sequence[float],
                    metric: str = "l2", n_clusters: int = 6, restarts: int = 100, seed=0) -> List[dict]:
    """Accuracy for every (resolution, sigma) pair; resolutions are square side lengths."""
    diagrams = check_diagrams(diagrams)
    rows = []
    for res in resolutions:
        for sigma in sigmas:
            acc = pi_accuracy(diagrams, labels, (res, res), sigma, metric, n_clusters, restarts, seed)
            rows.append({"resolution": int(res), "sigma": float(sigma), "metric": metric, "accuracy": acc})
    return rows
