"""Distances between diagrams and between image vectors.

Diagram distances match points under the sup-norm, letting any point pair
with its projection onto the diagonal instead of a partner. Matching ``m``
points against ``n`` points becomes an ``(m + n) x (m + n)`` assignment
problem: the extra rows and columns stand for diagonal slots, and two
diagonal slots may be matched for free.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching
from scipy.spatial.distance import pdist, squareform

from .core import ParameterError, PersistenceDiagram, as_diagram

#: marker used in :class:`Matching` pairs for the diagonal
DIAGONAL = -1


@dataclass(frozen=True)
class Matching:
    """Pairs ``(i, j)`` with ``i`` indexing ``B``, ``j`` indexing ``B'``; either may be DIAGONAL."""

    pairs: Tuple[Tuple[int, int], ...]
    cost: float
    p: float


def _pair_costs(B: np.ndarray, Bp: np.ndarray):
    """Sup-norm distances between points and half-persistence diagonal distances."""
    if len(B) and len(Bp):
        cross = np.max(np.abs(B[:, None, :] - Bp[None, :, :]), axis=2)
    else:
        cross = np.zeros((len(B), len(Bp)))
    diag_b = (B[:, 1] - B[:, 0]) / 2.0
    diag_bp = (Bp[:, 1] - Bp[:, 0]) / 2.0
    return cross, diag_b, diag_bp


def _augmented(cross, diag_b, diag_bp, forbidden=np.inf):
    m, n = cross.shape
    C = np.full((m + n, n + m), forbidden)
    C[:m, :n] = cross
    C[m:, n:] = 0.0
    if m:
        C[np.arange(m), n + np.arange(m)] = diag_b
    if n:
        C[m + np.arange(n), np.arange(n)] = diag_bp
    return C


def _pairs_from_assignment(rows, cols, m, n) -> list:
    pairs = []
    for r, c in zip(rows, cols):
        if r < m and c < n:
            pairs.append((int(r), int(c)))
        elif r < m:
            pairs.append((int(r), DIAGONAL))
        elif c < n:
            pairs.append((DIAGONAL, int(c)))
    return pairs


def matching_cost(B, Bp, pairs, p: float) -> float:
    """Recompute the objective of a matching (``p = inf`` for the max cost)."""
    B, Bp = as_diagram(B).points, as_diagram(Bp).points
    costs = []
    for i, j in pairs:
        if i != DIAGONAL and j != DIAGONAL:
            costs.append(float(np.max(np.abs(B[i] - Bp[j]))))
        elif i != DIAGONAL:
            costs.append(float(B[i, 1] - B[i, 0]) / 2.0)
        else:
            costs.append(float(Bp[j, 1] - Bp[j, 0]) / 2.0)
    if not costs:
        return 0.0
    if math.isinf(p):
        return max(costs)
    return math.fsum(c ** p for c in costs) ** (1.0 / p)


def wasserstein(B, Bp, p: float = 1.0) -> Tuple[float, Matching]:
    """p-Wasserstein distance with the sup-norm ground metric and an optimal matching."""
    if not p >= 1:
        raise ParameterError("p must be >= 1")
    if math.isinf(p):
        return bottleneck(B, Bp)
    B, Bp = as_diagram(B).points, as_diagram(Bp).points
    m, n = len(B), len(Bp)
    if m + n == 0:
        return 0.0, Matching((), 0.0, p)
    cross, db, dbp = _pair_costs(B, Bp)
    C = _augmented(cross ** p, db ** p, dbp ** p)
    rows, cols = linear_sum_assignment(C)
    pairs = _pairs_from_assignment(rows, cols, m, n)
    cost = matching_cost(B, Bp, pairs, p)
    return cost, Matching(tuple(pairs), cost, p)


def _perfect_matching(C: np.ndarray, t: float):
    """Perfect matching using only entries <= t, or None."""
    adj = csr_matrix(C <= t)
    match = maximum_bipartite_matching(adj, perm_type="column")
    if np.any(match < 0):
        return None
    return match


def bottleneck(B, Bp) -> Tuple[float, Matching]:
    """Bottleneck distance: binary search over candidate costs with matching feasibility."""
    B, Bp = as_diagram(B).points, as_diagram(Bp).points
    m, n = len(B), len(Bp)
    if m + n == 0:
        return 0.0, Matching((), 0.0, math.inf)
    cross, db, dbp = _pair_costs(B, Bp)
    C = _augmented(cross, db, dbp)
    candidates = np.unique(np.concatenate([[0.0], cross.ravel(), db, dbp]))
    lo, hi = 0, len(candidates) - 1
    best = _perfect_matching(C, candidates[hi])
    while lo < hi:
        mid = (lo + hi) // 2
        match = _perfect_matching(C, candidates[mid])
        if match is None:
            lo = mid + 1
        else:
            hi, best = mid, match
    rows = np.arange(m + n)
    pairs = _pairs_from_assignment(rows, best, m, n)
    cost = matching_cost(B, Bp, pairs, math.inf)
    return cost, Matching(tuple(pairs), cost, math.inf)


_VECTOR_NORMS = {
    "l1": ("cityblock", lambda d: float(np.sum(np.abs(d)))),
    "l2": ("euclidean", lambda d: float(np.sqrt(np.sum(d * d)))),
    "linf": ("chebyshev", lambda d: float(np.max(np.abs(d))) if d.size else 0.0),
}


def vector_distance(a, b, norm: str = "l2") -> float:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ParameterError(f"vector lengths differ: {a.size} vs {b.size}")
    key = norm.lower()
    if key not in _VECTOR_NORMS:
        raise ParameterError(f"unknown norm {norm!r}; expected one of {sorted(_VECTOR_NORMS)}")
    return _VECTOR_NORMS[key][1](a - b)


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    values: np.ndarray
    labels: Tuple = ()
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ParameterError("distance matrix must be square")
        labels = tuple(self.labels) if self.labels is not None else ()
        if labels and len(labels) != v.shape[0]:
            raise ParameterError("labels do not match the matrix size")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "labels", labels)

    @property
    def shape(self):
        return self.values.shape

    def __len__(self):
        return self.values.shape[0]


class MetricError(RuntimeError):
    """A pairwise metric failed; carries the offending indices."""

    def __init__(self, i, j, cause):
        super().__init__(f"metric failed on pair ({i}, {j}): {cause!r}")
        self.pair = (i, j)


DIAGRAM_METRICS = {
    "w1": lambda a, b: wasserstein(a, b, 1.0)[0],
    "w2": lambda a, b: wasserstein(a, b, 2.0)[0],
    "bottleneck": lambda a, b: bottleneck(a, b)[0],
}


def build_distance_matrix(objects: Sequence, metric, provenance: Optional[dict] = None,
                          labels: Sequence = ()) -> DistanceMatrix:
    """Symmetric matrix of ``metric`` over every unordered pair.

    ``metric`` is a callable or a name: ``"l1"``, ``"l2"``, ``"linf"`` for
    vectors (computed in bulk) or ``"w1"``, ``"w2"``, ``"bottleneck"`` for
    diagrams.
    """
    objects = list(objects)
    n = len(objects)
    prov = dict(provenance or {})
    if isinstance(metric, str):
        key = metric.lower()
        prov.setdefault("metric", key)
        if key in _VECTOR_NORMS:
            X = np.asarray([np.asarray(o, dtype=np.float64).ravel() for o in objects])
            if n < 2:
                return DistanceMatrix(np.zeros((n, n)), labels, prov)
            return DistanceMatrix(squareform(pdist(X, _VECTOR_NORMS[key][0])), labels, prov)
        if key not in DIAGRAM_METRICS:
            raise ParameterError(f"unknown metric {metric!r}")
        metric = DIAGRAM_METRICS[key]
    else:
        prov.setdefault("metric", getattr(metric, "__name__", repr(metric)))
    M = np.zeros((n, n))
    for i, j in itertools.combinations(range(n), 2):
        try:
            d = float(metric(objects[i], objects[j]))
        except Exception as exc:
            raise MetricError(i, j, exc) from exc
        M[i, j] = M[j, i] = d
    return DistanceMatrix(M, labels, prov)
