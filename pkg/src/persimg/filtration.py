"""Filtered complexes and their persistence diagrams.

Two sources of filtrations are supported: Vietoris-Rips complexes on point
clouds (vertices, edges, triangles) and cubical sublevel-set complexes on
2-D scalar grids. Cells are ordered by ``(value, dim, sorted vertices)`` and
reduced over Z/2.

``persistence`` works on any explicit :class:`FilteredComplex`.
``rips_persistence`` is the fast path for point clouds: H0 comes from a
union-find sweep and H1 from a cohomology reduction whose coboundaries are
generated on the fly, so the triangle list is never materialised.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import pdist, squareform
from sklearn.base import BaseEstimator, TransformerMixin

from .core import ParameterError, PersistenceDiagram, StructuralError
from .validation import check_grid, check_point_cloud


@dataclass(frozen=True, eq=False)
class FilteredComplex:
    """Cells sorted by filtration value with explicit boundary indices.

    ``boundaries[j]`` lists the indices of the codimension-one faces of
    cell ``j``; every face must come earlier in the order.
    """

    dims: np.ndarray
    values: np.ndarray
    vertices: Tuple[Tuple[int, ...], ...]
    boundaries: Tuple[Tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.values)

    def count(self, dim: int) -> int:
        return int(np.count_nonzero(self.dims == dim))

    def euler_characteristic(self) -> int:
        return int(np.sum((-1) ** self.dims))

    def validate(self) -> None:
        n = len(self.values)
        if len(self.dims) != n or len(self.vertices) != n or len(self.boundaries) != n:
            raise StructuralError("complex fields have inconsistent lengths")
        if n and np.any(np.diff(self.values) < 0):
            raise StructuralError("cells are not sorted by filtration value")
        for j, faces in enumerate(self.boundaries):
            dim = self.dims[j]
            if dim == 0:
                if faces:
                    raise StructuralError(f"vertex {j} has a non-empty boundary")
                continue
            for i in faces:
                if not 0 <= i < j:
                    raise StructuralError(f"cell {j} has face {i} that does not precede it")
                if self.dims[i] != dim - 1:
                    raise StructuralError(f"cell {j} of dim {dim} has face {i} of dim {self.dims[i]}")
                if self.values[i] > self.values[j]:
                    raise StructuralError(f"face {i} enters after its coface {j}")


def _sort_cells(dims, values, verts):
    width = max(len(v) for v in verts)
    padded = np.full((len(verts), width), -1, dtype=np.int64)
    for r, v in enumerate(verts):
        padded[r, : len(v)] = v
    keys = [padded[:, c] for c in range(width - 1, -1, -1)] + [dims, values]
    return np.lexsort(keys)


def _assemble(dims, values, verts, face_lists) -> FilteredComplex:
    """Sort cells and rewrite faces (given as vertex tuples) as cell indices."""
    dims = np.asarray(dims, dtype=np.int64)
    values = np.asarray(values, dtype=np.float64)
    order = _sort_cells(dims, values, verts)
    verts = tuple(verts[k] for k in order)
    index = {v: i for i, v in enumerate(verts)}
    boundaries = tuple(tuple(sorted(index[f] for f in face_lists[k])) for k in order)
    return FilteredComplex(dims[order], values[order], verts, boundaries)


def _distance_matrix(points: np.ndarray) -> np.ndarray:
    if len(points) == 1:
        return np.zeros((1, 1))
    return squareform(pdist(points))


def rips_complex(cloud, max_dim: int = 2, max_scale: Optional[float] = None) -> FilteredComplex:
    """Vietoris-Rips complex with Euclidean distances.

    Edges enter at their length, triangles at their longest edge. Edges
    longer than ``max_scale`` (default: the cloud diameter) are left out.
    """
    cloud = check_point_cloud(cloud)
    if max_dim not in (1, 2):
        raise ParameterError("max_dim must be 1 or 2")
    D = _distance_matrix(cloud.points)
    n = len(D)
    if max_scale is None:
        max_scale = float(D.max())
    dims, values, verts, faces = [], [], [], []
    for i in range(n):
        dims.append(0)
        values.append(0.0)
        verts.append((i,))
        faces.append(())
    present = D <= max_scale
    for i in range(n):
        for j in range(i + 1, n):
            if present[i, j]:
                dims.append(1)
                values.append(D[i, j])
                verts.append((i, j))
                faces.append(((i,), (j,)))
    if max_dim == 2:
        for i in range(n):
            for j in range(i + 1, n):
                if not present[i, j]:
                    continue
                for k in range(j + 1, n):
                    if present[i, k] and present[j, k]:
                        dims.append(2)
                        values.append(max(D[i, j], D[i, k], D[j, k]))
                        verts.append((i, j, k))
                        faces.append(((i, j), (i, k), (j, k)))
    return _assemble(dims, values, verts, faces)


def cubical_sublevel(grid) -> FilteredComplex:
    """Cubical complex of a grid function filtered by sublevel sets.

    A vertex enters at its grid value, an edge once both endpoints are in,
    and a square once all four corners are in. Vertex ``(r, c)`` has index
    ``r * cols + c``.
    """
    g = check_grid(grid).values
    rows, cols = g.shape
    flat = g.ravel()
    dims, values, verts, faces = [], [], [], []
    for v in range(rows * cols):
        dims.append(0)
        values.append(flat[v])
        verts.append((v,))
        faces.append(())
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                dims.append(1)
                values.append(max(flat[v], flat[v + 1]))
                verts.append((v, v + 1))
                faces.append(((v,), (v + 1,)))
            if r + 1 < rows:
                dims.append(1)
                values.append(max(flat[v], flat[v + cols]))
                verts.append((v, v + cols))
                faces.append(((v,), (v + cols,)))
    for r in range(rows - 1):
        for c in range(cols - 1):
            a, b = r * cols + c, r * cols + c + 1
            d, e = a + cols, b + cols
            dims.append(2)
            values.append(max(flat[a], flat[b], flat[d], flat[e]))
            verts.append((a, b, d, e))
            faces.append(((a, b), (d, e), (a, d), (b, e)))
    return _assemble(dims, values, verts, faces)


def persistence(complex_: FilteredComplex, max_hom_dim: int = 1) -> List[PersistenceDiagram]:
    """Persistence diagrams for dimensions ``0..max_hom_dim`` of a filtered complex.

    Standard column reduction over Z/2 with clearing. Essential classes are
    dropped and counted in each diagram's ``n_dropped``; pairs with zero
    persistence are omitted.
    """
    complex_.validate()
    if max_hom_dim < 0:
        raise ParameterError("max_hom_dim must be non-negative")
    dims, values, bnd = complex_.dims, complex_.values, complex_.boundaries
    n = len(values)
    reduced = {}
    owner = {}
    death_of = np.full(n, -1, dtype=np.int64)
    positive = np.zeros(n, dtype=bool)
    top = min(max_hom_dim + 1, int(dims.max()) if n else 0)
    for d in range(top, 0, -1):
        for j in np.flatnonzero(dims == d):
            if death_of[j] >= 0:
                # cleared: j is the birth cell of a pair found one dimension up
                positive[j] = True
                continue
            col = set(bnd[j])
            while col:
                piv = max(col)
                k = owner.get(piv)
                if k is None:
                    break
                col ^= reduced[k]
            if col:
                piv = max(col)
                owner[piv] = j
                reduced[j] = col
                death_of[piv] = j
            else:
                positive[j] = True
    positive[dims == 0] = True

    out = []
    for d in range(max_hom_dim + 1):
        pts = []
        essential = 0
        for i in np.flatnonzero((dims == d) & positive):
            j = death_of[i]
            if j < 0:
                essential += 1
            elif values[j] > values[i]:
                pts.append((values[i], values[j]))
        diagram = PersistenceDiagram(np.array(pts).reshape(-1, 2), d, n_dropped=essential)
        out.append(diagram)
    return out


def rips_persistence(cloud, max_hom_dim: int = 1, max_scale: Optional[float] = None) -> List[PersistenceDiagram]:
    """H0 and H1 diagrams of the Rips filtration of a point cloud.

    Gives the same diagrams as ``persistence(rips_complex(cloud))`` with the
    same tie-breaking, without building the triangle list.
    """
    cloud = check_point_cloud(cloud)
    if max_hom_dim not in (0, 1):
        raise ParameterError("rips_persistence supports max_hom_dim 0 or 1")
    D = _distance_matrix(cloud.points)
    n = len(D)
    if max_scale is None:
        max_scale = float(D.max())
    iu, ju = np.triu_indices(n, 1)
    ev = D[iu, ju]
    keep = ev <= max_scale
    iu, ju, ev = iu[keep], ju[keep], ev[keep]
    order = np.lexsort((ju, iu, ev))
    iu, ju, ev = iu[order], ju[order], ev[order]
    n_edges = len(ev)

    parent = list(range(n))

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    negative = np.zeros(n_edges, dtype=bool)
    h0 = []
    for e in range(n_edges):
        ri, rj = find(int(iu[e])), find(int(ju[e]))
        if ri != rj:
            # all vertices are born at 0, so the elder rule never matters for values
            parent[max(ri, rj)] = min(ri, rj)
            negative[e] = True
            if ev[e] > 0:
                h0.append((0.0, ev[e]))
    n_components = n - int(negative.sum())
    diagrams = [PersistenceDiagram(np.array(h0).reshape(-1, 2), 0, n_dropped=n_components)]
    if max_hom_dim == 0:
        return diagrams
    diagrams.append(_rips_h1_cohomology(D, iu, ju, ev, negative))
    return diagrams


def _rips_h1_cohomology(D, iu, ju, ev, negative) -> PersistenceDiagram:
    n = len(D)
    if n > 2000:
        raise ParameterError("rips_persistence handles at most 2000 points")
    distinct = np.unique(ev)
    sentinel = len(distinct)
    # rank of each edge length among present edges; absent edges and the diagonal get the sentinel
    R = np.full((n, n), sentinel, dtype=np.int64)
    R[iu, ju] = np.searchsorted(distinct, ev)
    R[ju, iu] = R[iu, ju]
    n2, n3 = n * n, n * n * n
    ks = np.arange(n, dtype=np.int64)

    owner = {}
    as_set = {}
    pts = []
    essential = 0
    for e in range(len(ev) - 1, -1, -1):
        if negative[e]:
            continue
        i, j = int(iu[e]), int(ju[e])
        vr = np.maximum(np.maximum(R[i], R[j]), R[i, j])
        valid = vr < sentinel
        if not valid.any():
            essential += 1
            continue
        k = ks[valid]
        a = np.minimum(k, i)
        c = np.maximum(k, j)
        b = i + j + k - a - c
        # cofacet key orders triangles by (value, lexicographic vertices)
        keys = vr[valid] * n3 + a * n2 + b * n + c
        piv = int(keys.min())
        if piv not in owner:
            owner[piv] = e
            as_set[e] = keys
            pts.append((ev[e], distinct[piv // n3]))
            continue
        col = set(keys.tolist())
        while True:
            other = as_set[owner[piv]]
            if not isinstance(other, set):
                other = set(other.tolist())
                as_set[owner[piv]] = other
            col ^= other
            if not col:
                essential += 1
                break
            piv = min(col)
            if piv not in owner:
                owner[piv] = e
                as_set[e] = col
                pts.append((ev[e], distinct[piv // n3]))
                break
    pts = [p for p in pts if p[1] > p[0]]
    return PersistenceDiagram(np.array(pts, dtype=np.float64).reshape(-1, 2), 1, n_dropped=essential)


def cubical_persistence(grid, max_hom_dim: int = 1) -> List[PersistenceDiagram]:
    return persistence(cubical_sublevel(grid), max_hom_dim)


class RipsPersistence(TransformerMixin, BaseEstimator):
    """Map point clouds to their Rips diagrams ``[H0, ..., H_max_hom_dim]``."""

    def __init__(self, max_hom_dim=1, max_scale=None):
        self.max_hom_dim = max_hom_dim
        self.max_scale = max_scale

    def fit(self, X=None, y=None):
        return self

    def transform(self, X) -> list:
        return [rips_persistence(c, self.max_hom_dim, self.max_scale) for c in X]


class CubicalPersistence(TransformerMixin, BaseEstimator):
    """Map 2-D grids to their sublevel-set diagrams ``[H0, H1]``."""

    def __init__(self, max_hom_dim=1):
        self.max_hom_dim = max_hom_dim

    def fit(self, X=None, y=None):
        return self

    def transform(self, X) -> list:
        return [cubical_persistence(g, self.max_hom_dim) for g in X]
