"""Shared domain types: diagrams, image recipes, grids and point clouds."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Optional, Sequence, Tuple

import numpy as np


class ParameterError(ValueError):
    """Raised when a caller passes an out-of-range or malformed parameter."""


class StructuralError(ValueError):
    """Raised when a filtered complex violates its ordering or face rules."""


class DiagramPoint(NamedTuple):
    birth: float
    death: float


class BirthPersistencePoint(NamedTuple):
    birth: float
    persistence: float


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Finite multiset of (birth, death) pairs for one homological dimension.

    Points are stored as an ``(n, 2)`` float array with explicit repeats.
    Use :meth:`from_pairs` to build a diagram from raw output that may
    contain infinite deaths; those are removed and counted in ``n_dropped``.
    """

    points: np.ndarray
    hom_dim: int = 0
    n_dropped: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.size == 0:
            pts = pts.reshape(0, 2)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ParameterError(f"diagram points must have shape (n, 2), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ParameterError("diagram points must be finite; use from_pairs to drop infinite deaths")
        if np.any(pts[:, 1] < pts[:, 0]):
            raise ParameterError("every diagram point needs death >= birth")
        if int(self.hom_dim) < 0:
            raise ParameterError("hom_dim must be non-negative")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "hom_dim", int(self.hom_dim))
        object.__setattr__(self, "n_dropped", int(self.n_dropped))

    @classmethod
    def from_pairs(cls, pairs, hom_dim: int = 0) -> "PersistenceDiagram":
        """Build a diagram, discarding pairs whose death is infinite."""
        arr = np.asarray(pairs, dtype=np.float64)
        if arr.size == 0:
            return cls(np.empty((0, 2)), hom_dim)
        arr = arr.reshape(-1, 2)
        finite = np.isfinite(arr[:, 1])
        return cls(arr[finite], hom_dim, n_dropped=int(np.count_nonzero(~finite)))

    @classmethod
    def empty(cls, hom_dim: int = 0) -> "PersistenceDiagram":
        return cls(np.empty((0, 2)), hom_dim)

    def __len__(self) -> int:
        return self.points.shape[0]

    def __iter__(self) -> Iterator[DiagramPoint]:
        for b, d in self.points:
            yield DiagramPoint(float(b), float(d))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        if self.hom_dim != other.hom_dim or len(self) != len(other):
            return False
        return bool(np.array_equal(_sorted_rows(self.points), _sorted_rows(other.points)))

    def __repr__(self) -> str:
        return f"PersistenceDiagram(n={len(self)}, hom_dim={self.hom_dim}, n_dropped={self.n_dropped})"

    @property
    def births(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def deaths(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def persistence(self) -> np.ndarray:
        return self.points[:, 1] - self.points[:, 0]

    def sorted_points(self) -> np.ndarray:
        return _sorted_rows(self.points)


def _sorted_rows(a: np.ndarray) -> np.ndarray:
    if len(a) == 0:
        return a
    return a[np.lexsort((a[:, 1], a[:, 0]))]


def transform_to_birth_persistence(diagram: PersistenceDiagram) -> np.ndarray:
    """Map each (birth, death) to (birth, death - birth); returns an (n, 2) array."""
    pts = diagram.points
    out = np.empty_like(pts)
    out[:, 0] = pts[:, 0]
    out[:, 1] = pts[:, 1] - pts[:, 0]
    return out


def birth_persistence_to_diagram(bp, hom_dim: int = 0) -> PersistenceDiagram:
    """Inverse of :func:`transform_to_birth_persistence`."""
    bp = np.asarray(bp, dtype=np.float64).reshape(-1, 2)
    return PersistenceDiagram(np.column_stack([bp[:, 0], bp[:, 0] + bp[:, 1]]), hom_dim)


@dataclass(frozen=True)
class ImageSpec:
    """Everything needed to turn a diagram into a persistence image.

    ``grid_bounds`` is ``(birth_min, birth_max, pers_min, pers_max)``.
    Rows of the image run along persistence, columns along birth. In
    one-dimensional mode the birth bounds are ignored and the ``cols``
    pixels subdivide ``[pers_min, pers_max]``.
    """

    resolution: Tuple[int, int] = (20, 20)
    sigma: float = 0.1
    weight_ceiling_b: float = 1.0
    grid_bounds: Tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0)
    one_dimensional: bool = False

    def __post_init__(self):
        res = tuple(int(r) for r in self.resolution)
        if len(res) != 2 or min(res) < 1:
            raise ParameterError(f"resolution must be two positive integers, got {self.resolution}")
        if self.one_dimensional and res[0] != 1:
            raise ParameterError("one-dimensional images have a single row")
        bounds = tuple(float(v) for v in self.grid_bounds)
        if len(bounds) != 4 or not all(np.isfinite(bounds)):
            raise ParameterError("grid_bounds must be four finite reals")
        bmin, bmax, pmin, pmax = bounds
        if not pmin < pmax:
            raise ParameterError("degenerate grid: pers_min must be < pers_max")
        if not self.one_dimensional and not bmin < bmax:
            raise ParameterError("degenerate grid: birth_min must be < birth_max")
        if not (self.sigma > 0 and np.isfinite(self.sigma)):
            raise ParameterError("sigma must be positive")
        if not (self.weight_ceiling_b > 0 and np.isfinite(self.weight_ceiling_b)):
            raise ParameterError("weight_ceiling_b must be positive")
        object.__setattr__(self, "resolution", res)
        object.__setattr__(self, "grid_bounds", bounds)
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "weight_ceiling_b", float(self.weight_ceiling_b))

    @property
    def n_pixels(self) -> int:
        return self.resolution[0] * self.resolution[1]

    @property
    def birth_edges(self) -> np.ndarray:
        bmin, bmax = self.grid_bounds[:2]
        return np.linspace(bmin, bmax, self.resolution[1] + 1)

    @property
    def pers_edges(self) -> np.ndarray:
        pmin, pmax = self.grid_bounds[2:]
        n = self.resolution[1] if self.one_dimensional else self.resolution[0]
        return np.linspace(pmin, pmax, n + 1)

    @property
    def pixel_area(self) -> float:
        """Largest pixel area (all pixels are equal on a uniform grid)."""
        return self.total_area / self.n_pixels

    @property
    def total_area(self) -> float:
        bmin, bmax, pmin, pmax = self.grid_bounds
        if self.one_dimensional:
            return pmax - pmin
        return (bmax - bmin) * (pmax - pmin)

    def to_dict(self) -> dict:
        return {
            "resolution": list(self.resolution),
            "sigma": self.sigma,
            "weight_ceiling_b": self.weight_ceiling_b,
            "grid_bounds": list(self.grid_bounds),
            "one_dimensional": self.one_dimensional,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ImageSpec":
        return cls(
            resolution=tuple(d["resolution"]),
            sigma=d["sigma"],
            weight_ceiling_b=d["weight_ceiling_b"],
            grid_bounds=tuple(d["grid_bounds"]),
            one_dimensional=bool(d.get("one_dimensional", False)),
        )


@dataclass(frozen=True, eq=False)
class PersistenceImage:
    pixels: np.ndarray
    spec: ImageSpec
    hom_dim: int = 0

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.shape != self.spec.resolution:
            raise ParameterError(f"pixel grid {px.shape} does not match resolution {self.spec.resolution}")
        if np.any(px < 0):
            raise ParameterError("pixels must be non-negative")
        object.__setattr__(self, "pixels", _frozen(px))

    def to_vector(self) -> np.ndarray:
        return self.pixels.ravel()


@dataclass(frozen=True, eq=False)
class ScalarGrid:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 2:
            raise ParameterError(f"grid must be 2-D with at least 2x2 vertices, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ParameterError("grid values must be finite")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    label: Optional[str] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.asarray(self.points, dtype=np.float64)
        if p.ndim == 1:
            p = p.reshape(-1, 1)
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
            raise ParameterError(f"point cloud needs at least one point of dimension >= 1, got shape {p.shape}")
        if not np.all(np.isfinite(p)):
            raise ParameterError("point coordinates must be finite")
        object.__setattr__(self, "points", _frozen(p))

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def as_diagram(obj, hom_dim: int = 0) -> PersistenceDiagram:
    """Accept a diagram or anything array-like of (birth, death) pairs."""
    if isinstance(obj, PersistenceDiagram):
        return obj
    return PersistenceDiagram.from_pairs(obj, hom_dim)


def as_diagrams(objs: Sequence, hom_dim: int = 0) -> list:
    return [as_diagram(o, hom_dim) for o in objs]
