"""Synthetic inputs: noisy shape samples and linked twist map orbits.

Randomness comes from numpy's PCG64 generator. Batch generators derive one
child seed per instance with ``SeedSequence.spawn`` so any instance can be
regenerated on its own.
"""

from __future__ import annotations

import math
from typing import List, Optional, Sequence

import numpy as np

from .core import ParameterError, PointCloud
from .image import shared_image_bounds  # noqa: F401  (re-exported)

SHAPE_CLASSES = ("solid_cube", "circle", "sphere", "three_clusters", "nested_clusters", "torus")
DEFAULT_LTM_RS = (2.5, 3.5, 4.0, 4.1, 4.3)
GENERATOR = "numpy.random.PCG64"

CIRCLE_RADIUS = 1.0
SPHERE_RADIUS = 1.0
TORUS_MAJOR = 1.0
TORUS_MINOR = 0.5
CLUSTER_STD = 0.05
NESTED_SCALE = 0.5

_TRIANGLE = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, math.sqrt(3.0) / 2.0, 0.0]])


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def _blobs(rng, centers: np.ndarray, std: float, n: int) -> np.ndarray:
    which = rng.integers(0, len(centers), size=n)
    return centers[which] + rng.normal(0.0, std, size=(n, 3))


def _torus(rng, n: int) -> np.ndarray:
    # accept tube angles with probability proportional to the local circumference
    thetas = np.empty(0)
    while len(thetas) < n:
        t = rng.uniform(0.0, 2 * math.pi, size=2 * n)
        keep = rng.random(2 * n) < (TORUS_MAJOR + TORUS_MINOR * np.cos(t)) / (TORUS_MAJOR + TORUS_MINOR)
        thetas = np.concatenate([thetas, t[keep]])
    theta = thetas[:n]
    phi = rng.uniform(0.0, 2 * math.pi, size=n)
    ring = TORUS_MAJOR + TORUS_MINOR * np.cos(theta)
    return np.column_stack([ring * np.cos(phi), ring * np.sin(phi), TORUS_MINOR * np.sin(theta)])


def _ideal_shape(rng, shape: str, n: int) -> np.ndarray:
    if shape == "solid_cube":
        return rng.random((n, 3))
    if shape == "circle":
        t = rng.uniform(0.0, 2 * math.pi, size=n)
        return np.column_stack([CIRCLE_RADIUS * np.cos(t), CIRCLE_RADIUS * np.sin(t), np.zeros(n)])
    if shape == "sphere":
        v = rng.normal(size=(n, 3))
        return SPHERE_RADIUS * v / np.linalg.norm(v, axis=1, keepdims=True)
    if shape == "three_clusters":
        return _blobs(rng, _TRIANGLE, CLUSTER_STD, n)
    if shape == "nested_clusters":
        pattern = (_TRIANGLE - _TRIANGLE.mean(axis=0)) * NESTED_SCALE
        centers = (_TRIANGLE[:, None, :] + pattern[None, :, :]).reshape(-1, 3)
        return _blobs(rng, centers, CLUSTER_STD * NESTED_SCALE, n)
    if shape == "torus":
        return _torus(rng, n)
    raise ParameterError(f"unknown shape class {shape!r}; expected one of {SHAPE_CLASSES}")


def sample_shape(shape: str, n_points: int, noise: float = 0.0, seed=None) -> PointCloud:
    """Sample ``n_points`` from a shape in R^3 and add N(0, noise^2) per coordinate."""
    if n_points < 1:
        raise ParameterError("n_points must be >= 1")
    if noise < 0:
        raise ParameterError("noise must be non-negative")
    rng = _rng(seed)
    pts = _ideal_shape(rng, shape, int(n_points))
    if noise > 0:
        pts = pts + rng.normal(0.0, noise, size=pts.shape)
    return PointCloud(pts, label=shape, metadata={"noise": noise, "generator": GENERATOR})


def generate_shapes(per_class: int, n_points: int, noise: float, seed: int = 0,
                    classes: Sequence[str] = SHAPE_CLASSES) -> List[PointCloud]:
    """``per_class`` clouds of every shape class, grouped by class."""
    children = np.random.SeedSequence(seed).spawn(per_class * len(classes))
    clouds = []
    for c, shape in enumerate(classes):
        for k in range(per_class):
            clouds.append(sample_shape(shape, n_points, noise, _rng(children[c * per_class + k])))
    return clouds


def ltm_step(x: float, y: float, r: float):
    return (x + r * y * (1.0 - y)) % 1.0, (y + r * x * (1.0 - x)) % 1.0


def ltm_orbit(r: float, n_iterations: int, seed=None, start=None) -> PointCloud:
    """Orbit ``(x_0, y_0), ..., (x_N, y_N)`` of the linked twist map.

    Both coordinates update from the previous iterate. The start point is
    drawn uniformly from the unit square unless ``start`` is given.
    """
    if not r > 0:
        raise ParameterError("r must be positive")
    if n_iterations < 1:
        raise ParameterError("n_iterations must be >= 1")
    if start is None:
        x, y = _rng(seed).random(2)
    else:
        x, y = float(start[0]), float(start[1])
    out = np.empty((n_iterations + 1, 2))
    out[0] = x, y
    for n in range(1, n_iterations + 1):
        x, y = ltm_step(x, y, r)
        out[n] = x, y
    return PointCloud(out, label=f"r={r:g}", metadata={"r": r, "generator": GENERATOR})


def generate_ltm(rs: Sequence[float] = DEFAULT_LTM_RS, per_r: int = 50, n_iterations: int = 1000,
                 seed: int = 0, subsample: Optional[int] = None) -> List[PointCloud]:
    """Orbits for each ``r``; optionally keep a random ``subsample`` of each orbit."""
    children = np.random.SeedSequence(seed).spawn(per_r * len(rs))
    clouds = []
    for c, r in enumerate(rs):
        for k in range(per_r):
            rng = _rng(children[c * per_r + k])
            orbit = ltm_orbit(r, n_iterations, rng)
            if subsample is not None and subsample < len(orbit):
                idx = np.sort(rng.choice(len(orbit), size=subsample, replace=False))
                orbit = PointCloud(orbit.points[idx], label=orbit.label, metadata=orbit.metadata)
            clouds.append(orbit)
    return clouds
