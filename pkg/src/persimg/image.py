"""Persistence surfaces and persistence images.

A diagram is moved to birth-persistence coordinates, every point gets a
Gaussian bump scaled by a weight, and the resulting surface is integrated
over a pixel grid. The Gaussian is separable, so each pixel integral is a
product of two normal-CDF differences; no numerical quadrature is involved.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.special import ndtr
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .core import (
    ImageSpec,
    ParameterError,
    PersistenceDiagram,
    PersistenceImage,
    transform_to_birth_persistence,
)
from .validation import check_diagrams, check_positive


def weight_wb(b: float, persistence):
    """Piecewise-linear ramp: 0 for t <= 0, t/b on (0, b), 1 for t >= b."""
    b = check_positive(b, "b")
    t = np.asarray(persistence, dtype=np.float64)
    out = np.clip(t / b, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


class WeightingFunction:
    """Non-negative weight evaluated at birth-persistence coordinates."""

    #: whether the weight vanishes on the persistence-zero axis
    zero_on_axis = True

    def __call__(self, birth, persistence):
        raise NotImplementedError


class PiecewiseLinearWeight(WeightingFunction):
    def __init__(self, b: float):
        self.b = check_positive(b, "b")

    def __call__(self, birth, persistence):
        return weight_wb(self.b, persistence)

    def __repr__(self):
        return f"PiecewiseLinearWeight(b={self.b})"


class ConstantWeight(WeightingFunction):
    """Weight 1 everywhere. For ablations only: it is not zero on the axis."""

    zero_on_axis = False

    def __call__(self, birth, persistence):
        out = np.ones(np.broadcast(np.asarray(birth), np.asarray(persistence)).shape)
        return float(out) if out.ndim == 0 else out

    def __repr__(self):
        return "ConstantWeight()"


class TabulatedWeight(WeightingFunction):
    """Bilinear interpolation of weights sampled on a (birth, persistence) grid.

    ``values[i, j]`` is the weight at ``(births[i], persistences[j])``.
    Queries outside the table are clamped to its edge.
    """

    def __init__(self, births, persistences, values):
        self.births = np.asarray(births, dtype=np.float64)
        self.persistences = np.asarray(persistences, dtype=np.float64)
        self.values = np.asarray(values, dtype=np.float64)
        if self.values.shape != (self.births.size, self.persistences.size):
            raise ParameterError("tabulated weight values must have shape (len(births), len(persistences))")
        if self.births.size < 2 or self.persistences.size < 2:
            raise ParameterError("tabulated weight needs at least two samples per axis")
        if np.any(np.diff(self.births) <= 0) or np.any(np.diff(self.persistences) <= 0):
            raise ParameterError("tabulated weight axes must be strictly increasing")
        if np.any(self.values < 0):
            raise ParameterError("tabulated weights must be non-negative")
        if self.persistences[0] != 0.0 or np.any(self.values[:, 0] != 0.0):
            raise ParameterError("tabulated weight must start at persistence 0 with value 0")
        self._interp = RegularGridInterpolator(
            (self.births, self.persistences), self.values, method="linear"
        )

    def __call__(self, birth, persistence):
        b, p = np.broadcast_arrays(np.asarray(birth, dtype=np.float64), np.asarray(persistence, dtype=np.float64))
        q = np.column_stack([
            np.clip(b.ravel(), self.births[0], self.births[-1]),
            np.clip(p.ravel(), self.persistences[0], self.persistences[-1]),
        ])
        out = self._interp(q).reshape(b.shape)
        out[p < 0] = 0.0
        return float(out) if out.ndim == 0 else out


def resolve_weight(weight, b: Optional[float]) -> WeightingFunction:
    if isinstance(weight, WeightingFunction):
        return weight
    if weight in (None, "linear", "wb"):
        return PiecewiseLinearWeight(b)
    if weight in ("constant", "one"):
        return ConstantWeight()
    raise ParameterError(f"unknown weighting {weight!r}")


def gaussian_2d(z, mean, sigma: float):
    """Normalized isotropic Gaussian density at points ``z`` (..., 2)."""
    z = np.asarray(z, dtype=np.float64)
    d2 = np.sum((z - np.asarray(mean, dtype=np.float64)) ** 2, axis=-1)
    return np.exp(-d2 / (2.0 * sigma * sigma)) / (2.0 * math.pi * sigma * sigma)


def surface_value(diagram: PersistenceDiagram, weight, sigma: float, z):
    """Evaluate the persistence surface at ``z`` (a point or an (m, 2) array).

    Each transformed point contributes its weight times a Gaussian centred
    on it; the weight is a per-point constant, not a function of ``z``.
    """
    sigma = check_positive(sigma, "sigma")
    z = np.asarray(z, dtype=np.float64)
    scalar = z.ndim == 1
    zz = z.reshape(-1, 2)
    bp = transform_to_birth_persistence(diagram)
    if len(bp) == 0:
        out = np.zeros(len(zz))
    else:
        w = np.asarray(weight(bp[:, 0], bp[:, 1]), dtype=np.float64).reshape(-1)
        d2 = ((zz[:, None, 0] - bp[None, :, 0]) ** 2 + (zz[:, None, 1] - bp[None, :, 1]) ** 2)
        out = np.exp(-d2 / (2 * sigma * sigma)) @ w / (2 * math.pi * sigma * sigma)
    return float(out[0]) if scalar else out.reshape(z.shape[:-1])


def _interval_mass(centers: np.ndarray, edges: np.ndarray, sigma: float) -> np.ndarray:
    """Mass of N(center, sigma^2) in each [edges[k], edges[k+1]]; shape (n, len(edges)-1)."""
    s = (edges[None, :] - centers[:, None]) / sigma
    lo, hi = s[:, :-1], s[:, 1:]
    # right tail via the complement keeps precision far from the mean
    right = ndtr(-lo) - ndtr(-hi)
    left = ndtr(hi) - ndtr(lo)
    return np.where(lo > 0, right, left)


def _point_weights(bp: np.ndarray, weight: WeightingFunction) -> np.ndarray:
    w = np.asarray(weight(bp[:, 0], bp[:, 1]), dtype=np.float64).reshape(-1)
    if np.any(w < 0):
        raise ParameterError("weighting function returned a negative value")
    return w


def compute_image(diagram: PersistenceDiagram, spec: ImageSpec, weight=None) -> PersistenceImage:
    """Integrate the persistence surface over the pixel grid of ``spec``."""
    if spec.one_dimensional:
        return compute_image_1d(diagram, spec, weight)
    weight = resolve_weight(weight, spec.weight_ceiling_b)
    rows, cols = spec.resolution
    bp = transform_to_birth_persistence(diagram)
    if len(bp) == 0:
        return PersistenceImage(np.zeros((rows, cols)), spec, diagram.hom_dim)
    w = _point_weights(bp, weight)
    mx = _interval_mass(bp[:, 0], spec.birth_edges, spec.sigma)
    my = _interval_mass(bp[:, 1], spec.pers_edges, spec.sigma)
    pixels = (my * w[:, None]).T @ mx
    return PersistenceImage(np.maximum(pixels, 0.0), spec, diagram.hom_dim)


def compute_image_1d(diagram: PersistenceDiagram, spec: ImageSpec, weight=None) -> PersistenceImage:
    """Image from 1-D Gaussians on the persistence axis; all births must agree."""
    if not spec.one_dimensional:
        raise ParameterError("compute_image_1d needs an ImageSpec with one_dimensional=True")
    weight = resolve_weight(weight, spec.weight_ceiling_b)
    cols = spec.resolution[1]
    bp = transform_to_birth_persistence(diagram)
    if len(bp) == 0:
        return PersistenceImage(np.zeros((1, cols)), spec, diagram.hom_dim)
    if np.any(bp[:, 0] != bp[0, 0]):
        raise ParameterError(
            "one-dimensional images need identical births; "
            f"got births in [{bp[:, 0].min()}, {bp[:, 0].max()}]; use compute_image instead"
        )
    w = _point_weights(bp, weight)
    m = _interval_mass(bp[:, 1], spec.pers_edges, spec.sigma)
    pixels = (w @ m).reshape(1, cols)
    return PersistenceImage(np.maximum(pixels, 0.0), spec, diagram.hom_dim)


def concatenate_images(images: Sequence[PersistenceImage]) -> np.ndarray:
    """Row-major flatten each image and join them in order."""
    images = list(images)
    if not images:
        raise ParameterError("need at least one image to concatenate")
    return np.concatenate([img.to_vector() for img in images])


def shared_image_bounds(diagrams, sigma: float, one_dimensional: bool = False, pad: float = 3.0):
    """Grid bounds and weight ceiling shared by every diagram of an experiment.

    ``b`` is the largest persistence over all diagrams. Births span
    ``[min(0, min birth), max birth]`` and persistence spans ``[0, b]``,
    each padded by ``pad * sigma`` on the upper side.

    Returns ``((birth_min, birth_max, pers_min, pers_max), b)``.
    """
    sigma = check_positive(sigma, "sigma")
    diagrams = check_diagrams(diagrams)
    if not diagrams:
        raise ParameterError("need at least one diagram")
    pts = [d.points for d in diagrams if len(d)]
    if not pts:
        raise ParameterError("all diagrams are empty; no scale information for image bounds")
    allp = np.concatenate(pts)
    pers = allp[:, 1] - allp[:, 0]
    b = float(pers.max())
    if b <= 0:
        raise ParameterError("every point has zero persistence; no scale information for image bounds")
    birth_min = min(0.0, float(allp[:, 0].min()))
    birth_max = float(allp[:, 0].max()) + pad * sigma
    if one_dimensional:
        birth_min, birth_max = float(allp[0, 0]), float(allp[0, 0])
    return (birth_min, birth_max, 0.0, b + pad * sigma), b


class PersistenceImager(TransformerMixin, BaseEstimator):
    """Vectorize diagrams as persistence images.

    ``fit`` fixes the grid and weight ceiling from the training diagrams so
    every transformed diagram lands on the same pixels. Explicit
    ``grid_bounds`` or ``b`` override the learned values.

    Parameters
    ----------
    resolution : (rows, cols)
        Pixel grid; for ``one_dimensional=True`` only ``cols`` is used.
    sigma : float
        Standard deviation of the Gaussian bumps.
    weight : {"linear", "constant"} or WeightingFunction
        ``"linear"`` is the ramp of height one reached at persistence ``b``.
    b : float, optional
        Weight ceiling; defaults to the largest training persistence.
    grid_bounds : (birth_min, birth_max, pers_min, pers_max), optional
    one_dimensional : bool
        Use 1-D Gaussians along persistence (for diagrams whose births agree).
    """

    def __init__(self, resolution=(20, 20), sigma=0.1, weight="linear", b=None,
                 grid_bounds=None, one_dimensional=False):
        self.resolution = resolution
        self.sigma = sigma
        self.weight = weight
        self.b = b
        self.grid_bounds = grid_bounds
        self.one_dimensional = one_dimensional

    def fit(self, X, y=None):
        diagrams = check_diagrams(X)
        bounds, b = None, None
        if self.grid_bounds is None or self.b is None:
            bounds, b = shared_image_bounds(diagrams, self.sigma, self.one_dimensional)
        if self.grid_bounds is not None:
            bounds = tuple(self.grid_bounds)
        if self.b is not None:
            b = self.b
        if self.one_dimensional:
            res = (1, self.resolution if np.isscalar(self.resolution) else self.resolution[-1])
        else:
            res = tuple(self.resolution)
        self.spec_ = ImageSpec(res, self.sigma, b, bounds, self.one_dimensional)
        self.weight_ = resolve_weight(self.weight, b)
        self.n_features_out_ = self.spec_.n_pixels
        return self

    def images(self, X) -> list:
        check_is_fitted(self, "spec_")
        return [compute_image(d, self.spec_, self.weight_) for d in check_diagrams(X)]

    def transform(self, X) -> np.ndarray:
        imgs = self.images(X)
        if not imgs:
            return np.empty((0, self.n_features_out_))
        return np.vstack([img.to_vector() for img in imgs])
