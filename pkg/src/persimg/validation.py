"""Input checks shared by the estimators and the functional API."""

from __future__ import annotations

import numbers

import numpy as np

from .core import ParameterError, PersistenceDiagram, PointCloud, ScalarGrid, as_diagram


def check_positive(value, name: str) -> float:
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ParameterError(f"{name} must be a positive real, got {value!r}")
    return float(value)


def check_diagrams(X, hom_dim: int = 0) -> list:
    """Coerce a sequence of diagrams or (n, 2) arrays into diagrams."""
    if isinstance(X, (PersistenceDiagram, np.ndarray)) and not (
        isinstance(X, np.ndarray) and X.dtype == object
    ):
        if isinstance(X, PersistenceDiagram) or X.ndim == 2:
            raise ParameterError("expected a sequence of diagrams, got a single diagram")
    return [as_diagram(d, hom_dim) for d in X]


def check_point_cloud(X) -> PointCloud:
    if isinstance(X, PointCloud):
        return X
    return PointCloud(np.asarray(X, dtype=np.float64))


def check_grid(X) -> ScalarGrid:
    if isinstance(X, ScalarGrid):
        return X
    return ScalarGrid(np.asarray(X, dtype=np.float64))


def check_distance_matrix(D, *, atol: float = 1e-9) -> np.ndarray:
    """Square, symmetric, non-negative, zero diagonal."""
    D = np.asarray(getattr(D, "values", D), dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ParameterError(f"distance matrix must be square, got shape {D.shape}")
    if not np.all(np.isfinite(D)):
        raise ParameterError("distance matrix has non-finite entries")
    if np.any(D < -atol):
        raise ParameterError("distance matrix has negative entries")
    if not np.allclose(D, D.T, atol=atol, rtol=0):
        raise ParameterError("distance matrix is not symmetric")
    if np.any(np.abs(np.diag(D)) > atol):
        raise ParameterError("distance matrix must have a zero diagonal")
    return D
