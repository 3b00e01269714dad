"""Persistence images: stable vectors from persistence diagrams."""

from .core import (
    BirthPersistencePoint,
    DiagramPoint,
    ImageSpec,
    ParameterError,
    PersistenceDiagram,
    PersistenceImage,
    PointCloud,
    ScalarGrid,
    StructuralError,
    birth_persistence_to_diagram,
    transform_to_birth_persistence,
)
from .image import (
    ConstantWeight,
    PersistenceImager,
    PiecewiseLinearWeight,
    TabulatedWeight,
    compute_image,
    compute_image_1d,
    concatenate_images,
    shared_image_bounds,
    surface_value,
    weight_wb,
)
from .filtration import (
    CubicalPersistence,
    FilteredComplex,
    RipsPersistence,
    cubical_persistence,
    cubical_sublevel,
    persistence,
    rips_complex,
    rips_persistence,
)
from .metrics import (
    DIAGONAL,
    DistanceMatrix,
    Matching,
    bottleneck,
    build_distance_matrix,
    vector_distance,
    wasserstein,
)
from .stability import (
    StabilityReport,
    check_erf_lemma,
    check_gaussian_stability,
    check_image_stability_general,
    check_surface_stability_general,
    verify_stability,
)
from .datasets import SHAPE_CLASSES, generate_ltm, generate_shapes, ltm_orbit, sample_shape
from .ml import Clustering, KMedoids, clustering_accuracy, kmedoids, parameter_sweep

__version__ = "0.1.0"
