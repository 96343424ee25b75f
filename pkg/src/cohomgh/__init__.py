"""Structural similarity of 3D point clouds through harmonic cohomology
generators and the Gromov-Hausdorff ultrametric."""

from __future__ import annotations

__version__ = "0.1.0"

from .cluster import Clustering, ari, kmeans
from .complex import (
    Simplex,
    SimplicialComplex,
    alpha_filtration,
    build_alpha,
    build_vr,
    delaunay3d,
    upper_degree,
)
from .errors import (
    CohomGHError,
    ConfigError,
    ConsistencyError,
    ConvergenceError,
    DataError,
    DegeneracyError,
    ParseError,
    UndefinedDistanceError,
)
from .genmetric import (
    MetricSpace,
    TransportPlan,
    dist_cocycle,
    dist_l1,
    dist_wasserstein,
    generator_metric_space,
    ground_distance,
)
from .hodge import (
    GeneratorSet,
    adjacency_laplacian,
    betti,
    boundary_matrix,
    fiedler_vector,
    harmonic_generators,
    hodge_laplacian,
    spectrum,
)
from .ingest import PointCloud, TrajectorySet, jitter, load_xyz, parse_xyz, validate_cloud
from .pipeline import FeatureMatrix, RunConfig, UghMatrix, feature_matrix, run_pipeline, ugh_matrix
from .ultra import (
    Dendrogram,
    Ultrametric,
    canonical_code,
    dendrogram,
    quotient,
    subdominant_ultrametric,
    ugh,
    ugh_bruteforce,
)
