"""Higher-order descriptors and distribution metrics for 2D hand poses.

The package models a hand pose as a 21-node graph, provides four
descriptor functions over it (raw coordinates, wrist/bone geometry,
all-pairs distances, Laplacian spectrum), and evaluates populations of
poses by Frechet distance between descriptor statistics or by energy-form
MMD. Descriptor reconstruction losses with analytic gradients support
training-time use.
"""

from .descriptors import (
    DESCRIPTOR_DIMS,
    DESCRIPTOR_NAMES,
    DescriptorJacobian,
    DescriptorVector,
    denset_desc,
    descriptor_jacobian,
    descriptor_lookup,
    geometric_desc,
    identity_desc,
    spectral_desc,
)
from .errors import (
    DescriptorMismatch,
    DimensionMismatch,
    EigenFailure,
    EmptyPopulation,
    GraspMetricsError,
    InvalidParameter,
    NonFiniteCoordinate,
    NotPsd,
    NumericalError,
    NumericalFailure,
    ParseError,
    UnknownDescriptor,
    UnsupportedDescriptor,
    UsageError,
    ValidationError,
    WrongPointCount,
)
from .linalg import frechet_trace_term, psd_sqrt, sym_eig
from .metrics import (
    MetricReport,
    PopulationStats,
    descriptor_matrix,
    fd_gradient_oracle,
    ffid,
    ffid_populations,
    load_stats,
    mmd,
    population_stats,
    pose_loss,
    pose_loss_gradient,
    save_stats,
)
from .poses import (
    HandPose,
    PosePopulation,
    SkeletonTopology,
    canonical_topology,
    load_poses,
    save_poses,
    synthesize_population,
    transform_pose,
    validate_pose,
)

__version__ = "0.1.0"

__all__ = [
    "DESCRIPTOR_DIMS",
    "DESCRIPTOR_NAMES",
    "DescriptorJacobian",
    "DescriptorMismatch",
    "DescriptorVector",
    "DimensionMismatch",
    "EigenFailure",
    "EmptyPopulation",
    "GraspMetricsError",
    "HandPose",
    "InvalidParameter",
    "MetricReport",
    "NonFiniteCoordinate",
    "NotPsd",
    "NumericalError",
    "NumericalFailure",
    "ParseError",
    "PopulationStats",
    "PosePopulation",
    "SkeletonTopology",
    "UnknownDescriptor",
    "UnsupportedDescriptor",
    "UsageError",
    "ValidationError",
    "WrongPointCount",
    "canonical_topology",
    "denset_desc",
    "descriptor_jacobian",
    "descriptor_lookup",
    "descriptor_matrix",
    "fd_gradient_oracle",
    "ffid",
    "ffid_populations",
    "frechet_trace_term",
    "geometric_desc",
    "identity_desc",
    "load_poses",
    "load_stats",
    "mmd",
    "population_stats",
    "pose_loss",
    "pose_loss_gradient",
    "psd_sqrt",
    "save_poses",
    "save_stats",
    "spectral_desc",
    "sym_eig",
    "synthesize_population",
    "transform_pose",
    "validate_pose",
]
