"""Robust estimation by graduated non-convexity over global weighted solvers."""

from .costs import CostKind, RobustCostSpec
from .errors import (
    DegenerateConfiguration,
    DegenerateScale,
    GncError,
    NoConsensus,
    OptimizationFailed,
    ParseError,
    UnsupportedFormat,
)
from .gnc import GncConfig, GncResult, WeightedProblem, run_gnc
from .ransac import RansacConfig, RansacResult, ransac_registration, ransac_shape_alignment
from .registration import RegistrationProblem, RigidPose, registration_residuals, weighted_horn
from .shape_alignment import (
    QghForm,
    ShapeAlignmentProblem,
    WeakPerspectivePose,
    shape_residuals,
    solve_shape_alignment,
)

__all__ = [
    "CostKind",
    "DegenerateConfiguration",
    "DegenerateScale",
    "GncConfig",
    "GncError",
    "GncResult",
    "NoConsensus",
    "OptimizationFailed",
    "ParseError",
    "QghForm",
    "RansacConfig",
    "RansacResult",
    "RegistrationProblem",
    "RigidPose",
    "RobustCostSpec",
    "ShapeAlignmentProblem",
    "UnsupportedFormat",
    "WeakPerspectivePose",
    "WeightedProblem",
    "ransac_registration",
    "ransac_shape_alignment",
    "registration_residuals",
    "run_gnc",
    "shape_residuals",
    "solve_shape_alignment",
    "weighted_horn",
]
