"""Seeded benchmark instances and error metrics.

All randomness comes from ``numpy.random.default_rng`` (PCG64) seeded with
the caller's integer seed, so an instance is a pure function of its spec.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ply import load_ply_points
from .registration import RigidPose
from .shape_alignment import WeakPerspectivePose, rotation_from_quat


@dataclass(frozen=True)
class RegistrationInstanceSpec:
    n: int = 100
    sigma: float = 0.01
    outlier_rate: float = 0.0
    seed: int = 0
    ply_path: Optional[str] = None  # None: random points in the unit cube

    def __post_init__(self):
        if not 0 <= self.outlier_rate < 1:
            raise ValueError("outlier_rate must lie in [0, 1)")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.n < 1:
            raise ValueError("n must be positive")


@dataclass(frozen=True)
class ShapeInstanceSpec:
    n: int = 50
    sigma: float = 0.01
    outlier_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.outlier_rate < 1:
            raise ValueError("outlier_rate must lie in [0, 1)")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.n < 2:
            raise ValueError("n must be at least 2")


@dataclass(frozen=True)
class RegistrationInstance:
    src: np.ndarray
    dst: np.ndarray
    ground_truth: RigidPose
    outlier_mask: np.ndarray


@dataclass(frozen=True)
class ShapeInstance:
    z: np.ndarray
    B: np.ndarray
    ground_truth: WeakPerspectivePose
    outlier_mask: np.ndarray


@dataclass(frozen=True)
class ErrorMetrics:
    rotation_error_deg: float
    translation_error: float
    scale_error: Optional[float] = None


def random_rotation(rng) -> np.ndarray:
    """Uniform rotation from a normalized Gaussian quaternion."""
    q = rng.standard_normal(4)
    return rotation_from_quat(q / np.linalg.norm(q))


def outlier_count(n, rate):
    return int(round(rate * n))


def scale_to_unit_cube(points) -> np.ndarray:
    """Shift to the origin and scale so the largest bounding-box side is 1."""
    points = np.asarray(points, dtype=float)
    lo = points.min(axis=0)
    extent = (points.max(axis=0) - lo).max()
    if not extent > 0:
        raise ValueError("point cloud has zero extent")
    return (points - lo) / extent


def generate_registration(spec: RegistrationInstanceSpec) -> RegistrationInstance:
    """Correspondences ``a_i -> R a_i + t + noise`` with a fraction replaced by outliers.

    Source points are either uniform in the unit cube or ``spec.n`` points
    drawn without replacement from a PLY cloud; both are rescaled to the
    unit cube. Outlier targets are uniform over the bounding box of the
    transformed clean cloud.

    Raises:
        FileNotFoundError: if ``spec.ply_path`` is missing.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.ply_path is None:
        cloud = rng.uniform(0.0, 1.0, size=(spec.n, 3))
    else:
        full = scale_to_unit_cube(load_ply_points(spec.ply_path))
        if len(full) < spec.n:
            raise ValueError(f"PLY has {len(full)} points, need {spec.n}")
        cloud = full[rng.choice(len(full), size=spec.n, replace=False)]
    src = scale_to_unit_cube(cloud)

    R = random_rotation(rng)
    t = rng.uniform(-1.0, 1.0, size=3)
    clean = src @ R.T + t
    dst = clean + spec.sigma * rng.standard_normal(clean.shape)

    n_out = outlier_count(spec.n, spec.outlier_rate)
    idx = rng.choice(spec.n, size=n_out, replace=False)
    lo, hi = clean.min(axis=0), clean.max(axis=0)
    dst[idx] = rng.uniform(lo, hi, size=(n_out, 3))
    mask = np.zeros(spec.n, dtype=bool)
    mask[idx] = True
    return RegistrationInstance(src, dst, RigidPose(R, t), mask)


def generate_shape_alignment(spec: ShapeInstanceSpec) -> ShapeInstance:
    """Weak-perspective image of a random model with rewired outlier correspondences.

    Model points are uniform in ``[-1, 1]^3``; ``s ~ U[0.5, 2]``, ``R``
    uniform and ``t ~ U[-1, 1]^2``. An outlier feature is the (noisy)
    projection of a different, randomly chosen model point.
    """
    rng = np.random.default_rng(spec.seed)
    B = rng.uniform(-1.0, 1.0, size=(spec.n, 3))
    s = float(rng.uniform(0.5, 2.0))
    R = random_rotation(rng)
    t = rng.uniform(-1.0, 1.0, size=2)
    pose = WeakPerspectivePose(s, R, t)
    projected = pose.project(B)
    z = projected + spec.sigma * rng.standard_normal(projected.shape)

    n_out = outlier_count(spec.n, spec.outlier_rate)
    idx = rng.choice(spec.n, size=n_out, replace=False)
    # shift by 1..n-1 so the partner is never the point itself
    partners = (idx + rng.integers(1, spec.n, size=n_out)) % spec.n
    z[idx] = projected[partners] + spec.sigma * rng.standard_normal((n_out, 2))
    mask = np.zeros(spec.n, dtype=bool)
    mask[idx] = True
    return ShapeInstance(z, B, pose, mask)


def rotation_error_deg(R_est, R_gt) -> float:
    """Geodesic angle between two rotations, in degrees."""
    c = (np.trace(np.asarray(R_gt).T @ np.asarray(R_est)) - 1.0) / 2.0
    return float(abs(np.degrees(np.arccos(np.clip(c, -1.0, 1.0)))))


def registration_errors(est: RigidPose, gt: RigidPose) -> ErrorMetrics:
    return ErrorMetrics(
        rotation_error_deg(est.R, gt.R),
        float(np.linalg.norm(est.t - gt.t)),
    )


def shape_errors(est: WeakPerspectivePose, gt: WeakPerspectivePose) -> ErrorMetrics:
    return ErrorMetrics(
        rotation_error_deg(est.R, gt.R),
        float(np.linalg.norm(est.t - gt.t)),
        abs(est.s - gt.s) / gt.s,
    )
