"""Weighted point-to-point registration and its GNC problem wrapper."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfiguration
from .gnc import WeightedProblem

DEGENERACY_RTOL = 1e-12


@dataclass(frozen=True)
class RigidPose:
    """Rotation ``R`` (3x3, in SO(3)) and translation ``t`` mapping source to target."""

    R: np.ndarray
    t: np.ndarray

    def apply(self, points):
        return np.asarray(points) @ self.R.T + self.t

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))


def _as_points(points, dim, name):
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(f"{name} must have shape (N, {dim}), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite coordinates")
    return arr


def weighted_horn(src, dst, weights=None) -> RigidPose:
    """Closed-form minimizer of ``sum_i w_i ||dst_i - R src_i - t||^2``.

    Weighted centroids are removed, the weighted cross-covariance
    ``H = sum_i w_i (a_i - a_w)(b_i - b_w)^T`` is decomposed as ``U S V^T``
    and ``R = V diag(1, 1, det(V U^T)) U^T``. The determinant correction
    keeps ``R`` a proper rotation for any weight pattern.

    Args:
        src: (N, 3) source points ``a_i``.
        dst: (N, 3) target points ``b_i``.
        weights: (N,) nonnegative weights, default all ones. Only relative
            magnitudes matter.

    Raises:
        DegenerateConfiguration: zero total weight, or the weighted points
            are collinear or coincident so the rotation is not identified.
    """
    a = _as_points(src, 3, "src")
    b = _as_points(dst, 3, "dst")
    if a.shape != b.shape:
        raise ValueError("src and dst must have the same shape")
    w = np.ones(len(a)) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (len(a),):
        raise ValueError("weights must have one entry per correspondence")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")

    total = w.sum()
    if not total > 0:
        raise DegenerateConfiguration("total weight is zero")
    a_bar = w @ a / total
    b_bar = w @ b / total
    H = (a - a_bar).T @ ((b - b_bar) * w[:, None])
    U, S, Vt = np.linalg.svd(H)
    if S[0] == 0 or S[1] < DEGENERACY_RTOL * S[0]:
        raise DegenerateConfiguration("weighted points are collinear or coincident")
    V = Vt.T
    d = np.sign(np.linalg.det(V @ U.T)) or 1.0
    R = V @ np.diag([1.0, 1.0, d]) @ U.T
    return RigidPose(R, b_bar - R @ a_bar)


def registration_residuals(src, dst, pose: RigidPose) -> np.ndarray:
    """Euclidean distances ``||b_i - R a_i - t||``."""
    a = np.asarray(src, dtype=float)
    b = np.asarray(dst, dtype=float)
    return np.linalg.norm(b - pose.apply(a), axis=1)


def weighted_objective(src, dst, weights, pose: RigidPose) -> float:
    r = registration_residuals(src, dst, pose)
    return float(np.dot(weights, r * r))


class RegistrationProblem(WeightedProblem):
    """Point-cloud registration from putative correspondences ``src[i] <-> dst[i]``."""

    def __init__(self, src, dst):
        self.src = _as_points(src, 3, "src")
        self.dst = _as_points(dst, 3, "dst")
        if self.src.shape != self.dst.shape:
            raise ValueError("src and dst must have the same shape")

    @property
    def measurement_count(self):
        return len(self.src)

    def residuals(self, estimate):
        return registration_residuals(self.src, self.dst, estimate)

    def solve_weighted(self, weights):
        return weighted_horn(self.src, self.dst, weights)
