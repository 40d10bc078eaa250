"""RANSAC baselines with consensus-set refinement."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .errors import GncError, NoConsensus
from .registration import registration_residuals, weighted_horn
from .shape_alignment import shape_residuals, solve_shape_alignment


@dataclass(frozen=True)
class RansacConfig:
    inlier_threshold: float
    max_iterations: int = 1000
    confidence: float = 0.99
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.confidence < 1:
            raise ValueError("confidence must lie in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not self.inlier_threshold > 0:
            raise ValueError("inlier_threshold must be positive")


@dataclass(frozen=True)
class RansacResult:
    estimate: Any
    inlier_mask: np.ndarray
    iterations_used: int

    @property
    def consensus_size(self) -> int:
        return int(self.inlier_mask.sum())


def adaptive_iterations(inlier_ratio, sample_size, confidence):
    """Samples needed to draw one all-inlier sample with the given confidence."""
    p_good = inlier_ratio**sample_size
    if p_good <= 0:
        return math.inf
    if p_good >= 1:
        return 1
    return math.ceil(math.log(1.0 - confidence) / math.log(1.0 - p_good))


def ransac(
    n: int,
    sample_size: int,
    fit: Callable[[np.ndarray], Any],
    residuals: Callable[[Any], np.ndarray],
    config: RansacConfig,
) -> RansacResult:
    """Generic hypothesize-and-verify loop.

    ``fit(indices)`` returns a model for the given measurements (or raises a
    ``GncError`` for degenerate samples, which are skipped). The best
    consensus seen is refit on all its members; the refit replaces the
    sample model only if its own consensus is at least as large.

    Raises:
        NoConsensus: if the best consensus is smaller than ``sample_size``.
    """
    if n < sample_size:
        raise ValueError(f"need at least {sample_size} measurements, got {n}")
    rng = np.random.default_rng(config.seed)
    best_model, best_mask, best_count = None, None, 0
    iterations = 0
    while iterations < config.max_iterations:
        iterations += 1
        sample = rng.choice(n, size=sample_size, replace=False)
        try:
            model = fit(sample)
        except GncError:
            continue
        mask = residuals(model) < config.inlier_threshold
        count = int(mask.sum())
        if count > best_count:
            best_model, best_mask, best_count = model, mask, count
        if best_count > 0:
            needed = adaptive_iterations(best_count / n, sample_size, config.confidence)
            if iterations >= needed:
                break

    if best_count < sample_size:
        raise NoConsensus(f"best consensus has {best_count} members, need {sample_size}")

    try:
        refined = fit(np.flatnonzero(best_mask))
    except GncError:
        refined = None
    if refined is not None:
        refined_mask = residuals(refined) < config.inlier_threshold
        if refined_mask.sum() >= best_count:
            best_model, best_mask = refined, refined_mask
    return RansacResult(best_model, best_mask, iterations)


def ransac_registration(src, dst, config: RansacConfig) -> RansacResult:
    """RANSAC over Horn's 3-point solver, refined on the consensus set."""
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    return ransac(
        len(src),
        3,
        lambda idx: weighted_horn(src[idx], dst[idx]),
        lambda pose: registration_residuals(src, dst, pose),
        config,
    )


def ransac_shape_alignment(z, B, config: RansacConfig, restarts=16) -> RansacResult:
    """RANSAC over the global shape-alignment solver on 4-point samples."""
    z = np.asarray(z, dtype=float)
    B = np.asarray(B, dtype=float)
    return ransac(
        len(z),
        4,
        lambda idx: solve_shape_alignment(z[idx], B[idx], restarts=restarts, seed=config.seed),
        lambda pose: shape_residuals(z, B, pose),
        config,
    )
