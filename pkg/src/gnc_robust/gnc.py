"""Graduated non-convexity over any weighted least-squares solver."""

from __future__ import annotations

import abc
import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .costs import CostKind, RobustCostSpec, mu_init, mu_step, weight_update

logger = logging.getLogger(__name__)

INLIER_WEIGHT = 0.5


class WeightedProblem(abc.ABC):
    """A robust estimation problem GNC can drive.

    Implementations provide residuals at an estimate and a *global* solver
    for the weighted least-squares problem ``min_x sum_i w_i r_i(x)^2``.
    With all-ones weights the solver must return the ordinary least-squares
    estimate.
    """

    @property
    @abc.abstractmethod
    def measurement_count(self) -> int: ...

    @abc.abstractmethod
    def residuals(self, estimate) -> np.ndarray:
        """Nonnegative residual of every measurement at ``estimate``."""

    @abc.abstractmethod
    def solve_weighted(self, weights: np.ndarray):
        """Global minimizer of the weighted squared residuals."""


@dataclass(frozen=True)
class GncConfig:
    cost: RobustCostSpec
    mu_factor: float = 1.4
    max_outer_iterations: int = 1000
    cost_convergence_tol: float = 1e-6
    fixed_point_tol: float = 1e-6
    record_trace: bool = False

    def __post_init__(self):
        if not self.mu_factor > 1:
            raise ValueError("mu_factor must exceed 1")
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be positive")
        if not (self.cost_convergence_tol > 0 and self.fixed_point_tol > 0):
            raise ValueError("tolerances must be positive")

    @classmethod
    def gm(cls, c_bar, **kwargs):
        return cls(RobustCostSpec(CostKind.GM, c_bar), **kwargs)

    @classmethod
    def tls(cls, c_bar, **kwargs):
        return cls(RobustCostSpec(CostKind.TLS, c_bar), **kwargs)


@dataclass(frozen=True)
class TraceEntry:
    mu: float
    weighted_residual_sum: float
    weights: np.ndarray


@dataclass(frozen=True)
class GncResult:
    estimate: Any
    weights: np.ndarray
    outer_iterations: int
    converged: bool
    trace: list[TraceEntry] = field(default_factory=list)

    @property
    def inlier_mask(self) -> np.ndarray:
        return self.weights >= INLIER_WEIGHT


def run_gnc(problem: WeightedProblem, config: GncConfig) -> GncResult:
    """Minimize a robust cost by graduated non-convexity.

    The first variable update uses unit weights; its largest squared
    residual sets the starting ``mu``. Each outer iteration then performs
    one weighted solve, one closed-form weight update and one ``mu`` step.

    Stopping rules: GM stops once ``mu`` has fallen below 1; TLS stops when
    the weighted residual sum ``sum_i w_i r_i^2`` settles (relative to
    ``max(1, previous)``). Either cost also stops when no weight moves by
    more than ``fixed_point_tol``. Hitting ``max_outer_iterations`` returns
    with ``converged=False``.

    Solver exceptions from ``problem.solve_weighted`` propagate.
    """
    n = problem.measurement_count
    if n < 1:
        raise ValueError("problem has no measurements")
    kind = config.cost.kind
    c_bar = config.cost.c_bar

    weights = np.ones(n)
    estimate = problem.solve_weighted(weights)
    r2 = np.square(problem.residuals(estimate))
    mu = mu_init(kind, float(np.max(r2)), c_bar)
    if mu is None:
        logger.debug("all residuals inside the inlier band; skipping GNC")
        return GncResult(estimate, weights, 0, True)

    trace = []
    prev_cost = None
    converged = False
    iterations = 0
    while iterations < config.max_outer_iterations:
        iterations += 1
        if iterations > 1:
            estimate = problem.solve_weighted(weights)
            r2 = np.square(problem.residuals(estimate))
        new_weights = np.asarray(weight_update(kind, r2, mu, c_bar), dtype=float)
        cost = float(np.dot(new_weights, r2))
        if config.record_trace:
            trace.append(TraceEntry(mu, cost, new_weights.copy()))

        weight_change = float(np.max(np.abs(new_weights - weights)))
        weights = new_weights
        if weight_change < config.fixed_point_tol:
            converged = True
            break
        if kind is CostKind.TLS and prev_cost is not None:
            if abs(cost - prev_cost) < config.cost_convergence_tol * max(1.0, prev_cost):
                converged = True
                break
        prev_cost = cost
        mu = mu_step(kind, mu, config.mu_factor)
        if kind is CostKind.GM and mu < 1.0:
            converged = True
            break

    logger.debug("GNC-%s stopped after %d outer iterations (converged=%s)",
                 kind.value.upper(), iterations, converged)
    return GncResult(estimate, weights, iterations, converged, trace)
