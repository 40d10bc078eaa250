"""Robust costs, their graduated surrogates and the matching outlier processes.

Every function here is vectorized: residuals, weights and squared residuals
may be scalars or numpy arrays and broadcast against each other. Scalar
inputs give numpy scalars back.

Two costs are supported, each parameterized by a noise bound ``c_bar`` (the
largest residual still considered an inlier):

* Geman-McClure (GM): the surrogate is convex for large ``mu`` and equals
  the GM cost at ``mu = 1``. GNC starts large and shrinks ``mu``.
* Truncated least squares (TLS): the surrogate is convex as ``mu -> 0`` and
  tends to the truncated quadratic as ``mu -> inf``. GNC starts small and
  grows ``mu``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class CostKind(str, enum.Enum):
    GM = "gm"
    TLS = "tls"


@dataclass(frozen=True)
class RobustCostSpec:
    """Which robust cost to use and its noise bound (residual units)."""

    kind: CostKind
    c_bar: float

    def __post_init__(self):
        object.__setattr__(self, "kind", CostKind(self.kind))
        if not self.c_bar > 0:
            raise ValueError(f"c_bar must be positive, got {self.c_bar}")


def gm_cost(r, c_bar):
    """Geman-McClure cost ``c^2 r^2 / (c^2 + r^2)``."""
    r2 = np.square(r)
    c2 = c_bar**2
    return c2 * r2 / (c2 + r2)


def tls_cost(r, c_bar):
    """Truncated quadratic ``min(r^2, c^2)``."""
    return np.minimum(np.square(r), c_bar**2)


def surrogate_gm(r, mu, c_bar):
    """GNC surrogate of the Geman-McClure cost.

    Args:
        r: residual(s).
        mu: control parameter, ``mu > 0``. ``mu = 1`` gives the GM cost.
        c_bar: noise bound.

    Returns:
        ``mu c^2 r^2 / (mu c^2 + r^2)``, bounded above by ``mu c^2``.
    """
    r2 = np.square(r)
    mc2 = mu * c_bar**2
    return mc2 * r2 / (mc2 + r2)


def surrogate_tls(r, mu, c_bar):
    """GNC surrogate of the truncated least squares cost.

    Quadratic up to ``r^2 = mu/(mu+1) c^2``, constant ``c^2`` from
    ``r^2 = (mu+1)/mu c^2`` on, and a concave bridge
    ``2 c |r| sqrt(mu(mu+1)) - mu (c^2 + r^2)`` in between. The three
    pieces join continuously.
    """
    r = np.asarray(r, dtype=float)
    r2 = np.square(r)
    c2 = c_bar**2
    lo = mu / (mu + 1.0) * c2
    hi = (mu + 1.0) / mu * c2
    middle = 2.0 * c_bar * np.abs(r) * np.sqrt(mu * (mu + 1.0)) - mu * (c2 + r2)
    out = np.where(r2 <= lo, r2, np.where(r2 >= hi, c2, middle))
    return out[()] if out.ndim == 0 else out


def _check_weights(w, closed_at_zero):
    w = np.asarray(w, dtype=float)
    if closed_at_zero:
        bad = (w < 0) | (w > 1)
    else:
        bad = (w <= 0) | (w > 1)
    if np.any(bad | ~np.isfinite(w)):
        interval = "[0, 1]" if closed_at_zero else "(0, 1]"
        raise ValueError(f"weights must lie in {interval}")
    return w


def penalty_gm(w, mu, c_bar):
    """Outlier process ``mu c^2 (sqrt(w) - 1)^2`` paired with the GM surrogate.

    Raises:
        ValueError: if any weight is outside ``(0, 1]``.
    """
    w = _check_weights(w, closed_at_zero=False)
    out = mu * c_bar**2 * np.square(np.sqrt(w) - 1.0)
    return out[()] if out.ndim == 0 else out


def penalty_tls(w, mu, c_bar):
    """Outlier process ``mu (1 - w) / (mu + w) c^2`` paired with the TLS surrogate.

    Raises:
        ValueError: if any weight is outside ``[0, 1]``.
    """
    w = _check_weights(w, closed_at_zero=True)
    out = mu * (1.0 - w) / (mu + w) * c_bar**2
    return out[()] if out.ndim == 0 else out


def weight_update_gm(r_hat_sq, mu, c_bar):
    """Closed-form minimizer over ``w`` of ``w r^2 + penalty_gm(w)``."""
    mc2 = mu * c_bar**2
    return np.square(mc2 / (np.asarray(r_hat_sq, dtype=float) + mc2))[()]


def weight_update_tls(r_hat_sq, mu, c_bar):
    """Closed-form minimizer over ``w in [0, 1]`` of ``w r^2 + penalty_tls(w)``.

    Weight 1 below ``mu/(mu+1) c^2``, 0 above ``(mu+1)/mu c^2`` and
    ``c/r sqrt(mu(mu+1)) - mu`` in between.
    """
    r2 = np.asarray(r_hat_sq, dtype=float)
    c2 = c_bar**2
    lo = mu / (mu + 1.0) * c2
    hi = (mu + 1.0) / mu * c2
    with np.errstate(divide="ignore"):
        middle = c_bar / np.sqrt(r2) * np.sqrt(mu * (mu + 1.0)) - mu
    # clip guards rounding right at the breakpoints
    out = np.where(r2 <= lo, 1.0, np.where(r2 >= hi, 0.0, np.clip(middle, 0.0, 1.0)))
    return out[()]


def surrogate(kind, r, mu, c_bar):
    return surrogate_gm(r, mu, c_bar) if CostKind(kind) is CostKind.GM else surrogate_tls(r, mu, c_bar)


def penalty(kind, w, mu, c_bar):
    return penalty_gm(w, mu, c_bar) if CostKind(kind) is CostKind.GM else penalty_tls(w, mu, c_bar)


def weight_update(kind, r_hat_sq, mu, c_bar):
    if CostKind(kind) is CostKind.GM:
        return weight_update_gm(r_hat_sq, mu, c_bar)
    return weight_update_tls(r_hat_sq, mu, c_bar)


def mu_init(kind, r_max_sq, c_bar):
    """Initial control parameter from the largest first-pass squared residual.

    GM starts at ``2 r_max^2 / c^2`` and TLS at ``c^2 / (2 r_max^2 - c^2)``.
    Both formulas break down when ``2 r_max^2 <= c^2``: every residual is
    already inside the inlier band, so there is nothing to graduate.

    Returns:
        The initial ``mu``, or ``None`` when all measurements are inliers
        and the caller should stop with unit weights.
    """
    kind = CostKind(kind)
    c2 = c_bar**2
    if kind is CostKind.GM:
        mu = 2.0 * r_max_sq / c2
        return float(mu) if mu > 1.0 else None
    denom = 2.0 * r_max_sq - c2
    if denom <= 0:
        return None
    return float(c2 / denom)


def mu_step(kind, mu, factor=1.4):
    """One step of the schedule: GM divides ``mu`` by ``factor``, TLS multiplies."""
    if not factor > 1:
        raise ValueError("factor must exceed 1")
    return mu / factor if CostKind(kind) is CostKind.GM else mu * factor
