"""Weighted shape alignment under weak perspective projection.

Given 2D features ``z_i`` and 3D model points ``B_i`` the weighted problem

    min_{s > 0, R in SO(3), t in R^2}  sum_i w_i ||z_i - s Pi R B_i - t||^2

(``Pi`` keeps the first two rows of ``R B``) is solved in three steps:

1. the translation is eliminated in closed form by weighted centering;
2. with the non-unit quaternion ``v = sqrt(s) q`` the centered objective is
   a quartic ``f(v) = m^T Q m - 2 g^T m + h`` in the ten degree-2
   monomials ``m = [v]_2``, with no constraint on ``v``;
3. ``f`` is minimized globally by multi-start damped Newton and the pose is
   read back off the minimizer.

Quaternions are scalar-last, ``(x, y, z, w)``. Matrices are vectorized
column-major, which is the convention the monomial-to-rotation map ``A``
below is written in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateConfiguration, DegenerateScale, OptimizationFailed
from .gnc import WeightedProblem

PI = np.eye(3)[:2]

# index pairs (a, b) of the monomials v_a v_b, in order
MONOMIAL_PAIRS = ((0, 0), (1, 1), (2, 2), (3, 3), (0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

# vec(R) = A [q]_2, column-major vec
A = np.array([
    [1, -1, -1, 1, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 2, 0, 0, 0, 0, 2],
    [0, 0, 0, 0, 0, 2, 0, 0, -2, 0],
    [0, 0, 0, 0, 2, 0, 0, 0, 0, -2],
    [-1, 1, -1, 1, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 2, 2, 0, 0],
    [0, 0, 0, 0, 0, 2, 0, 0, 2, 0],
    [0, 0, 0, 0, 0, 0, -2, 2, 0, 0],
    [-1, -1, 1, 1, 0, 0, 0, 0, 0, 0],
], dtype=float)


def _monomial_hessians():
    # m_k(v) = 0.5 v^T T_k v, so dm_k/dv = T_k v and the Hessian of m_k is T_k
    T = np.zeros((10, 4, 4))
    for k, (a, b) in enumerate(MONOMIAL_PAIRS):
        T[k, a, b] += 1.0
        T[k, b, a] += 1.0
    return T


MONOMIAL_HESSIANS = _monomial_hessians()

# f(v) = f(-v), so negated axes would only duplicate the four axis starts;
# the remaining slots go to sign-mixed directions
_MIXED_STARTS = np.array([
    [1, 1, 0, 0],
    [1, 0, 1, 0],
    [0, 1, 1, 0],
    [1, -1, 0, 0],
    [0, 0, 1, -1],
    [1, 1, 1, 1],
    [1, -1, 1, 1],
    [-1, 1, 1, 1],
], dtype=float)
DETERMINISTIC_STARTS = np.vstack([
    np.eye(4),
    _MIXED_STARTS / np.linalg.norm(_MIXED_STARTS, axis=1, keepdims=True),
])


@dataclass(frozen=True)
class WeakPerspectivePose:
    """Scale ``s``, rotation ``R`` and image translation ``t`` of a model."""

    s: float
    R: np.ndarray
    t: np.ndarray

    def project(self, points):
        return self.s * (np.asarray(points, dtype=float) @ self.R.T)[:, :2] + self.t


@dataclass(frozen=True)
class QghForm:
    """Coefficients of ``f(v) = [v]_2^T Q [v]_2 - 2 g^T [v]_2 + h``.

    ``z_bar`` and ``B_bar`` are the weighted centroids removed before the
    form was built; ``model_spread`` is ``sum_i ||Pi B~_i||^2`` and feeds the
    initial scale guess.
    """

    Q: np.ndarray
    g: np.ndarray
    h: float
    z_bar: np.ndarray = field(default_factory=lambda: np.zeros(2))
    B_bar: np.ndarray = field(default_factory=lambda: np.zeros(3))
    model_spread: float = 0.0

    def initial_scale(self):
        """Scale that matches the spread of the image to the projected model."""
        if self.model_spread > 0 and self.h > 0:
            return float(np.sqrt(self.h / self.model_spread))
        return 1.0


def marginalize_translation(z, B, weights=None):
    """Remove weighted centroids and fold ``sqrt(w_i)`` into each point.

    Returns:
        ``(z_tilde, B_tilde, z_bar, B_bar)`` with
        ``z_tilde_i = sqrt(w_i) (z_i - z_bar)`` and likewise for ``B``.

    Raises:
        DegenerateConfiguration: if the weights sum to zero.
    """
    z = np.asarray(z, dtype=float)
    B = np.asarray(B, dtype=float)
    w = np.ones(len(z)) if weights is None else np.asarray(weights, dtype=float)
    total = w.sum()
    if not total > 0:
        raise DegenerateConfiguration("total weight is zero")
    z_bar = w @ z / total
    B_bar = w @ B / total
    sw = np.sqrt(w)[:, None]
    return sw * (z - z_bar), sw * (B - B_bar), z_bar, B_bar


def quat_monomials(v):
    """Degree-2 monomials ``(v1^2, v2^2, v3^2, v4^2, v1v2, v1v3, v1v4, v2v3, v2v4, v3v4)``.

    Accepts a single 4-vector or a stack of shape (K, 4).
    """
    v = np.asarray(v, dtype=float)
    a = [p[0] for p in MONOMIAL_PAIRS]
    b = [p[1] for p in MONOMIAL_PAIRS]
    return v[..., a] * v[..., b]


def rotation_from_quat(q, atol=1e-9):
    """Rotation matrix of a unit quaternion ``(x, y, z, w)`` via ``mat(A [q]_2)``."""
    q = np.asarray(q, dtype=float)
    if abs(np.linalg.norm(q) - 1.0) > atol:
        raise ValueError("quaternion must have unit norm")
    return (A @ quat_monomials(q)).reshape(3, 3, order="F")


def quat_from_rotation(R):
    """Unit quaternion ``(x, y, z, w)`` with ``w >= 0`` for a rotation matrix."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    if tr > 0:
        S = 2.0 * np.sqrt(tr + 1.0)
        q = [(R[2, 1] - R[1, 2]) / S, (R[0, 2] - R[2, 0]) / S, (R[1, 0] - R[0, 1]) / S, 0.25 * S]
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        S = 2.0 * np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        q = [0.25 * S, (R[0, 1] + R[1, 0]) / S, (R[0, 2] + R[2, 0]) / S, (R[2, 1] - R[1, 2]) / S]
    elif R[1, 1] > R[2, 2]:
        S = 2.0 * np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2])
        q = [(R[0, 1] + R[1, 0]) / S, 0.25 * S, (R[1, 2] + R[2, 1]) / S, (R[0, 2] - R[2, 0]) / S]
    else:
        S = 2.0 * np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1])
        q = [(R[0, 2] + R[2, 0]) / S, (R[1, 2] + R[2, 1]) / S, 0.25 * S, (R[1, 0] - R[0, 1]) / S]
    q = np.array(q)
    q /= np.linalg.norm(q)
    return -q if q[3] < 0 else q


def build_qgh(z_tilde, B_tilde, z_bar=None, B_bar=None) -> QghForm:
    """Assemble ``Q``, ``g``, ``h`` from centered, weight-scaled correspondences.

    ``Q = A^T (sum_i B_i B_i^T kron Pi^T Pi) A``,
    ``g = A^T sum_i vec(Pi^T z_i B_i^T)``, ``h = sum_i ||z_i||^2``.
    """
    z_t = np.asarray(z_tilde, dtype=float)
    B_t = np.asarray(B_tilde, dtype=float)
    if len(z_t) != len(B_t) or len(z_t) == 0:
        raise ValueError("need equally many (>= 1) image and model points")
    PtP = PI.T @ PI
    M = B_t.T @ B_t
    Q = A.T @ np.kron(M, PtP) @ A
    Q = 0.5 * (Q + Q.T)
    # sum_i Pi^T z_i B_i^T == Pi^T (Z^T B)
    g = A.T @ (PI.T @ (z_t.T @ B_t)).ravel(order="F")
    h = float(np.sum(z_t * z_t))
    return QghForm(
        Q=Q,
        g=g,
        h=h,
        z_bar=np.zeros(2) if z_bar is None else np.asarray(z_bar, dtype=float),
        B_bar=np.zeros(3) if B_bar is None else np.asarray(B_bar, dtype=float),
        model_spread=float(M[0, 0] + M[1, 1]),
    )


def shape_form(z, B, weights=None) -> QghForm:
    """Marginalize translation and build the quartic in one call."""
    z_t, B_t, z_bar, B_bar = marginalize_translation(z, B, weights)
    return build_qgh(z_t, B_t, z_bar, B_bar)


def objective_f(form: QghForm, v):
    """``f(v)``; ``v`` may be a single 4-vector or a stack (K, 4)."""
    m = quat_monomials(v)
    return np.einsum("...i,ij,...j->...", m, form.Q, m) - 2.0 * m @ form.g + form.h


def gradient_f(form: QghForm, v):
    """Gradient of ``f`` by the chain rule through the monomial map."""
    v = np.asarray(v, dtype=float)
    m = quat_monomials(v)
    J = np.einsum("kij,...j->...ki", MONOMIAL_HESSIANS, v)
    return 2.0 * np.einsum("...ki,...k->...i", J, m @ form.Q - form.g)


def _f_grad_hess(form, V):
    m = quat_monomials(V)
    Qm = m @ form.Q
    c = Qm - form.g
    f = np.einsum("nk,nk->n", m, Qm) - 2.0 * m @ form.g + form.h
    J = np.einsum("kij,nj->nki", MONOMIAL_HESSIANS, V)
    grad = 2.0 * np.einsum("nki,nk->ni", J, c)
    hess = 2.0 * np.einsum("nki,kl,nlj->nij", J, form.Q, J)
    hess += 2.0 * np.einsum("nk,kij->nij", c, MONOMIAL_HESSIANS)
    return f, grad, hess


def _local_descent(form, V, max_iter, grad_rtol):
    """Batched Levenberg-damped Newton from every row of ``V``."""
    V = V.copy()
    K = len(V)
    lam = np.full(K, 1e-6)
    f, grad, hess = _f_grad_hess(form, V)
    active = np.isfinite(f)
    eye = np.eye(4)
    for _ in range(max_iter):
        gnorm = np.linalg.norm(grad, axis=1)
        active &= ~(gnorm < grad_rtol * np.maximum(1.0, np.abs(f)))
        active &= lam < 1e20
        if not active.any():
            break
        idx = np.flatnonzero(active)
        scale = np.maximum(1.0, np.abs(np.diagonal(hess[idx], axis1=1, axis2=2)).max(axis=1))
        H = hess[idx] + (lam[idx] * scale)[:, None, None] * eye
        try:
            step = np.linalg.solve(H, -grad[idx][..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.stack([np.linalg.lstsq(Hk, -gk, rcond=None)[0] for Hk, gk in zip(H, grad[idx])])
        trial = V[idx] + step
        f_t, g_t, h_t = _f_grad_hess(form, trial)
        # accept ties as well so exact-zero minima still terminate
        ok = np.isfinite(f_t) & (f_t <= f[idx])
        acc = idx[ok]
        V[acc], f[acc], grad[acc], hess[acc] = trial[ok], f_t[ok], g_t[ok], h_t[ok]
        lam[acc] = np.maximum(lam[acc] * 0.1, 1e-15)
        lam[idx[~ok]] *= 10.0
        stalled = ok & (np.abs(step).max(axis=1) <= 1e-15 * np.maximum(1.0, np.abs(trial).max(axis=1)))
        active[idx[stalled]] = False
    return V, f


def start_points(form: QghForm, restarts=16, seed=0):
    """Deterministic axis/mixed starts followed by seeded random ones, all scaled."""
    rng = np.random.default_rng(seed)
    rand = rng.standard_normal((restarts, 4))
    rand /= np.linalg.norm(rand, axis=1, keepdims=True)
    # the start lies on the sphere ||v||^2 = s_hat
    return np.sqrt(form.initial_scale()) * np.vstack([DETERMINISTIC_STARTS, rand])


def minimize_f(form: QghForm, restarts=16, seed=0, max_iter=500, grad_rtol=1e-10):
    """Multi-start global minimization of the shape-alignment quartic.

    Local runs start from 12 fixed unit quaternions plus ``restarts``
    seeded random ones, each placed on the sphere of the initial scale
    guess. Each run is a damped Newton descent that stops once
    ``||grad f|| < grad_rtol * max(1, f)`` or after ``max_iter`` steps.
    The lowest objective wins; ties go to the earliest start.

    Raises:
        OptimizationFailed: if no run ends with a finite objective.
    """
    V0 = start_points(form, restarts, seed)
    V, f = _local_descent(form, V0, max_iter, grad_rtol)
    finite = np.isfinite(f)
    if not finite.any():
        raise OptimizationFailed("every start diverged")
    best = int(np.argmin(np.where(finite, f, np.inf)))
    return V[best]


def recover_pose(form: QghForm, v) -> WeakPerspectivePose:
    """Read ``(s, R, t)`` off a minimizer: ``s = ||v||^2``, ``R = R(v/||v||)``.

    Raises:
        DegenerateScale: if ``||v|| <= 1e-9``.
    """
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm <= 1e-9:
        raise DegenerateScale("quaternion-scale vector is numerically zero")
    s = float(norm**2)
    R = rotation_from_quat(v / norm)
    t = form.z_bar - s * PI @ R @ form.B_bar
    return WeakPerspectivePose(s, R, t)


def shape_residuals(z, B, pose: WeakPerspectivePose) -> np.ndarray:
    """Image-plane distances ``||z_i - s Pi R B_i - t||``."""
    return np.linalg.norm(np.asarray(z, dtype=float) - pose.project(B), axis=1)


def solve_shape_alignment(z, B, weights=None, restarts=16, seed=0) -> WeakPerspectivePose:
    """Global weighted shape alignment: marginalize, build, minimize, recover.

    Raises:
        DegenerateConfiguration: zero total weight or a model whose weighted
            projection has no spread.
    """
    form = shape_form(z, B, weights)
    if not form.model_spread > 0:
        raise DegenerateConfiguration("weighted model points have no spread")
    v = minimize_f(form, restarts=restarts, seed=seed)
    return recover_pose(form, v)


class ShapeAlignmentProblem(WeightedProblem):
    """Weak-perspective alignment of model points ``B`` to image features ``z``."""

    def __init__(self, z, B, restarts=16, seed=0):
        self.z = np.asarray(z, dtype=float)
        self.B = np.asarray(B, dtype=float)
        if self.z.ndim != 2 or self.z.shape[1] != 2 or self.B.shape != (len(self.z), 3):
            raise ValueError("z must be (N, 2) and B (N, 3)")
        self.restarts = restarts
        self.seed = seed

    @property
    def measurement_count(self):
        return len(self.z)

    def residuals(self, estimate):
        return shape_residuals(self.z, self.B, estimate)

    def solve_weighted(self, weights):
        return solve_shape_alignment(self.z, self.B, weights, self.restarts, self.seed)
