"""Weight estimation: derivative estimation, regression targets, batch and
recursive least squares.

The batch path builds one regression row per demonstration sample (shared
with playback through :func:`dmpkit.basis.basis_row`) and solves a lightly
ridge-regularized normal system per output dimension.  The recursive path
implements two textbook update schemes on explicit state values: a full
covariance matrix over the kernel bank, and an independent scalar gain per
kernel for the cyclic learner.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import manifold
from .basis import ForcingModel, basis_row
from .errors import (
    DegenerateDemo,
    DimensionMismatch,
    InvalidArgument,
    RankDeficient,
)
from .trajectory import QUATERNION, REAL, ROTATION, SPD, Demonstration

_RIDGE_FACTOR = 1e-8


# ---------------------------------------------------------------------------
# derivatives of demonstrations
# ---------------------------------------------------------------------------

def estimate_derivatives(demo):
    """Fill in velocity and acceleration estimates for a demonstration.

    Real-valued demos use second-order finite differences (central inside,
    one-sided at the ends).  Geometric demos difference consecutive samples
    through the manifold logarithm, which yields tangent-space rates; their
    accelerations come from differentiating those rates numerically.
    """
    if len(demo) < 3:
        raise DegenerateDemo("need at least three samples to differentiate")
    t = demo.times
    if demo.kind == REAL:
        vel = np.gradient(demo.values, t, axis=0, edge_order=2)
        acc = np.gradient(vel, t, axis=0, edge_order=2)
        return replace(demo, vel=vel, acc=acc)
    if demo.kind == QUATERNION:
        q = align_quaternion_signs(demo.values)
        omega = np.zeros((len(demo), 3))
        for j in range(1, len(demo)):
            dq = manifold.quat_product(q[j], manifold.quat_conjugate(q[j - 1]))
            omega[j] = 2.0 * manifold.quat_log(dq) / (t[j] - t[j - 1])
        omega[0] = omega[1]
        acc = np.gradient(omega, t, axis=0, edge_order=2)
        return replace(demo, values=q, vel=omega, acc=acc)
    if demo.kind == ROTATION:
        omega = np.zeros((len(demo), 3))
        for j in range(1, len(demo)):
            omega[j] = manifold.rot_log(demo.values[j] @ demo.values[j - 1].T) / (t[j] - t[j - 1])
        omega[0] = omega[1]
        acc = np.gradient(omega, t, axis=0, edge_order=2)
        return replace(demo, vel=omega, acc=acc)
    if demo.kind == SPD:
        base = demo.values[0]
        m = base.shape[0]
        vel = np.zeros((len(demo), manifold.mandel_dim(m)))
        for j in range(1, len(demo)):
            step = manifold.spd_log(demo.values[j - 1], demo.values[j])
            moved = manifold.spd_transport(demo.values[j - 1], base, step)
            vel[j] = manifold.mandel_vec(moved) / (t[j] - t[j - 1])
        vel[0] = vel[1]
        acc = np.gradient(vel, t, axis=0, edge_order=2)
        return replace(demo, vel=vel, acc=acc)
    raise InvalidArgument(f"unknown demonstration kind {demo.kind!r}")


def align_quaternion_signs(q):
    """Flip signs sample by sample so consecutive quaternions stay close."""
    q = np.array(q, dtype=float)
    for j in range(1, q.shape[0]):
        if q[j] @ q[j - 1] < 0.0:
            q[j] = -q[j]
    return q


# ---------------------------------------------------------------------------
# regression targets
# ---------------------------------------------------------------------------

def forcing_target(demo, alpha_z, beta_z, tau, variant="classical", phases=None,
                   y0=None, goal=None):
    """Forcing values a real-valued demo demands from the point-to-point system.

    Inverts the transformation dynamics sample by sample.  ``variant``
    selects how the forcing enters the dynamics:

    * ``classical``: additive forcing.
    * ``scale``: forcing premultiplied by the goal-to-start span per
      dimension (spans below 1e-8 give a zero target for that dimension).
    * ``pastor``: forcing inside the spring term alongside a phase-faded
      start-to-goal offset; requires ``phases``.
    """
    if demo.kind != REAL:
        raise InvalidArgument("forcing_target handles real-valued demos only")
    if demo.vel is None or demo.acc is None:
        demo = estimate_derivatives(demo)
    y = demo.values
    y0 = y[0] if y0 is None else np.asarray(y0, dtype=float)
    g = y[-1] if goal is None else np.asarray(goal, dtype=float)
    sprung = beta_z * (g - y) - tau * demo.vel
    classical = tau**2 * demo.acc - alpha_z * sprung
    if variant == "classical":
        return classical
    if variant == "scale":
        span = g - y0
        out = np.zeros_like(classical)
        ok = np.abs(span) >= 1e-8
        out[:, ok] = classical[:, ok] / span[ok]
        return out
    if variant == "pastor":
        if phases is None:
            raise InvalidArgument("the pastor variant needs phase values")
        x = np.asarray(phases, dtype=float)
        if x.shape != (len(demo),):
            raise DimensionMismatch("phases must align with the demo samples")
        return ((tau**2 * demo.acc / alpha_z + tau * demo.vel) / beta_z
                - (g - y) + np.outer(x, g - y0))
    raise InvalidArgument(f"unknown variant {variant!r}")


# ---------------------------------------------------------------------------
# batch regression
# ---------------------------------------------------------------------------

def regression_matrix(layout, coords, gates):
    """Stack basis rows for a sweep of coordinates and gates."""
    coords = np.asarray(coords, dtype=float)
    gates = np.broadcast_to(np.asarray(gates, dtype=float), coords.shape)
    return np.array([basis_row(layout, s, w) for s, w in zip(coords, gates)])


def default_ridge(phi):
    """Regularization strength used by :func:`batch_fit`."""
    return _RIDGE_FACTOR * float(np.trace(phi.T @ phi)) / phi.shape[1]


def batch_fit(layout, coords, gates, targets, r=1.0, ridge=None):
    """Least-squares weights for the given regression problem.

    Solves one ridge-regularized normal system per target dimension; the
    ridge defaults to 1e-8 of the mean squared row norm, just enough to keep
    barely excited kernels from blowing up.  The returned model records the
    per-dimension RMS residual.
    """
    targets = np.asarray(targets, dtype=float)
    if targets.ndim == 1:
        targets = targets[:, None]
    phi = regression_matrix(layout, coords, gates)
    if phi.shape[0] != targets.shape[0]:
        raise DimensionMismatch("coords and targets disagree in length")
    gram = phi.T @ phi
    eps = default_ridge(phi) if ridge is None else float(ridge)
    try:
        weights = np.linalg.solve(gram + eps * np.eye(layout.n), phi.T @ targets)
    except np.linalg.LinAlgError as exc:
        raise RankDeficient("regression problem is singular") from exc
    residual = np.sqrt(np.mean((phi @ weights - targets) ** 2, axis=0))
    return ForcingModel(layout=layout, weights=weights, r=r, residual=residual)


# ---------------------------------------------------------------------------
# recursive regression
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RecursiveLearnerState:
    """Weights plus gain state for sequential least squares.

    ``p`` is either a full covariance matrix over the kernel bank (joint
    update, used with normalized regression rows) or a vector of scalar
    gains (independent per-kernel update, used with raw activations by the
    cyclic learner).  ``lam`` is the forgetting factor in (0, 1].
    """

    weights: np.ndarray
    p: np.ndarray
    lam: float = 1.0


def recursive_init(n_kernels, n_dims, lam=1.0, p0=1.0, per_kernel=False):
    """Fresh learner state with zero weights and gain ``p0`` on the diagonal."""
    if not 0.0 < lam <= 1.0:
        raise InvalidArgument("forgetting factor must lie in (0, 1]")
    if p0 <= 0.0:
        raise InvalidArgument("initial gain must be positive")
    p = np.full(n_kernels, float(p0)) if per_kernel else np.eye(n_kernels) * float(p0)
    return RecursiveLearnerState(weights=np.zeros((n_kernels, n_dims)), p=p, lam=float(lam))


def recursive_fit_step(state, row, target, gate=1.0):
    """One sequential least-squares update; returns the new state.

    In matrix mode ``row`` is the full regression row (gate already
    applied).  In per-kernel mode ``row`` holds raw kernel activations, and
    each kernel chases the target with its private prediction ``w_i * gate``
    weighted by its own activation.
    """
    row = np.asarray(row, dtype=float)
    target = np.atleast_1d(np.asarray(target, dtype=float))
    w, p, lam = state.weights, state.p, state.lam
    if row.shape != (w.shape[0],):
        raise DimensionMismatch("row length must match the kernel count")
    if target.shape != (w.shape[1],):
        raise DimensionMismatch("target length must match the weight columns")
    if p.ndim == 2:
        pr = p @ row
        p_new = (p - np.outer(pr, pr) / (lam + row @ pr)) / lam
        err = target - w.T @ row
        w_new = w + np.outer(p_new @ row, err)
        return replace(state, weights=w_new, p=p_new)
    # independent scalar gains; inactive kernels keep their state untouched
    active = row > 1e-12
    corr = np.zeros_like(p)
    corr[active] = (p[active] ** 2 * gate**2
                    / (lam / row[active] + p[active] * gate**2))
    p_new = np.where(active, (p - corr) / lam, p)
    err = target[None, :] - w * gate
    w_new = w + np.where(active, row * p_new, 0.0)[:, None] * gate * err
    return replace(state, weights=w_new, p=p_new)


def feedback_adapt_step(state, activations, u, gate=1.0):
    """Nudge per-kernel weights with an external scalar correction signal.

    Uses the per-kernel gain update; the correction ``u`` feeds the weights
    directly instead of a prediction error, so any feedback law can drive
    the adaptation.
    """
    activations = np.asarray(activations, dtype=float)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    w, p, lam = state.weights, state.p, state.lam
    if p.ndim != 1:
        raise InvalidArgument("feedback adaptation needs a per-kernel learner state")
    if activations.shape != (w.shape[0],):
        raise DimensionMismatch("activations must match the kernel count")
    if u.shape != (w.shape[1],):
        raise DimensionMismatch("feedback length must match the weight columns")
    active = activations > 1e-12
    corr = np.zeros_like(p)
    corr[active] = (p[active] ** 2 * gate**2
                    / (lam / activations[active] + p[active] * gate**2))
    p_new = np.where(active, (p - corr) / lam, p)
    w_new = w + np.where(active, activations * p_new, 0.0)[:, None] * u[None, :]
    return replace(state, weights=w_new, p=p_new)
