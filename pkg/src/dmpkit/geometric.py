"""Movement systems evolving on curved state spaces.

Three models share one design: the state lives on a manifold (unit
quaternions, rotation matrices, or SPD matrices), the scaled velocity lives
in a tangent space, the spring term pulls along the geodesic toward the
goal, and integration steps through the manifold exponential so every
iterate stays exactly on the manifold.

For SPD states the scaled velocity is kept as a flattened tangent vector
anchored at the starting point; tangents are parallel-transported between
that anchor and the current point on every step, which keeps the learned
weights comparable across the movement.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import manifold
from .basis import GAUSSIAN_PHASE, ForcingModel, default_layout, eval_forcing
from .errors import (
    DimensionMismatch,
    InvalidArgument,
    InvalidStep,
    StepTooLarge,
)
from .learning import batch_fit, estimate_derivatives
from .phase import CanonicalState, ExponentialPhase, make_phase, phase_done, step_phase
from .trajectory import QUATERNION, ROTATION, SPD, Demonstration, Trajectory

DEFAULT_ALPHA_Z = 25.0
DEFAULT_BETA_Z = 6.25


def _robust_quat_exp(w):
    """Quaternion exponential that splits large increments along the axis."""
    w = np.asarray(w, dtype=float)
    n = np.linalg.norm(w)
    if not np.isfinite(n):
        raise StepTooLarge("nonfinite orientation increment")
    k = int(n // (0.5 * np.pi)) + 1
    q = manifold.quat_exp(w / k)
    out = np.array([1.0, 0.0, 0.0, 0.0])
    for _ in range(k):
        out = manifold.quat_product(q, out)
    return out


# ---------------------------------------------------------------------------
# unit quaternion model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuaternionDmp:
    """Orientation movement model on unit quaternions."""

    alpha_z: float
    beta_z: float
    tau: float
    q0: np.ndarray
    goal: np.ndarray
    forcing: ForcingModel
    phase_variant: object = None

    def __post_init__(self):
        if self.tau <= 0.0:
            raise InvalidArgument("tau must be positive")
        object.__setattr__(self, "q0", manifold.quat_normalize(np.asarray(self.q0, dtype=float)))
        object.__setattr__(self, "goal", manifold.quat_normalize(np.asarray(self.goal, dtype=float)))
        if self.forcing.n_dims != 3:
            raise DimensionMismatch("orientation forcing needs three columns")
        if self.phase_variant is None:
            object.__setattr__(self, "phase_variant", ExponentialPhase())


@dataclass(frozen=True)
class QuaternionState:
    q: np.ndarray
    eta: np.ndarray
    g_current: np.ndarray
    phase: CanonicalState

    @property
    def omega(self):
        """Angular velocity in rad/s."""
        return self.eta / self.phase.tau


def quat_init_state(dmp, q0=None, goal=None, tau=None, eta0=None):
    q = dmp.q0 if q0 is None else manifold.quat_normalize(np.asarray(q0, dtype=float))
    g = dmp.goal if goal is None else manifold.quat_normalize(np.asarray(goal, dtype=float))
    eta = np.zeros(3) if eta0 is None else np.asarray(eta0, dtype=float).copy()
    ph = make_phase(dmp.phase_variant, dmp.tau if tau is None else tau)
    return QuaternionState(q=q, eta=eta, g_current=g, phase=ph)


def quat_goal_error(g, q):
    """Twice the quaternion log of the goal seen from q; the spring input."""
    return 2.0 * manifold.quat_log(
        manifold.quat_product(g, manifold.quat_conjugate(q)))


def quat_step(dmp, state, dt, stop=None, zdot_extra=None):
    """One semi-implicit step; the state quaternion stays unit by construction.

    The state representative evolves continuously and is never re-branched:
    training reads the demonstration's own signs, so flipping mid-rollout
    would swap the goal error between complementary rotations.
    """
    if dt <= 0.0 or not np.isfinite(dt):
        raise InvalidStep("dt must be positive and finite")
    tau = state.phase.tau
    q = state.q
    x = state.phase.value
    f = eval_forcing(dmp.forcing, x)
    e = quat_goal_error(state.g_current, q)
    inner = dmp.alpha_z * (dmp.beta_z * e - state.eta) + f
    if zdot_extra is not None:
        inner = inner + zdot_extra
    eta = state.eta + dt / tau * inner
    inc = _robust_quat_exp(dt * eta / (2.0 * tau))
    q_new = manifold.quat_normalize(manifold.quat_product(inc, q))
    return replace(state, q=q_new, eta=eta, phase=step_phase(state.phase, dt, stop))


def quat_goal_switch_step(state, g_new, alpha_g, dt):
    """Slide the active goal along the geodesic toward a new orientation.

    The geodesic distance to the new goal contracts by the exact first-order
    decay factor per step.
    """
    if alpha_g <= 0.0:
        raise InvalidArgument("goal gain must be positive")
    g_new = manifold.quat_normalize(np.asarray(g_new, dtype=float))
    g_cur = manifold.quat_align(state.g_current, g_new)
    move = 1.0 - np.exp(-alpha_g * dt / state.phase.tau)
    w = manifold.quat_log(manifold.quat_product(g_new, manifold.quat_conjugate(g_cur)))
    g_next = manifold.quat_product(_robust_quat_exp(move * w), g_cur)
    return replace(state, g_current=manifold.quat_normalize(g_next))


def quat_rollout(dmp, dt=0.01, duration=None, q0=None, goal=None, tau=None,
                 threshold=1e-3, goal_switch=None, stop_fn=None):
    """Integrate the orientation model and record the trajectory."""
    state = quat_init_state(dmp, q0=q0, goal=goal, tau=tau)
    times, qs, ws, xs = [0.0], [state.q.copy()], [state.omega.copy()], [state.phase.value]
    n_fixed = None if duration is None else max(1, int(round(duration / dt)))
    horizon = np.inf if n_fixed is not None else 50.0 * state.phase.tau / dt
    k = 0
    while True:
        if n_fixed is not None and k >= n_fixed:
            break
        if n_fixed is None and (phase_done(state.phase, threshold) or k >= horizon):
            break
        if goal_switch is not None:
            t_sw, g_new, alpha_g = goal_switch
            if k * dt >= t_sw:
                state = quat_goal_switch_step(state, g_new, alpha_g, dt)
        stop = stop_fn(state) if stop_fn is not None else None
        state = quat_step(dmp, state, dt, stop=stop)
        k += 1
        times.append(k * dt)
        qs.append(state.q.copy())
        ws.append(state.omega.copy())
        xs.append(state.phase.value)
    return Trajectory(times=np.array(times), values=np.array(qs),
                      velocities=np.array(ws), phases=np.array(xs),
                      kind=QUATERNION)


def train_quaternion(demo, n_kernels=20, alpha_z=DEFAULT_ALPHA_Z,
                     beta_z=DEFAULT_BETA_Z, alpha_x=None, layout=None):
    """Fit an orientation model to a quaternion demonstration."""
    if not isinstance(demo, Demonstration) or demo.kind != QUATERNION:
        raise InvalidArgument("train_quaternion expects a quaternion demonstration")
    demo = estimate_derivatives(demo)
    tau = demo.duration
    t = demo.times - demo.times[0]
    ph_var = ExponentialPhase() if alpha_x is None else ExponentialPhase(alpha_x)
    phases = np.exp(-ph_var.alpha_x * t / tau)
    goal = demo.values[-1]
    eta = tau * demo.vel
    eta_dot = tau * demo.acc
    errs = np.array([quat_goal_error(goal, q) for q in demo.values])
    targets = tau * eta_dot - alpha_z * (beta_z * errs - eta)
    if layout is None:
        layout = default_layout(GAUSSIAN_PHASE, n_kernels, alpha_x=ph_var.alpha_x)
    model = batch_fit(layout, phases, phases, targets)
    return QuaternionDmp(alpha_z=alpha_z, beta_z=beta_z, tau=tau,
                         q0=demo.values[0], goal=goal, forcing=model,
                         phase_variant=ph_var)


# ---------------------------------------------------------------------------
# rotation matrix model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RotationDmp:
    """Orientation movement model on rotation matrices."""

    alpha_z: float
    beta_z: float
    tau: float
    r0: np.ndarray
    goal: np.ndarray
    forcing: ForcingModel
    phase_variant: object = None

    def __post_init__(self):
        if self.tau <= 0.0:
            raise InvalidArgument("tau must be positive")
        object.__setattr__(self, "r0", np.asarray(self.r0, dtype=float))
        object.__setattr__(self, "goal", np.asarray(self.goal, dtype=float))
        if self.r0.shape != (3, 3) or self.goal.shape != (3, 3):
            raise DimensionMismatch("rotations must be 3x3 matrices")
        if self.forcing.n_dims != 3:
            raise DimensionMismatch("orientation forcing needs three columns")
        if self.phase_variant is None:
            object.__setattr__(self, "phase_variant", ExponentialPhase())


@dataclass(frozen=True)
class RotationState:
    r: np.ndarray
    eta: np.ndarray
    g_current: np.ndarray
    phase: CanonicalState

    @property
    def omega(self):
        return self.eta / self.phase.tau


def rot_init_state(dmp, r0=None, goal=None, tau=None, eta0=None):
    r = dmp.r0 if r0 is None else np.asarray(r0, dtype=float)
    g = dmp.goal if goal is None else np.asarray(goal, dtype=float)
    eta = np.zeros(3) if eta0 is None else np.asarray(eta0, dtype=float).copy()
    ph = make_phase(dmp.phase_variant, dmp.tau if tau is None else tau)
    return RotationState(r=r, eta=eta, g_current=g, phase=ph)


def rot_goal_error(g, r):
    """Rotation vector from r to the goal; the spring input."""
    return manifold.rot_log(g @ r.T)


def rot_step(dmp, state, dt, stop=None, zdot_extra=None):
    """One semi-implicit step; the state stays orthonormal by construction."""
    if dt <= 0.0 or not np.isfinite(dt):
        raise InvalidStep("dt must be positive and finite")
    tau = state.phase.tau
    x = state.phase.value
    f = eval_forcing(dmp.forcing, x)
    e = rot_goal_error(state.g_current, state.r)
    inner = dmp.alpha_z * (dmp.beta_z * e - state.eta) + f
    if zdot_extra is not None:
        inner = inner + zdot_extra
    eta = state.eta + dt / tau * inner
    if not np.all(np.isfinite(eta)):
        raise StepTooLarge("nonfinite orientation increment")
    r_new = manifold.rot_exp(dt * eta / tau) @ state.r
    return replace(state, r=r_new, eta=eta, phase=step_phase(state.phase, dt, stop))


def rot_goal_switch_step(state, g_new, alpha_g, dt):
    """Slide the active goal along the geodesic toward a new rotation."""
    if alpha_g <= 0.0:
        raise InvalidArgument("goal gain must be positive")
    g_new = np.asarray(g_new, dtype=float)
    move = 1.0 - np.exp(-alpha_g * dt / state.phase.tau)
    w = manifold.rot_log(g_new @ state.g_current.T)
    g_next = manifold.rot_exp(move * w) @ state.g_current
    return replace(state, g_current=g_next)


def rot_rollout(dmp, dt=0.01, duration=None, r0=None, goal=None, tau=None,
                threshold=1e-3, goal_switch=None, stop_fn=None):
    """Integrate the rotation-matrix model and record the trajectory."""
    state = rot_init_state(dmp, r0=r0, goal=goal, tau=tau)
    times, rs, ws, xs = [0.0], [state.r.copy()], [state.omega.copy()], [state.phase.value]
    n_fixed = None if duration is None else max(1, int(round(duration / dt)))
    horizon = np.inf if n_fixed is not None else 50.0 * state.phase.tau / dt
    k = 0
    while True:
        if n_fixed is not None and k >= n_fixed:
            break
        if n_fixed is None and (phase_done(state.phase, threshold) or k >= horizon):
            break
        if goal_switch is not None:
            t_sw, g_new, alpha_g = goal_switch
            if k * dt >= t_sw:
                state = rot_goal_switch_step(state, g_new, alpha_g, dt)
        stop = stop_fn(state) if stop_fn is not None else None
        state = rot_step(dmp, state, dt, stop=stop)
        k += 1
        times.append(k * dt)
        rs.append(state.r.copy())
        ws.append(state.omega.copy())
        xs.append(state.phase.value)
    return Trajectory(times=np.array(times), values=np.array(rs),
                      velocities=np.array(ws), phases=np.array(xs),
                      kind=ROTATION)


def train_rotation(demo, n_kernels=20, alpha_z=DEFAULT_ALPHA_Z,
                   beta_z=DEFAULT_BETA_Z, alpha_x=None, layout=None):
    """Fit an orientation model to a rotation-matrix demonstration."""
    if not isinstance(demo, Demonstration) or demo.kind != ROTATION:
        raise InvalidArgument("train_rotation expects a rotation demonstration")
    demo = estimate_derivatives(demo)
    tau = demo.duration
    t = demo.times - demo.times[0]
    ph_var = ExponentialPhase() if alpha_x is None else ExponentialPhase(alpha_x)
    phases = np.exp(-ph_var.alpha_x * t / tau)
    goal = demo.values[-1]
    eta = tau * demo.vel
    eta_dot = tau * demo.acc
    errs = np.array([rot_goal_error(goal, r) for r in demo.values])
    targets = tau * eta_dot - alpha_z * (beta_z * errs - eta)
    if layout is None:
        layout = default_layout(GAUSSIAN_PHASE, n_kernels, alpha_x=ph_var.alpha_x)
    model = batch_fit(layout, phases, phases, targets)
    return RotationDmp(alpha_z=alpha_z, beta_z=beta_z, tau=tau,
                       r0=demo.values[0], goal=goal, forcing=model,
                       phase_variant=ph_var)


# ---------------------------------------------------------------------------
# SPD matrix model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpdDmp:
    """Movement model on symmetric positive definite matrices.

    ``base`` anchors the tangent space that carries the scaled velocity and
    the forcing weights; it is the starting point of the demonstration.
    """

    alpha_z: float
    beta_z: float
    tau: float
    x0: np.ndarray
    goal: np.ndarray
    base: np.ndarray
    forcing: ForcingModel
    phase_variant: object = None

    def __post_init__(self):
        if self.tau <= 0.0:
            raise InvalidArgument("tau must be positive")
        object.__setattr__(self, "x0", manifold.check_spd(self.x0))
        object.__setattr__(self, "goal", manifold.check_spd(self.goal))
        object.__setattr__(self, "base", manifold.check_spd(self.base))
        m = self.x0.shape[0]
        if self.goal.shape != (m, m) or self.base.shape != (m, m):
            raise DimensionMismatch("SPD endpoints must share one size")
        if self.forcing.n_dims != manifold.mandel_dim(m):
            raise DimensionMismatch("forcing columns must match the tangent dimension")
        if self.phase_variant is None:
            object.__setattr__(self, "phase_variant", ExponentialPhase())

    @property
    def size(self):
        return self.x0.shape[0]


@dataclass(frozen=True)
class SpdState:
    x: np.ndarray
    sigma: np.ndarray
    g_current: np.ndarray
    phase: CanonicalState


def spd_init_state(dmp, x0=None, goal=None, tau=None):
    x = dmp.x0 if x0 is None else manifold.check_spd(x0)
    g = dmp.goal if goal is None else manifold.check_spd(goal)
    ph = make_phase(dmp.phase_variant, dmp.tau if tau is None else tau)
    sigma = np.zeros(manifold.mandel_dim(dmp.size))
    return SpdState(x=x, sigma=sigma, g_current=g, phase=ph)


def spd_goal_error(state, base):
    """Goal direction at the current point, carried to the anchor tangent."""
    step_tan = manifold.spd_log(state.x, state.g_current)
    return manifold.mandel_vec(manifold.spd_transport(state.x, base, step_tan))


def spd_step(dmp, state, dt, stop=None, zdot_extra=None):
    """One semi-implicit step through the SPD exponential map."""
    if dt <= 0.0 or not np.isfinite(dt):
        raise InvalidStep("dt must be positive and finite")
    tau = state.phase.tau
    x = state.phase.value
    f = eval_forcing(dmp.forcing, x)
    e = spd_goal_error(state, dmp.base)
    inner = dmp.alpha_z * (dmp.beta_z * e - state.sigma) + f
    if zdot_extra is not None:
        inner = inner + zdot_extra
    sigma = state.sigma + dt / tau * inner
    if not np.all(np.isfinite(sigma)):
        raise StepTooLarge("nonfinite tangent increment")
    delta = manifold.spd_transport(dmp.base, state.x, manifold.mandel_mat(sigma))
    x_new = manifold.spd_exp(state.x, dt / tau * delta)
    return replace(state, x=x_new, sigma=sigma, phase=step_phase(state.phase, dt, stop))


def spd_goal_switch_step(state, g_new, alpha_g, dt):
    """Slide the active goal along the geodesic toward a new SPD target."""
    if alpha_g <= 0.0:
        raise InvalidArgument("goal gain must be positive")
    g_new = manifold.check_spd(g_new)
    move = 1.0 - np.exp(-alpha_g * dt / state.phase.tau)
    return replace(state, g_current=manifold.spd_geodesic(state.g_current, g_new, move))


def spd_rollout(dmp, dt=0.01, duration=None, x0=None, goal=None, tau=None,
                threshold=1e-3, goal_switch=None, stop_fn=None):
    """Integrate the SPD model and record the trajectory."""
    state = spd_init_state(dmp, x0=x0, goal=goal, tau=tau)
    times, xs_m, vs, phs = [0.0], [state.x.copy()], [state.sigma.copy()], [state.phase.value]
    n_fixed = None if duration is None else max(1, int(round(duration / dt)))
    horizon = np.inf if n_fixed is not None else 50.0 * state.phase.tau / dt
    k = 0
    while True:
        if n_fixed is not None and k >= n_fixed:
            break
        if n_fixed is None and (phase_done(state.phase, threshold) or k >= horizon):
            break
        if goal_switch is not None:
            t_sw, g_new, alpha_g = goal_switch
            if k * dt >= t_sw:
                state = spd_goal_switch_step(state, g_new, alpha_g, dt)
        stop = stop_fn(state) if stop_fn is not None else None
        state = spd_step(dmp, state, dt, stop=stop)
        k += 1
        times.append(k * dt)
        xs_m.append(state.x.copy())
        vs.append(state.sigma.copy())
        phs.append(state.phase.value)
    return Trajectory(times=np.array(times), values=np.array(xs_m),
                      velocities=np.array(vs), phases=np.array(phs), kind=SPD)


def train_spd(demo, n_kernels=20, alpha_z=DEFAULT_ALPHA_Z,
              beta_z=DEFAULT_BETA_Z, alpha_x=None, layout=None):
    """Fit an SPD model to a demonstration of SPD matrices."""
    if not isinstance(demo, Demonstration) or demo.kind != SPD:
        raise InvalidArgument("train_spd expects an SPD demonstration")
    demo = estimate_derivatives(demo)
    tau = demo.duration
    t = demo.times - demo.times[0]
    ph_var = ExponentialPhase() if alpha_x is None else ExponentialPhase(alpha_x)
    phases = np.exp(-ph_var.alpha_x * t / tau)
    base = demo.values[0]
    goal = demo.values[-1]
    sigma = tau * demo.vel
    sigma_dot = tau * demo.acc
    errs = np.empty_like(demo.vel)
    for j, xj in enumerate(demo.values):
        tan = manifold.spd_log(xj, goal)
        errs[j] = manifold.mandel_vec(manifold.spd_transport(xj, base, tan))
    targets = tau * sigma_dot - alpha_z * (beta_z * errs - sigma)
    if layout is None:
        layout = default_layout(GAUSSIAN_PHASE, n_kernels, alpha_x=ph_var.alpha_x)
    model = batch_fit(layout, phases, phases, targets)
    return SpdDmp(alpha_z=alpha_z, beta_z=beta_z, tau=tau, x0=demo.values[0],
                  goal=goal, base=base, forcing=model, phase_variant=ph_var)
