"""Point-to-point movement system with a learned forcing term.

The transformation system is a critically dampable spring toward the goal
whose scaled velocity integrates a phase-gated forcing term.  Three
formulations are supported:

* ``classical``: additive forcing; simple bookkeeping but the learned shape
  does not rescale with the goal.
* ``scale``: forcing scaled per dimension by the goal-to-start span, so a
  new goal stretches the learned shape with it.
* ``pastor``: forcing inside the spring term with a phase-faded offset,
  which removes the classical form's start-of-motion jump under goal
  changes.

Integration is semi-implicit Euler by default (scaled velocity first, then
position with the fresh velocity) with a fourth-order Runge-Kutta
alternative.  A compiled kernel accelerates option-free rollouts on the
exponential phase; its numpy twin keeps results identical when the
extension is unavailable.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import _fast
from .basis import GAUSSIAN_PHASE, ForcingModel, eval_forcing, kernel_values
from .errors import DimensionMismatch, InvalidArgument, InvalidStep
from .learning import batch_fit, forcing_target
from .phase import (
    CanonicalState,
    ExponentialPhase,
    LinearPhase,
    make_phase,
    phase_done,
    step_phase,
)
from .trajectory import REAL, Demonstration, Trajectory

VARIANTS = ("classical", "scale", "pastor")

DEFAULT_ALPHA_Z = 25.0
DEFAULT_BETA_Z = 6.25


@dataclass(frozen=True)
class DiscreteDmp:
    """Parameters of one point-to-point movement model."""

    alpha_z: float
    beta_z: float
    tau: float
    y0: np.ndarray
    goal: np.ndarray
    forcing: ForcingModel
    variant: str = "classical"
    phase_variant: object = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidArgument(f"unknown variant {self.variant!r}")
        if self.tau <= 0.0:
            raise InvalidArgument("tau must be positive")
        object.__setattr__(self, "y0", np.atleast_1d(np.asarray(self.y0, dtype=float)))
        object.__setattr__(self, "goal", np.atleast_1d(np.asarray(self.goal, dtype=float)))
        if self.y0.shape != self.goal.shape:
            raise DimensionMismatch("start and goal must have the same shape")
        if self.forcing.n_dims != self.y0.size:
            raise DimensionMismatch("forcing columns must match the movement dimension")
        if self.phase_variant is None:
            object.__setattr__(self, "phase_variant", ExponentialPhase())

    @property
    def n_dims(self):
        return self.y0.size


@dataclass(frozen=True)
class TransformStateR:
    """Integration state: position, scaled velocity, goal, phase."""

    y: np.ndarray
    z: np.ndarray
    g_current: np.ndarray
    phase: CanonicalState

    @property
    def velocity(self):
        return self.z / self.phase.tau


def init_state(dmp, y0=None, goal=None, tau=None):
    """Initial integration state, optionally overriding start, goal, or tau."""
    y = dmp.y0 if y0 is None else np.atleast_1d(np.asarray(y0, dtype=float))
    g = dmp.goal if goal is None else np.atleast_1d(np.asarray(goal, dtype=float))
    if y.shape != dmp.y0.shape or g.shape != dmp.goal.shape:
        raise DimensionMismatch("override shape does not match the model")
    ph = make_phase(dmp.phase_variant, dmp.tau if tau is None else tau)
    return TransformStateR(y=y, z=np.zeros_like(y), g_current=g, phase=ph)


def _zdot(dmp, y, z, g, x, f, start):
    if dmp.variant == "classical":
        return dmp.alpha_z * (dmp.beta_z * (g - y) - z) + f
    if dmp.variant == "scale":
        return dmp.alpha_z * (dmp.beta_z * (g - y) - z) + (g - start) * f
    return dmp.alpha_z * (dmp.beta_z * (g - y - (g - start) * x + f) - z)


def step(dmp, state, dt, stop=None, zdot_extra=None, ydot_extra=None,
         goal_offset=None, start=None):
    """Advance one semi-implicit Euler step and return the new state.

    ``zdot_extra`` adds to the scaled acceleration, ``ydot_extra`` adds to
    the scaled velocity inside the position update, and ``goal_offset``
    shifts the attractor for this step only; the coupling module drives all
    three.  ``start`` overrides the reference start point used by the
    scaled formulations (rollouts pass the actual start when it differs
    from the model's).
    """
    if dt <= 0.0 or not np.isfinite(dt):
        raise InvalidStep("dt must be positive and finite")
    tau = state.phase.tau
    x = state.phase.value
    g = state.g_current if goal_offset is None else state.g_current + goal_offset
    f = eval_forcing(dmp.forcing, x)
    s0 = dmp.y0 if start is None else start
    zdot = _zdot(dmp, state.y, state.z, g, x, f, s0)
    if zdot_extra is not None:
        zdot = zdot + zdot_extra
    z = state.z + dt / tau * zdot
    yrate = z if ydot_extra is None else z + ydot_extra
    y = state.y + dt / tau * yrate
    return replace(state, y=y, z=z, phase=step_phase(state.phase, dt, stop))


def goal_switch_step(state, g_new, alpha_g, dt):
    """Move the active goal toward a new target along its first-order decay.

    The update is the exact exponential relaxation over one step, so the
    integrated goal matches the closed-form transient at any step size.
    """
    if alpha_g <= 0.0:
        raise InvalidArgument("goal gain must be positive")
    g_new = np.asarray(g_new, dtype=float)
    if g_new.shape != state.g_current.shape:
        raise DimensionMismatch("new goal shape does not match the state")
    fade = np.exp(-alpha_g * dt / state.phase.tau)
    return replace(state, g_current=g_new + (state.g_current - g_new) * fade)


@dataclass(frozen=True)
class ViaGoalSchedule:
    """Phase-indexed bank of goals blended by normalized Gaussian kernels."""

    goals: np.ndarray
    centers: np.ndarray
    widths: np.ndarray

    def __post_init__(self):
        g = np.atleast_2d(np.asarray(self.goals, dtype=float))
        c = np.atleast_1d(np.asarray(self.centers, dtype=float))
        w = np.atleast_1d(np.asarray(self.widths, dtype=float))
        if g.shape[0] != c.size or w.size != c.size:
            raise DimensionMismatch("goals, centers, and widths disagree in length")
        if np.any(w <= 0.0):
            raise InvalidArgument("via-goal widths must be positive")
        object.__setattr__(self, "goals", g)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "widths", w)


def via_goal(schedule, x):
    """Blended goal at phase ``x``: activation-weighted mean of the bank."""
    psi = np.exp(-schedule.widths * (x - schedule.centers) ** 2)
    total = psi.sum()
    if total < 1e-300:
        return schedule.goals[int(np.argmin(np.abs(x - schedule.centers)))].copy()
    return (psi / total) @ schedule.goals


def _rk4_step(dmp, state, dt):
    # classical explicit RK4 on (y, z, x); forcing stays smooth in x
    tau = state.phase.tau
    alpha_x = dmp.phase_variant.alpha_x
    g = state.g_current

    def rates(y, z, x):
        f = eval_forcing(dmp.forcing, x)
        return (z / tau,
                _zdot(dmp, y, z, g, x, f, dmp.y0) / tau,
                -alpha_x * x / tau)

    y1, z1, x1 = state.y, state.z, state.phase.value
    k1 = rates(y1, z1, x1)
    k2 = rates(y1 + 0.5 * dt * k1[0], z1 + 0.5 * dt * k1[1], x1 + 0.5 * dt * k1[2])
    k3 = rates(y1 + 0.5 * dt * k2[0], z1 + 0.5 * dt * k2[1], x1 + 0.5 * dt * k2[2])
    k4 = rates(y1 + dt * k3[0], z1 + dt * k3[1], x1 + dt * k3[2])
    y = y1 + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    z = z1 + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    x = x1 + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    ph = replace(state.phase, value=x, elapsed=state.phase.elapsed + dt)
    return replace(state, y=y, z=z, phase=ph)


def _fast_path_ok(dmp, method, goal_switch, via, stop_fn):
    return (method == "euler"
            and goal_switch is None and via is None and stop_fn is None
            and isinstance(dmp.phase_variant, ExponentialPhase)
            and dmp.forcing.layout.kind == GAUSSIAN_PHASE)


def _fast_step_count(alpha_x, tau, dt, threshold):
    # replicate the flexible loop's stopping rule: repeated multiplication,
    # not a pow(), so both paths cut off at the same sample
    decay = float(np.exp(-alpha_x * dt / tau))
    x, n = 1.0, 0
    while x > threshold:
        x *= decay
        n += 1
    return n


def rollout(dmp, dt=0.01, duration=None, y0=None, goal=None, tau=None,
            threshold=1e-3, goal_switch=None, via=None, stop_fn=None,
            method="euler"):
    """Integrate the model from rest and record the trajectory.

    Without ``duration`` the integration runs until the phase drops to
    ``threshold`` (or a safety horizon of many time constants).  Optional
    behaviors:

    * ``goal_switch=(t, g_new, alpha_g)``: from time ``t`` on, relax the
      active goal toward ``g_new``.
    * ``via``: a :class:`ViaGoalSchedule` continuously steering the goal.
    * ``stop_fn``: callable mapping the current state to a
      :class:`~dmpkit.phase.StopFeedback`, for phase stopping.
    * ``method``: ``"euler"`` (semi-implicit, default) or ``"rk4"``.
    """
    if method not in ("euler", "rk4"):
        raise InvalidArgument(f"unknown integration method {method!r}")
    state = init_state(dmp, y0=y0, goal=goal, tau=tau)
    tau_run = state.phase.tau

    if duration is None and _fast_path_ok(dmp, method, goal_switch, via, stop_fn):
        alpha_x = dmp.phase_variant.alpha_x
        n = _fast_step_count(alpha_x, tau_run, dt, threshold)
        ys, vs, xs = _fast.discrete_rollout(
            state.y, state.g_current, dmp.forcing.layout.centers,
            dmp.forcing.layout.widths, dmp.forcing.weights,
            dmp.alpha_z, dmp.beta_z, alpha_x, tau_run, dt, n,
            _fast.VARIANT_CODES[dmp.variant])
        times = dt * np.arange(n + 1)
        return Trajectory(times=times, values=ys, velocities=vs, phases=xs)

    n_fixed = None if duration is None else max(1, int(round(duration / dt)))
    horizon = np.inf if n_fixed is not None else 50.0 * tau_run / dt

    times = [0.0]
    ys = [state.y.copy()]
    vs = [state.velocity.copy()]
    xs = [state.phase.value]
    start = state.y.copy()
    k = 0
    while True:
        if n_fixed is not None and k >= n_fixed:
            break
        if n_fixed is None and (phase_done(state.phase, threshold) or k >= horizon):
            break
        t = k * dt
        if goal_switch is not None:
            t_sw, g_new, alpha_g = goal_switch
            if t >= t_sw:
                state = goal_switch_step(state, g_new, alpha_g, dt)
        if via is not None:
            state = replace(state, g_current=via_goal(via, state.phase.value))
        stop = stop_fn(state) if stop_fn is not None else None
        if method == "euler":
            state = step(dmp, state, dt, stop=stop, start=start)
        else:
            state = _rk4_step(dmp, state, dt)
        k += 1
        times.append(k * dt)
        ys.append(state.y.copy())
        vs.append(state.velocity.copy())
        xs.append(state.phase.value)
    return Trajectory(times=np.array(times), values=np.array(ys),
                      velocities=np.array(vs), phases=np.array(xs))


def train_discrete(demo, n_kernels=20, alpha_z=DEFAULT_ALPHA_Z,
                   beta_z=DEFAULT_BETA_Z, variant="classical",
                   phase="exponential", alpha_x=None, layout=None):
    """Fit a point-to-point model to one demonstration.

    The time scale becomes the demo duration, start and goal come from the
    first and last samples, and the forcing weights solve the batch
    regression of the inverted dynamics on the chosen phase.
    """
    from .basis import default_layout  # local import keeps module load light

    if not isinstance(demo, Demonstration) or demo.kind != REAL:
        raise InvalidArgument("train_discrete expects a real-valued demonstration")
    from .learning import estimate_derivatives

    demo = estimate_derivatives(demo)
    tau = demo.duration
    t = demo.times - demo.times[0]
    if phase == "exponential":
        variant_ph = ExponentialPhase() if alpha_x is None else ExponentialPhase(alpha_x)
        phases = np.exp(-variant_ph.alpha_x * t / tau)
        if layout is None:
            layout = default_layout(GAUSSIAN_PHASE, n_kernels, alpha_x=variant_ph.alpha_x)
    elif phase == "linear":
        variant_ph = LinearPhase(duration=1.0)
        phases = np.maximum(0.0, 1.0 - t / tau)
        if layout is None:
            layout = default_layout(GAUSSIAN_PHASE, n_kernels, spacing="uniform")
    else:
        raise InvalidArgument("phase must be 'exponential' or 'linear' here")
    targets = forcing_target(demo, alpha_z, beta_z, tau, variant=variant,
                             phases=phases)
    model = batch_fit(layout, phases, phases, targets)
    return DiscreteDmp(alpha_z=alpha_z, beta_z=beta_z, tau=tau,
                       y0=demo.values[0], goal=demo.values[-1],
                       forcing=model, variant=variant, phase_variant=variant_ph)
