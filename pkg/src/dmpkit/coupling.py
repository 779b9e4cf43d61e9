"""Online coupling terms: obstacle repulsion, force interaction, speed scaling.

Coupling terms modify a movement while it runs, without touching the learned
weights.  They enter the dynamics at three points: accelerations (obstacle
repulsion, the rate of a force offset), velocities (force offsets), and the
goal (admittance offsets).  Speed scaling instead stretches the shared clock
of the transformation and canonical systems together, so the path is
preserved exactly while the timing changes.
"""

from dataclasses import dataclass, replace

import numpy as np

from .basis import KernelLayout, basis_row
from .discrete import init_state, step
from .errors import DimensionMismatch, InvalidArgument, InvalidStep
from .phase import phase_done
from .trajectory import Trajectory


# ---------------------------------------------------------------------------
# obstacle repulsion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ObstacleField:
    """Pointwise repulsive field around a static obstacle.

    The strength falls off quadratically to zero at ``radius`` and decays
    exponentially (rate ``zeta``) with the per-axis distance; the sign
    always pushes away from the obstacle center, axis by axis.
    """

    center: np.ndarray
    radius: float
    zeta: float
    gain: float = 1.0

    def __post_init__(self):
        if self.radius <= 0.0 or self.zeta < 0.0:
            raise InvalidArgument("radius must be positive and zeta nonnegative")
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, dtype=float)))


def obstacle_term(field, y):
    """Repulsive acceleration at position ``y``; zero outside the radius."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != field.center.shape:
        raise DimensionMismatch("position and obstacle center disagree in shape")
    delta = y - field.center
    r = float(np.linalg.norm(delta))
    if r >= field.radius:
        return np.zeros_like(y)
    drop = (1.0 - r / field.radius) ** 2
    return field.gain * drop * np.sign(delta) * np.exp(-field.zeta * np.abs(delta))


# ---------------------------------------------------------------------------
# force coupling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ForceCoupling:
    """Configuration for reacting to a sensed external force.

    * ``additive``: the scaled force becomes a velocity offset and its
      backward-difference rate an acceleration offset.
    * ``admittance``: the force error integrates into a goal offset, so the
      motion leans into the environment until the sensed force matches the
      desired one.
    * ``pd``: a proportional-derivative velocity correction on the force
      error; stiff but stateless.
    """

    mode: str
    gain: float
    f_desired: np.ndarray | None = None
    kp: float = 1.0
    dv: float = 0.0

    def __post_init__(self):
        if self.mode not in ("additive", "admittance", "pd"):
            raise InvalidArgument(f"unknown force coupling mode {self.mode!r}")
        if self.mode in ("admittance", "pd") and self.f_desired is None:
            raise InvalidArgument(f"{self.mode} coupling needs a desired force")
        if self.f_desired is not None:
            object.__setattr__(self, "f_desired",
                               np.atleast_1d(np.asarray(self.f_desired, dtype=float)))


@dataclass(frozen=True)
class CouplingState:
    """Runtime memory of a force coupling (offsets and previous samples)."""

    offset: np.ndarray
    prev_c: np.ndarray | None = None
    prev_f: np.ndarray | None = None


def coupling_init(coupling, n_dims):
    return CouplingState(offset=np.zeros(n_dims))


def force_coupled_step(dmp, state, coupling, cstate, dt, f_ext):
    """One movement step under a sensed external force.

    Returns the new transform state and the new coupling state.  With a
    zero force (additive) or a force equal to the desired one (admittance,
    pd) the step reduces exactly to the uncoupled one.
    """
    if dt <= 0.0 or not np.isfinite(dt):
        raise InvalidStep("dt must be positive and finite")
    return _forced_step(dmp, state, cstate, coupling, dt, f_ext, None, dmp.y0)


# ---------------------------------------------------------------------------
# speed scaling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpeedProfile:
    """Phase-indexed time-stretch factor encoded on normalized kernels.

    Values above one slow the motion down locally, values below one speed
    it up; ``floor`` bounds the factor away from zero so the clock never
    stalls completely.
    """

    layout: KernelLayout
    weights: np.ndarray
    floor: float = 0.1

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.size != self.layout.n:
            raise DimensionMismatch("profile weights must match the kernel count")
        if not 0.0 < self.floor:
            raise InvalidArgument("floor must be positive")
        object.__setattr__(self, "weights", w)

    def value(self, x):
        v = float(basis_row(self.layout, x, 1.0) @ self.weights)
        return max(self.floor, v)


def fit_speed_profile(layout, coords, factors, floor=0.1):
    """Least-squares fit of stretch factors on normalized kernel rows."""
    coords = np.asarray(coords, dtype=float)
    factors = np.asarray(factors, dtype=float)
    if coords.shape != factors.shape:
        raise DimensionMismatch("coords and factors disagree in length")
    phi = np.array([basis_row(layout, s, 1.0) for s in coords])
    w, *_ = np.linalg.lstsq(phi, factors, rcond=None)
    return SpeedProfile(layout=layout, weights=w, floor=floor)


def speed_scaled_step(dmp, state, dt, profile):
    """Advance one wall-clock step with the locally stretched internal clock.

    The stretch applies to the transformation and canonical systems alike,
    which makes the coupling a pure time reparameterization: the traced
    path is the nominal one.
    """
    v = profile.value(state.phase.value)
    return step(dmp, state, dt / v), v


# ---------------------------------------------------------------------------
# coupled rollout
# ---------------------------------------------------------------------------

def rollout_coupled(dmp, dt=0.01, duration=None, threshold=1e-3, obstacle=None,
                    force=None, f_ext_fn=None, speed=None, y0=None, goal=None,
                    tau=None):
    """Integrate a point-to-point model with the selected couplings active.

    ``force`` is a :class:`ForceCoupling` and ``f_ext_fn(t, state)`` the
    sensed force along the way; ``obstacle`` an :class:`ObstacleField`;
    ``speed`` a :class:`SpeedProfile`.  Couplings compose: obstacle
    repulsion adds to the acceleration, force coupling shifts velocities
    and goals, speed scaling stretches the step.
    """
    if force is not None and f_ext_fn is None:
        raise InvalidArgument("force coupling needs an external force function")
    state = init_state(dmp, y0=y0, goal=goal, tau=tau)
    cstate = CouplingState(offset=np.zeros(dmp.n_dims))
    times, ys, vs, xs = [0.0], [state.y.copy()], [state.velocity.copy()], [state.phase.value]
    n_fixed = None if duration is None else max(1, int(round(duration / dt)))
    floor = speed.floor if speed is not None else 1.0
    horizon = np.inf if n_fixed is not None else 50.0 * state.phase.tau / (dt * min(1.0, floor))
    k = 0
    start = state.y.copy()
    while True:
        if n_fixed is not None and k >= n_fixed:
            break
        if n_fixed is None and (phase_done(state.phase, threshold) or k >= horizon):
            break
        dt_eff = dt
        if speed is not None:
            dt_eff = dt / speed.value(state.phase.value)
        zdot_extra = None
        if obstacle is not None:
            zdot_extra = obstacle_term(obstacle, state.y)
        if force is not None:
            f_now = f_ext_fn(k * dt, state)
            state, cstate = _forced_step(dmp, state, cstate, force, dt_eff, f_now,
                                         zdot_extra, start)
        else:
            state = step(dmp, state, dt_eff, zdot_extra=zdot_extra, start=start)
        k += 1
        times.append(k * dt)
        ys.append(state.y.copy())
        vs.append(state.velocity.copy())
        xs.append(state.phase.value)
    return Trajectory(times=np.array(times), values=np.array(ys),
                      velocities=np.array(vs), phases=np.array(xs))


def _forced_step(dmp, state, cstate, coupling, dt, f_ext, zdot_extra, start):
    f_ext = np.atleast_1d(np.asarray(f_ext, dtype=float))
    if f_ext.shape != (dmp.n_dims,):
        raise DimensionMismatch("external force must match the movement dimension")
    if coupling.mode == "additive":
        c = coupling.gain * f_ext
        cdot = np.zeros_like(c) if cstate.prev_c is None else (c - cstate.prev_c) / dt
        extra = cdot if zdot_extra is None else cdot + zdot_extra
        new = step(dmp, state, dt, zdot_extra=extra, ydot_extra=c, start=start)
        return new, replace(cstate, offset=c, prev_c=c)
    if coupling.mode == "admittance":
        cdot = coupling.gain * (coupling.f_desired - f_ext)
        c = cstate.offset + dt * cdot
        new = step(dmp, state, dt, zdot_extra=zdot_extra, ydot_extra=cdot,
                   goal_offset=c, start=start)
        return new, replace(cstate, offset=c)
    fdot = np.zeros_like(f_ext) if cstate.prev_f is None else (f_ext - cstate.prev_f) / dt
    c = coupling.gain * (coupling.kp * (coupling.f_desired - f_ext) - coupling.dv * fdot)
    new = step(dmp, state, dt, zdot_extra=zdot_extra, ydot_extra=c, start=start)
    return new, replace(cstate, offset=c, prev_f=f_ext)
