"""Joining movement segments into longer motions.

Three strategies, in increasing order of coupling between segments:

* **Velocity threshold**: run each segment until it is close enough to its
  goal (in distance or speed), then hand the live state to the next
  segment.  Simple, but the motion brakes near every via point.
* **Target crossing**: each segment runs for exactly its nominal duration
  while chasing a target that drifts into its goal with the commanded
  crossing velocity, so the state sweeps through each via point at speed.
* **Kernel overlay**: segments trained on time-indexed kernels with a
  late-dropping sigmoidal phase and a ramped (delayed) goal are merged into
  a single model whose kernel bank is the concatenation of the segments'
  banks rescaled onto the joint timeline.

Position segments are point-to-point models; orientation segments are their
quaternion counterparts and run in lockstep with the positions.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import manifold
from .basis import (
    GAUSSIAN_TIME,
    ForcingModel,
    KernelLayout,
    basis_row,
    default_layout,
    eval_forcing,
)
from .discrete import DiscreteDmp
from .discrete import init_state as pos_init_state
from .discrete import step as pos_step
from .errors import (
    DimensionMismatch,
    InvalidArgument,
    InvalidStep,
    LayoutMismatch,
    NoSwitch,
)
from .geometric import (
    QuaternionDmp,
    _robust_quat_exp,
    quat_goal_error,
    quat_init_state,
    quat_step,
)
from .learning import batch_fit, estimate_derivatives
from .phase import SigmoidalPhase, _closed_form, make_phase, phase_done, step_phase
from .trajectory import QUATERNION, REAL, Trajectory

SAFETY_FACTOR = 3.0


@dataclass(frozen=True)
class PoseSegment:
    """One stretch of motion: a position model, an orientation model, or both."""

    position: DiscreteDmp | None = None
    orientation: QuaternionDmp | None = None

    def __post_init__(self):
        if self.position is None and self.orientation is None:
            raise InvalidArgument("a segment needs at least one model")

    @property
    def tau(self):
        if self.position is not None:
            return self.position.tau
        return self.orientation.tau


@dataclass(frozen=True)
class DmpSequence:
    """Ordered segments traversed head to tail."""

    segments: tuple

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise InvalidArgument("a sequence needs at least one segment")
        have_pos = {s.position is not None for s in segs}
        have_orn = {s.orientation is not None for s in segs}
        if len(have_pos) > 1 or len(have_orn) > 1:
            raise InvalidArgument("all segments must carry the same model kinds")
        object.__setattr__(self, "segments", segs)

    def __len__(self):
        return len(self.segments)


@dataclass(frozen=True)
class JoinedRollout:
    """Trajectories produced by a joiner, plus the segment hand-over times."""

    position: Trajectory | None
    orientation: Trajectory | None
    switch_times: tuple


class _Recorder:
    """Accumulates lockstep position and orientation samples."""

    def __init__(self):
        self.times = []
        self.pos, self.pos_vel = [], []
        self.orn, self.orn_vel = [], []
        self.switches = []

    def record(self, t, pos_state, orn_state):
        self.times.append(t)
        if pos_state is not None:
            self.pos.append(pos_state.y.copy())
            self.pos_vel.append(pos_state.velocity.copy())
        if orn_state is not None:
            self.orn.append(orn_state.q.copy())
            self.orn_vel.append(orn_state.omega.copy())

    def result(self):
        events = [(t, f"switch:{i}") for i, t in enumerate(self.switches)]
        pos_traj = orn_traj = None
        if self.pos:
            pos_traj = Trajectory(times=np.array(self.times), values=np.array(self.pos),
                                  velocities=np.array(self.pos_vel), events=list(events))
        if self.orn:
            orn_traj = Trajectory(times=np.array(self.times), values=np.array(self.orn),
                                  velocities=np.array(self.orn_vel), events=list(events),
                                  kind=QUATERNION)
        return JoinedRollout(position=pos_traj, orientation=orn_traj,
                             switch_times=tuple(self.switches))


def _enter_segment(seg, carry_pos, carry_orn):
    pos_state = orn_state = None
    if seg.position is not None:
        pos_state = pos_init_state(seg.position)
        if carry_pos is not None:
            pos_state = replace(pos_state, y=carry_pos[0].copy(),
                                z=carry_pos[1] * seg.position.tau)
    if seg.orientation is not None:
        orn_state = quat_init_state(seg.orientation)
        if carry_orn is not None:
            orn_state = replace(orn_state, q=carry_orn[0].copy(),
                                eta=carry_orn[1] * seg.orientation.tau)
    return pos_state, orn_state


# ---------------------------------------------------------------------------
# velocity-threshold joining
# ---------------------------------------------------------------------------

def _segment_met(seg, pos_state, orn_state, criterion, pos_threshold, rot_threshold):
    ok = True
    if pos_state is not None:
        if criterion == "distance":
            ok = ok and float(np.linalg.norm(pos_state.y - pos_state.g_current)) < pos_threshold
        else:
            ok = ok and float(np.linalg.norm(pos_state.velocity)) < pos_threshold
    if orn_state is not None:
        if criterion == "distance":
            q = manifold.quat_align(orn_state.q, orn_state.g_current)
            angle = float(np.linalg.norm(quat_goal_error(orn_state.g_current, q)))
            ok = ok and angle < rot_threshold
        else:
            ok = ok and float(np.linalg.norm(orn_state.omega)) < rot_threshold
    return ok


def join_velocity_threshold(seq, dt=0.01, pos_threshold=0.01, rot_threshold=0.01,
                            criterion="distance"):
    """Run segments back to back, switching once each is close to its goal.

    ``criterion="distance"`` compares the goal distance (Euclidean for
    positions, relative rotation angle in radians for orientations) with
    the thresholds; ``criterion="speed"`` compares the velocity norms
    instead.  Both parts of a pose segment must pass before the hand-over.
    A segment that has not passed within three times its time scale raises
    :class:`~dmpkit.errors.NoSwitch`.

    The live state (value and scaled velocity) carries over between
    segments, so the joined motion stays continuous.
    """
    if criterion not in ("distance", "speed"):
        raise InvalidArgument(f"unknown criterion {criterion!r}")
    if dt <= 0.0 or not np.isfinite(dt):
        raise InvalidStep("dt must be positive and finite")
    rec = _Recorder()
    t = 0.0
    carry_pos = carry_orn = None
    for idx, seg in enumerate(seq.segments):
        pos_state, orn_state = _enter_segment(seg, carry_pos, carry_orn)
        if idx == 0:
            rec.record(t, pos_state, orn_state)
        start = pos_state.y.copy() if pos_state is not None else None
        elapsed = 0.0
        horizon = SAFETY_FACTOR * seg.tau
        while not _segment_met(seg, pos_state, orn_state, criterion,
                               pos_threshold, rot_threshold):
            if elapsed >= horizon:
                raise NoSwitch(f"segment {idx} never met its hand-over condition")
            if pos_state is not None:
                pos_state = pos_step(seg.position, pos_state, dt, start=start)
            if orn_state is not None:
                orn_state = quat_step(seg.orientation, orn_state, dt)
            t += dt
            elapsed += dt
            rec.record(t, pos_state, orn_state)
        rec.switches.append(t)
        carry_pos = (pos_state.y, pos_state.velocity) if pos_state is not None else None
        carry_orn = (orn_state.q, orn_state.omega) if orn_state is not None else None
    return rec.result()


# ---------------------------------------------------------------------------
# target-crossing joining
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MovingTarget:
    """Goal that drifts into place with the commanded crossing velocity.

    At the segment's nominal end the target coincides with the goal while
    moving at ``velocity``, so a tracker arrives on time and at speed.
    """

    goal: np.ndarray
    velocity: np.ndarray
    duration: float

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.goal, dtype=float))
        v = np.atleast_1d(np.asarray(self.velocity, dtype=float))
        if g.shape != v.shape:
            raise DimensionMismatch("goal and velocity must have the same shape")
        if self.duration <= 0.0:
            raise InvalidArgument("duration must be positive")
        object.__setattr__(self, "goal", g)
        object.__setattr__(self, "velocity", v)

    def value(self, t):
        return self.goal - (self.duration - t) * self.velocity


def moving_quat_target(goal, omega, duration, t):
    """Orientation analog: the target rides a geodesic into the goal."""
    w = -0.5 * (duration - t) * np.asarray(omega, dtype=float)
    return manifold.quat_product(_robust_quat_exp(w), np.asarray(goal, dtype=float))


def join_target_crossing(seq, velocities, rot_velocities=None, dt=0.01):
    """Chain segments so each via point is crossed at a commanded velocity.

    ``velocities[l]`` is the translational velocity with which segment l's
    goal is to be crossed (zeros ask for a full stop; the usual choice for
    the final segment), ``rot_velocities[l]`` the angular counterpart.  The
    spring of each segment tracks the moving target plus a
    velocity-difference term, both faded in as the phase decays, and every
    segment runs for exactly its nominal duration.
    """
    if dt <= 0.0 or not np.isfinite(dt):
        raise InvalidStep("dt must be positive and finite")
    if len(velocities) != len(seq):
        raise DimensionMismatch("need one crossing velocity per segment")
    if rot_velocities is not None and len(rot_velocities) != len(seq):
        raise DimensionMismatch("need one angular crossing velocity per segment")
    rec = _Recorder()
    t = 0.0
    carry_pos = carry_orn = None
    for idx, seg in enumerate(seq.segments):
        pos_state, orn_state = _enter_segment(seg, carry_pos, carry_orn)
        if idx == 0:
            rec.record(t, pos_state, orn_state)
        duration = seg.tau
        target = omega_hat = None
        if pos_state is not None:
            vel = np.broadcast_to(np.asarray(velocities[idx], dtype=float),
                                  seg.position.goal.shape).astype(float)
            target = MovingTarget(goal=seg.position.goal, velocity=vel,
                                  duration=duration)
        if orn_state is not None:
            omega_hat = np.zeros(3)
            if rot_velocities is not None:
                omega_hat = np.asarray(rot_velocities[idx], dtype=float)
        n = max(1, int(round(duration / dt)))
        for k in range(n):
            local_t = k * dt
            if pos_state is not None:
                dmp = seg.position
                tau = pos_state.phase.tau
                x = pos_state.phase.value
                f = eval_forcing(dmp.forcing, x)
                ghat = target.value(local_t)
                zdot = (1.0 - x) * dmp.alpha_z * (
                    dmp.beta_z * (ghat - pos_state.y)
                    + (tau * target.velocity - pos_state.z)) + f
                z = pos_state.z + dt / tau * zdot
                y = pos_state.y + dt / tau * z
                pos_state = replace(pos_state, y=y, z=z,
                                    phase=step_phase(pos_state.phase, dt))
            if orn_state is not None:
                dmp = seg.orientation
                tau = orn_state.phase.tau
                x = orn_state.phase.value
                f = eval_forcing(dmp.forcing, x)
                q = orn_state.q
                ghat_q = moving_quat_target(dmp.goal, omega_hat, duration, local_t)
                e = quat_goal_error(ghat_q, q)
                etadot = (1.0 - x) * dmp.alpha_z * (
                    dmp.beta_z * e + (tau * omega_hat - orn_state.eta)) + f
                eta = orn_state.eta + dt / tau * etadot
                inc = _robust_quat_exp(dt * eta / (2.0 * tau))
                q_new = manifold.quat_normalize(manifold.quat_product(inc, q))
                orn_state = replace(orn_state, q=q_new, eta=eta,
                                    phase=step_phase(orn_state.phase, dt))
            t += dt
            rec.record(t, pos_state, orn_state)
        rec.switches.append(t)
        carry_pos = (pos_state.y, pos_state.velocity) if pos_state is not None else None
        carry_orn = (orn_state.q, orn_state.omega) if orn_state is not None else None
    return rec.result()


# ---------------------------------------------------------------------------
# delayed goals (shared by the overlay models)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DelayedGoal:
    """Goal ramping linearly through a chain of anchors.

    ``times[0]`` is zero and pairs with the start value; each later anchor
    is a segment goal at that segment's end time, so the ramp reaches every
    goal exactly on schedule.  Beyond the last anchor the goal holds still.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        if t.ndim != 1 or v.shape[0] != t.size or t.size < 2:
            raise DimensionMismatch("need matching anchor times and values")
        if not np.all(np.diff(t) > 0.0):
            raise InvalidArgument("anchor times must increase strictly")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def value(self, t):
        return np.array([np.interp(t, self.times, col) for col in self.values.T])


@dataclass(frozen=True)
class QuatDelayedGoal:
    """Orientation goal riding piecewise geodesics through anchor quaternions.

    Anchors are interpolated exactly as given: the representative signs carry
    the intended branch, so a pair of anchors can encode any rotation short of
    a full turn.  Re-branching here would detach the schedule from the
    demonstration it was lifted from.
    """

    times: np.ndarray
    quats: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        q = np.asarray(self.quats, dtype=float)
        if t.ndim != 1 or q.shape != (t.size, 4) or t.size < 2:
            raise DimensionMismatch("need matching anchor times and quaternions")
        if not np.all(np.diff(t) > 0.0):
            raise InvalidArgument("anchor times must increase strictly")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "quats", q)

    def value(self, t):
        times, quats = self.times, self.quats
        if t <= times[0]:
            return quats[0].copy()
        if t >= times[-1]:
            return quats[-1].copy()
        l = int(np.searchsorted(times, t, side="right")) - 1
        frac = (t - times[l]) / (times[l + 1] - times[l])
        q_a = quats[l]
        q_b = quats[l + 1]
        w = manifold.quat_log(manifold.quat_product(q_b, manifold.quat_conjugate(q_a)))
        return manifold.quat_product(_robust_quat_exp(frac * w), q_a)


# ---------------------------------------------------------------------------
# overlay models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OverlayDmp:
    """Point-to-point model on time-indexed kernels with a ramped goal.

    The sigmoidal phase stays near one until the nominal end and only gates
    the forcing; kernels are indexed by normalized time directly.  A single
    trained segment is the two-anchor special case; joined models carry one
    extra anchor per merged segment.
    """

    alpha_z: float
    beta_z: float
    duration: float
    y0: np.ndarray
    goal_schedule: DelayedGoal
    forcing: ForcingModel
    tau: float = 1.0
    alpha_s: float | None = None

    def __post_init__(self):
        if self.duration <= 0.0 or self.tau <= 0.0:
            raise InvalidArgument("duration and tau must be positive")
        object.__setattr__(self, "y0", np.atleast_1d(np.asarray(self.y0, dtype=float)))
        if self.forcing.layout.kind != GAUSSIAN_TIME:
            raise LayoutMismatch("overlay models need time-indexed kernels")
        if self.forcing.n_dims != self.y0.size:
            raise DimensionMismatch("forcing columns must match the movement dimension")

    @property
    def goal(self):
        return self.goal_schedule.values[-1]

    def phase_spec(self):
        return SigmoidalPhase(duration=self.duration, alpha_s=self.alpha_s)


@dataclass(frozen=True)
class OverlayQuaternionDmp:
    """Quaternion counterpart of :class:`OverlayDmp`."""

    alpha_z: float
    beta_z: float
    duration: float
    q0: np.ndarray
    goal_schedule: QuatDelayedGoal
    forcing: ForcingModel
    tau: float = 1.0
    alpha_s: float | None = None

    def __post_init__(self):
        if self.duration <= 0.0 or self.tau <= 0.0:
            raise InvalidArgument("duration and tau must be positive")
        object.__setattr__(self, "q0", manifold.quat_normalize(np.asarray(self.q0, dtype=float)))
        if self.forcing.layout.kind != GAUSSIAN_TIME:
            raise LayoutMismatch("overlay models need time-indexed kernels")
        if self.forcing.n_dims != 3:
            raise DimensionMismatch("orientation forcing needs three columns")

    @property
    def goal(self):
        return self.goal_schedule.quats[-1]

    def phase_spec(self):
        return SigmoidalPhase(duration=self.duration, alpha_s=self.alpha_s)


def train_overlay(demo, n_kernels=20, alpha_z=25.0, beta_z=6.25, alpha_s=None):
    """Fit one overlay segment to a demonstration (real or quaternion)."""
    demo = estimate_derivatives(demo)
    duration = demo.duration
    t = demo.times - demo.times[0]
    u = t / duration
    spec = SigmoidalPhase(duration=duration, alpha_s=alpha_s)
    gates = np.array([_closed_form(spec, 1.0, tt) for tt in t])
    layout = default_layout(GAUSSIAN_TIME, n_kernels)
    if demo.kind == REAL:
        schedule = DelayedGoal(times=np.array([0.0, duration]),
                               values=np.vstack([demo.values[0], demo.values[-1]]))
        ramp = np.array([schedule.value(tt) for tt in t])
        targets = demo.acc - alpha_z * (beta_z * (ramp - demo.values) - demo.vel)
        model = batch_fit(layout, u, gates, targets)
        return OverlayDmp(alpha_z=alpha_z, beta_z=beta_z, duration=duration,
                          y0=demo.values[0], goal_schedule=schedule,
                          forcing=model, alpha_s=alpha_s)
    if demo.kind == QUATERNION:
        schedule = QuatDelayedGoal(times=np.array([0.0, duration]),
                                   quats=np.vstack([demo.values[0], demo.values[-1]]))
        errs = np.array([quat_goal_error(schedule.value(tt), q)
                         for tt, q in zip(t, demo.values)])
        targets = demo.acc - alpha_z * (beta_z * errs - demo.vel)
        model = batch_fit(layout, u, gates, targets)
        return OverlayQuaternionDmp(alpha_z=alpha_z, beta_z=beta_z,
                                    duration=duration, q0=demo.values[0],
                                    goal_schedule=schedule, forcing=model,
                                    alpha_s=alpha_s)
    raise InvalidArgument("overlay training handles real or quaternion demos")


def join_overlay(segments):
    """Merge overlay segments into one model on the joint timeline.

    Kernel centers of segment l are squeezed into its share of the joint
    normalized time, widths shrink by the same factor, and the weight
    blocks stack, giving N x L kernels overall.  The goal schedule chains
    the segment goals; the sigmoidal phase is rebuilt for the total
    duration.
    """
    segments = list(segments)
    if not segments:
        raise InvalidArgument("need at least one segment")
    if len({type(s) for s in segments}) > 1:
        raise LayoutMismatch("cannot mix position and orientation overlays")
    is_quat = isinstance(segments[0], OverlayQuaternionDmp)
    if not is_quat and not isinstance(segments[0], OverlayDmp):
        raise LayoutMismatch("overlay joining needs overlay models")
    n = segments[0].forcing.layout.n
    gains = (segments[0].alpha_z, segments[0].beta_z)
    for s in segments:
        if s.forcing.layout.n != n:
            raise LayoutMismatch("segments must share one kernel count")
        if (s.alpha_z, s.beta_z) != gains:
            raise LayoutMismatch("segments must share the spring gains")
    total = float(sum(s.duration for s in segments))
    centers, widths, blocks = [], [], []
    offset = 0.0
    anchor_times = [0.0]
    for s in segments:
        lay = s.forcing.layout
        scale = s.duration / total
        centers.append(offset / total + lay.centers * scale)
        widths.append(lay.widths * scale)
        blocks.append(s.forcing.weights)
        offset += s.duration
        anchor_times.append(offset)
    layout = KernelLayout(kind=GAUSSIAN_TIME, centers=np.concatenate(centers),
                          widths=np.concatenate(widths))
    model = ForcingModel(layout=layout, weights=np.vstack(blocks))
    if is_quat:
        # chain goal anchors with sign continuity: a later segment may carry
        # the antipodal representative of the junction orientation, and its
        # forcing only matches the geodesic taken in its own signs
        anchors, prev = [], segments[0].q0
        for s in segments:
            sign = 1.0 if float(np.dot(prev, s.q0)) >= 0.0 else -1.0
            prev = sign * s.goal
            anchors.append(prev)
        schedule = QuatDelayedGoal(times=np.array(anchor_times),
                                   quats=np.vstack([segments[0].q0, *anchors]))
        return OverlayQuaternionDmp(alpha_z=gains[0], beta_z=gains[1],
                                    duration=total, q0=segments[0].q0,
                                    goal_schedule=schedule, forcing=model)
    anchors = [s.goal for s in segments]
    schedule = DelayedGoal(times=np.array(anchor_times),
                           values=np.vstack([segments[0].y0, *anchors]))
    return OverlayDmp(alpha_z=gains[0], beta_z=gains[1], duration=total,
                      y0=segments[0].y0, goal_schedule=schedule, forcing=model)


def overlay_rollout(odmp, dt=0.01, threshold=1e-3, duration=None):
    """Integrate an overlay model until its sigmoidal phase has dropped.

    Because the phase lingers above the cutoff for a while after the
    nominal end, the recorded motion lasts somewhat longer than the summed
    segment durations; the extra tail parks the state at the final goal.
    """
    if dt <= 0.0 or not np.isfinite(dt):
        raise InvalidStep("dt must be positive and finite")
    tau = odmp.tau
    ph = make_phase(odmp.phase_spec(), tau)
    is_quat = isinstance(odmp, OverlayQuaternionDmp)
    if is_quat:
        q = odmp.q0.copy()
        eta = np.zeros(3)
        samples, vels = [q.copy()], [np.zeros(3)]
    else:
        y = odmp.y0.copy()
        z = np.zeros(odmp.y0.size)
        samples, vels = [y.copy()], [np.zeros(odmp.y0.size)]
    times, phases = [0.0], [ph.value]
    n_fixed = None if duration is None else max(1, int(round(duration / dt)))
    horizon = np.inf if n_fixed is not None else 50.0 * tau * odmp.duration / dt
    k = 0
    while True:
        if n_fixed is not None and k >= n_fixed:
            break
        if n_fixed is None and (phase_done(ph, threshold) or k >= horizon):
            break
        t_local = ph.elapsed / tau
        u = t_local / odmp.duration
        s = ph.value
        f = basis_row(odmp.forcing.layout, u, s) @ odmp.forcing.weights
        g = odmp.goal_schedule.value(t_local)
        if is_quat:
            e = quat_goal_error(g, q)
            eta = eta + dt / tau * (odmp.alpha_z * (odmp.beta_z * e - eta) + f)
            q = manifold.quat_normalize(manifold.quat_product(
                _robust_quat_exp(dt * eta / (2.0 * tau)), q))
            samples.append(q.copy())
            vels.append(eta / tau)
        else:
            z = z + dt / tau * (odmp.alpha_z * (odmp.beta_z * (g - y) - z) + f)
            y = y + dt / tau * z
            samples.append(y.copy())
            vels.append(z / tau)
        ph = step_phase(ph, dt)
        k += 1
        times.append(k * dt)
        phases.append(ph.value)
    kind = QUATERNION if is_quat else REAL
    return Trajectory(times=np.array(times), values=np.array(samples),
                      velocities=np.array(vels), phases=np.array(phases),
                      kind=kind)
