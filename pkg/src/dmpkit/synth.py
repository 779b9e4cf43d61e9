"""Synthetic demonstrations and the bundled demo scenarios.

Point-to-point reaches follow a quintic timing profile (zero velocity and
acceleration at both ends); curved state spaces run the same profile along
the geodesic between the endpoints.  The scenario builders assemble the
data sets written by the ``demo-figures`` command and reused by the test
suite: single reaches in each state space, a noisy limit cycle, two-segment
joining set-ups, and a small gesture corpus for recognition.
"""

import numpy as np

from . import discrete, geometric, joining, periodic
from .errors import InvalidArgument
from .manifold import (
    quat_conjugate,
    quat_exp,
    quat_from_axis_angle,
    quat_log,
    quat_normalize,
    quat_product,
    rot_exp,
    rot_log,
    spd_geodesic,
)
from .trajectory import QUATERNION, ROTATION, SPD, Demonstration


def smooth_step(u):
    """Quintic 0 -> 1 profile with vanishing end velocity and acceleration."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    return u ** 3 * (10.0 + u * (6.0 * u - 15.0))


def smooth_step_rate(u):
    """First derivative of :func:`smooth_step` with respect to ``u``."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    return 30.0 * u ** 2 * (1.0 - u) ** 2


def smooth_step_accel(u):
    """Second derivative of :func:`smooth_step` with respect to ``u``."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    return 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u)


def _grid(duration, dt):
    n = int(round(duration / dt))
    return np.arange(n + 1) * dt


def reach_demo(y0, goal, duration=1.0, dt=0.01):
    """Straight-line reach demonstration with quintic timing."""
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    goal = np.atleast_1d(np.asarray(goal, dtype=float))
    times = _grid(duration, dt)
    s = smooth_step(times / duration)
    values = y0[None, :] + s[:, None] * (goal - y0)[None, :]
    return Demonstration(times=times, values=values)


def quat_reach_demo(q0, goal, duration=10.0, dt=0.01):
    """Geodesic orientation reach between two unit quaternions."""
    q0 = quat_normalize(np.asarray(q0, dtype=float))
    goal = quat_normalize(np.asarray(goal, dtype=float))
    w = quat_log(quat_product(goal, quat_conjugate(q0)))
    times = _grid(duration, dt)
    s = smooth_step(times / duration)
    values = np.array([quat_product(quat_exp(si * w), q0) for si in s])
    return Demonstration(times=times, values=values, kind=QUATERNION)


def rot_reach_demo(r0, goal, duration=10.0, dt=0.01):
    """Geodesic reach between two rotation matrices (relative angle < pi)."""
    r0 = np.asarray(r0, dtype=float)
    goal = np.asarray(goal, dtype=float)
    w = rot_log(goal @ r0.T)
    times = _grid(duration, dt)
    s = smooth_step(times / duration)
    values = np.array([rot_exp(si * w) @ r0 for si in s])
    return Demonstration(times=times, values=values, kind=ROTATION)


def spd_reach_demo(x0, goal, duration=100.0, dt=0.1):
    """Geodesic reach between two symmetric positive-definite matrices."""
    x0 = np.asarray(x0, dtype=float)
    goal = np.asarray(goal, dtype=float)
    times = _grid(duration, dt)
    s = smooth_step(times / duration)
    values = np.array([spd_geodesic(x0, goal, si) for si in s])
    return Demonstration(times=times, values=values, kind=SPD)


def wave_demo(duration=2.0, dt=0.01, amplitude=1.0, frequency=1.0,
              noise=0.02, seed=0):
    """Noisy cosine demonstration for limit-cycle training."""
    rng = np.random.default_rng(seed)
    times = _grid(duration, dt)
    clean = amplitude * np.cos(2.0 * np.pi * frequency * times)
    values = clean + noise * rng.standard_normal(times.shape)
    return Demonstration(times=times, values=values)


# ---------------------------------------------------------------------------
# gesture corpus
# ---------------------------------------------------------------------------

GESTURE_SHAPES = ("line", "arc", "scurve", "loop")


def _gesture_path(shape, s):
    if shape == "line":
        return np.stack([s, 0.8 * s], axis=1)
    if shape == "arc":
        return 0.7 * np.stack([np.sin(np.pi * s), 1.0 - np.cos(np.pi * s)], axis=1)
    if shape == "scurve":
        return np.stack([s, 0.3 * np.sin(2.0 * np.pi * s)], axis=1)
    if shape == "loop":
        return np.stack([s - 0.35 * np.sin(2.0 * np.pi * s),
                         0.35 * (1.0 - np.cos(2.0 * np.pi * s))], axis=1)
    raise InvalidArgument(f"unknown gesture shape {shape!r}")


def gesture_demo(shape, rep=0, seed=0, duration=1.0, dt=0.01):
    """One planar gesture demonstration with a per-repetition jitter.

    Repetitions of a shape differ by a random similarity transform (scale
    and rotation), so weight vectors within a class stay strongly
    correlated while the class shapes remain separable.
    """
    if shape not in GESTURE_SHAPES:
        raise InvalidArgument(f"unknown gesture shape {shape!r}")
    rng = np.random.default_rng([seed, GESTURE_SHAPES.index(shape), rep])
    times = _grid(duration, dt)
    s = smooth_step(times / duration)
    path = _gesture_path(shape, s)
    scale = 1.0 + 0.06 * rng.standard_normal()
    ang = 0.08 * rng.standard_normal()
    rot = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
    return Demonstration(times=times, values=scale * path @ rot.T)


def gesture_corpus(seed=0, reps=5, duration=1.0, dt=0.01):
    """Labeled list of gesture demonstrations, ``reps`` per shape."""
    return [(shape, gesture_demo(shape, rep, seed, duration, dt))
            for shape in GESTURE_SHAPES for rep in range(reps)]


# ---------------------------------------------------------------------------
# joining geometry
# ---------------------------------------------------------------------------

# Two 5 s reaches whose spans and turn angles are large relative to the
# 0.01 switching threshold, so threshold switches land well inside each
# segment instead of at its nominal end.
_P0 = np.zeros(3)
_P1 = np.array([2.0, -1.6, 2.4])
_P2 = np.array([4.0, 0.4, 0.8])
_Q0 = np.array([1.0, 0.0, 0.0, 0.0])
_G1 = quat_from_axis_angle(np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0), 3.2)
_G2 = quat_product(
    quat_from_axis_angle(np.array([1.0, -1.0, 0.0]) / np.sqrt(2.0), 3.0), _G1)


# Smaller spans for the crossing scenario: the commanded via velocity is
# resolved against the forcing tail, which scales with the motion span, so
# hitting the via speed to within 1e-3 asks for a modest amplitude.
_VP1 = np.array([0.12, -0.09, 0.13])
_VP2 = np.array([0.24, 0.02, 0.05])
_VG1 = quat_from_axis_angle(np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0), 0.2)
_VG2 = quat_product(
    quat_from_axis_angle(np.array([1.0, -1.0, 0.0]) / np.sqrt(2.0), 0.18), _VG1)


def segment_demos(duration=5.0, dt=0.01):
    """Position and orientation demonstrations for the joining scenarios."""
    pos = [reach_demo(_P0, _P1, duration, dt), reach_demo(_P1, _P2, duration, dt)]
    orn = [quat_reach_demo(_Q0, _G1, duration, dt),
           quat_reach_demo(_G1, _G2, duration, dt)]
    return pos, orn


def via_segment_demos(duration=5.0, dt=0.01):
    """Small-span demonstrations for the moving-target crossing scenario."""
    pos = [reach_demo(_P0, _VP1, duration, dt),
           reach_demo(_VP1, _VP2, duration, dt)]
    orn = [quat_reach_demo(_Q0, _VG1, duration, dt),
           quat_reach_demo(_VG1, _VG2, duration, dt)]
    return pos, orn


def _train_pose_segments(pos, orn, n_kernels):
    segments = [joining.PoseSegment(
        position=discrete.train_discrete(p, n_kernels=n_kernels),
        orientation=geometric.train_quaternion(o, n_kernels=n_kernels))
        for p, o in zip(pos, orn)]
    return joining.DmpSequence(segments)


def pose_sequence(n_kernels=20, duration=5.0, dt=0.01):
    """Two trained pose segments ready for switching-based joining."""
    pos, orn = segment_demos(duration, dt)
    return _train_pose_segments(pos, orn, n_kernels)


def via_sequence(n_kernels=20, duration=5.0, dt=0.01):
    """Two trained pose segments sized for target-crossing joining."""
    pos, orn = via_segment_demos(duration, dt)
    return _train_pose_segments(pos, orn, n_kernels)


def overlay_models(n_kernels=20, duration=5.0, dt=0.01):
    """Overlay segments (position and orientation) for merging."""
    pos, orn = segment_demos(duration, dt)
    return ([joining.train_overlay(p, n_kernels=n_kernels) for p in pos],
            [joining.train_overlay(o, n_kernels=n_kernels) for o in orn])


# ---------------------------------------------------------------------------
# demo scenarios
# ---------------------------------------------------------------------------

def _switch_csv(times):
    lines = ["time"] + [repr(float(t)) for t in times]
    return "\n".join(lines) + "\n"


def scenario_point_reach(seed=0):
    """One-dimensional quintic reach 0 -> 1 over 1 s, ten kernels."""
    demo = reach_demo([0.0], [1.0], duration=1.0, dt=0.01)
    dmp = discrete.train_discrete(demo, n_kernels=10)
    traj = discrete.rollout(dmp, dt=0.01)
    return {"demo.csv": demo, "rollout.csv": traj}


def scenario_orientation_reach(seed=0):
    """Quaternion reach over 10 s, twenty kernels."""
    goal = quat_from_axis_angle(np.array([1.0, 2.0, 2.0]) / 3.0, 2.2)
    demo = quat_reach_demo(_Q0, goal, duration=10.0, dt=0.01)
    dmp = geometric.train_quaternion(demo, n_kernels=20)
    traj = geometric.quat_rollout(dmp, dt=0.01)
    return {"demo.csv": demo, "rollout.csv": traj}


def scenario_rotation_reach(seed=0):
    """Rotation-matrix reach over 10 s, twenty kernels."""
    goal = rot_exp(2.0 * np.array([2.0, 1.0, 2.0]) / 3.0)
    demo = rot_reach_demo(np.eye(3), goal, duration=10.0, dt=0.01)
    dmp = geometric.train_rotation(demo, n_kernels=20)
    traj = geometric.rot_rollout(dmp, dt=0.01)
    return {"demo.csv": demo, "rollout.csv": traj}


def scenario_cycle(seed=0):
    """Limit cycle trained on a noisy cosine, twenty kernels."""
    demo = wave_demo(duration=2.0, dt=0.01, noise=0.02, seed=seed)
    pdmp = periodic.train_periodic(demo, n_kernels=20, omega=2.0 * np.pi)
    traj = periodic.rollout(pdmp, dt=0.01, duration=5.0)
    return {"demo.csv": demo, "rollout.csv": traj}


def scenario_matrix_reach(seed=0):
    """Symmetric positive-definite reach over 100 s, twenty kernels."""
    x0 = np.array([[1.0, 0.3], [0.3, 0.8]])
    goal = np.array([[2.2, -0.4], [-0.4, 1.5]])
    demo = spd_reach_demo(x0, goal, duration=100.0, dt=0.1)
    dmp = geometric.train_spd(demo, n_kernels=20)
    traj = geometric.spd_rollout(dmp, dt=0.02)
    return {"demo.csv": demo, "rollout.csv": traj}


def _segment_demo_files(duration=5.0):
    pos, orn = segment_demos(duration)
    return {"demo_position_1.csv": pos[0], "demo_position_2.csv": pos[1],
            "demo_orientation_1.csv": orn[0], "demo_orientation_2.csv": orn[1]}


def scenario_switch_join(seed=0):
    """Two pose segments joined by the velocity/distance threshold rule."""
    seq = pose_sequence()
    jr = joining.join_velocity_threshold(seq, dt=0.01, pos_threshold=0.01,
                                         rot_threshold=0.01)
    files = _segment_demo_files()
    files.update({"position.csv": jr.position, "orientation.csv": jr.orientation,
                  "switches.csv": _switch_csv(jr.switch_times)})
    return files


def scenario_via_join(seed=0):
    """Two pose segments joined by crossing a moving target at speed."""
    seq = via_sequence()
    jr = joining.join_target_crossing(
        seq, velocities=[np.full(3, 0.01), np.zeros(3)],
        rot_velocities=[np.full(3, 0.01), np.zeros(3)], dt=0.01)
    pos, orn = via_segment_demos()
    files = {"demo_position_1.csv": pos[0], "demo_position_2.csv": pos[1],
             "demo_orientation_1.csv": orn[0], "demo_orientation_2.csv": orn[1]}
    files.update({"position.csv": jr.position, "orientation.csv": jr.orientation,
                  "switches.csv": _switch_csv(jr.switch_times)})
    return files


def scenario_overlay_join(seed=0):
    """Two overlay segments merged into one model per state space.

    Segments are brisk on purpose: the fitted forcing carries small edge
    wiggle, and a short duration keeps the resulting junction transient
    far below the demonstrations' own acceleration scale.
    """
    pos_over, orn_over = overlay_models(duration=2.5)
    joined_p = joining.join_overlay(pos_over)
    joined_q = joining.join_overlay(orn_over)
    tp = joining.overlay_rollout(joined_p, dt=0.01)
    tq = joining.overlay_rollout(joined_q, dt=0.01)
    files = _segment_demo_files(duration=2.5)
    files.update({"position.csv": tp, "orientation.csv": tq,
                  "joined_position.model": joined_p,
                  "joined_orientation.model": joined_q})
    return files


SCENARIOS = {
    "fig2": scenario_point_reach,
    "fig4": scenario_orientation_reach,
    "fig5": scenario_rotation_reach,
    "fig6": scenario_cycle,
    "fig7": scenario_matrix_reach,
    "fig8": scenario_switch_join,
    "fig9": scenario_via_join,
    "fig10": scenario_overlay_join,
}


def build_scenario(which, seed=0):
    """Build the named scenario's files as a ``{name: object}`` mapping."""
    if which not in SCENARIOS:
        raise InvalidArgument(f"unknown scenario {which!r}")
    return SCENARIOS[which](seed=seed)
