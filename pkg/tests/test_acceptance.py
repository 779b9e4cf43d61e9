"""End-to-end acceptance checklist.

Each test exercises one headline capability on the stock scenario geometry
and prints a single summary line::

    criterion N: PASS  <name>  (measured values vs. limits)

so that ``pytest tests/test_acceptance.py -s`` reads as a report.  The
assertion at the end of each test uses exactly the measured numbers that
were printed -- nothing is checked that is not also shown.
"""

import numpy as np

from dmpkit import geometric, joining, periodic, synth
from dmpkit.basis import GAUSSIAN_PHASE, default_layout
from dmpkit.coupling import (ForceCoupling, ObstacleField, SpeedProfile,
                             rollout_coupled)
from dmpkit.discrete import (goal_switch_step, init_state, rollout,
                             train_discrete)
from dmpkit.fileio import dump_model, dump_trajectory
from dmpkit.learning import (batch_fit, default_ridge, estimate_derivatives,
                             recursive_fit_step, recursive_init,
                             regression_matrix)
from dmpkit.library import ModelLibrary, classify
from dmpkit.manifold import (quat_distance, quat_exp, quat_from_axis_angle,
                             quat_log, rot_exp, rot_log, spd_distance,
                             spd_exp, spd_log)
from dmpkit.synth import (gesture_corpus, overlay_models, pose_sequence,
                          quat_reach_demo, reach_demo, rot_reach_demo,
                          segment_demos, spd_reach_demo, via_segment_demos,
                          via_sequence, wave_demo)


def _report(num, name, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"criterion {num}: {status}  {name}  ({detail})")


# ---------------------------------------------------------------------------
# 1. point-to-point reproduction
# ---------------------------------------------------------------------------

def test_criterion_01_discrete_reach():
    demo = reach_demo([0.0], [1.0], 1.0, 0.01)
    dmp = train_discrete(demo, n_kernels=10)

    euler = rollout(dmp, dt=0.01, duration=1.0)
    rmse = float(np.sqrt(np.mean((euler.values[:, 0] - demo.values[:, 0]) ** 2)))

    rk4 = rollout(dmp, dt=0.01, duration=1.0, method="rk4")
    terminal = float(abs(rk4.values[-1, 0] - 1.0))

    ok = rmse < 1e-2 and terminal < 1e-3
    _report(1, "discrete reach", ok,
            f"rmse={rmse:.2e} lim 1e-02, rk4 |y(T)-g|={terminal:.2e} lim 1e-03")
    assert ok


# ---------------------------------------------------------------------------
# 2. unit-quaternion orientation reach
# ---------------------------------------------------------------------------

def test_criterion_02_quaternion_reach():
    axis = np.array([1.0, 2.0, 2.0]) / 3.0
    goal = quat_from_axis_angle(axis, 2.2)
    demo = quat_reach_demo(np.array([1.0, 0.0, 0.0, 0.0]), goal, 10.0, 0.01)
    qdmp = geometric.train_quaternion(demo, n_kernels=20)

    traj = geometric.quat_rollout(qdmp, dt=0.01)
    drift = float(np.abs(np.linalg.norm(traj.values, axis=1) - 1.0).max())
    terminal = float(quat_distance(traj.values[-1], goal))

    ok = drift < 1e-9 and terminal < 1e-2
    _report(2, "quaternion reach", ok,
            f"max |norm-1|={drift:.2e} lim 1e-09, terminal dist={terminal:.2e} lim 1e-02")
    assert ok


# ---------------------------------------------------------------------------
# 3. rotation-matrix orientation reach
# ---------------------------------------------------------------------------

def test_criterion_03_rotation_reach():
    goal = rot_exp(2.0 * np.array([2.0, 1.0, 2.0]) / 3.0)
    demo = rot_reach_demo(np.eye(3), goal, 10.0, 0.01)
    rdmp = geometric.train_rotation(demo, n_kernels=20)

    traj = geometric.rot_rollout(rdmp, dt=0.01)
    eye = np.eye(3)
    orth = max(float(np.abs(r.T @ r - eye).max()) for r in traj.values)
    det = max(float(abs(np.linalg.det(r) - 1.0)) for r in traj.values)
    terminal = float(np.linalg.norm(rot_log(traj.values[-1].T @ goal)))

    ok = orth < 1e-9 and det < 1e-9 and terminal < 1e-2
    _report(3, "rotation reach", ok,
            f"max |R'R-I|={orth:.2e} lim 1e-09, max |det-1|={det:.2e} lim 1e-09, "
            f"terminal |Log|={terminal:.2e} lim 1e-02")
    assert ok


# ---------------------------------------------------------------------------
# 4. symmetric positive-definite reach
# ---------------------------------------------------------------------------

def test_criterion_04_spd_reach():
    x0 = np.array([[1.0, 0.3], [0.3, 0.8]])
    goal = np.array([[2.2, -0.4], [-0.4, 1.5]])
    demo = spd_reach_demo(x0, goal, 100.0, 0.1)
    sdmp = geometric.train_spd(demo, n_kernels=20)

    traj = geometric.spd_rollout(sdmp, dt=0.02)
    min_eig = min(float(np.linalg.eigvalsh(m)[0]) for m in traj.values)
    terminal = float(spd_distance(traj.values[-1], goal))

    ok = min_eig > 0.0 and terminal < 1e-2
    _report(4, "positive-definite reach", ok,
            f"min eigenvalue={min_eig:.3e} lim >0, terminal dist={terminal:.2e} lim 1e-02")
    assert ok


# ---------------------------------------------------------------------------
# 5. rhythmic steady state
# ---------------------------------------------------------------------------

def test_criterion_05_periodic_steady_state():
    demo = wave_demo(duration=2.0, dt=0.01, noise=0.02, seed=0)
    pdmp = periodic.train_periodic(demo, n_kernels=20, omega=2.0 * np.pi)

    traj = periodic.rollout(pdmp, dt=0.01, duration=5.0)
    mask = (traj.times >= 3.0) & (traj.times < 4.0)
    clean = np.cos(2.0 * np.pi * traj.times[mask])
    rmse = float(np.sqrt(np.mean((traj.values[mask, 0] - clean) ** 2)))

    ok = rmse < 5e-2
    _report(5, "periodic steady state", ok,
            f"rmse vs clean wave={rmse:.2e} lim 5e-02 on cycle 4 of 5")
    assert ok


# ---------------------------------------------------------------------------
# 6. convergence-triggered sequencing
# ---------------------------------------------------------------------------

def test_criterion_06_threshold_join():
    seq = pose_sequence(n_kernels=20)
    rec = joining.join_velocity_threshold(seq, dt=0.01,
                                          pos_threshold=0.01,
                                          rot_threshold=0.01)
    first = float(rec.switch_times[0])
    total = float(rec.switch_times[-1])

    ok = abs(first - 4.7) <= 0.2 and abs(total - 9.5) <= 0.3
    _report(6, "threshold handover", ok,
            f"first switch={first:.2f}s in 4.70+-0.20, finish={total:.2f}s in 9.50+-0.30")
    assert ok


# ---------------------------------------------------------------------------
# 7. moving-target via point
# ---------------------------------------------------------------------------

def test_criterion_07_via_point_crossing():
    seq = via_sequence(n_kernels=20)
    vels = [np.full(3, 0.01), np.zeros(3)]
    rvels = [np.full(3, 0.01), np.zeros(3)]
    rec = joining.join_target_crossing(seq, velocities=vels,
                                       rot_velocities=rvels, dt=0.01)

    pos_demos, _ = via_segment_demos()
    via = pos_demos[0].values[-1]
    dist = np.linalg.norm(rec.position.values - via, axis=1)
    t_via = float(rec.position.times[int(np.argmin(dist))])

    k5 = int(np.argmin(np.abs(rec.position.times - 5.0)))
    v_err = float(np.abs(rec.position.velocities[k5] - 0.01).max())
    w_err = float(np.abs(rec.orientation.velocities[k5] - 0.01).max())
    total = float(rec.position.times[-1])

    ok = (abs(t_via - 5.0) <= 0.05 and v_err < 1e-3 and w_err < 1e-3
          and abs(total - 10.0) <= 0.05)
    _report(7, "via-point crossing", ok,
            f"via at t={t_via:.3f}s in 5.00+-0.05, vel err={v_err:.1e}/{w_err:.1e} lim 1e-03, "
            f"finish={total:.3f}s in 10.00+-0.05")
    assert ok


# ---------------------------------------------------------------------------
# 8. overlap-scheduled blending
# ---------------------------------------------------------------------------

def test_criterion_08_overlay_join():
    duration = 2.5
    dt = 0.01
    pos_demos, orn_demos = segment_demos(duration=duration)
    psegs, qsegs = overlay_models(n_kernels=20, duration=duration)
    pjoin = joining.join_overlay(psegs)
    qjoin = joining.join_overlay(qsegs)

    kernels_ok = (pjoin.forcing.layout.n == 40 == 20 * len(psegs)
                  and qjoin.forcing.layout.n == 40)

    ptraj = joining.overlay_rollout(pjoin, dt=dt)
    qtraj = joining.overlay_rollout(qjoin, dt=dt)

    p_acc = max(float(np.abs(estimate_derivatives(d).acc).max()) for d in pos_demos)
    q_acc = max(float(np.abs(estimate_derivatives(d).acc).max()) for d in orn_demos)
    p_jump = float(np.abs(np.diff(ptraj.velocities, axis=0)).max())
    q_jump = float(np.abs(np.diff(qtraj.velocities, axis=0)).max())

    total_ok = (ptraj.times[-1] > 2 * duration) and (qtraj.times[-1] > 2 * duration)

    ok = (kernels_ok and p_jump < 2.0 * p_acc * dt and q_jump < 2.0 * q_acc * dt
          and total_ok)
    _report(8, "overlay blending", ok,
            f"kernels=40=20x2, vel jumps {p_jump:.3f}/{q_jump:.3f} "
            f"lims {2 * p_acc * dt:.3f}/{2 * q_acc * dt:.3f}, "
            f"runtimes {ptraj.times[-1]:.2f}/{qtraj.times[-1]:.2f}s > {2 * duration:.1f}s")
    assert ok


# ---------------------------------------------------------------------------
# 9. invariants and numerics
# ---------------------------------------------------------------------------

def _check_recursive_matches_batch():
    layout = default_layout(GAUSSIAN_PHASE, 10)
    coords = np.exp(-np.log(1000.0) * np.linspace(0.0, 1.0, 300))
    gates = coords
    targets = np.column_stack([np.sin(3.0 * coords), np.cos(5.0 * coords)])
    phi = regression_matrix(layout, coords, gates)
    eps = default_ridge(phi)
    batch = batch_fit(layout, coords, gates, targets)
    st = recursive_init(10, 2, lam=1.0, p0=1.0 / eps)
    for row, tgt in zip(phi, targets):
        st = recursive_fit_step(st, row, tgt)
    return float(np.linalg.norm(st.weights - batch.weights)
                 / np.linalg.norm(batch.weights))


def _check_exp_log_roundtrips():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        v = rng.standard_normal(3)
        v *= rng.uniform(0.05, 0.99 * np.pi) / np.linalg.norm(v)
        worst = max(worst, float(np.abs(quat_log(quat_exp(0.5 * v)) * 2.0 - v).max()))
        worst = max(worst, float(np.abs(rot_log(rot_exp(v)) - v).max()))
        a = rng.standard_normal((2, 2))
        base = a @ a.T + 2.0 * np.eye(2)
        tang = rng.standard_normal((2, 2))
        tang = 0.3 * (tang + tang.T)
        back = spd_log(base, spd_exp(base, tang))
        worst = max(worst, float(np.abs(back - tang).max()))
    return worst


def _check_phase_closed_form():
    from dmpkit.phase import ExponentialPhase, make_phase, step_phase
    st = make_phase(ExponentialPhase(), 1.0)
    alpha = st.variant.alpha_x
    dt = 1e-3
    worst = 0.0
    for k in range(1, 1001):
        st = step_phase(st, dt)
        worst = max(worst, abs(st.value - np.exp(-alpha * k * dt)))
    return float(worst)


def _check_scale_equivariance():
    demo = reach_demo([0.0], [1.0], 1.0, 0.01)
    dmp = train_discrete(demo, n_kernels=10, variant="scale")
    base = rollout(dmp, dt=0.01, duration=1.0)
    scaled = rollout(dmp, dt=0.01, duration=1.0, goal=[3.0])
    return float(np.abs(scaled.values - 3.0 * base.values).max())


def _check_speed_reparam():
    demo = reach_demo(np.zeros(2), np.array([1.0, 1.0]), 1.0, 0.01)
    dmp = train_discrete(demo, n_kernels=20)
    layout = default_layout(GAUSSIAN_PHASE, 10)
    profile = SpeedProfile(layout=layout, weights=2.0 * np.ones(10))
    dt = 2e-4
    base = rollout_coupled(dmp, dt=dt, duration=1.0)
    slow = rollout_coupled(dmp, dt=dt, duration=2.0, speed=profile)
    # a constant factor of two halves the internal step, so sample 2k of
    # the stretched run lands on sample k of the nominal one
    return float(np.abs(slow.values[::2][: len(base.values)] - base.values).max())


def _check_coupling_neutrality():
    demo = reach_demo(np.zeros(2), np.array([1.0, 1.0]), 1.0, 0.01)
    dmp = train_discrete(demo, n_kernels=10)
    plain = rollout_coupled(dmp, dt=0.01)
    far = ObstacleField(center=np.array([50.0, 50.0]), radius=0.5, zeta=1.0)
    with_obs = rollout_coupled(dmp, dt=0.01, obstacle=far)
    zero = ForceCoupling(mode="additive", gain=0.7)
    with_force = rollout_coupled(dmp, dt=0.01, force=zero,
                                 f_ext_fn=lambda t, s: np.zeros(2))
    return (np.array_equal(plain.values, with_obs.values)
            and np.array_equal(plain.values, with_force.values))


def _check_goal_switch_closed_form():
    dmp = train_discrete(reach_demo([0.0], [1.0], 1.0, 0.01), n_kernels=10)
    state = init_state(dmp)
    for _ in range(100):
        state = goal_switch_step(state, np.array([4.0]), 8.0, 0.01)
    expected = 4.0 + (1.0 - 4.0) * np.exp(-8.0 * 1.0)
    return float(abs(state.g_current[0] - expected))


def _check_gesture_loo():
    corpus = gesture_corpus(seed=0, reps=5)
    models = [(label, train_discrete(demo, n_kernels=15))
              for label, demo in corpus]
    correct = 0
    for i, (label, demo) in enumerate(corpus):
        lib = ModelLibrary()
        for j, (other_label, model) in enumerate(models):
            if j != i:
                lib.add(model, query=corpus[j][1].values[-1], label=other_label)
        best, _ = classify(lib, demo)
        correct += int(best == label)
    return correct, len(corpus)


def test_criterion_09_property_suite():
    rls = _check_recursive_matches_batch()
    explog = _check_exp_log_roundtrips()
    phase = _check_phase_closed_form()
    scale = _check_scale_equivariance()
    reparam = _check_speed_reparam()
    neutral = _check_coupling_neutrality()
    switch = _check_goal_switch_closed_form()
    hits, n = _check_gesture_loo()

    ok = (rls < 1e-6 and explog < 1e-8 and phase < 1e-4 and scale < 1e-6
          and reparam < 1e-4 and neutral and switch < 1e-6 and hits == n)
    _report(9, "property suite", ok,
            f"rls={rls:.1e}, explog={explog:.1e}, phase={phase:.1e}, "
            f"scale={scale:.1e}, reparam={reparam:.1e}, "
            f"neutral={'exact' if neutral else 'BROKEN'}, switch={switch:.1e}, "
            f"classify={hits}/{n}")
    assert ok


# ---------------------------------------------------------------------------
# 10. reproducible demo outputs
# ---------------------------------------------------------------------------

def _render_scenario(which):
    out = {}
    for name, obj in synth.build_scenario(which, seed=0).items():
        if isinstance(obj, str):
            out[name] = obj
        elif hasattr(obj, "times"):
            out[name] = dump_trajectory(obj)
        else:
            out[name] = dump_model(obj)
    return out


def test_criterion_10_deterministic_scenarios():
    stable = []
    for which in synth.SCENARIOS:
        first = _render_scenario(which)
        second = _render_scenario(which)
        stable.append(first == second)
    ok = all(stable)
    bad = [w for w, s in zip(synth.SCENARIOS, stable) if not s]
    _report(10, "deterministic scenarios", ok,
            f"{sum(stable)}/{len(stable)} scenario bundles byte-identical"
            + (f", unstable: {bad}" if bad else ""))
    assert ok
