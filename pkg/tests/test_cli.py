"""Command-line interface, exercised in process through ``main(argv)``."""

import os

import numpy as np
import pytest

from dmpkit import manifold
from dmpkit.cli import main
from dmpkit.discrete import train_discrete
from dmpkit.fileio import (load_model, load_trajectory, save_library,
                           save_model, save_trajectory)
from dmpkit.geometric import train_quaternion
from dmpkit.joining import OverlayDmp, train_overlay
from dmpkit.library import ModelLibrary
from dmpkit.synth import (gesture_demo, overlay_models, quat_reach_demo,
                          reach_demo, rot_reach_demo, segment_demos,
                          spd_reach_demo, via_segment_demos, wave_demo)
from dmpkit.trajectory import QUATERNION, REAL, ROTATION, SPD


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    """Demonstration files and pre-trained segment models for the subcommands."""
    root = tmp_path_factory.mktemp("cliwork")
    p = lambda name: str(root / name)

    save_trajectory(reach_demo(np.zeros(2), np.array([1.0, -0.5])),
                    p("real_demo.csv"))
    save_trajectory(quat_reach_demo(
        np.array([1.0, 0.0, 0.0, 0.0]),
        manifold.quat_from_axis_angle([0.0, 1.0, 0.0], 0.9)), p("quat_demo.csv"))
    save_trajectory(wave_demo(), p("wave.csv"))
    save_trajectory(rot_reach_demo(
        np.eye(3), manifold.rot_exp(np.array([0.2, 0.1, -0.4])), dt=0.1),
        p("rot_demo.csv"))
    save_trajectory(spd_reach_demo(
        np.eye(2), np.array([[2.0, 0.3], [0.3, 1.0]]), duration=20.0, dt=0.1),
        p("spd_demo.csv"))

    pos, orn = segment_demos()
    for i, d in enumerate(pos, start=1):
        save_model(train_discrete(d, n_kernels=15), p(f"seg{i}.model"))
    for i, d in enumerate(orn, start=1):
        save_model(train_quaternion(d, n_kernels=15), p(f"rotseg{i}.model"))
    vpos, _ = via_segment_demos()
    for i, d in enumerate(vpos, start=1):
        save_model(train_discrete(d, n_kernels=15), p(f"via{i}.model"))
    psegs, _ = overlay_models(n_kernels=10, duration=2.5)
    for i, seg in enumerate(psegs, start=1):
        save_model(seg, p(f"ovl{i}.model"))

    lib = ModelLibrary()
    for shape in ("line", "arc", "scurve", "loop"):
        d = gesture_demo(shape, rep=0)
        lib.add(train_discrete(d, n_kernels=15), query=d.values[-1], label=shape)
    save_library(lib, p("gestures"))
    save_trajectory(gesture_demo("arc", rep=1), p("query.csv"))

    with open(p("profile.csv"), "w") as fh:
        fh.write("phase,factor\n1.0,2.0\n0.3,2.0\n0.001,2.0\n")
    return root


def _p(work, name):
    return str(work / name)


# ---------------------------------------------------------------------------
# train + rollout
# ---------------------------------------------------------------------------

def test_train_and_rollout_discrete(work):
    m, t = _p(work, "m_disc.model"), _p(work, "t_disc.csv")
    assert main(["train", "--type", "discrete", "--input",
                 _p(work, "real_demo.csv"), "--n", "12", "--out", m]) == 0
    model = load_model(m)
    assert model.forcing.layout.n == 12
    assert main(["rollout", "--model", m, "--dt", "0.01", "--out", t]) == 0
    traj = load_trajectory(t)
    assert traj.kind == REAL
    np.testing.assert_allclose(traj.values[-1], [1.0, -0.5], atol=5e-3)


def test_rollout_goal_and_tau_overrides(work):
    m, t = _p(work, "m_disc.model"), _p(work, "t_retarget.csv")
    assert main(["rollout", "--model", m, "--goal", "2.0,-1.0", "--tau", "2.0",
                 "--duration", "6.0", "--out", t]) == 0
    traj = load_trajectory(t)
    np.testing.assert_allclose(traj.values[-1], [2.0, -1.0], atol=5e-3)
    assert traj.times[-1] == pytest.approx(6.0)


def test_rollout_goal_switch(work):
    m, t = _p(work, "m_disc.model"), _p(work, "t_switch.csv")
    assert main(["rollout", "--model", m, "--goal-switch", "0.5,1.5,0.5",
                 "--duration", "3.0", "--out", t]) == 0
    traj = load_trajectory(t)
    np.testing.assert_allclose(traj.values[-1], [1.5, 0.5], atol=5e-3)


def test_rollout_obstacle_changes_the_path(work):
    m = _p(work, "m_disc.model")
    plain, bent = _p(work, "t_plain.csv"), _p(work, "t_bent.csv")
    assert main(["rollout", "--model", m, "--duration", "2.0",
                 "--out", plain]) == 0
    assert main(["rollout", "--model", m, "--duration", "2.0", "--obstacle",
                 "0.5,-0.3,0.35,0.0", "--out", bent]) == 0
    a, b = load_trajectory(plain), load_trajectory(bent)
    assert np.max(np.abs(a.values - b.values)) > 1e-3
    np.testing.assert_allclose(b.values[-1], [1.0, -0.5], atol=5e-3)


def test_rollout_speed_profile_stretches(work):
    m = _p(work, "m_disc.model")
    fast, slow = _p(work, "t_fast.csv"), _p(work, "t_slow.csv")
    assert main(["rollout", "--model", m, "--out", fast]) == 0
    assert main(["rollout", "--model", m, "--speed-profile",
                 _p(work, "profile.csv"), "--out", slow]) == 0
    assert len(load_trajectory(slow).times) > 1.6 * len(load_trajectory(fast).times)


def test_train_and_rollout_quaternion(work):
    m, t = _p(work, "m_quat.model"), _p(work, "t_quat.csv")
    assert main(["train", "--type", "quaternion", "--input",
                 _p(work, "quat_demo.csv"), "--n", "10", "--out", m]) == 0
    assert main(["rollout", "--model", m, "--out", t]) == 0
    traj = load_trajectory(t)
    assert traj.kind == QUATERNION
    goal = manifold.quat_from_axis_angle([0.0, 1.0, 0.0], 0.9)
    assert manifold.quat_distance(traj.values[-1], goal) < 1e-2


def test_train_and_rollout_rotation(work):
    m, t = _p(work, "m_rot.model"), _p(work, "t_rot.csv")
    assert main(["train", "--type", "rotation", "--input",
                 _p(work, "rot_demo.csv"), "--n", "10", "--out", m]) == 0
    assert main(["rollout", "--model", m, "--dt", "0.1", "--out", t]) == 0
    traj = load_trajectory(t)
    assert traj.kind == ROTATION
    goal = manifold.rot_exp(np.array([0.2, 0.1, -0.4]))
    assert np.linalg.norm(manifold.rot_log(traj.values[-1].T @ goal)) < 1e-2


def test_train_and_rollout_spd(work):
    m, t = _p(work, "m_spd.model"), _p(work, "t_spd.csv")
    assert main(["train", "--type", "spd", "--input", _p(work, "spd_demo.csv"),
                 "--n", "10", "--out", m]) == 0
    assert main(["rollout", "--model", m, "--dt", "0.1", "--out", t]) == 0
    traj = load_trajectory(t)
    assert traj.kind == SPD
    np.testing.assert_allclose(traj.values[-1],
                               np.array([[2.0, 0.3], [0.3, 1.0]]), atol=1e-2)


def test_train_and_rollout_periodic(work):
    m, t = _p(work, "m_per.model"), _p(work, "t_per.csv")
    assert main(["train", "--type", "periodic", "--input", _p(work, "wave.csv"),
                 "--n", "15", "--out", m]) == 0
    assert main(["rollout", "--model", m, "--duration", "4.0", "--out", t]) == 0
    traj = load_trajectory(t)
    # the learned cycle keeps oscillating with the demonstrated amplitude
    tail = traj.values[len(traj.values) // 2:, 0]
    assert 0.8 < np.max(tail) < 1.2 and -1.2 < np.min(tail) < -0.8


def test_sigmoid_phase_trains_an_overlay_model(work):
    m, t = _p(work, "m_ovl.model"), _p(work, "t_ovl.csv")
    assert main(["train", "--type", "discrete", "--phase", "sigmoid",
                 "--input", _p(work, "real_demo.csv"), "--n", "10",
                 "--out", m]) == 0
    assert isinstance(load_model(m), OverlayDmp)
    assert main(["rollout", "--model", m, "--out", t]) == 0
    traj = load_trajectory(t)
    assert traj.times[-1] > 1.0  # runs past the nominal end
    np.testing.assert_allclose(traj.values[-1], [1.0, -0.5], atol=5e-3)
    # overrides that would detach the schedule are refused
    assert main(["rollout", "--model", m, "--goal", "2.0,0.0",
                 "--out", t]) == 2
    assert main(["rollout", "--model", m, "--tau", "2.0", "--out", t]) == 2


# ---------------------------------------------------------------------------
# join
# ---------------------------------------------------------------------------

def test_join_threshold_positions(work):
    out = _p(work, "j_thresh.csv")
    assert main(["join", "--method", "threshold", _p(work, "seg1.model"),
                 _p(work, "seg2.model"), "--out", out]) == 0
    traj = load_trajectory(out)
    np.testing.assert_allclose(traj.values[-1], [4.0, 0.4, 0.8], atol=2e-2)


def test_join_threshold_orientations(work):
    out = _p(work, "j_quat.csv")
    assert main(["join", "--method", "threshold", _p(work, "rotseg1.model"),
                 _p(work, "rotseg2.model"), "--out", out]) == 0
    assert load_trajectory(out).kind == QUATERNION


def test_join_crossing(work):
    out = _p(work, "j_cross.csv")
    assert main(["join", "--method", "crossing", _p(work, "via1.model"),
                 _p(work, "via2.model"), "--cross-vel", "0.01",
                 "--out", out]) == 0
    traj = load_trajectory(out)
    # both five-second segments run for exactly their nominal duration
    assert len(traj.times) == 1001


def test_join_overlay(work):
    out, om = _p(work, "j_ovl.csv"), _p(work, "j_ovl.model")
    assert main(["join", "--method", "overlay", _p(work, "ovl1.model"),
                 _p(work, "ovl2.model"), "--out", out, "--out-model", om]) == 0
    joined = load_model(om)
    assert joined.forcing.layout.n == 20
    traj = load_trajectory(out)
    assert traj.times[-1] > joined.duration


def test_join_flag_misuse(work):
    out = _p(work, "j_bad.csv")
    # merged-model output only makes sense for the overlay method
    assert main(["join", "--method", "threshold", _p(work, "seg1.model"),
                 _p(work, "seg2.model"), "--out", out, "--out-model",
                 _p(work, "nope.model")]) == 2
    # overlay method needs overlay segments
    assert main(["join", "--method", "overlay", _p(work, "seg1.model"),
                 _p(work, "seg2.model"), "--out", out]) == 2
    # and point-to-point methods refuse overlay segments
    assert main(["join", "--method", "threshold", _p(work, "ovl1.model"),
                 _p(work, "ovl2.model"), "--out", out]) == 2
    # a single model is not a sequence
    assert main(["join", "--method", "threshold", _p(work, "seg1.model"),
                 "--out", out]) == 2
    # mixing state spaces is refused
    assert main(["join", "--method", "threshold", _p(work, "seg1.model"),
                 _p(work, "rotseg2.model"), "--out", out]) == 2


def test_join_that_never_switches_is_a_numerical_failure(work):
    out = _p(work, "j_stuck.csv")
    # an unreachable hand-over condition is a runtime failure, not bad input
    assert main(["join", "--method", "threshold", _p(work, "seg1.model"),
                 _p(work, "seg2.model"), "--threshold", "0.0",
                 "--out", out]) == 3


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------

def test_classify_prints_label_and_scores(work, capsys):
    assert main(["classify", "--library", _p(work, "gestures"),
                 "--query", _p(work, "query.csv")]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "arc"
    assert len(lines) == 5
    scores = {}
    for ln in lines[1:]:
        label, score = ln.split()
        assert len(score.split(".")[1]) == 6
        scores[label] = float(score)
    assert max(scores, key=scores.get) == "arc"
    assert scores["arc"] > 0.9


def test_classify_needs_a_library(work):
    missing = _p(work, "no_such_dir")
    assert main(["classify", "--library", missing,
                 "--query", _p(work, "query.csv")]) == 2


# ---------------------------------------------------------------------------
# demo figures
# ---------------------------------------------------------------------------

def test_demo_figures_are_reproducible(work):
    d1, d2 = _p(work, "figa"), _p(work, "figb")
    assert main(["demo-figures", "--which", "fig2", "--out", d1]) == 0
    assert main(["demo-figures", "--which", "fig2", "--out", d2]) == 0
    names = sorted(os.listdir(d1))
    assert names == sorted(os.listdir(d2))
    for name in names:
        with open(os.path.join(d1, name), "rb") as fa, \
                open(os.path.join(d2, name), "rb") as fb:
            assert fa.read() == fb.read(), name


# ---------------------------------------------------------------------------
# bad input surfaces as exit code 2
# ---------------------------------------------------------------------------

def test_invalid_inputs_exit_2(work):
    out = _p(work, "scratch.out")
    # missing demonstration file
    assert main(["train", "--type", "discrete", "--input",
                 _p(work, "missing.csv"), "--out", out]) == 2
    # demonstration kind disagrees with --type
    assert main(["train", "--type", "quaternion", "--input",
                 _p(work, "real_demo.csv"), "--out", out]) == 2
    # variant flag outside discrete training
    assert main(["train", "--type", "periodic", "--variant", "scale",
                 "--input", _p(work, "wave.csv"), "--out", out]) == 2
    # sigmoid phase is for discrete or quaternion demos only
    assert main(["train", "--type", "spd", "--phase", "sigmoid", "--input",
                 _p(work, "spd_demo.csv"), "--out", out]) == 2
    # garbage model file
    bad = _p(work, "garbage.model")
    with open(bad, "w") as fh:
        fh.write("these are not the droids\n")
    assert main(["rollout", "--model", bad, "--out", out]) == 2
    # goal arity mismatch and malformed numbers
    m = _p(work, "m_disc.model")
    assert main(["rollout", "--model", m, "--goal", "1.0", "--out", out]) == 2
    assert main(["rollout", "--model", m, "--goal", "a,b", "--out", out]) == 2
    # obstacle needs center, radius, zeta
    assert main(["rollout", "--model", m, "--obstacle", "0.5,0.5,0.2",
                 "--out", out]) == 2
    # goal switching cannot combine with couplings
    assert main(["rollout", "--model", m, "--goal-switch", "0.5,1.0,1.0",
                 "--obstacle", "0.5,0.5,0.2,1.0", "--out", out]) == 2
    # cyclic models have no goal
    assert main(["rollout", "--model", _p(work, "m_per.model"),
                 "--goal", "1.0", "--out", out]) == 2
