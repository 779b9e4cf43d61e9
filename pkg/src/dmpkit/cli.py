"""Command-line interface.

Subcommands::

    dmpkit train --type discrete --input demo.csv --n 10 --out model
    dmpkit rollout --model model --dt 0.01 --out traj.csv
    dmpkit join --method overlay seg1 seg2 --out traj.csv --out-model joined
    dmpkit classify --library dir --query demo.csv
    dmpkit demo-figures --which fig8 --out dir

Exit codes: 0 on success, 2 on invalid input (bad flags, malformed files,
inconsistent shapes), 3 on numerical failure (rank-deficient fits, missed
switches, leaving a manifold's domain).
"""

import argparse
import os
import sys

import numpy as np

from . import discrete, geometric, joining, periodic, synth
from .basis import GAUSSIAN_PHASE, default_layout
from .coupling import ObstacleField, fit_speed_profile, rollout_coupled
from .discrete import DiscreteDmp
from .errors import (
    DegenerateDemo,
    DimensionMismatch,
    DmpError,
    InvalidArgument,
    InvalidStep,
    InvariantViolation,
    LayoutMismatch,
    ParseError,
)
from .fileio import (
    load_library,
    load_model,
    load_trajectory,
    save_model,
    save_trajectory,
)
from .geometric import QuaternionDmp, RotationDmp, SpdDmp
from .joining import OverlayDmp, OverlayQuaternionDmp, train_overlay
from .library import classify
from .manifold import check_spd, mandel_mat, quat_normalize
from .periodic import PeriodicDmp
from .trajectory import QUATERNION, REAL, ROTATION, SPD

_USAGE_ERRORS = (
    ParseError,
    InvariantViolation,
    InvalidArgument,
    InvalidStep,
    DimensionMismatch,
    LayoutMismatch,
    DegenerateDemo,
)

_TYPE_KINDS = {
    "discrete": REAL,
    "periodic": REAL,
    "quaternion": QUATERNION,
    "rotation": ROTATION,
    "spd": SPD,
}


def _floats(text, flag):
    try:
        return np.array([float(tok) for tok in text.split(",") if tok.strip()])
    except ValueError as exc:
        raise InvalidArgument(f"{flag} expects comma-separated numbers") from exc


def _parse_goal(model, text, flag="--goal"):
    """Decode a goal flag for the given model type."""
    vals = _floats(text, flag)
    if isinstance(model, (DiscreteDmp, PeriodicDmp)):
        if vals.size != model.n_dims:
            raise InvalidArgument(
                f"{flag} needs {model.n_dims} components for this model")
        return vals
    if isinstance(model, QuaternionDmp):
        if vals.size != 4:
            raise InvalidArgument(f"{flag} needs 4 quaternion components")
        if abs(np.linalg.norm(vals) - 1.0) > 1e-3:
            raise InvalidArgument(f"{flag} quaternion is far from unit norm")
        return quat_normalize(vals)
    if isinstance(model, RotationDmp):
        if vals.size != 9:
            raise InvalidArgument(f"{flag} needs 9 row-major matrix entries")
        r = vals.reshape(3, 3)
        if (np.max(np.abs(r.T @ r - np.eye(3))) > 1e-6
                or abs(np.linalg.det(r) - 1.0) > 1e-6):
            raise InvalidArgument(f"{flag} matrix is not a rotation")
        return r
    if isinstance(model, SpdDmp):
        x = mandel_mat(vals)
        try:
            check_spd(x)
        except DmpError as exc:
            raise InvalidArgument(
                f"{flag} matrix is not symmetric positive definite") from exc
        return x
    raise InvalidArgument(f"{flag} is not supported for this model type")


def _parse_goal_switch(model, text, gain):
    parts = text.split(",")
    if len(parts) < 2:
        raise InvalidArgument("--goal-switch expects t,goal-components")
    try:
        t = float(parts[0])
    except ValueError as exc:
        raise InvalidArgument("--goal-switch time must be a number") from exc
    goal = _parse_goal(model, ",".join(parts[1:]), flag="--goal-switch")
    return (t, goal, gain)


def _load_speed_profile(path):
    """Fit a phase-indexed speed profile from a two-column CSV file."""
    rows = []
    with open(path) as fh:
        for lineno, ln in enumerate(fh, start=1):
            ln = ln.strip()
            if not ln:
                continue
            if lineno == 1 and not ln[0].isdigit() and not ln[0] in "+-.":
                continue  # header line
            toks = ln.split(",")
            if len(toks) != 2:
                raise ParseError(
                    f"speed profile line {lineno}: expected phase,factor")
            try:
                rows.append((float(toks[0]), float(toks[1])))
            except ValueError as exc:
                raise ParseError(
                    f"speed profile line {lineno}: malformed number") from exc
    if len(rows) < 2:
        raise ParseError("speed profile needs at least two rows")
    data = np.array(rows)
    layout = default_layout(GAUSSIAN_PHASE, min(10, len(rows)))
    return fit_speed_profile(layout, data[:, 0], data[:, 1])


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_train(args):
    demo = load_trajectory(args.input)
    want = _TYPE_KINDS[args.type]
    if demo.kind != want:
        raise InvalidArgument(
            f"--type {args.type} expects a {want} demonstration, "
            f"got {demo.kind}")
    if args.variant != "classical" and args.type != "discrete":
        raise InvalidArgument("--variant applies to --type discrete only")
    if args.phase == "sigmoid":
        if args.type not in ("discrete", "quaternion"):
            raise InvalidArgument(
                "--phase sigmoid trains overlay models for discrete or "
                "quaternion demonstrations only")
        model = train_overlay(demo, n_kernels=args.n, alpha_z=args.alpha_z,
                              beta_z=args.beta_z)
    elif args.type == "discrete":
        phase = {"exp": "exponential", "linear": "linear"}[args.phase]
        model = discrete.train_discrete(demo, n_kernels=args.n,
                                        alpha_z=args.alpha_z,
                                        beta_z=args.beta_z,
                                        variant=args.variant, phase=phase)
    elif args.type == "periodic":
        if args.phase != "exp":
            raise InvalidArgument("--phase applies to point-to-point models")
        model = periodic.train_periodic(demo, n_kernels=args.n,
                                        alpha=args.alpha_z, beta=args.beta_z,
                                        omega=args.omega)
    else:
        if args.phase != "exp":
            raise InvalidArgument(
                f"--type {args.type} supports the exponential phase only")
        train = {"quaternion": geometric.train_quaternion,
                 "rotation": geometric.train_rotation,
                 "spd": geometric.train_spd}[args.type]
        model = train(demo, n_kernels=args.n, alpha_z=args.alpha_z,
                      beta_z=args.beta_z)
    save_model(model, args.out)
    return 0


def _cmd_rollout(args):
    model = load_model(args.model)
    goal = None if args.goal is None else _parse_goal(model, args.goal)
    switch = (None if args.goal_switch is None
              else _parse_goal_switch(model, args.goal_switch,
                                      args.goal_switch_gain))
    if isinstance(model, (OverlayDmp, OverlayQuaternionDmp)):
        for flag, val in (("--goal", goal), ("--tau", args.tau),
                          ("--goal-switch", switch),
                          ("--speed-profile", args.speed_profile),
                          ("--obstacle", args.obstacle)):
            if val is not None:
                raise InvalidArgument(f"{flag} is not supported for overlay models")
        traj = joining.overlay_rollout(model, dt=args.dt, duration=args.duration)
    elif isinstance(model, PeriodicDmp):
        for flag, val in (("--goal", goal), ("--goal-switch", switch),
                          ("--speed-profile", args.speed_profile),
                          ("--obstacle", args.obstacle),
                          ("--tau", args.tau)):
            if val is not None:
                raise InvalidArgument(f"{flag} is not supported for cyclic models")
        traj = periodic.rollout(model, dt=args.dt, duration=args.duration,
                                omega=args.omega)
    elif isinstance(model, DiscreteDmp):
        if args.obstacle is not None or args.speed_profile is not None:
            if switch is not None:
                raise InvalidArgument(
                    "--goal-switch cannot be combined with couplings")
            obstacle = None
            if args.obstacle is not None:
                vals = _floats(args.obstacle, "--obstacle")
                if vals.size != model.n_dims + 2:
                    raise InvalidArgument(
                        "--obstacle expects center components, radius, zeta")
                obstacle = ObstacleField(center=vals[:-2], radius=vals[-2],
                                         zeta=vals[-1])
            speed = (None if args.speed_profile is None
                     else _load_speed_profile(args.speed_profile))
            traj = rollout_coupled(model, dt=args.dt, duration=args.duration,
                                   obstacle=obstacle, speed=speed, goal=goal,
                                   tau=args.tau)
        else:
            traj = discrete.rollout(model, dt=args.dt, duration=args.duration,
                                    goal=goal, tau=args.tau, goal_switch=switch)
    elif isinstance(model, (QuaternionDmp, RotationDmp, SpdDmp)):
        for flag, val in (("--speed-profile", args.speed_profile),
                          ("--obstacle", args.obstacle)):
            if val is not None:
                raise InvalidArgument(
                    f"{flag} applies to point-to-point models in R^n")
        roll = {QuaternionDmp: geometric.quat_rollout,
                RotationDmp: geometric.rot_rollout,
                SpdDmp: geometric.spd_rollout}[type(model)]
        traj = roll(model, dt=args.dt, duration=args.duration, goal=goal,
                    tau=args.tau, goal_switch=switch)
    else:
        raise InvalidArgument("unsupported model type for rollout")
    save_trajectory(traj, args.out)
    return 0


def _load_segments(paths):
    models = [load_model(p) for p in paths]
    kinds = {type(m) for m in models}
    if len(models) < 2:
        raise InvalidArgument("joining needs at least two models")
    if kinds <= {DiscreteDmp}:
        segs = [joining.PoseSegment(position=m) for m in models]
        return models, joining.DmpSequence(segs), "position"
    if kinds <= {QuaternionDmp}:
        segs = [joining.PoseSegment(orientation=m) for m in models]
        return models, joining.DmpSequence(segs), "orientation"
    if kinds <= {OverlayDmp} or kinds <= {OverlayQuaternionDmp}:
        return models, None, "overlay"
    raise InvalidArgument(
        "joining needs models of one kind: point-to-point position, "
        "orientation, or overlay")


def _cmd_join(args):
    models, seq, flavor = _load_segments(args.models)
    if args.out_model is not None and args.method != "overlay":
        raise InvalidArgument("--out-model applies to --method overlay")
    if args.method == "overlay":
        if flavor != "overlay":
            raise InvalidArgument("--method overlay expects overlay segments")
        joined = joining.join_overlay(models)
        if args.out_model is not None:
            save_model(joined, args.out_model)
        traj = joining.overlay_rollout(joined, dt=args.dt)
        save_trajectory(traj, args.out)
        return 0
    if flavor == "overlay":
        raise InvalidArgument(
            f"--method {args.method} expects point-to-point segments")
    if args.method == "threshold":
        jr = joining.join_velocity_threshold(
            seq, dt=args.dt, pos_threshold=args.threshold,
            rot_threshold=args.threshold)
    else:
        ndims = (models[0].n_dims if flavor == "position" else 3)
        vels = [np.full(ndims, args.cross_vel) for _ in models[:-1]]
        vels.append(np.zeros(ndims))
        if flavor == "position":
            jr = joining.join_target_crossing(seq, velocities=vels, dt=args.dt)
        else:
            zero = [np.zeros(0) for _ in models]
            jr = joining.join_target_crossing(seq, velocities=zero,
                                              rot_velocities=vels, dt=args.dt)
    traj = jr.position if flavor == "position" else jr.orientation
    save_trajectory(traj, args.out)
    return 0


def _cmd_classify(args):
    library = load_library(args.library)
    demo = load_trajectory(args.query)
    best, scores = classify(library, demo)
    print(best)
    for label, score in scores:
        print(f"{label} {score:.6f}")
    return 0


def _cmd_demo_figures(args):
    files = synth.build_scenario(args.which, seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    for name, obj in files.items():
        path = os.path.join(args.out, name)
        if isinstance(obj, str):
            with open(path, "w") as fh:
                fh.write(obj)
        elif hasattr(obj, "times"):
            save_trajectory(obj, path)
        else:
            save_model(obj, path)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="dmpkit",
        description="Train, run, join and compare movement primitives.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model to a demonstration CSV")
    p.add_argument("--type", required=True, choices=sorted(_TYPE_KINDS),
                   help="state space of the demonstration")
    p.add_argument("--input", required=True, help="demonstration CSV file")
    p.add_argument("--n", type=int, default=20, help="kernel count (default 20)")
    p.add_argument("--variant", default="classical",
                   choices=("classical", "scale", "pastor"),
                   help="forcing variant for --type discrete (default classical)")
    p.add_argument("--phase", default="exp", choices=("exp", "sigmoid", "linear"),
                   help="phase generator; sigmoid trains an overlay model "
                        "(default exp)")
    p.add_argument("--alpha-z", type=float, default=25.0,
                   help="stiffness gain (default 25)")
    p.add_argument("--beta-z", type=float, default=6.25,
                   help="damping ratio gain (default 6.25)")
    p.add_argument("--omega", type=float, default=None,
                   help="cycle frequency for --type periodic "
                        "(default: inferred from the demonstration)")
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("rollout", help="integrate a model and write the path")
    p.add_argument("--model", required=True, help="model file")
    p.add_argument("--dt", type=float, default=0.01,
                   help="integration step (default 0.01)")
    p.add_argument("--duration", type=float, default=None,
                   help="fixed horizon in seconds (default: run to convergence)")
    p.add_argument("--goal", default=None,
                   help="override goal, comma-separated components")
    p.add_argument("--tau", type=float, default=None,
                   help="override time constant")
    p.add_argument("--goal-switch", default=None,
                   help="switch the goal mid-run: t,goal-components")
    p.add_argument("--goal-switch-gain", type=float, default=25.0,
                   help="convergence gain of the goal switch (default 25)")
    p.add_argument("--speed-profile", default=None,
                   help="CSV of phase,factor rows scaling the local speed")
    p.add_argument("--obstacle", default=None,
                   help="repulsive field: center components, radius, zeta")
    p.add_argument("--omega", type=float, default=None,
                   help="cycle frequency override for cyclic models")
    p.add_argument("--out", required=True, help="trajectory CSV to write")
    p.set_defaults(func=_cmd_rollout)

    p = sub.add_parser("join", help="run a sequence of segment models as one")
    p.add_argument("--method", required=True,
                   choices=("threshold", "crossing", "overlay"),
                   help="switching rule, moving-target crossing, or kernel "
                        "overlay merging")
    p.add_argument("models", nargs="+", help="segment model files in order")
    p.add_argument("--threshold", type=float, default=0.01,
                   help="switching distance for --method threshold (default 0.01)")
    p.add_argument("--cross-vel", type=float, default=0.01,
                   help="crossing speed per axis for --method crossing "
                        "(default 0.01)")
    p.add_argument("--dt", type=float, default=0.01,
                   help="integration step (default 0.01)")
    p.add_argument("--out", required=True, help="trajectory CSV to write")
    p.add_argument("--out-model", default=None,
                   help="also save the merged model (--method overlay)")
    p.set_defaults(func=_cmd_join)

    p = sub.add_parser("classify", help="label a demonstration against a library")
    p.add_argument("--library", required=True,
                   help="directory with model files and an index")
    p.add_argument("--query", required=True, help="demonstration CSV file")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("demo-figures", help="regenerate a bundled demo scenario")
    p.add_argument("--which", required=True, choices=list(synth.SCENARIOS),
                   help="scenario name")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for stochastic generation (default 0)")
    p.set_defaults(func=_cmd_demo_figures)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DmpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
