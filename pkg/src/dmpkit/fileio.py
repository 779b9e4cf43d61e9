"""Plain-text persistence for models and trajectories.

Model files are line-oriented: a magic header with a format version, then
``key value...`` lines; vectors are space-separated on one line, matrices
one row per ``w`` line after a ``weights rows cols`` marker.  All floats are
written with ``repr``, the shortest representation that parses back to the
identical double, so a save/load cycle is bit-exact.

Trajectory files are CSV with a header line; the first column is time and
the remaining columns depend on the state space:

* real values: ``y1..yJ``
* unit quaternions: ``qw,qx,qy,qz``
* rotation matrices: ``r11..r33`` in row-major order
* SPD matrices: their Mandel components ``m1..mn``
"""

import os

import numpy as np

from . import manifold
from .basis import ForcingModel, KernelLayout
from .discrete import DiscreteDmp
from .errors import DimensionMismatch, InvariantViolation, ParseError
from .geometric import QuaternionDmp, RotationDmp, SpdDmp
from .joining import (
    DelayedGoal,
    OverlayDmp,
    OverlayQuaternionDmp,
    QuatDelayedGoal,
)
from .library import ModelLibrary
from .periodic import PeriodicDmp
from .phase import ExponentialPhase, LinearPhase
from .trajectory import (
    QUATERNION,
    REAL,
    ROTATION,
    SPD,
    Demonstration,
    Trajectory,
)

MAGIC = "dmpkit-model"
FORMAT_VERSION = 1


def _f(x):
    return repr(float(x))


def _vec(v):
    return " ".join(_f(x) for x in np.asarray(v, dtype=float).reshape(-1))


def _emit_layout(lines, layout):
    lines.append(f"layout {layout.kind}")
    lines.append(f"centers {_vec(layout.centers)}")
    lines.append(f"widths {_vec(layout.widths)}")


def _emit_weights(lines, weights):
    lines.append(f"weights {weights.shape[0]} {weights.shape[1]}")
    for row in weights:
        lines.append(f"w {_vec(row)}")


def dump_model(model):
    """Serialize a model to the text format; returns the file content."""
    lines = [f"{MAGIC} {FORMAT_VERSION}"]
    if isinstance(model, DiscreteDmp):
        lines.append("formulation discrete")
        lines.append(f"variant {model.variant}")
        lines.append(f"alpha_z {_f(model.alpha_z)}")
        lines.append(f"beta_z {_f(model.beta_z)}")
        lines.append(f"tau {_f(model.tau)}")
        if isinstance(model.phase_variant, ExponentialPhase):
            lines.append("phase exponential")
            lines.append(f"alpha_x {_f(model.phase_variant.alpha_x)}")
        elif isinstance(model.phase_variant, LinearPhase):
            lines.append("phase linear")
            lines.append(f"phase_duration {_f(model.phase_variant.duration)}")
        else:
            raise ParseError("unsupported phase variant for serialization")
        lines.append(f"y0 {_vec(model.y0)}")
        lines.append(f"goal {_vec(model.goal)}")
        lines.append(f"r {_f(model.forcing.r)}")
        _emit_layout(lines, model.forcing.layout)
        _emit_weights(lines, model.forcing.weights)
    elif isinstance(model, PeriodicDmp):
        lines.append("formulation periodic")
        lines.append(f"alpha_z {_f(model.alpha)}")
        lines.append(f"beta_z {_f(model.beta)}")
        lines.append(f"omega {_f(model.omega)}")
        lines.append(f"anchor {_vec(model.anchor)}")
        lines.append(f"r {_f(model.forcing.r)}")
        _emit_layout(lines, model.forcing.layout)
        _emit_weights(lines, model.forcing.weights)
    elif isinstance(model, QuaternionDmp):
        lines.append("formulation quaternion")
        lines.append(f"alpha_z {_f(model.alpha_z)}")
        lines.append(f"beta_z {_f(model.beta_z)}")
        lines.append(f"tau {_f(model.tau)}")
        lines.append(f"alpha_x {_f(model.phase_variant.alpha_x)}")
        lines.append(f"q0 {_vec(model.q0)}")
        lines.append(f"goal {_vec(model.goal)}")
        _emit_layout(lines, model.forcing.layout)
        _emit_weights(lines, model.forcing.weights)
    elif isinstance(model, RotationDmp):
        lines.append("formulation rotation")
        lines.append(f"alpha_z {_f(model.alpha_z)}")
        lines.append(f"beta_z {_f(model.beta_z)}")
        lines.append(f"tau {_f(model.tau)}")
        lines.append(f"alpha_x {_f(model.phase_variant.alpha_x)}")
        lines.append(f"r0 {_vec(model.r0)}")
        lines.append(f"goal {_vec(model.goal)}")
        _emit_layout(lines, model.forcing.layout)
        _emit_weights(lines, model.forcing.weights)
    elif isinstance(model, SpdDmp):
        lines.append("formulation spd")
        lines.append(f"size {model.size}")
        lines.append(f"alpha_z {_f(model.alpha_z)}")
        lines.append(f"beta_z {_f(model.beta_z)}")
        lines.append(f"tau {_f(model.tau)}")
        lines.append(f"alpha_x {_f(model.phase_variant.alpha_x)}")
        lines.append(f"x0 {_vec(model.x0)}")
        lines.append(f"goal {_vec(model.goal)}")
        lines.append(f"base {_vec(model.base)}")
        _emit_layout(lines, model.forcing.layout)
        _emit_weights(lines, model.forcing.weights)
    elif isinstance(model, OverlayDmp):
        lines.append("formulation overlay")
        lines.append(f"alpha_z {_f(model.alpha_z)}")
        lines.append(f"beta_z {_f(model.beta_z)}")
        lines.append(f"tau {_f(model.tau)}")
        lines.append(f"duration {_f(model.duration)}")
        lines.append("alpha_s none" if model.alpha_s is None
                     else f"alpha_s {_f(model.alpha_s)}")
        lines.append(f"y0 {_vec(model.y0)}")
        lines.append(f"anchor_times {_vec(model.goal_schedule.times)}")
        lines.append(f"anchors {model.goal_schedule.values.shape[0]} "
                     f"{model.goal_schedule.values.shape[1]}")
        for row in model.goal_schedule.values:
            lines.append(f"a {_vec(row)}")
        _emit_layout(lines, model.forcing.layout)
        _emit_weights(lines, model.forcing.weights)
    elif isinstance(model, OverlayQuaternionDmp):
        lines.append("formulation overlay_quaternion")
        lines.append(f"alpha_z {_f(model.alpha_z)}")
        lines.append(f"beta_z {_f(model.beta_z)}")
        lines.append(f"tau {_f(model.tau)}")
        lines.append(f"duration {_f(model.duration)}")
        lines.append("alpha_s none" if model.alpha_s is None
                     else f"alpha_s {_f(model.alpha_s)}")
        lines.append(f"q0 {_vec(model.q0)}")
        lines.append(f"anchor_times {_vec(model.goal_schedule.times)}")
        lines.append(f"anchors {model.goal_schedule.quats.shape[0]} 4")
        for row in model.goal_schedule.quats:
            lines.append(f"a {_vec(row)}")
        _emit_layout(lines, model.forcing.layout)
        _emit_weights(lines, model.forcing.weights)
    else:
        raise ParseError(f"cannot serialize {type(model).__name__}")
    return "\n".join(lines) + "\n"


class _Fields:
    """Parsed key/value view of a model file."""

    def __init__(self, text):
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ParseError("empty model file")
        head = lines[0].split()
        if len(head) != 2 or head[0] != MAGIC:
            raise ParseError("not a model file (bad magic line)")
        try:
            version = int(head[1])
        except ValueError as exc:
            raise ParseError("malformed format version") from exc
        if version != FORMAT_VERSION:
            raise ParseError(f"unsupported format version {version}")
        self.scalars = {}
        self.rows = []
        self.anchor_rows = []
        for ln in lines[1:]:
            key, _, rest = ln.partition(" ")
            if key == "w":
                self.rows.append(self._floats(rest))
            elif key == "a":
                self.anchor_rows.append(self._floats(rest))
            else:
                self.scalars[key] = rest
        if "formulation" not in self.scalars:
            raise ParseError("model file lacks a formulation")

    @staticmethod
    def _floats(rest):
        try:
            return np.array([float(tok) for tok in rest.split()])
        except ValueError as exc:
            raise ParseError("malformed numeric row") from exc

    def text(self, key):
        if key not in self.scalars:
            raise ParseError(f"missing field {key!r}")
        return self.scalars[key]

    def num(self, key):
        try:
            return float(self.text(key))
        except ValueError as exc:
            raise ParseError(f"malformed number in field {key!r}") from exc

    def vec(self, key):
        return self._floats(self.text(key))

    def weights(self):
        shape = self.text("weights").split()
        if len(shape) != 2:
            raise ParseError("malformed weights marker")
        n, m = int(shape[0]), int(shape[1])
        if len(self.rows) != n or any(r.size != m for r in self.rows):
            raise ParseError("weight rows disagree with the declared shape")
        return np.vstack(self.rows) if n else np.zeros((0, m))

    def layout(self):
        return KernelLayout(kind=self.text("layout"), centers=self.vec("centers"),
                            widths=self.vec("widths"))

    def anchors(self):
        shape = self.text("anchors").split()
        if len(shape) != 2:
            raise ParseError("malformed anchors marker")
        n, m = int(shape[0]), int(shape[1])
        if len(self.anchor_rows) != n or any(r.size != m for r in self.anchor_rows):
            raise ParseError("anchor rows disagree with the declared shape")
        return np.vstack(self.anchor_rows)


def parse_model(text):
    """Inverse of :func:`dump_model`."""
    f = _Fields(text)
    kind = f.text("formulation")
    if kind == "discrete":
        phase = f.text("phase")
        if phase == "exponential":
            ph = ExponentialPhase(f.num("alpha_x"))
        elif phase == "linear":
            ph = LinearPhase(duration=f.num("phase_duration"))
        else:
            raise ParseError(f"unknown phase kind {phase!r}")
        forcing = ForcingModel(layout=f.layout(), weights=f.weights(), r=f.num("r"))
        return DiscreteDmp(alpha_z=f.num("alpha_z"), beta_z=f.num("beta_z"),
                           tau=f.num("tau"), y0=f.vec("y0"), goal=f.vec("goal"),
                           forcing=forcing, variant=f.text("variant"),
                           phase_variant=ph)
    if kind == "periodic":
        forcing = ForcingModel(layout=f.layout(), weights=f.weights(), r=f.num("r"))
        return PeriodicDmp(alpha=f.num("alpha_z"), beta=f.num("beta_z"),
                           omega=f.num("omega"), anchor=f.vec("anchor"),
                           forcing=forcing)
    if kind == "quaternion":
        forcing = ForcingModel(layout=f.layout(), weights=f.weights())
        q0, goal = f.vec("q0"), f.vec("goal")
        _require_unit_quat(q0)
        _require_unit_quat(goal)
        return QuaternionDmp(alpha_z=f.num("alpha_z"), beta_z=f.num("beta_z"),
                             tau=f.num("tau"), q0=q0, goal=goal, forcing=forcing,
                             phase_variant=ExponentialPhase(f.num("alpha_x")))
    if kind == "rotation":
        forcing = ForcingModel(layout=f.layout(), weights=f.weights())
        return RotationDmp(alpha_z=f.num("alpha_z"), beta_z=f.num("beta_z"),
                           tau=f.num("tau"), r0=f.vec("r0").reshape(3, 3),
                           goal=f.vec("goal").reshape(3, 3), forcing=forcing,
                           phase_variant=ExponentialPhase(f.num("alpha_x")))
    if kind == "spd":
        m = int(f.num("size"))
        forcing = ForcingModel(layout=f.layout(), weights=f.weights())
        return SpdDmp(alpha_z=f.num("alpha_z"), beta_z=f.num("beta_z"),
                      tau=f.num("tau"), x0=f.vec("x0").reshape(m, m),
                      goal=f.vec("goal").reshape(m, m),
                      base=f.vec("base").reshape(m, m), forcing=forcing,
                      phase_variant=ExponentialPhase(f.num("alpha_x")))
    if kind == "overlay":
        forcing = ForcingModel(layout=f.layout(), weights=f.weights())
        alpha_s = None if f.text("alpha_s") == "none" else f.num("alpha_s")
        schedule = DelayedGoal(times=f.vec("anchor_times"), values=f.anchors())
        return OverlayDmp(alpha_z=f.num("alpha_z"), beta_z=f.num("beta_z"),
                          duration=f.num("duration"), y0=f.vec("y0"),
                          goal_schedule=schedule, forcing=forcing,
                          tau=f.num("tau"), alpha_s=alpha_s)
    if kind == "overlay_quaternion":
        forcing = ForcingModel(layout=f.layout(), weights=f.weights())
        alpha_s = None if f.text("alpha_s") == "none" else f.num("alpha_s")
        quats = f.anchors()
        for q in quats:
            _require_unit_quat(q)
        schedule = QuatDelayedGoal(times=f.vec("anchor_times"), quats=quats)
        q0 = f.vec("q0")
        _require_unit_quat(q0)
        return OverlayQuaternionDmp(alpha_z=f.num("alpha_z"), beta_z=f.num("beta_z"),
                                    duration=f.num("duration"), q0=q0,
                                    goal_schedule=schedule, forcing=forcing,
                                    tau=f.num("tau"), alpha_s=alpha_s)
    raise ParseError(f"unknown formulation {kind!r}")


def _require_unit_quat(q, tol=1e-6):
    q = np.asarray(q, dtype=float)
    if q.shape != (4,) or abs(np.linalg.norm(q) - 1.0) > tol:
        raise InvariantViolation("quaternion entries must be unit norm "
                                 f"(drift above {tol:g})")


def save_model(model, path):
    with open(path, "w") as fh:
        fh.write(dump_model(model))


def load_model(path):
    with open(path) as fh:
        return parse_model(fh.read())


# ---------------------------------------------------------------------------
# trajectory CSV
# ---------------------------------------------------------------------------

def _flatten(kind, values):
    if kind == REAL:
        return np.atleast_2d(values) if values.ndim > 1 else values[:, None]
    if kind == QUATERNION:
        return values
    if kind in (ROTATION, SPD):
        if kind == ROTATION:
            return values.reshape(values.shape[0], 9)
        return np.array([manifold.mandel_vec(v) for v in values])
    raise ParseError(f"unknown trajectory kind {kind!r}")


def _header(kind, width):
    if kind == REAL:
        return ["time"] + [f"y{i + 1}" for i in range(width)]
    if kind == QUATERNION:
        return ["time", "qw", "qx", "qy", "qz"]
    if kind == ROTATION:
        return ["time"] + [f"r{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)]
    return ["time"] + [f"m{i + 1}" for i in range(width)]


def dump_trajectory(traj):
    """Serialize a trajectory (or demonstration) to CSV text."""
    kind = traj.kind
    values = np.asarray(traj.values, dtype=float)
    if kind == REAL and values.ndim == 1:
        values = values[:, None]
    flat = _flatten(kind, values)
    lines = [",".join(_header(kind, flat.shape[1]))]
    for t, row in zip(traj.times, flat):
        lines.append(",".join([_f(t)] + [_f(v) for v in row]))
    return "\n".join(lines) + "\n"


def save_trajectory(traj, path):
    with open(path, "w") as fh:
        fh.write(dump_trajectory(traj))


def parse_trajectory(text):
    """Parse trajectory CSV into a demonstration, inferring the state space.

    Geometric columns are checked against the invariants of their space:
    quaternion rows are renormalized when the norm drift stays below 1e-6 and
    rejected otherwise, rotation rows must be orthonormal with unit
    determinant to the same drift, and matrix rows must decode to symmetric
    positive-definite matrices.  Errors carry the 1-based line number.
    """
    numbered = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())
                if ln.strip()]
    if len(numbered) < 2:
        raise ParseError("trajectory file needs a header and at least one row")
    header = [h.strip() for h in numbered[0][1].split(",")]
    if not header or header[0] != "time":
        raise ParseError("line 1: first column must be time")
    cols = header[1:]
    if not cols:
        raise ParseError("line 1: trajectory file has no value columns")
    if cols == ["qw", "qx", "qy", "qz"]:
        kind = QUATERNION
    elif all(c.startswith("r") for c in cols) and len(cols) == 9:
        kind = ROTATION
    elif all(c.startswith("m") for c in cols):
        kind = SPD
    elif all(c.startswith("y") for c in cols):
        kind = REAL
    else:
        raise ParseError("line 1: unrecognized trajectory columns")
    rows = []
    linenos = []
    for lineno, ln in numbered[1:]:
        toks = ln.split(",")
        if len(toks) != len(header):
            raise ParseError(f"line {lineno}: row width disagrees with the header")
        try:
            rows.append([float(tok) for tok in toks])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: malformed numeric value") from exc
        linenos.append(lineno)
    data = np.array(rows)
    finite = np.all(np.isfinite(data), axis=1)
    if not np.all(finite):
        bad = linenos[int(np.argmin(finite))]
        raise ParseError(f"line {bad}: trajectory contains nonfinite values")
    times = data[:, 0]
    body = data[:, 1:]
    if kind == REAL:
        values = body
    elif kind == QUATERNION:
        norms = np.linalg.norm(body, axis=1)
        drift = np.abs(norms - 1.0)
        if np.any(drift > 1e-6):
            bad = linenos[int(np.argmax(drift > 1e-6))]
            raise InvariantViolation(
                f"line {bad}: quaternion row norm drifts by more than 1e-6")
        values = body / norms[:, None]
    elif kind == ROTATION:
        values = body.reshape(-1, 3, 3)
        for lineno, r in zip(linenos, values):
            drift = np.max(np.abs(r.T @ r - np.eye(3)))
            if drift > 1e-6 or abs(np.linalg.det(r) - 1.0) > 1e-6:
                raise InvariantViolation(
                    f"line {lineno}: rotation row is not orthonormal with "
                    "unit determinant (drift above 1e-6)")
    else:
        try:
            values = np.array([manifold.mandel_mat(row) for row in body])
        except DimensionMismatch as exc:
            raise ParseError(
                "line 1: matrix column count is not a triangular number") from exc
        for lineno, x in zip(linenos, values):
            if np.linalg.eigvalsh(x)[0] <= 0.0:
                raise InvariantViolation(
                    f"line {lineno}: matrix row is not positive definite")
    return Demonstration(times=times, values=values, kind=kind)


def load_trajectory(path):
    with open(path) as fh:
        return parse_trajectory(fh.read())


# ---------------------------------------------------------------------------
# model libraries
# ---------------------------------------------------------------------------

INDEX_NAME = "index.txt"


def save_library(library, directory):
    """Write a library as one model file per entry plus an index.

    The index maps each entry to its label, file name and (possibly empty)
    query point, one whitespace-separated line per entry.
    """
    os.makedirs(directory, exist_ok=True)
    lines = []
    for i, entry in enumerate(library.entries):
        fname = f"entry_{i:03d}.model"
        save_model(entry.model, os.path.join(directory, fname))
        q = np.asarray(entry.query, dtype=float).reshape(-1)
        tail = (" " + _vec(q)) if q.size else ""
        lines.append(f"{entry.label} {fname}{tail}")
    with open(os.path.join(directory, INDEX_NAME), "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_library(directory):
    """Inverse of :func:`save_library`."""
    index = os.path.join(directory, INDEX_NAME)
    if not os.path.isfile(index):
        raise ParseError(f"library directory lacks {INDEX_NAME}")
    library = ModelLibrary()
    with open(index) as fh:
        for lineno, ln in enumerate(fh, start=1):
            if not ln.strip():
                continue
            toks = ln.split()
            if len(toks) < 2:
                raise ParseError(
                    f"{INDEX_NAME} line {lineno}: need a label and a file name")
            label, fname = toks[0], toks[1]
            try:
                query = np.array([float(t) for t in toks[2:]])
            except ValueError as exc:
                raise ParseError(
                    f"{INDEX_NAME} line {lineno}: malformed query point") from exc
            model = load_model(os.path.join(directory, fname))
            library.add(model, query, label)
    return library
