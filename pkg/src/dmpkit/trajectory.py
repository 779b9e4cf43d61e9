"""Plain containers for demonstrated and generated motions."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDemo, DimensionMismatch, InvalidArgument

REAL = "real"
QUATERNION = "quaternion"
ROTATION = "rotation"
SPD = "spd"

KINDS = (REAL, QUATERNION, ROTATION, SPD)


def _check_times(times):
    t = np.asarray(times, dtype=float)
    if t.ndim != 1:
        raise DimensionMismatch("times must be a vector")
    if t.size >= 2 and not np.all(np.diff(t) > 0.0):
        raise InvalidArgument("times must increase strictly")
    return t


@dataclass
class Demonstration:
    """Recorded motion: sample times plus values on the relevant space.

    ``values`` has shape (T, J) for real-valued motions, (T, 4) for unit
    quaternions, (T, 3, 3) for rotation matrices, and (T, m, m) for SPD
    matrices.  ``vel``/``acc`` hold tangent-space derivatives once
    estimated; geometric kinds store them as (T, 3) rotation rates or
    (T, m(m+1)/2) flattened tangents.
    """

    times: np.ndarray
    values: np.ndarray
    kind: str = REAL
    vel: np.ndarray | None = None
    acc: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown demonstration kind {self.kind!r}")
        self.times = _check_times(self.times)
        v = np.asarray(self.values, dtype=float)
        if self.kind == REAL and v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != self.times.size:
            raise DimensionMismatch("values and times disagree in length")
        if self.kind == QUATERNION and v.shape[1:] != (4,):
            raise DimensionMismatch("quaternion demos need (T, 4) values")
        if self.kind == ROTATION and v.shape[1:] != (3, 3):
            raise DimensionMismatch("rotation demos need (T, 3, 3) values")
        if self.kind == SPD and (v.ndim != 3 or v.shape[1] != v.shape[2]):
            raise DimensionMismatch("SPD demos need (T, m, m) values")
        if self.times.size < 3:
            raise DegenerateDemo("a demonstration needs at least three samples")
        self.values = v

    def __len__(self):
        return self.times.size

    @property
    def duration(self):
        if len(self) < 2:
            raise DegenerateDemo("demonstration needs at least two samples")
        return float(self.times[-1] - self.times[0])


@dataclass
class Trajectory:
    """Generated motion, sampled on a uniform or event-driven time grid."""

    times: np.ndarray
    values: np.ndarray
    kind: str = REAL
    velocities: np.ndarray | None = None
    phases: np.ndarray | None = None
    events: list = field(default_factory=list)

    def __post_init__(self):
        self.times = _check_times(self.times)
        self.values = np.asarray(self.values, dtype=float)

    def __len__(self):
        return self.times.size
