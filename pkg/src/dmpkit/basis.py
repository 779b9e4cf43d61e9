"""Kernel layouts and the nonlinear forcing term.

A layout is a bank of scalar kernels over the phase (or normalized time, or
a cyclic angle).  The forcing term is the normalized weighted sum of kernel
activations times a gate: the phase value for point-to-point motions, the
amplitude parameter for rhythmic ones, the sigmoid value for time-indexed
banks.  The same row that evaluates the forcing also serves as the
regression row during learning, so fitting and playback share one code path.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidArgument

GAUSSIAN_PHASE = "gaussian_phase"
GAUSSIAN_TIME = "gaussian_time"
VON_MISES = "von_mises"

_KINDS = (GAUSSIAN_PHASE, GAUSSIAN_TIME, VON_MISES)

# below this total activation the normalized row is defined as zero
_ACTIVATION_FLOOR = 1e-300


@dataclass(frozen=True)
class KernelLayout:
    """Kernel bank: kind tag plus per-kernel centers and widths.

    ``widths`` holds precisions for ``gaussian_phase`` and ``von_mises``
    kernels and standard deviations for ``gaussian_time`` kernels.
    """

    kind: str
    centers: np.ndarray
    widths: np.ndarray

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidArgument(f"unknown kernel kind {self.kind!r}")
        c = np.asarray(self.centers, dtype=float)
        w = np.asarray(self.widths, dtype=float)
        if c.ndim != 1 or w.shape != c.shape:
            raise DimensionMismatch("centers and widths must be equal-length vectors")
        if c.size < 2:
            raise InvalidArgument("at least two kernels are required")
        if np.any(w <= 0.0):
            raise InvalidArgument("kernel widths must be positive")
        d = np.diff(c)
        if self.kind == GAUSSIAN_PHASE and not np.all(d < 0.0):
            raise InvalidArgument("phase kernel centers must decrease strictly")
        if self.kind == VON_MISES and not np.all(d > 0.0):
            raise InvalidArgument("centers must increase strictly")
        # time-indexed banks may carry coincident centers: merging stacks
        # the junction kernels of adjacent segments at the same instant
        if self.kind == GAUSSIAN_TIME and not np.all(d >= 0.0):
            raise InvalidArgument("centers must not decrease")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "widths", w)

    @property
    def n(self):
        return self.centers.size


def default_layout(kind, n, alpha_x=float(np.log(1000.0)), spacing="exponential"):
    """Standard kernel bank of size ``n`` for the given kind.

    Phase kernels are centered at the phase values an exponential decay with
    rate ``alpha_x`` visits at equally spaced times (or spaced uniformly in
    phase when ``spacing="uniform"``, which suits the linear phase).  Widths
    tie to the gap to the next center so neighboring kernels overlap evenly.
    """
    if n < 2:
        raise InvalidArgument("at least two kernels are required")
    if kind == GAUSSIAN_PHASE:
        i = np.arange(n, dtype=float)
        if spacing == "exponential":
            centers = np.exp(-alpha_x * i / (n - 1.0))
        elif spacing == "uniform":
            centers = np.linspace(1.0, np.exp(-alpha_x), n)
        else:
            raise InvalidArgument(f"unknown spacing {spacing!r}")
        gaps = np.diff(centers)
        widths = np.empty(n)
        widths[:-1] = 1.0 / gaps**2
        widths[-1] = widths[-2]
        return KernelLayout(kind=kind, centers=centers, widths=widths)
    if kind == GAUSSIAN_TIME:
        centers = np.linspace(0.0, 1.0, n)
        widths = np.full(n, 1.0 / (2.0 * (n - 1.0)))
        return KernelLayout(kind=kind, centers=centers, widths=widths)
    if kind == VON_MISES:
        centers = 2.0 * np.pi * np.arange(n, dtype=float) / n
        widths = np.full(n, 2.5 * n**2 / (2.0 * np.pi) ** 2)
        return KernelLayout(kind=kind, centers=centers, widths=widths)
    raise InvalidArgument(f"unknown kernel kind {kind!r}")


def kernel_values(layout, s):
    """Raw kernel activations at scalar coordinate ``s``."""
    c = layout.centers
    w = layout.widths
    if layout.kind == GAUSSIAN_PHASE:
        return np.exp(-w * (s - c) ** 2)
    if layout.kind == GAUSSIAN_TIME:
        return np.exp(-((s - c) ** 2) / (2.0 * w**2))
    return np.exp(w * (np.cos(s - c) - 1.0))


def basis_row(layout, s, gate=1.0):
    """Normalized activation row times the gate.

    This is both the forcing regressor and the evaluation row.  When the
    total activation underflows the row is identically zero, which silences
    the forcing term far outside the kernel support.
    """
    psi = kernel_values(layout, s)
    total = psi.sum()
    if total < _ACTIVATION_FLOOR:
        return np.zeros(layout.n)
    return psi * (gate / total)


@dataclass
class ForcingModel:
    """Kernel layout plus learned weights (one column per output dimension).

    ``r`` is the amplitude gate used by cyclic forcing terms; point-to-point
    terms leave it at 1 and gate by phase instead.  ``residual`` optionally
    records the per-dimension RMS fit error of the last regression; it is
    informational and never serialized.
    """

    layout: KernelLayout
    weights: np.ndarray
    r: float = 1.0
    residual: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim == 1:
            w = w[:, None]
        if w.shape[0] != self.layout.n:
            raise DimensionMismatch("weight rows must match the kernel count")
        self.weights = w

    @property
    def n_dims(self):
        return self.weights.shape[1]


def eval_forcing(model, s, gate=None):
    """Forcing vector at coordinate ``s``.

    The default gate is the coordinate itself for phase kernels and ``r``
    for cyclic kernels; time-indexed banks have no natural default and the
    caller must pass the gate (the sigmoid phase value).
    """
    if gate is None:
        if model.layout.kind == GAUSSIAN_PHASE:
            gate = s
        elif model.layout.kind == VON_MISES:
            gate = model.r
        else:
            raise InvalidArgument("time-indexed kernels need an explicit gate")
    return basis_row(model.layout, s, gate) @ model.weights
