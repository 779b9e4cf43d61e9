"""Rhythmic movement system on a cyclic phase.

A limit-cycle attractor: the state oscillates around an anchor point, the
forcing term is periodic in the phase angle, and the base frequency scales
every rate so retuning it replays the same cycle faster or slower.  The
amplitude parameter ``r`` gates the forcing linearly.

Weights come either from a joint batch regression (exact when the demo was
produced by the same model class) or from the independent per-kernel
recursive rule, which is the form suitable for online use.
"""

from dataclasses import dataclass, replace

import numpy as np

from .basis import VON_MISES, ForcingModel, basis_row, default_layout, eval_forcing, kernel_values
from .errors import DegenerateDemo, DimensionMismatch, InvalidArgument, InvalidStep
from .learning import batch_fit, estimate_derivatives, recursive_fit_step, recursive_init
from .phase import CanonicalState, PeriodicPhase, make_phase, step_phase
from .trajectory import REAL, Demonstration, Trajectory

DEFAULT_ALPHA = 25.0
DEFAULT_BETA = 6.25


@dataclass(frozen=True)
class PeriodicDmp:
    """Parameters of one rhythmic movement model."""

    alpha: float
    beta: float
    omega: float
    anchor: np.ndarray
    forcing: ForcingModel

    def __post_init__(self):
        if self.omega <= 0.0:
            raise InvalidArgument("base frequency must be positive")
        object.__setattr__(self, "anchor", np.atleast_1d(np.asarray(self.anchor, dtype=float)))
        if self.forcing.n_dims != self.anchor.size:
            raise DimensionMismatch("forcing columns must match the movement dimension")

    @property
    def n_dims(self):
        return self.anchor.size


@dataclass(frozen=True)
class PeriodicState:
    """Oscillator state: position, scaled velocity, cyclic phase."""

    y: np.ndarray
    z: np.ndarray
    phase: CanonicalState

    @property
    def omega(self):
        return 1.0 / self.phase.tau

    @property
    def velocity(self):
        return self.z * self.omega


def init_state(pdmp, y0=None, z0=None, omega=None, phi0=0.0):
    """Initial oscillator state; frequency and entry point may be overridden."""
    w = pdmp.omega if omega is None else float(omega)
    if w <= 0.0:
        raise InvalidArgument("base frequency must be positive")
    y = pdmp.anchor.copy() if y0 is None else np.atleast_1d(np.asarray(y0, dtype=float))
    z = np.zeros_like(y) if z0 is None else np.atleast_1d(np.asarray(z0, dtype=float))
    if y.shape != pdmp.anchor.shape or z.shape != y.shape:
        raise DimensionMismatch("state shape does not match the model")
    ph = make_phase(PeriodicPhase(), 1.0 / w)
    if phi0:
        ph = replace(ph, value=float(phi0))
    return PeriodicState(y=y, z=z, phase=ph)


def step(pdmp, state, dt, r=None, zdot_extra=None, ydot_extra=None):
    """One semi-implicit Euler step of the oscillator."""
    if dt <= 0.0 or not np.isfinite(dt):
        raise InvalidStep("dt must be positive and finite")
    w = state.omega
    gate = pdmp.forcing.r if r is None else float(r)
    f = eval_forcing(pdmp.forcing, state.phase.value, gate=gate)
    inner = pdmp.alpha * (pdmp.beta * (pdmp.anchor - state.y) - state.z) + f
    if zdot_extra is not None:
        inner = inner + zdot_extra
    z = state.z + dt * w * inner
    yrate = z if ydot_extra is None else z + ydot_extra
    y = state.y + dt * w * yrate
    return replace(state, y=y, z=z, phase=step_phase(state.phase, dt))


def rollout(pdmp, dt=0.01, duration=None, y0=None, z0=None, omega=None,
            r=None, phi0=0.0):
    """Integrate the oscillator for a fixed duration (default five cycles)."""
    state = init_state(pdmp, y0=y0, z0=z0, omega=omega, phi0=phi0)
    if duration is None:
        duration = 5.0 * 2.0 * np.pi / state.omega
    n = max(1, int(round(duration / dt)))
    times = dt * np.arange(n + 1)
    ys = np.empty((n + 1, pdmp.n_dims))
    vs = np.empty((n + 1, pdmp.n_dims))
    phis = np.empty(n + 1)
    ys[0], vs[0], phis[0] = state.y, state.velocity, state.phase.value
    for k in range(1, n + 1):
        state = step(pdmp, state, dt, r=r)
        ys[k], vs[k], phis[k] = state.y, state.velocity, state.phase.value
    return Trajectory(times=times, values=ys, velocities=vs, phases=phis)


def infer_frequency(demo):
    """Dominant angular frequency of a demo, from the padded power spectrum.

    Works well when the recording covers at least a couple of cycles; for
    anything marginal, pass the frequency explicitly instead.
    """
    y = demo.values - demo.values.mean(axis=0)
    if len(demo) < 8:
        raise DegenerateDemo("too few samples to estimate a base frequency")
    dt = float(np.mean(np.diff(demo.times)))
    n_pad = 8 * len(demo)
    power = np.abs(np.fft.rfft(y, n=n_pad, axis=0)) ** 2
    spectrum = power.sum(axis=1)
    spectrum[0] = 0.0
    k = int(np.argmax(spectrum))
    if k == 0 or spectrum[k] <= 0.0:
        raise DegenerateDemo("demo has no dominant oscillation")
    # parabolic refinement around the peak bin
    if 1 <= k < spectrum.size - 1:
        a, b, c = spectrum[k - 1], spectrum[k], spectrum[k + 1]
        denom = a - 2.0 * b + c
        if denom != 0.0:
            k = k + 0.5 * (a - c) / denom
    freq = k / (n_pad * dt)
    return float(2.0 * np.pi * freq)


def forcing_target_periodic(demo, alpha, beta, omega, anchor):
    """Forcing values a demo demands from the oscillator dynamics."""
    if demo.vel is None or demo.acc is None:
        demo = estimate_derivatives(demo)
    y = demo.values - anchor
    return demo.acc / omega**2 - alpha * (beta * (-y) - demo.vel / omega)


def train_periodic(demo, n_kernels=20, alpha=DEFAULT_ALPHA, beta=DEFAULT_BETA,
                   omega=None, r=1.0, method="batch", lam=1.0, passes=3):
    """Fit a rhythmic model to one demonstration.

    ``method="batch"`` solves the joint normalized regression;
    ``method="recursive"`` runs the independent per-kernel rule for
    ``passes`` sweeps over the demo, which is the online-capable variant.
    """
    if not isinstance(demo, Demonstration) or demo.kind != REAL:
        raise InvalidArgument("train_periodic expects a real-valued demonstration")
    if r <= 0.0:
        raise InvalidArgument("amplitude gate must be positive")
    demo = estimate_derivatives(demo)
    w = infer_frequency(demo) if omega is None else float(omega)
    anchor = demo.values.mean(axis=0)
    phis = w * (demo.times - demo.times[0])
    targets = forcing_target_periodic(demo, alpha, beta, w, anchor)
    layout = default_layout(VON_MISES, n_kernels)
    if method == "batch":
        model = batch_fit(layout, phis, np.full_like(phis, r), targets, r=r)
    elif method == "recursive":
        state = recursive_init(n_kernels, targets.shape[1], lam=lam, per_kernel=True)
        for _ in range(max(1, passes)):
            for phi, f_d in zip(phis, targets):
                state = recursive_fit_step(state, kernel_values(layout, phi), f_d, gate=r)
        model = ForcingModel(layout=layout, weights=state.weights, r=r)
    else:
        raise InvalidArgument(f"unknown method {method!r}")
    return PeriodicDmp(alpha=alpha, beta=beta, omega=w, anchor=anchor, forcing=model)
