"""Canonical systems that replace explicit time in the movement equations.

Four variants are provided:

* ``ExponentialPhase``: x decays from 1 toward 0, optionally slowed by a
  tracking-error feedback term (phase stopping).
* ``SigmoidalPhase``: stays near 1 for most of the motion, then drops
  sharply around the nominal end time.
* ``LinearPhase``: falls linearly from 1 and clamps at exactly 0.
* ``PeriodicPhase``: a monotonically growing angle for rhythmic motions.

States are immutable; ``step_phase`` returns a fresh state.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgument, InvalidStep


@dataclass(frozen=True)
class ExponentialPhase:
    """Decay rate ``alpha_x``; by default x(tau) is about 1e-3."""

    alpha_x: float = float(np.log(1000.0))


@dataclass(frozen=True)
class SigmoidalPhase:
    """Logistic drop centered at ``tau * duration``.

    ``alpha_s`` sets the steepness in 1/s; when None it defaults to
    ``40 / (tau * duration)`` which keeps the drop sharp but resolvable at
    usual sampling rates.
    """

    duration: float
    alpha_s: float | None = None


@dataclass(frozen=True)
class LinearPhase:
    """Straight line from 1 at t=0 to 0 at t = tau * duration, clamped."""

    duration: float


@dataclass(frozen=True)
class PeriodicPhase:
    """Angle advancing at rate 1/tau rad/s; never finishes on its own."""


@dataclass(frozen=True)
class StopFeedback:
    """Phase-stopping signal: ``gain`` times the norm of a tracking error."""

    gain: float = 0.0
    error: float = 0.0


@dataclass(frozen=True)
class CanonicalState:
    """Current phase value plus the data needed to advance it."""

    variant: object
    tau: float
    value: float
    elapsed: float = 0.0


def make_phase(variant, tau):
    """Fresh canonical state at t=0 for the given variant and time scale."""
    if tau <= 0.0 or not np.isfinite(tau):
        raise InvalidArgument("tau must be positive and finite")
    if isinstance(variant, PeriodicPhase):
        return CanonicalState(variant=variant, tau=float(tau), value=0.0)
    return CanonicalState(variant=variant, tau=float(tau), value=_closed_form(variant, float(tau), 0.0))


def _sigmoid_rate(variant, tau):
    if variant.alpha_s is not None:
        return variant.alpha_s
    return 40.0 / (tau * variant.duration)


def _closed_form(variant, tau, t):
    if isinstance(variant, ExponentialPhase):
        return float(np.exp(-variant.alpha_x * t / tau))
    if isinstance(variant, SigmoidalPhase):
        a = _sigmoid_rate(variant, tau)
        z = a * (t - tau * variant.duration)
        # stable logistic on both tails
        if z >= 0.0:
            return float(np.exp(-z) / (1.0 + np.exp(-z)))
        return float(1.0 / (1.0 + np.exp(z)))
    if isinstance(variant, LinearPhase):
        return float(max(0.0, 1.0 - t / (tau * variant.duration)))
    raise InvalidArgument(f"unknown phase variant {variant!r}")


def step_phase(state, dt, stop=None):
    """Advance the phase by ``dt`` seconds and return the new state.

    Only the exponential variant reacts to ``stop``: its decay slows by the
    factor ``1 + gain * error`` so the phase waits for a lagging system.
    The exponential update is exact for frozen feedback, so the integrated
    phase matches the closed-form decay at any step size.
    """
    if dt <= 0.0 or not np.isfinite(dt):
        raise InvalidStep("dt must be positive and finite")
    t = state.elapsed + dt
    v = state.variant
    if isinstance(v, ExponentialPhase):
        brake = 1.0
        if stop is not None:
            if stop.gain < 0.0 or stop.error < 0.0:
                raise InvalidArgument("stop feedback gain and error must be nonnegative")
            brake = 1.0 + stop.gain * stop.error
        value = state.value * float(np.exp(-v.alpha_x * dt / (state.tau * brake)))
        return replace(state, value=value, elapsed=t)
    if isinstance(v, PeriodicPhase):
        return replace(state, value=state.value + dt / state.tau, elapsed=t)
    return replace(state, value=_closed_form(v, state.tau, t), elapsed=t)


def phase_done(state, threshold=1e-3):
    """True once a decaying phase has dropped to the threshold.

    Periodic phases never finish.
    """
    if threshold <= 0.0:
        raise InvalidArgument("threshold must be positive")
    if isinstance(state.variant, PeriodicPhase):
        return False
    return state.value <= threshold


def phase_angle(state):
    """Periodic phase folded into [0, 2 pi)."""
    return float(np.mod(state.value, 2.0 * np.pi))
