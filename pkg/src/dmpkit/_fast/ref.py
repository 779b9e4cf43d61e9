"""Pure numpy reference implementation of the hot kernels.

The compiled extension in ``_core.pyx`` mirrors these functions operation
for operation; tests hold the two backends to near bit-level agreement.
"""

import numpy as np

BACKEND = "pure"

_ACTIVATION_FLOOR = 1e-300

_CLASSICAL, _SCALE, _PASTOR = 0, 1, 2


def forcing_value(centers, widths, weights, x):
    """Phase-gated normalized radial forcing, one value per weight column."""
    psi = np.exp(-widths * (x - centers) ** 2)
    total = psi.sum()
    if total < _ACTIVATION_FLOOR:
        return np.zeros(weights.shape[1])
    return (psi / total * x) @ weights


def discrete_rollout(y0, g, centers, widths, weights, alpha_z, beta_z,
                     alpha_x, tau, dt, n_steps, variant):
    """Integrate the point-to-point system on an exponential phase.

    Semi-implicit Euler: the scaled velocity updates first and the new value
    drives the position update; the phase advances by its exact decay factor.
    Returns positions, velocities, and phase values on the closed grid of
    ``n_steps + 1`` samples.
    """
    y0 = np.asarray(y0, dtype=float)
    g = np.asarray(g, dtype=float)
    ndim = y0.size
    ys = np.empty((n_steps + 1, ndim))
    vs = np.empty((n_steps + 1, ndim))
    xs = np.empty(n_steps + 1)
    y = y0.copy()
    z = np.zeros(ndim)
    x = 1.0
    decay = np.exp(-alpha_x * dt / tau)
    ys[0], vs[0], xs[0] = y, z / tau, x
    for k in range(1, n_steps + 1):
        f = forcing_value(centers, widths, weights, x)
        if variant == _CLASSICAL:
            zdot = alpha_z * (beta_z * (g - y) - z) + f
        elif variant == _SCALE:
            zdot = alpha_z * (beta_z * (g - y) - z) + (g - y0) * f
        elif variant == _PASTOR:
            zdot = alpha_z * (beta_z * (g - y - (g - y0) * x + f) - z)
        else:
            raise ValueError(f"unknown variant code {variant}")
        z = z + dt / tau * zdot
        y = y + dt / tau * z
        x = x * decay
        ys[k], vs[k], xs[k] = y, z / tau, x
    return ys, vs, xs
