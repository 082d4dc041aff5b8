"""Compiled RK4 loop for the built-in separable objective family.

The generic integrator in :mod:`gdadlab.integrate` is the reference path;
this module only accelerates it for problems that carry family coefficients.
Falls back cleanly (HAVE_NUMBA = False) if numba is unavailable.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap


DIVERGENCE_LIMIT = 1e12


@njit(cache=True, nogil=True)
def _field(z, m, n, qx, tx, b, qy, ty, alpha, beta, out):
    for i in range(m):
        u = z[i]
        g = qx * u
        if tx != 0.0:
            s = np.sin(u)
            g += tx * (2.0 * u * s * s + u * u * np.sin(2.0 * u))
        if b != 0.0:
            g += b * z[m + i]
        out[i] = -alpha * g
    for j in range(n):
        u = z[m + j]
        g = -qy * u
        if ty != 0.0:
            s = np.sin(u)
            g -= ty * (2.0 * u * s * s + u * u * np.sin(2.0 * u))
        if b != 0.0:
            g += b * z[j]
        out[m + j] = beta * g


@njit(cache=True, nogil=True)
def rk4_family(z0, m, n, qx, tx, b, qy, ty, alpha, beta, dt, n_steps,
               record_every, rec):
    """Fixed-step classical RK4 over n_steps; records into ``rec`` at step 0,
    every ``record_every`` steps, and the final step.

    Returns (diverged_at_step, recorded_count); diverged_at_step is 0 on
    success.
    """
    d = z0.shape[0]
    z = z0.copy()
    k1 = np.empty(d)
    k2 = np.empty(d)
    k3 = np.empty(d)
    k4 = np.empty(d)
    tmp = np.empty(d)
    rec[0, :] = z
    ri = 1
    for step in range(1, n_steps + 1):
        _field(z, m, n, qx, tx, b, qy, ty, alpha, beta, k1)
        for i in range(d):
            tmp[i] = z[i] + 0.5 * dt * k1[i]
        _field(tmp, m, n, qx, tx, b, qy, ty, alpha, beta, k2)
        for i in range(d):
            tmp[i] = z[i] + 0.5 * dt * k2[i]
        _field(tmp, m, n, qx, tx, b, qy, ty, alpha, beta, k3)
        for i in range(d):
            tmp[i] = z[i] + dt * k3[i]
        _field(tmp, m, n, qx, tx, b, qy, ty, alpha, beta, k4)
        ok = True
        for i in range(d):
            z[i] = z[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if not np.isfinite(z[i]) or abs(z[i]) > DIVERGENCE_LIMIT:
                ok = False
        if step % record_every == 0 or step == n_steps:
            rec[ri, :] = z
            ri += 1
        if not ok:
            return step, ri
    return 0, ri
