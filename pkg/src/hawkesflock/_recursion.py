"""Numba kernels for the O(n) intensity recursion used by the likelihood.

The recursion tracks the excess of each intensity component over its base
level; between events the excess decays exponentially, at events it jumps by
the state-dependent column of the jump matrix.  The flocking gates depend only
on the observed price path, so the per-event sign of C1 - C2 is precomputed
once per stream and passed in.
"""

import math

import numpy as np
from numba import njit

NEG_INF = -np.inf


@njit(cache=True)
def loglik_core(times, marks, signs, horizon, theta):
    """Exact log-likelihood: sum of log left-limit intensities at the events
    minus the closed-form integral of the total intensity over (0, horizon].

    theta layout: mu1, beta1, a1s, a1c, a1n, a1w, mu2, beta2, a2s, a2c, a2n, a2w.
    Returns -inf when the parameters put the intensity path outside its domain:
    either an event fires where its component intensity is nonpositive, or a
    negative jump drags any component below zero between events (in which case
    the compensator would otherwise hand out spurious credit).
    """
    mu1, be1 = theta[0], theta[1]
    a1s, a1c, a1n, a1w = theta[2], theta[3], theta[4], theta[5]
    mu2, be2 = theta[6], theta[7]
    a2s, a2c, a2n, a2w = theta[8], theta[9], theta[10], theta[11]

    n = times.shape[0]
    ll = 0.0
    integral = 0.0
    # Excess over the base level for the four components.
    r1u = 0.0
    r1d = 0.0
    r2u = 0.0
    r2d = 0.0
    t_prev = 0.0

    for k in range(n):
        dt = times[k] - t_prev
        e1 = math.exp(-be1 * dt)
        e2 = math.exp(-be2 * dt)
        g1 = -math.expm1(-be1 * dt) / be1
        g2 = -math.expm1(-be2 * dt) / be2
        integral += 2.0 * (mu1 + mu2) * dt + (r1u + r1d) * g1 + (r2u + r2d) * g2

        r1u *= e1
        r1d *= e1
        r2u *= e2
        r2d *= e2

        m = marks[k]
        if m == 0:
            lam = mu1 + r1u
        elif m == 1:
            lam = mu1 + r1d
        elif m == 2:
            lam = mu2 + r2u
        else:
            lam = mu2 + r2d
        if lam <= 0.0:
            return NEG_INF
        ll += math.log(lam)

        s = signs[k]
        if m == 0:
            r1u += a1s
            r1d += a1c
            if s > 0:
                r2u += a2w
            elif s < 0:
                r2d += a2n
        elif m == 1:
            r1u += a1c
            r1d += a1s
            if s > 0:
                r2u += a2n
            elif s < 0:
                r2d += a2w
        elif m == 2:
            if s < 0:
                r1u += a1w
            elif s > 0:
                r1d += a1n
            r2u += a2s
            r2d += a2c
        else:
            if s < 0:
                r1u += a1n
            elif s > 0:
                r1d += a1w
            r2u += a2c
            r2d += a2s
        if mu1 + r1u < 0.0 or mu1 + r1d < 0.0 or mu2 + r2u < 0.0 or mu2 + r2d < 0.0:
            return NEG_INF
        t_prev = times[k]

    dt = horizon - t_prev
    g1 = -math.expm1(-be1 * dt) / be1
    g2 = -math.expm1(-be2 * dt) / be2
    integral += 2.0 * (mu1 + mu2) * dt + (r1u + r1d) * g1 + (r2u + r2d) * g2

    return ll - integral


@njit(cache=True)
def compensator_core(times, marks, signs, horizon, theta):
    """Cumulative total compensator evaluated at each event time.

    Differences of consecutive entries are the time-rescaling residuals of the
    merged process; an extra final entry gives the value at the horizon.
    """
    mu1, be1 = theta[0], theta[1]
    a1s, a1c, a1n, a1w = theta[2], theta[3], theta[4], theta[5]
    mu2, be2 = theta[6], theta[7]
    a2s, a2c, a2n, a2w = theta[8], theta[9], theta[10], theta[11]

    n = times.shape[0]
    out = np.empty(n + 1)
    integral = 0.0
    r1u = 0.0
    r1d = 0.0
    r2u = 0.0
    r2d = 0.0
    t_prev = 0.0

    for k in range(n):
        dt = times[k] - t_prev
        e1 = math.exp(-be1 * dt)
        e2 = math.exp(-be2 * dt)
        g1 = -math.expm1(-be1 * dt) / be1
        g2 = -math.expm1(-be2 * dt) / be2
        integral += 2.0 * (mu1 + mu2) * dt + (r1u + r1d) * g1 + (r2u + r2d) * g2
        out[k] = integral

        r1u *= e1
        r1d *= e1
        r2u *= e2
        r2d *= e2

        m = marks[k]
        s = signs[k]
        if m == 0:
            r1u += a1s
            r1d += a1c
            if s > 0:
                r2u += a2w
            elif s < 0:
                r2d += a2n
        elif m == 1:
            r1u += a1c
            r1d += a1s
            if s > 0:
                r2u += a2n
            elif s < 0:
                r2d += a2w
        elif m == 2:
            if s < 0:
                r1u += a1w
            elif s > 0:
                r1d += a1n
            r2u += a2s
            r2d += a2c
        else:
            if s < 0:
                r1u += a1n
            elif s > 0:
                r1d += a1w
            r2u += a2c
            r2d += a2s
        t_prev = times[k]

    dt = horizon - t_prev
    g1 = -math.expm1(-be1 * dt) / be1
    g2 = -math.expm1(-be2 * dt) / be2
    out[n] = integral + 2.0 * (mu1 + mu2) * dt + (r1u + r1d) * g1 + (r2u + r2d) * g2
    return out
