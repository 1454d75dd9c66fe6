"""Compiled fixed-step integration loops for the production scenario paths.

Long runs step 1e7 times or more, so the hot loops are flat scalar code
compiled with numba. Field variants and controller designs are dispatched on
small integer codes; field parameters travel as five floats whose meaning
depends on the code (see _field_value). Everything here is private to the
package: build scenarios through seek.sim.

Without numba the same functions run as plain Python, slowly but with
identical semantics, except that np.random.seed then touches the global
numpy legacy stream instead of a compiler-private one.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(func):
            return func

        return deco


TWO_PI = 2.0 * math.pi

# field codes
QUARTIC = 0
QUADRATIC = 1
LIGHT_BOWL = 2

# design codes, matching the bracket order each loop excites
THIRD_ORDER = 3
FIRST_ORDER = 1


@njit(cache=True)
def _field_value(code, p0, p1, p2, p3, p4, x, y):
    # quartic / quadratic: p = (C1, C2, xd, yd, -); bowl: p = (L0, A, sigma, xs, ys)
    if code == QUARTIC:
        return p0 * (x - p2) ** 4 + p1 * (y - p3) ** 4
    if code == QUADRATIC:
        return p0 * (x - p2) ** 2 + p1 * (y - p3) ** 2
    u = x - p3
    w = y - p4
    arg = -(u * u + w * w) / (2.0 * p2 * p2)
    env = math.exp(arg) if arg > -745.0 else 0.0
    return p0 - p1 * env


@njit(cache=True)
def _field_gradient(code, p0, p1, p2, p3, p4, x, y):
    if code == QUARTIC:
        return 4.0 * p0 * (x - p2) ** 3, 4.0 * p1 * (y - p3) ** 3
    if code == QUADRATIC:
        return 2.0 * p0 * (x - p2), 2.0 * p1 * (y - p3)
    u = x - p3
    w = y - p4
    s2 = p2 * p2
    arg = -(u * u + w * w) / (2.0 * s2)
    env = math.exp(arg) if arg > -745.0 else 0.0
    g = p1 * env / s2
    return g * u, g * w


@njit(cache=True)
def _field_third_partials(code, p0, p1, p2, p3, p4, x, y):
    if code == QUARTIC:
        return 24.0 * p0 * (x - p2), 24.0 * p1 * (y - p3)
    if code == QUADRATIC:
        return 0.0, 0.0
    u = x - p3
    w = y - p4
    s2 = p2 * p2
    arg = -(u * u + w * w) / (2.0 * s2)
    env = math.exp(arg) if arg > -745.0 else 0.0
    g = p1 * env / (s2 * s2)
    return -g * u * (3.0 - u * u / s2), -g * w * (3.0 - w * w / s2)


@njit(cache=True)
def _measure(
    code, p0, p1, p2, p3, p4, noise_std, quantum, hold_period, x, y, t, held, next_refresh
):
    # Mirrors MeasurementModel.measure: hold gate, then noise, then quantize.
    if hold_period == 0.0:
        value = _field_value(code, p0, p1, p2, p3, p4, x, y)
        if noise_std > 0.0:
            value += noise_std * np.random.normal(0.0, 1.0)
        if quantum > 0.0:
            value = quantum * round(value / quantum)
        return value, held, next_refresh
    if t >= next_refresh:
        value = _field_value(code, p0, p1, p2, p3, p4, x, y)
        if noise_std > 0.0:
            value += noise_std * np.random.normal(0.0, 1.0)
        if quantum > 0.0:
            value = quantum * round(value / quantum)
        return value, value, t + hold_period
    return held, held, next_refresh


@njit(cache=True)
def _speed(design, a, c, eps, f, t):
    phase = TWO_PI * t / eps
    if design == THIRD_ORDER:
        gain = 2.0 * (TWO_PI / eps) ** 0.75
        return gain * (3.0 * c * f * math.sin(3.0 * phase) + a * math.cos(phase))
    gain = 2.0 * math.sqrt(math.pi / eps)
    return gain * (c * f * math.cos(phase) + a * math.sin(phase))


@njit(cache=True)
def esc_kernel(
    design,
    code,
    p0,
    p1,
    p2,
    p3,
    p4,
    a,
    c,
    eps,
    omega,
    e,
    theta0,
    noise_std,
    quantum,
    hold_period,
    seed,
    x0,
    y0,
    h0,
    dt,
    n_steps,
    record_every,
):
    """Integrate the closed loop with classic RK4 on a fixed grid t_k = k*dt.

    Records state, the stage-one measurement, and the stage-one commanded
    speed every record_every steps plus the final point, so decimation never
    alters the dynamics or the sensor call sequence. Returns
    (t, x, y, h, J, v, n_recorded, aborted, abort_step); on a non-finite
    state the run stops with the partial trajectory intact.
    """
    np.random.seed(seed)
    n_rec_max = n_steps // record_every + 2
    t_out = np.empty(n_rec_max)
    x_out = np.empty(n_rec_max)
    y_out = np.empty(n_rec_max)
    h_out = np.empty(n_rec_max)
    J_out = np.empty(n_rec_max)
    v_out = np.empty(n_rec_max)

    x = x0
    y = y0
    h = h0
    held = np.nan
    next_refresh = -np.inf
    rc = 0
    aborted = False
    abort_step = -1
    half = 0.5 * dt
    sixth = dt / 6.0

    for k in range(n_steps):
        t = k * dt

        m, held, next_refresh = _measure(
            code, p0, p1, p2, p3, p4, noise_std, quantum, hold_period,
            x, y, t, held, next_refresh,
        )
        f = m - e * h
        v = _speed(design, a, c, eps, f, t)
        if k % record_every == 0:
            t_out[rc] = t
            x_out[rc] = x
            y_out[rc] = y
            h_out[rc] = h
            J_out[rc] = m
            v_out[rc] = v
            rc += 1
        hd = omega * t + theta0
        k1x = v * math.cos(hd)
        k1y = v * math.sin(hd)
        k1h = f if e > 0.0 else 0.0

        tm = t + half
        m, held, next_refresh = _measure(
            code, p0, p1, p2, p3, p4, noise_std, quantum, hold_period,
            x + half * k1x, y + half * k1y, tm, held, next_refresh,
        )
        f = m - e * (h + half * k1h)
        v = _speed(design, a, c, eps, f, tm)
        hd = omega * tm + theta0
        k2x = v * math.cos(hd)
        k2y = v * math.sin(hd)
        k2h = f if e > 0.0 else 0.0

        m, held, next_refresh = _measure(
            code, p0, p1, p2, p3, p4, noise_std, quantum, hold_period,
            x + half * k2x, y + half * k2y, tm, held, next_refresh,
        )
        f = m - e * (h + half * k2h)
        v = _speed(design, a, c, eps, f, tm)
        k3x = v * math.cos(hd)
        k3y = v * math.sin(hd)
        k3h = f if e > 0.0 else 0.0

        tf = t + dt
        m, held, next_refresh = _measure(
            code, p0, p1, p2, p3, p4, noise_std, quantum, hold_period,
            x + dt * k3x, y + dt * k3y, tf, held, next_refresh,
        )
        f = m - e * (h + dt * k3h)
        v = _speed(design, a, c, eps, f, tf)
        hd = omega * tf + theta0
        k4x = v * math.cos(hd)
        k4y = v * math.sin(hd)
        k4h = f if e > 0.0 else 0.0

        x += sixth * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        y += sixth * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        h += sixth * (k1h + 2.0 * k2h + 2.0 * k3h + k4h)

        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(h)):
            aborted = True
            abort_step = k
            break

    if not aborted:
        t = n_steps * dt
        m, held, next_refresh = _measure(
            code, p0, p1, p2, p3, p4, noise_std, quantum, hold_period,
            x, y, t, held, next_refresh,
        )
        f = m - e * h
        t_out[rc] = t
        x_out[rc] = x
        y_out[rc] = y
        h_out[rc] = h
        J_out[rc] = m
        v_out[rc] = _speed(design, a, c, eps, f, t)
        rc += 1

    return t_out, x_out, y_out, h_out, J_out, v_out, rc, aborted, abort_step


@njit(cache=True)
def _lbs_rhs(order, code, p0, p1, p2, p3, p4, c, a, omega, x, y, t):
    ct = math.cos(omega * t)
    st = math.sin(omega * t)
    if order == THIRD_ORDER:
        jx, jy = _field_third_partials(code, p0, p1, p2, p3, p4, x, y)
        common = c * a * a * a * (jx * ct**3 + jy * st**3)
    else:
        jx, jy = _field_gradient(code, p0, p1, p2, p3, p4, x, y)
        common = c * a * (jx * ct + jy * st)
    return -ct * common, -st * common


@njit(cache=True)
def lbs_kernel(
    order, code, p0, p1, p2, p3, p4, c, a, omega, x0, y0, dt, n_steps, record_every
):
    """RK4 for the bracket system on the same grid convention as esc_kernel.

    The J column holds the exact field value and v the instantaneous drift
    speed; there is no sensor or filter state here.
    """
    n_rec_max = n_steps // record_every + 2
    t_out = np.empty(n_rec_max)
    x_out = np.empty(n_rec_max)
    y_out = np.empty(n_rec_max)
    J_out = np.empty(n_rec_max)
    v_out = np.empty(n_rec_max)

    x = x0
    y = y0
    rc = 0
    aborted = False
    abort_step = -1
    half = 0.5 * dt
    sixth = dt / 6.0

    for k in range(n_steps):
        t = k * dt
        k1x, k1y = _lbs_rhs(order, code, p0, p1, p2, p3, p4, c, a, omega, x, y, t)
        if k % record_every == 0:
            t_out[rc] = t
            x_out[rc] = x
            y_out[rc] = y
            J_out[rc] = _field_value(code, p0, p1, p2, p3, p4, x, y)
            v_out[rc] = math.hypot(k1x, k1y)
            rc += 1
        tm = t + half
        k2x, k2y = _lbs_rhs(
            order, code, p0, p1, p2, p3, p4, c, a, omega, x + half * k1x, y + half * k1y, tm
        )
        k3x, k3y = _lbs_rhs(
            order, code, p0, p1, p2, p3, p4, c, a, omega, x + half * k2x, y + half * k2y, tm
        )
        k4x, k4y = _lbs_rhs(
            order, code, p0, p1, p2, p3, p4, c, a, omega, x + dt * k3x, y + dt * k3y, t + dt
        )
        x += sixth * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        y += sixth * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        if not (math.isfinite(x) and math.isfinite(y)):
            aborted = True
            abort_step = k
            break

    if not aborted:
        t = n_steps * dt
        dx, dy = _lbs_rhs(order, code, p0, p1, p2, p3, p4, c, a, omega, x, y, t)
        t_out[rc] = t
        x_out[rc] = x
        y_out[rc] = y
        J_out[rc] = _field_value(code, p0, p1, p2, p3, p4, x, y)
        v_out[rc] = math.hypot(dx, dy)
        rc += 1

    return t_out, x_out, y_out, J_out, v_out, rc, aborted, abort_step
