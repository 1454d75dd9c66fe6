"""Closed-loop vehicle dynamics and the bracket systems they average to.

The vehicle is a unicycle whose heading angle is driven open loop at a
constant rate: x' = v*cos(omega*t + theta0), y' = v*sin(omega*t + theta0).
Only the forward speed v is controlled, from the measured field value alone.

Plant state vectors are ndarrays [x, y, h] where h is the washout filter
state; bracket-system states are [x, y]. Time is passed separately so the
same callables plug straight into the fixed-step integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .field import MeasurementModel, _Field

__all__ = [
    "SimParams",
    "commanded_velocity",
    "first_order_velocity",
    "esc3_rhs",
    "esc1_rhs",
    "lbs3_rhs",
    "lbs1_rhs",
    "to_rotating",
    "from_rotating",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SimParams:
    """Controller gains and timing for one closed-loop run.

    a        dither speed gain (m/s before period scaling)
    c        measurement feedback gain
    epsilon  dither period in seconds; smaller means closer to the average
    omega    heading rate in rad/s
    hpf_gain washout filter gain e; zero disables the filter
    theta0   initial heading offset in rad
    """

    a: float
    c: float
    epsilon: float
    omega: float
    hpf_gain: float = 0.0
    theta0: float = 0.0

    def __post_init__(self):
        for name in ("a", "c", "epsilon", "omega"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.hpf_gain < 0:
            raise ValueError("hpf_gain must be nonnegative")
        if not math.isfinite(self.theta0):
            raise ValueError("theta0 must be finite")


def commanded_velocity(params: SimParams, filtered_J: float, t: float) -> float:
    """Third-order speed law.

    v = 2*(2*pi/eps)^(3/4) * (3*c*f*sin(6*pi*t/eps) + a*cos(2*pi*t/eps))

    where f is the washed-out measurement. Equivalent to feeding c*f and a
    through the order-c3 scaled dither pair.
    """
    eps = params.epsilon
    gain = 2.0 * (TWO_PI / eps) ** 0.75
    phase = TWO_PI * t / eps
    return gain * (
        3.0 * params.c * filtered_J * math.sin(3.0 * phase)
        + params.a * math.cos(phase)
    )


def first_order_velocity(params: SimParams, filtered_J: float, t: float) -> float:
    """First-order comparator speed law.

    v = 2*sqrt(pi/eps) * (c*f*cos(2*pi*t/eps) + a*sin(2*pi*t/eps))

    Same dither period as the third-order law; the sign pairing makes the
    averaged motion descend the field gradient.
    """
    eps = params.epsilon
    gain = 2.0 * math.sqrt(math.pi / eps)
    phase = TWO_PI * t / eps
    return gain * (
        params.c * filtered_J * math.cos(phase) + params.a * math.sin(phase)
    )


def _plant_rhs(speed_law, params, fld, sensor, state, t):
    x, y, h = state
    if sensor is None:
        m = fld.value(x, y)
    else:
        m = sensor.measure(fld, x, y, t)
    e = params.hpf_gain
    f = m - e * h
    v = speed_law(params, f, t)
    heading = params.omega * t + params.theta0
    hdot = f if e > 0.0 else 0.0
    return np.array([v * math.cos(heading), v * math.sin(heading), hdot])


def esc3_rhs(
    params: SimParams,
    fld: _Field,
    sensor: MeasurementModel | None,
    state: np.ndarray,
    t: float,
) -> np.ndarray:
    """Closed-loop derivative for the third-order design. State is [x, y, h].

    Pass ``sensor=None`` for exact measurements. With hpf_gain = 0 the filter
    state is held at h' = 0 and the raw measurement feeds the speed law.
    """
    return _plant_rhs(commanded_velocity, params, fld, sensor, state, t)


def esc1_rhs(
    params: SimParams,
    fld: _Field,
    sensor: MeasurementModel | None,
    state: np.ndarray,
    t: float,
) -> np.ndarray:
    """Closed-loop derivative for the first-order comparator. State is [x, y, h]."""
    return _plant_rhs(first_order_velocity, params, fld, sensor, state, t)


def lbs3_rhs(
    fld: _Field, omega: float, state: np.ndarray, t: float, c: float, a: float
) -> np.ndarray:
    """Third-order bracket system: the averaged motion of the c3-dithered loop.

    x' = -c*a^3*cos(omega*t) * (Jxxx*cos^3(omega*t) + Jyyy*sin^3(omega*t))
    y' = -c*a^3*sin(omega*t) * (Jxxx*cos^3(omega*t) + Jyyy*sin^3(omega*t))
    """
    jxxx, jyyy = fld.third_partials(state[0], state[1])
    ct = math.cos(omega * t)
    st = math.sin(omega * t)
    common = c * a**3 * (jxxx * ct**3 + jyyy * st**3)
    return np.array([-ct * common, -st * common])


def lbs1_rhs(
    fld: _Field, omega: float, state: np.ndarray, t: float, c: float, a: float
) -> np.ndarray:
    """First-order bracket system: gradient flow projected on the heading line.

    x' = -c*a*cos(omega*t) * (Jx*cos(omega*t) + Jy*sin(omega*t))
    y' = -c*a*sin(omega*t) * (Jx*cos(omega*t) + Jy*sin(omega*t))
    """
    jx, jy = fld.gradient(state[0], state[1])
    ct = math.cos(omega * t)
    st = math.sin(omega * t)
    common = c * a * (jx * ct + jy * st)
    return np.array([-ct * common, -st * common])


def to_rotating(
    x: float, y: float, target: tuple[float, float], omega: float, t: float
) -> tuple[float, float]:
    """Map a position into the frame co-rotating with the heading.

    xi  = (x - xd)*cos(omega*t) + (y - yd)*sin(omega*t)
    eta = (x - xd)*sin(omega*t) - (y - yd)*cos(omega*t)

    The map is an isometry about the target, so error norms carry over.
    """
    dx = x - target[0]
    dy = y - target[1]
    ct = math.cos(omega * t)
    st = math.sin(omega * t)
    return (dx * ct + dy * st, dx * st - dy * ct)


def from_rotating(
    xi: float, eta: float, target: tuple[float, float], omega: float, t: float
) -> tuple[float, float]:
    """Inverse of :func:`to_rotating`."""
    ct = math.cos(omega * t)
    st = math.sin(omega * t)
    return (target[0] + xi * ct + eta * st, target[1] + xi * st - eta * ct)
