"""Dither waveform families and their moment checks.

Three period-one waveform pairs are provided, selecting which iterated Lie
bracket the closed loop excites:

  c1  v1 = 2*sqrt(k*pi)*cos(2k*pi*s),          v2 = 2*sqrt(k*pi)*sin(2k*pi*s)
  c2  v1 = -2*(4k*pi)^(2/3)*cos(4k*pi*s),      v2 = (4k*pi)^(2/3)*cos(2k*pi*s)
  c3  v1 = 6*(2k*pi)^(3/4)*sin(6k*pi*s),       v2 = 2*(2k*pi)^(3/4)*cos(2k*pi*s)

with k a positive integer. Order c1 drives the first bracket (its first-order
moment lambda12 is 1), while c2 and c3 zero that moment out so only the second
or third bracket survives averaging. Real-time inputs scale the pair by
eps^(1/N - 1) with N = 2, 3, 4 and run it at phase s = t/eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

__all__ = ["DitherSpec", "MomentReport", "dither_pair", "scaled_inputs", "moment_check"]

ORDERS = ("c1", "c2", "c3")
_BRACKET_DEPTH = {"c1": 2, "c2": 3, "c3": 4}

QUADRATURE_PANELS = 10_000


@dataclass(frozen=True)
class DitherSpec:
    """One waveform family instance: order, harmonic index, dither period."""

    order: str
    kappa: int = 1
    epsilon: float = 1.0

    def __post_init__(self):
        if self.order not in ORDERS:
            raise ValueError(f"order must be one of {ORDERS}, got {self.order!r}")
        if not (isinstance(self.kappa, int) and self.kappa >= 1):
            raise ValueError("kappa must be a positive integer")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    @property
    def N(self) -> int:
        """Bracket depth: the number of vector-field factors in the target bracket."""
        return _BRACKET_DEPTH[self.order]


def dither_pair(spec: DitherSpec, s):
    """Evaluate (v1, v2) at dimensionless phase s (scalar or array)."""
    s = np.asarray(s, dtype=float)
    kpi = spec.kappa * math.pi
    if spec.order == "c1":
        amp = 2.0 * math.sqrt(kpi)
        return amp * np.cos(2.0 * kpi * s), amp * np.sin(2.0 * kpi * s)
    if spec.order == "c2":
        amp = (4.0 * kpi) ** (2.0 / 3.0)
        return -2.0 * amp * np.cos(4.0 * kpi * s), amp * np.cos(2.0 * kpi * s)
    amp = (2.0 * kpi) ** 0.75
    return 6.0 * amp * np.sin(6.0 * kpi * s), 2.0 * amp * np.cos(2.0 * kpi * s)


def scaled_inputs(spec: DitherSpec, t):
    """Real-time input pair u_i(t) = eps^(1/N - 1) * v_i(t / eps)."""
    gain = spec.epsilon ** (1.0 / spec.N - 1.0)
    v1, v2 = dither_pair(spec, np.asarray(t, dtype=float) / spec.epsilon)
    return gain * v1, gain * v2


@dataclass(frozen=True)
class MomentReport:
    """Quadrature results over one period: means and the first-order moment."""

    m1: float
    m2: float
    lambda12: float
    panels: int

    @property
    def zero_mean(self) -> bool:
        return abs(self.m1) < 1e-8 and abs(self.m2) < 1e-8


def moment_check(spec: DitherSpec, panels: int = QUADRATURE_PANELS) -> MomentReport:
    """Composite-trapezoid moments of the pair over one period.

    m_i = int_0^1 v_i ds and lambda12 = int_0^1 v2(s) * (int_0^s v1) ds.
    On a full period the trapezoid rule is spectrally accurate for these
    trigonometric integrands, so the defaults resolve the zero moments to
    well below 1e-8.
    """
    if panels < 16:
        raise ValueError("panels too few for a meaningful moment check")
    s = np.linspace(0.0, 1.0, panels + 1)
    v1, v2 = dither_pair(spec, s)
    inner = cumulative_trapezoid(v1, s, initial=0.0)
    return MomentReport(
        m1=float(trapezoid(v1, s)),
        m2=float(trapezoid(v2, s)),
        lambda12=float(trapezoid(v2 * inner, s)),
        panels=panels,
    )
