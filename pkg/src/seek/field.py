"""Scalar fields the vehicle descends, plus the sensor model that reads them.

Every field exposes a pointwise value, the gradient, and the pure third
partials (d3/dx3, d3/dy3) that drive the third-order bracket dynamics.
Measurements go through :class:`MeasurementModel`, which layers sample-and-hold,
additive Gaussian noise, and quantization on top of the exact value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedFieldError

__all__ = [
    "QuarticField",
    "QuadraticField",
    "LightBowlField",
    "MeasurementModel",
]


def _check_point(x: float, y: float) -> None:
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"non-finite query point ({x}, {y})")


class _Field:
    """Common surface for the closed set of field variants."""

    kind = "abstract"

    @property
    def minimizer(self) -> tuple[float, float]:
        raise NotImplementedError

    def value(self, x: float, y: float) -> float:
        raise NotImplementedError

    def gradient(self, x: float, y: float) -> tuple[float, float]:
        raise NotImplementedError

    def third_partials(self, x: float, y: float) -> tuple[float, float]:
        raise UnsupportedFieldError(
            f"field kind {self.kind!r} has no analytic third partials"
        )


@dataclass(frozen=True)
class QuarticField(_Field):
    """J = C1*(x - xd)^4 + C2*(y - yd)^4, minimized at (xd, yd).

    The pure third partials are linear in the offset from the minimizer,
    which is what makes the third-order bracket dynamics exponentially
    contracting on this field.
    """

    C1: float = 1.0
    C2: float = 1.0
    xd: float = 0.0
    yd: float = 0.0

    kind = "quartic"

    def __post_init__(self):
        if not (self.C1 > 0 and self.C2 > 0):
            raise ValueError("quartic weights C1, C2 must be positive")
        _check_point(self.xd, self.yd)

    @property
    def minimizer(self) -> tuple[float, float]:
        return (self.xd, self.yd)

    def value(self, x: float, y: float) -> float:
        _check_point(x, y)
        return self.C1 * (x - self.xd) ** 4 + self.C2 * (y - self.yd) ** 4

    def gradient(self, x: float, y: float) -> tuple[float, float]:
        _check_point(x, y)
        return (4.0 * self.C1 * (x - self.xd) ** 3, 4.0 * self.C2 * (y - self.yd) ** 3)

    def third_partials(self, x: float, y: float) -> tuple[float, float]:
        _check_point(x, y)
        return (24.0 * self.C1 * (x - self.xd), 24.0 * self.C2 * (y - self.yd))


@dataclass(frozen=True)
class QuadraticField(_Field):
    """J = C1*(x - xd)^2 + C2*(y - yd)^2. Locally quadratic test field.

    Its third partials vanish identically, so it isolates first-order
    bracket behaviour in tests.
    """

    C1: float = 1.0
    C2: float = 1.0
    xd: float = 0.0
    yd: float = 0.0

    kind = "quadratic"

    def __post_init__(self):
        if not (self.C1 > 0 and self.C2 > 0):
            raise ValueError("quadratic weights C1, C2 must be positive")
        _check_point(self.xd, self.yd)

    @property
    def minimizer(self) -> tuple[float, float]:
        return (self.xd, self.yd)

    def value(self, x: float, y: float) -> float:
        _check_point(x, y)
        return self.C1 * (x - self.xd) ** 2 + self.C2 * (y - self.yd) ** 2

    def gradient(self, x: float, y: float) -> tuple[float, float]:
        _check_point(x, y)
        return (2.0 * self.C1 * (x - self.xd), 2.0 * self.C2 * (y - self.yd))

    def third_partials(self, x: float, y: float) -> tuple[float, float]:
        _check_point(x, y)
        return (0.0, 0.0)


@dataclass(frozen=True)
class LightBowlField(_Field):
    """Inverted Gaussian: J = L0 - A*exp(-((x-xs)^2 + (y-ys)^2) / (2*sigma^2)).

    Stand-in for a light sensor whose reading drops as the vehicle nears the
    source, so seeking the brightest point means minimizing J. L0 is the
    ambient reading, A the depth at the source, sigma the footprint radius.
    """

    L0: float = 2500.0
    A: float = 2000.0
    sigma: float = 0.6
    xs: float = 0.0
    ys: float = 0.0

    kind = "light_bowl"

    def __post_init__(self):
        if not self.A > 0:
            raise ValueError("bowl depth A must be positive")
        if not self.sigma > 0:
            raise ValueError("bowl radius sigma must be positive")
        if not math.isfinite(self.L0):
            raise ValueError("ambient level L0 must be finite")
        _check_point(self.xs, self.ys)

    @property
    def minimizer(self) -> tuple[float, float]:
        return (self.xs, self.ys)

    def _envelope(self, x: float, y: float) -> float:
        u = x - self.xs
        w = y - self.ys
        arg = -(u * u + w * w) / (2.0 * self.sigma**2)
        return math.exp(arg) if arg > -745.0 else 0.0  # exp underflow guard

    def value(self, x: float, y: float) -> float:
        _check_point(x, y)
        return self.L0 - self.A * self._envelope(x, y)

    def gradient(self, x: float, y: float) -> tuple[float, float]:
        _check_point(x, y)
        g = self.A * self._envelope(x, y) / self.sigma**2
        return (g * (x - self.xs), g * (y - self.ys))

    def third_partials(self, x: float, y: float) -> tuple[float, float]:
        _check_point(x, y)
        u = x - self.xs
        w = y - self.ys
        s2 = self.sigma**2
        g = self.A * self._envelope(x, y) / s2**2
        return (-g * u * (3.0 - u * u / s2), -g * w * (3.0 - w * w / s2))


@dataclass
class MeasurementModel:
    """Sensor pipeline applied to exact field values.

    At each refresh the exact value is read, Gaussian noise with standard
    deviation ``noise_std`` is added, and the result is rounded to the
    nearest multiple of ``quantum`` (skipped when the quantum is zero).
    With ``hold_period > 0`` that reading is then frozen until the period
    elapses; with a zero hold the full pipeline runs on every call.

    The noise stream comes from a generator seeded with ``seed``, so a fixed
    seed and an identical call sequence reproduce the same readings bit for
    bit. Call :meth:`reset` before reusing a model across runs.
    """

    noise_std: float = 0.0
    quantum: float = 0.0
    hold_period: float = 0.0
    seed: int = 0

    _rng: np.random.Generator = field(init=False, repr=False, compare=False)
    _held: float = field(init=False, repr=False, compare=False, default=math.nan)
    _next_refresh: float = field(init=False, repr=False, compare=False, default=-math.inf)

    def __post_init__(self):
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        if self.quantum < 0:
            raise ValueError("quantum must be nonnegative")
        if self.hold_period < 0:
            raise ValueError("hold_period must be nonnegative")
        self.reset()

    @property
    def is_exact(self) -> bool:
        return self.noise_std == 0.0 and self.quantum == 0.0 and self.hold_period == 0.0

    def reset(self) -> None:
        """Rewind the noise stream and drop any held reading."""
        self._rng = np.random.default_rng(self.seed)
        self._held = math.nan
        self._next_refresh = -math.inf

    def _pipeline(self, exact: float) -> float:
        value = exact
        if self.noise_std > 0.0:
            value += self.noise_std * self._rng.standard_normal()
        if self.quantum > 0.0:
            value = self.quantum * np.round(value / self.quantum)
        return value

    def measure(self, fld: _Field, x: float, y: float, t: float) -> float:
        """Read the sensor at position (x, y) and time t."""
        if not math.isfinite(t):
            raise ValueError(f"non-finite measurement time {t}")
        if self.hold_period == 0.0:
            return self._pipeline(fld.value(x, y))
        if t >= self._next_refresh:
            self._held = self._pipeline(fld.value(x, y))
            self._next_refresh = t + self.hold_period
        return self._held
