import math

import numpy as np
import pytest

from seek.errors import UnsupportedFieldError
from seek.field import LightBowlField, MeasurementModel, QuadraticField, QuarticField, _Field


def third_partials_fd(fld, x, y, h=1e-3):
    """Five-point central difference for d3/dx3 and d3/dy3."""

    def dxxx(f):
        return (f(x + 2 * h, y) - 2 * f(x + h, y) + 2 * f(x - h, y) - f(x - 2 * h, y)) / (
            2 * h**3
        )

    def dyyy(f):
        return (f(x, y + 2 * h) - 2 * f(x, y + h) + 2 * f(x, y - h) - f(x, y - 2 * h)) / (
            2 * h**3
        )

    return dxxx(fld.value), dyyy(fld.value)


def gradient_fd(fld, x, y, h=1e-6):
    gx = (fld.value(x + h, y) - fld.value(x - h, y)) / (2 * h)
    gy = (fld.value(x, y + h) - fld.value(x, y - h)) / (2 * h)
    return gx, gy


class TestQuartic:
    def test_zero_at_minimizer(self):
        fld = QuarticField(C1=3.0, C2=0.5, xd=1.0, yd=-2.0)
        assert fld.value(1.0, -2.0) == 0.0
        assert fld.minimizer == (1.0, -2.0)

    def test_benchmark_point(self):
        fld = QuarticField(C1=1.0, C2=1.0, xd=1.0, yd=-2.0)
        assert fld.value(1.6, -1.4) == pytest.approx(0.2592, abs=1e-12)
        jxxx, jyyy = fld.third_partials(1.6, -1.4)
        assert jxxx == pytest.approx(14.4, abs=1e-12)
        assert jyyy == pytest.approx(14.4, abs=1e-12)

    def test_even_symmetry(self):
        fld = QuarticField(C1=2.0, C2=5.0, xd=0.3, yd=0.7)
        rng = np.random.default_rng(3)
        for dx, dy in rng.uniform(-2, 2, size=(10, 2)):
            assert fld.value(0.3 + dx, 0.7 + dy) == pytest.approx(
                fld.value(0.3 - dx, 0.7 - dy), rel=1e-12
            )

    def test_positive_away_from_minimizer(self):
        fld = QuarticField()
        rng = np.random.default_rng(4)
        for x, y in rng.uniform(-3, 3, size=(20, 2)):
            if (x, y) != (0.0, 0.0):
                assert fld.value(x, y) > 0.0


@pytest.mark.parametrize(
    "fld",
    [
        QuarticField(C1=1.0, C2=1.0, xd=1.0, yd=-2.0),
        QuarticField(C1=0.3, C2=2.0, xd=-0.5, yd=0.4),
        QuadraticField(C1=1.2, C2=0.7, xd=0.1, yd=-0.2),
        LightBowlField(L0=100.0, A=80.0, sigma=0.9, xs=0.5, ys=-0.5),
    ],
)
def test_derivatives_match_finite_differences(fld):
    rng = np.random.default_rng(11)
    xd, yd = fld.minimizer
    for _ in range(5):
        # stay away from the minimizer where the partials cross zero
        x = xd + rng.uniform(0.3, 1.2) * rng.choice([-1, 1])
        y = yd + rng.uniform(0.3, 1.2) * rng.choice([-1, 1])
        jxxx, jyyy = fld.third_partials(x, y)
        fd3x, fd3y = third_partials_fd(fld, x, y)
        assert jxxx == pytest.approx(fd3x, rel=1e-5, abs=1e-6)
        assert jyyy == pytest.approx(fd3y, rel=1e-5, abs=1e-6)
        gx, gy = fld.gradient(x, y)
        fdx, fdy = gradient_fd(fld, x, y)
        assert gx == pytest.approx(fdx, rel=1e-5, abs=1e-8)
        assert gy == pytest.approx(fdy, rel=1e-5, abs=1e-8)


class TestLightBowl:
    def test_source_is_minimum(self):
        fld = LightBowlField(L0=2500.0, A=2000.0, sigma=0.6, xs=0.8, ys=-2.2)
        assert fld.value(0.8, -2.2) == pytest.approx(500.0)
        assert fld.gradient(0.8, -2.2) == (0.0, 0.0)
        assert fld.third_partials(0.8, -2.2) == (0.0, 0.0)
        assert fld.value(0.8, -2.2) < fld.value(1.3, -1.7) < fld.L0

    def test_far_field_flattens_to_ambient(self):
        fld = LightBowlField(L0=10.0, A=5.0, sigma=0.2)
        assert fld.value(100.0, 100.0) == pytest.approx(10.0)
        # huge offsets underflow the envelope instead of overflowing
        assert fld.value(1e160, 0.0) == 10.0

    def test_quadratic_has_zero_third_partials(self):
        fld = QuadraticField(C1=4.0, C2=9.0)
        assert fld.third_partials(1.7, -0.3) == (0.0, 0.0)


def test_non_finite_input_rejected():
    fld = QuarticField()
    with pytest.raises(ValueError):
        fld.value(math.nan, 0.0)
    with pytest.raises(ValueError):
        fld.gradient(0.0, math.inf)
    with pytest.raises(ValueError):
        QuarticField(xd=math.inf)


def test_base_field_has_no_third_partials():
    class Slope(_Field):
        kind = "slope"

        def value(self, x, y):
            return x + y

    with pytest.raises(UnsupportedFieldError):
        Slope().third_partials(0.0, 0.0)


def test_invalid_field_parameters():
    with pytest.raises(ValueError):
        QuarticField(C1=0.0)
    with pytest.raises(ValueError):
        QuadraticField(C2=-1.0)
    with pytest.raises(ValueError):
        LightBowlField(A=-2.0)
    with pytest.raises(ValueError):
        LightBowlField(sigma=0.0)


class TestMeasurementModel:
    def test_zeroed_model_is_exact(self):
        fld = QuarticField(C1=1.0, C2=1.0, xd=1.0, yd=-2.0)
        model = MeasurementModel()
        rng = np.random.default_rng(8)
        for x, y in rng.uniform(-2, 2, size=(20, 2)):
            assert model.measure(fld, x, y, rng.uniform(0, 10)) == fld.value(x, y)

    def test_quantization_rounds_to_nearest(self):
        fld = QuarticField(C1=1.0, C2=1.0, xd=1.0, yd=-2.0)
        model = MeasurementModel(quantum=0.1)
        assert model.measure(fld, 1.6, -1.4, 0.0) == pytest.approx(0.3)
        fine = MeasurementModel(quantum=0.0001)
        assert fine.measure(fld, 1.6, -1.4, 0.0) == pytest.approx(0.2592)

    def test_noise_is_reproducible_for_fixed_seed(self):
        fld = QuadraticField()
        a = MeasurementModel(noise_std=0.5, seed=123)
        b = MeasurementModel(noise_std=0.5, seed=123)
        seq_a = [a.measure(fld, 0.1 * i, 0.0, 0.01 * i) for i in range(50)]
        seq_b = [b.measure(fld, 0.1 * i, 0.0, 0.01 * i) for i in range(50)]
        assert seq_a == seq_b
        a.reset()
        assert [a.measure(fld, 0.1 * i, 0.0, 0.01 * i) for i in range(50)] == seq_a

    def test_different_seeds_differ(self):
        fld = QuadraticField()
        a = MeasurementModel(noise_std=0.5, seed=1)
        b = MeasurementModel(noise_std=0.5, seed=2)
        assert a.measure(fld, 1.0, 1.0, 0.0) != b.measure(fld, 1.0, 1.0, 0.0)

    def test_hold_freezes_between_refreshes(self):
        fld = QuadraticField()
        model = MeasurementModel(hold_period=0.1)
        first = model.measure(fld, 1.0, 0.0, 0.0)
        assert first == fld.value(1.0, 0.0)
        # position changed but the reading is held
        assert model.measure(fld, 2.0, 0.0, 0.05) == first
        assert model.measure(fld, 2.0, 0.0, 0.0999) == first
        # period elapsed: fresh sample at the new position
        assert model.measure(fld, 2.0, 0.0, 0.1) == fld.value(2.0, 0.0)

    def test_invalid_model_parameters(self):
        with pytest.raises(ValueError):
            MeasurementModel(noise_std=-0.1)
        with pytest.raises(ValueError):
            MeasurementModel(quantum=-1.0)
        with pytest.raises(ValueError):
            MeasurementModel(hold_period=-0.5)

    def test_non_finite_time_rejected(self):
        model = MeasurementModel()
        with pytest.raises(ValueError):
            model.measure(QuadraticField(), 0.0, 0.0, math.nan)
