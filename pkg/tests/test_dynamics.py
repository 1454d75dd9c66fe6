import math

import numpy as np
import pytest

from seek.dither import DitherSpec, scaled_inputs
from seek.dynamics import (
    SimParams,
    commanded_velocity,
    esc1_rhs,
    esc3_rhs,
    first_order_velocity,
    from_rotating,
    lbs1_rhs,
    lbs3_rhs,
    to_rotating,
)
from seek.field import QuarticField


TABLE1 = SimParams(a=0.5, c=0.5, epsilon=0.001, omega=1.4)
FIELD = QuarticField(C1=1.0, C2=1.0, xd=1.0, yd=-2.0)
START_J = 0.2592  # FIELD.value(1.6, -1.4)


class TestSpeedLaws:
    def test_third_order_frozen_values(self):
        assert commanded_velocity(TABLE1, START_J, 0.0) == pytest.approx(
            705.72402316857347, rel=1e-12
        )
        # quarter period: fast channel at its trough, slow channel at zero
        assert commanded_velocity(TABLE1, START_J, 0.001 / 4.0) == pytest.approx(
            -548.77100041588267, rel=1e-9
        )

    def test_first_order_frozen_value(self):
        assert first_order_velocity(TABLE1, START_J, 0.0) == pytest.approx(
            14.528137232903431, rel=1e-12
        )

    def test_third_order_is_the_c3_dither_composition(self):
        spec = DitherSpec(order="c3", kappa=1, epsilon=TABLE1.epsilon)
        rng = np.random.default_rng(5)
        for t in rng.uniform(0.0, 0.01, size=20):
            u1, u2 = scaled_inputs(spec, float(t))
            expected = TABLE1.c * START_J * u1 + TABLE1.a * u2
            assert commanded_velocity(TABLE1, START_J, float(t)) == pytest.approx(
                expected, rel=1e-9, abs=1e-9
            )

    def test_first_order_is_the_c1_dither_composition(self):
        spec = DitherSpec(order="c1", kappa=1, epsilon=TABLE1.epsilon)
        rng = np.random.default_rng(6)
        for t in rng.uniform(0.0, 0.01, size=20):
            u1, u2 = scaled_inputs(spec, float(t))
            expected = TABLE1.c * START_J * u1 + TABLE1.a * u2
            assert first_order_velocity(TABLE1, START_J, float(t)) == pytest.approx(
                expected, rel=1e-9, abs=1e-9
            )

    def test_speed_is_epsilon_periodic(self):
        rng = np.random.default_rng(7)
        for t in rng.uniform(0.0, 0.05, size=10):
            assert commanded_velocity(TABLE1, 0.1, float(t)) == pytest.approx(
                commanded_velocity(TABLE1, 0.1, float(t) + TABLE1.epsilon),
                rel=1e-6,
                abs=1e-6,
            )


class TestPlantRhs:
    def test_velocity_magnitude_matches_speed_law(self):
        state = np.array([1.6, -1.4, 0.0])
        for t in (0.0, 0.3, 1.7):
            dx, dy, _ = esc3_rhs(TABLE1, FIELD, None, state, t)
            v = commanded_velocity(TABLE1, FIELD.value(1.6, -1.4), t)
            assert math.hypot(dx, dy) == pytest.approx(abs(v), rel=1e-12)
            # heading is omega*t regardless of the measurement
            assert math.atan2(dy, dx) == pytest.approx(
                math.atan2(math.sin(1.4 * t) * np.sign(v), math.cos(1.4 * t) * np.sign(v)),
                abs=1e-12,
            )

    def test_at_minimizer_only_the_pure_dither_remains(self):
        state = np.array([1.0, -2.0, 0.0])
        dx, dy, dh = esc3_rhs(TABLE1, FIELD, None, state, 0.0)
        # f = 0 there, so v = gain * a at t = 0
        assert math.hypot(dx, dy) == pytest.approx(705.72402316857347, rel=1e-12)
        assert dh == 0.0

    def test_washout_filter_state(self):
        params = SimParams(a=0.5, c=0.5, epsilon=0.001, omega=1.4, hpf_gain=2.0)
        state = np.array([1.6, -1.4, 0.3])
        _, _, dh = esc3_rhs(params, FIELD, None, state, 0.0)
        assert dh == pytest.approx(START_J - 2.0 * 0.3, rel=1e-12)
        # disabled filter holds h fixed
        _, _, dh0 = esc3_rhs(TABLE1, FIELD, None, state, 0.0)
        assert dh0 == 0.0

    def test_first_order_rhs_uses_its_own_law(self):
        state = np.array([1.6, -1.4, 0.0])
        dx, dy, _ = esc1_rhs(TABLE1, FIELD, None, state, 0.0)
        assert math.hypot(dx, dy) == pytest.approx(14.528137232903431, rel=1e-12)
        assert dy == pytest.approx(0.0, abs=1e-12)

    def test_theta0_rotates_the_velocity(self):
        params = SimParams(a=0.5, c=0.5, epsilon=0.001, omega=1.4, theta0=math.pi / 2)
        state = np.array([1.6, -1.4, 0.0])
        dx, dy, _ = esc3_rhs(params, FIELD, None, state, 0.0)
        assert dx == pytest.approx(0.0, abs=1e-9)
        assert dy == pytest.approx(705.72402316857347, rel=1e-12)


class TestBracketSystems:
    def test_third_order_frozen_value(self):
        # omega*t = pi/2 picks out the Jyyy term alone
        t = math.pi / (2.0 * 1.4)
        dx, dy = lbs3_rhs(FIELD, 1.4, np.array([1.6, -1.4]), t, 0.5, 0.5)
        assert dx == pytest.approx(0.0, abs=1e-12)
        assert dy == pytest.approx(-0.9, rel=1e-12)

    def test_first_order_frozen_value(self):
        dx, dy = lbs1_rhs(FIELD, 1.4, np.array([1.6, -1.4]), 0.0, 0.5, 0.5)
        assert dx == pytest.approx(-0.216, rel=1e-12)
        assert dy == pytest.approx(0.0, abs=1e-12)

    def test_minimizer_is_an_equilibrium(self):
        for t in (0.0, 0.4, 2.9):
            np.testing.assert_allclose(
                lbs3_rhs(FIELD, 1.4, np.array([1.0, -2.0]), t, 0.5, 0.5), 0.0, atol=1e-15
            )
            np.testing.assert_allclose(
                lbs1_rhs(FIELD, 1.4, np.array([1.0, -2.0]), t, 0.5, 0.5), 0.0, atol=1e-15
            )

    def test_first_order_matches_numerical_lie_bracket(self):
        """[f1, f2] = (Df2) f1 - (Df1) f2 for the two speed channels.

        f1 = c*J(x)*dir(t), f2 = a*dir(t) with dir = (cos wt, sin wt). The
        interaction moment of the c1 pair is one, so the averaged drift is
        the bracket itself.
        """
        c, a, omega = 0.7, 0.4, 1.1
        t = 0.53
        p = np.array([0.9, -0.6])
        dirv = np.array([math.cos(omega * t), math.sin(omega * t)])

        def f1(q):
            return c * FIELD.value(q[0], q[1]) * dirv

        def f2(q):
            return a * dirv

        def jac(f, q, h=1e-6):
            cols = []
            for i in range(2):
                dq = np.zeros(2)
                dq[i] = h
                cols.append((f(q + dq) - f(q - dq)) / (2 * h))
            return np.column_stack(cols)

        bracket = jac(f2, p) @ f1(p) - jac(f1, p) @ f2(p)
        drift = lbs1_rhs(FIELD, omega, p, t, c, a)
        np.testing.assert_allclose(drift, bracket, rtol=1e-6, atol=1e-9)

    def test_gain_scaling(self):
        # drift scales with c*a^3 for the third-order system
        base = lbs3_rhs(FIELD, 1.4, np.array([1.6, -1.4]), 0.2, 0.5, 0.5)
        doubled = lbs3_rhs(FIELD, 1.4, np.array([1.6, -1.4]), 0.2, 1.0, 0.5)
        np.testing.assert_allclose(doubled, 2.0 * base, rtol=1e-12)
        amp = lbs3_rhs(FIELD, 1.4, np.array([1.6, -1.4]), 0.2, 0.5, 1.0)
        np.testing.assert_allclose(amp, 8.0 * base, rtol=1e-12)


class TestRotatingFrame:
    def test_roundtrip(self):
        target = (1.0, -2.0)
        rng = np.random.default_rng(9)
        for _ in range(20):
            x, y, t = rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0, 50)
            xi, eta = to_rotating(x, y, target, 1.4, t)
            xb, yb = from_rotating(xi, eta, target, 1.4, t)
            assert xb == pytest.approx(x, rel=1e-12, abs=1e-12)
            assert yb == pytest.approx(y, rel=1e-12, abs=1e-12)

    def test_isometry_about_target(self):
        target = (0.3, 0.7)
        rng = np.random.default_rng(10)
        for _ in range(20):
            x, y, t = rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0, 50)
            xi, eta = to_rotating(x, y, target, 2.0, t)
            assert math.hypot(xi, eta) == pytest.approx(
                math.hypot(x - 0.3, y - 0.7), rel=1e-12, abs=1e-12
            )

    def test_zero_time_is_a_reflection(self):
        xi, eta = to_rotating(2.0, 3.0, (1.0, 1.0), 1.4, 0.0)
        assert (xi, eta) == (1.0, -2.0)


class TestParamValidation:
    @pytest.mark.parametrize("name", ["a", "c", "epsilon", "omega"])
    def test_gains_must_be_positive(self, name):
        kwargs = dict(a=0.5, c=0.5, epsilon=0.001, omega=1.4)
        kwargs[name] = 0.0
        with pytest.raises(ValueError):
            SimParams(**kwargs)

    def test_hpf_gain_nonnegative(self):
        with pytest.raises(ValueError):
            SimParams(a=1, c=1, epsilon=0.1, omega=1, hpf_gain=-0.5)

    def test_theta0_finite(self):
        with pytest.raises(ValueError):
            SimParams(a=1, c=1, epsilon=0.1, omega=1, theta0=math.inf)
