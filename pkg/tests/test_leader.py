import unittest

import numpy as np
import scipy.integrate

from leadertrack.constants import LeaderFamily
from leadertrack.entities import (
    ConstantNominal,
    SinusoidNominal,
    TabulatedNominal,
    make_profile,
)
from leadertrack.leader import (
    check_admissible,
    check_consistency,
    leader_position,
    leader_state,
    leader_velocity,
    true_acceleration,
)
from leadertrack.models import AlphaFunction


class AlphaFunctionTest(unittest.TestCase):
    def test_reference_gain(self):
        alpha = AlphaFunction()

        self.assertEqual(alpha(0.0), 1.0)
        self.assertEqual(alpha(1.0), 0.5)
        np.testing.assert_allclose(alpha(np.array([0.0, 3.0])), [1.0, 0.25])
        self.assertEqual(alpha.mu, 1.0)

    def test_offset_and_scale(self):
        alpha = AlphaFunction(c=2.0, p=0.75, t0=3.0)

        self.assertAlmostEqual(alpha(0.0), 2.0 / 4.0**0.75)
        self.assertAlmostEqual(alpha.mu, 2.0 / 4.0**0.75)

    def test_derivative_matches_finite_differences(self):
        alpha = AlphaFunction(c=1.5, p=0.8, t0=0.5)
        for t in (0.0, 0.7, 10.0):
            with self.subTest(t=t):
                h = 1e-6
                numeric = (alpha(t + h) - alpha(t - h)) / (2 * h) if t > 0 else (alpha(h) - alpha(0.0)) / h
                self.assertAlmostEqual(alpha.derivative(t), numeric, places=5)


class AdmissibilityTest(unittest.TestCase):
    def test_reference_gain_is_admissible(self):
        report = check_admissible(AlphaFunction())

        self.assertTrue(report.admissible)
        self.assertTrue(report.integral_diverges)
        self.assertAlmostEqual(report.integral_alpha_squared, 1.0)
        self.assertEqual(report.mu, 1.0)

    def test_squared_integral_closed_form(self):
        alpha = AlphaFunction(c=2.0, p=0.75, t0=1.0)
        report = check_admissible(alpha)

        numeric, _ = scipy.integrate.quad(lambda t: alpha(t) ** 2, 0.0, np.inf)
        self.assertTrue(report.admissible)
        self.assertAlmostEqual(report.integral_alpha_squared, numeric, places=6)

    def test_exponent_bounds(self):
        cases = [
            (0.5, False, True),
            (0.3, False, True),
            (0.51, True, True),
            (1.0, True, True),
            (1.2, False, False),
        ]
        for p, admissible, diverges in cases:
            with self.subTest(p=p):
                report = check_admissible(AlphaFunction(p=p))
                self.assertEqual(report.admissible, admissible)
                self.assertEqual(report.integral_diverges, diverges)

        self.assertEqual(check_admissible(AlphaFunction(p=0.5)).integral_alpha_squared, np.inf)


class LeaderTrajectoryTest(unittest.TestCase):
    def test_velocity_is_alpha_times_nominal(self):
        alpha = AlphaFunction()
        profile = ConstantNominal(2.0)

        self.assertAlmostEqual(leader_velocity(alpha, profile, 1.0), 1.0)
        self.assertAlmostEqual(true_acceleration(alpha, profile, 1.0), -0.5)

    def test_constant_nominal_closed_form(self):
        for p in (1.0, 0.75):
            alpha = AlphaFunction(c=1.3, p=p, t0=0.5)
            profile = ConstantNominal(2.0, x0_init=-1.0)
            with self.subTest(p=p):
                for t in (0.0, 1.0, 25.0):
                    numeric, _ = scipy.integrate.quad(
                        lambda s: leader_velocity(alpha, profile, s), 0.0, t
                    )
                    self.assertAlmostEqual(
                        leader_position(alpha, profile, t), -1.0 + numeric, places=8
                    )

    def test_reference_leader_position(self):
        position = leader_position(AlphaFunction(), ConstantNominal(2.0), 10.0)
        self.assertAlmostEqual(position, 2.0 * np.log(11.0), places=12)

    def test_quadrature_for_sinusoid(self):
        alpha = AlphaFunction()
        profile = SinusoidNominal(amplitude=1.0, omega=1.0, offset=0.5, x0_init=0.2)

        x0, v0, a0 = leader_state(alpha, profile, 4.0)

        expected, _ = scipy.integrate.quad(
            lambda s: (0.5 + np.sin(s)) / (1.0 + s), 0.0, 4.0, epsabs=1e-13, epsrel=1e-13
        )
        self.assertAlmostEqual(x0, 0.2 + expected, places=9)
        self.assertAlmostEqual(v0, (0.5 + np.sin(4.0)) / 5.0)
        self.assertAlmostEqual(
            a0, -(0.5 + np.sin(4.0)) / 25.0 + np.cos(4.0) / 5.0
        )


class ConsistencyTest(unittest.TestCase):
    def test_builtin_families(self):
        times = np.linspace(0.05, 9.95, 37)
        profiles = [
            ConstantNominal(2.0),
            SinusoidNominal(amplitude=0.7, omega=2.0, phase=0.3, offset=1.0),
            TabulatedNominal(times=np.linspace(0.0, 10.0, 11), values=np.sin(np.linspace(0.0, 10.0, 11))),
        ]
        for profile in profiles:
            with self.subTest(family=profile.family.value):
                self.assertTrue(check_consistency(profile, times))

    def test_detects_mismatched_acceleration(self):
        class Inconsistent(SinusoidNominal):
            def nominal_acceleration(self, t):
                return np.zeros_like(np.asarray(t, dtype=float))

        self.assertFalse(check_consistency(Inconsistent(amplitude=1.0), [0.5, 1.0, 2.0]))


class MakeProfileTest(unittest.TestCase):
    def test_families(self):
        constant = make_profile(LeaderFamily.CONSTANT_NOMINAL, {"value": 2.0}, x0_init=1.0)
        self.assertIsInstance(constant, ConstantNominal)
        self.assertEqual(constant.x0_init, 1.0)

        tabulated = make_profile(
            LeaderFamily.TABULATED, {"times": [0.0, 1.0, 2.0], "values": [1.0, 2.0, 1.0]}
        )
        self.assertAlmostEqual(float(tabulated.nominal_velocity(1.0)), 2.0)

    def test_bad_parameters(self):
        with self.assertRaises(ValueError):
            make_profile(LeaderFamily.CONSTANT_NOMINAL, {"speed": 2.0})

        with self.assertRaises(ValueError):
            make_profile(LeaderFamily.TABULATED, {"times": [0.0], "values": [1.0]})
