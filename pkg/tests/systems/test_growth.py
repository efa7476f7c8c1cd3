import unittest

import numpy as np

from extensions.errors import InsufficientSamples
from systems.control_system import ControlAffineSystem
from systems.examples import quadratic_penalty
from systems.factory import example_system
from systems.growth import growth_certificate


def monomial_system(power: int) -> ControlAffineSystem:
    h, Dh, D2h0 = quadratic_penalty([1.0])
    return ControlAffineSystem(
        n=1,
        m=1,
        f=lambda x: np.array([-x[0] ** power]),
        g=lambda x: np.ones((1, 1)),
        h=h,
        Df=lambda x: np.array([[-power * x[0] ** (power - 1)]]),
        Dg=lambda x: np.zeros((1, 1, 1)),
        Dh=Dh,
        D2h0=D2h0,
        name=f"monomial{power}",
    )


class TestGrowthCertificate(unittest.TestCase):
    def test_monomial_calibration(self):
        certificate = growth_certificate(monomial_system(3))
        self.assertAlmostEqual(certificate.f_exponent, 3.0, delta=0.05)
        self.assertAlmostEqual(certificate.g_exponent, 0.0, delta=1e-9)
        self.assertTrue(certificate.coercive)
        self.assertAlmostEqual(certificate.h_exponent, 2.0, delta=1e-9)

    def test_generator_growth(self):
        certificate = growth_certificate(example_system("generator"))
        self.assertGreaterEqual(certificate.f_exponent, 0.8)
        self.assertLessEqual(certificate.f_exponent, 1.2)
        self.assertFalse(certificate.violation)

    def test_scalar_without_penalty_is_not_coercive(self):
        certificate = growth_certificate(example_system("scalar"))
        self.assertFalse(certificate.coercive)
        self.assertIsNone(certificate.c_h)
        self.assertAlmostEqual(certificate.f_exponent, 2.0, delta=0.1)

    def test_decay_constants_for_hurwitz_linearization(self):
        certificate = growth_certificate(example_system("scalar"))
        self.assertIsNotNone(certificate.decay_rate)
        self.assertGreater(certificate.decay_rate, 0.0)
        self.assertGreaterEqual(certificate.decay_gain, 1.0 - 1e-6)

    def test_onset_radius_skips_shells_where_h_is_negative(self):
        sys = monomial_system(3).with_penalty(
            h=lambda x: float(x[0] ** 2) - 300.0,
            Dh=lambda x: 2.0 * x,
            D2h0=np.array([[2.0]]),
        )
        certificate = growth_certificate(sys)
        self.assertTrue(certificate.coercive)
        self.assertEqual(certificate.rho, 20.0)
        self.assertGreater(certificate.c_h, 0.0)
        for radius in certificate.sample_radii:
            if radius >= certificate.rho:
                bound = certificate.c_h * radius**certificate.exponent_p
                self.assertGreaterEqual(radius**2 - 300.0, bound * (1.0 - 1e-9))

    def test_onset_radius_is_inner_shell_for_monomial(self):
        certificate = growth_certificate(monomial_system(3))
        self.assertEqual(certificate.rho, 10.0)

    def test_needs_two_radii(self):
        with self.assertRaises(InsufficientSamples):
            growth_certificate(monomial_system(3), radii=[1.0])

    def test_as_dict(self):
        certificate = growth_certificate(monomial_system(3))
        self.assertIn("exponent_p", certificate.as_dict())
