import unittest

import numpy as np

from extensions.errors import BadPartition
from systems.cutoff import CutoffSpec, cutoff_system, smoothstep, smoothstep_derivative
from systems.examples import zero_dynamics_example


class TestSmoothstep(unittest.TestCase):
    def test_plateaus(self):
        self.assertEqual(smoothstep(-0.5), 0.0)
        self.assertEqual(smoothstep(0.0), 0.0)
        self.assertEqual(smoothstep(1.0), 1.0)
        self.assertEqual(smoothstep(1.5), 1.0)

    def test_monotone_between(self):
        values = [smoothstep(t) for t in np.linspace(0.0, 1.0, 101)]
        self.assertTrue(all(b >= a for a, b in zip(values, values[1:])))
        self.assertAlmostEqual(smoothstep(0.5), 0.5, places=12)

    def test_derivative_matches_differences(self):
        step = 1e-6
        for t in (0.2, 0.5, 0.8):
            numeric = (smoothstep(t + step) - smoothstep(t - step)) / (2 * step)
            self.assertAlmostEqual(smoothstep_derivative(t), numeric, places=6)


class TestCutoffSystem(unittest.TestCase):
    def setUp(self):
        self.sys = zero_dynamics_example()
        self.spec = CutoffSpec(R=2.0, split=(1, 2))
        self.cut = cutoff_system(self.sys, self.spec)

    def test_identity_inside_radius(self):
        x = np.array([0.7, 1.2, -0.9])
        np.testing.assert_array_equal(self.cut.f(x), self.sys.f(x))
        np.testing.assert_array_equal(self.cut.g(x), self.sys.g(x))
        np.testing.assert_allclose(self.cut.Df(x), self.sys.Df(x), atol=1e-14)

    def test_beyond_transition_band(self):
        x = np.array([1.0, 3.0, 0.0])
        np.testing.assert_allclose(self.cut.f(x), self.sys.f(np.array([1.0, 0.0, 0.0])))
        np.testing.assert_allclose(self.cut.f(x), [-1.0, 0.0, 0.0])

    def test_phi_profile(self):
        self.assertEqual(self.spec.phi(np.array([1.0, 1.0])), 1.0)
        self.assertEqual(self.spec.phi(np.array([0.0, 3.5])), 0.0)
        radii = np.linspace(2.0, 3.0, 21)
        values = [self.spec.phi(np.array([r, 0.0])) for r in radii]
        self.assertTrue(all(b <= a for a, b in zip(values, values[1:])))

    def test_chain_rule_jacobian_in_band(self):
        x = np.array([0.5, 1.8, 1.1])
        step = 1e-6
        numeric = np.column_stack(
            [
                (self.cut.f(x + step * e) - self.cut.f(x - step * e)) / (2 * step)
                for e in np.eye(3)
            ]
        )
        np.testing.assert_allclose(self.cut.Df(x), numeric, atol=1e-6)

    def test_penalty_untouched(self):
        x = np.array([0.0, 5.0, 5.0])
        self.assertEqual(self.cut.h(x), self.sys.h(x))
        self.assertEqual(self.cut.params["R"], 2.0)

    def test_bad_partition(self):
        with self.assertRaises(BadPartition):
            cutoff_system(self.sys, CutoffSpec(R=1.0, split=(2, 2)))
