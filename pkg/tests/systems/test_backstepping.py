import unittest

import numpy as np

from extensions.errors import BadStructure
from hamiltonian.integrator import simulate_controlled
from systems.backstepping import backstepping_feedback, backstepping_lyapunov, virtual_control
from systems.examples import backstepping_cascade, backstepping_example, scalar_example


class TestBacksteppingFeedback(unittest.TestCase):
    def setUp(self):
        self.cascade = backstepping_cascade()
        self.sys = backstepping_example()
        self.law = backstepping_feedback(self.sys)

    def test_accepts_cascade_or_system(self):
        x = np.array([0.4, -0.2])
        np.testing.assert_allclose(backstepping_feedback(self.cascade)(x), self.law(x))

    def test_rejects_systems_without_cascade(self):
        with self.assertRaises(BadStructure):
            backstepping_feedback(scalar_example())

    def test_virtual_control_vanishes_at_origin(self):
        np.testing.assert_allclose(virtual_control(self.cascade, np.zeros(1)), 0.0)

    def test_lyapunov_derivative(self):
        rng = np.random.default_rng(3)
        step = 1e-6
        for x in rng.uniform(-2.0, 2.0, size=(10, 2)):
            x_dot = self.sys.drift(x, self.law(x))
            gradient = np.array(
                [
                    (
                        backstepping_lyapunov(self.cascade, x + step * e)
                        - backstepping_lyapunov(self.cascade, x - step * e)
                    )
                    / (2.0 * step)
                    for e in np.eye(2)
                ]
            )
            z = x[1] - virtual_control(self.cascade, x[:1])[0]
            self.assertAlmostEqual(gradient @ x_dot, -(x[0] ** 2) - z**2, places=5)

    def test_closed_loop_reaches_origin(self):
        rng = np.random.default_rng(11)
        directions = rng.standard_normal((50, 2))
        radii = 2.0 * np.sqrt(rng.uniform(0.0, 1.0, (50, 1)))
        starts = radii * directions / np.linalg.norm(directions, axis=1, keepdims=True)
        for x0 in starts:
            traj = simulate_controlled(self.sys, x0, self.law, 50.0, samples_per_unit=4)
            self.assertLess(np.linalg.norm(traj.x[-1]), 1e-4)
            values = np.array([backstepping_lyapunov(self.cascade, x) for x in traj.x])
            self.assertTrue(np.all(np.diff(values) <= 1e-9))
