import unittest

import numpy as np
import pytest

from extensions.errors import BadStructure, NonPSDHessian, UnknownExample
from linalg.pbh import pbh_detectable, pbh_stabilizable
from systems.control_system import FeedbackLaw, linear_system, linearize, remainders
from systems.examples import quadratic_penalty
from systems.factory import ExampleFactory, example_system


class TestExampleFactory(unittest.TestCase):
    def test_names(self):
        self.assertEqual(
            set(ExampleFactory.names()),
            {"scalar", "generator", "pendulum", "zero_dynamics", "backstepping"},
        )

    def test_unknown_example(self):
        with self.assertRaises(UnknownExample):
            ExampleFactory.get_system("rocket")

    def test_unknown_parameter(self):
        with self.assertRaises(UnknownExample):
            ExampleFactory.get_system("pendulum", mass=2.0)

    def test_parameters_are_passed(self):
        sys = example_system("pendulum", epsilon=0.5)
        self.assertAlmostEqual(sys.params["epsilon"], 0.5)
        self.assertAlmostEqual(sys.h(np.array([1.0, 0.0])), 0.5)

    def test_every_example_has_an_equilibrium_at_the_origin(self):
        for name in ExampleFactory.names():
            sys = example_system(name)
            np.testing.assert_allclose(sys.f(np.zeros(sys.n)), 0.0, atol=1e-14)
            self.assertEqual(float(sys.h(np.zeros(sys.n))), 0.0)


class TestLinearization(unittest.TestCase):
    def test_scalar(self):
        lin = linearize(example_system("scalar"))
        np.testing.assert_allclose(lin.A, [[-1.0]])
        np.testing.assert_allclose(lin.B, [[1.0]])
        self.assertEqual(lin.C.shape, (0, 1))
        self.assertEqual(lin.penalty_rank, 0)

    def test_generator_is_stabilizable_and_detectable(self):
        lin = linearize(example_system("generator"))
        self.assertTrue(pbh_stabilizable(lin.A, lin.B))
        self.assertTrue(pbh_detectable(lin.C, lin.A))

    def test_penalty_factor(self):
        lin = linearize(example_system("generator", weights=[4.0, 1.0, 0.0]))
        self.assertEqual(lin.penalty_rank, 2)
        np.testing.assert_allclose(lin.C.T @ lin.C, np.diag([4.0, 1.0, 0.0]), atol=1e-12)

    def test_indefinite_hessian(self):
        sys = example_system("scalar").with_penalty(*quadratic_penalty([-1.0]))
        with self.assertRaises(NonPSDHessian):
            linearize(sys)

    def test_remainders_vanish_for_linear_systems(self):
        sys = linear_system([[0.0, 1.0], [-2.0, -3.0]], [[0.0], [1.0]], np.eye(2))
        rest = remainders(sys, linearize(sys))
        x = np.array([0.3, -0.7])
        np.testing.assert_allclose(rest.phi(x), 0.0, atol=1e-14)
        np.testing.assert_allclose(rest.g_tilde(x), 0.0, atol=1e-14)
        self.assertAlmostEqual(rest.h_tilde(x), 0.0, places=14)

    def test_scalar_remainder(self):
        sys = example_system("scalar")
        rest = remainders(sys, linearize(sys))
        np.testing.assert_allclose(rest.phi(np.array([0.5])), [0.25])


class TestFeedbackLaw(unittest.TestCase):
    def test_must_vanish_at_origin(self):
        with self.assertRaises(BadStructure):
            FeedbackLaw(k=lambda x: np.ones(1), n=1, m=1)

    def test_call_returns_vector(self):
        law = FeedbackLaw(k=lambda x: -2.0 * x[0], n=1, m=1)
        np.testing.assert_allclose(law(np.array([0.5])), [-1.0])


def test_with_penalty_keeps_cascade(example_systems):
    sys = example_systems["backstepping"]
    penalized = sys.with_penalty(*quadratic_penalty([2.0, 1.0]))
    assert penalized.cascade is sys.cascade
    assert penalized.h(np.array([1.0, 1.0])) == pytest.approx(1.5)
