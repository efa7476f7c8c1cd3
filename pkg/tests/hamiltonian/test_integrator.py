import unittest
from dataclasses import replace

import numpy as np
import pytest

from config.numerics_config import NumericsConfig
from extensions.errors import IntegrationError, StepSizeUnderflow
from hamiltonian.integrator import (
    PiecewiseConstantInput,
    integrate,
    sample_grid,
    simulate_controlled,
)
from systems.control_system import linear_system
from systems.factory import example_system
from systems.feedbacks import linear_feedback, zero_feedback


def logistic(t, x0):
    return 1.0 / (1.0 + (1.0 / x0 - 1.0) * np.exp(t))


class TestSimulateControlled(unittest.TestCase):
    def setUp(self):
        self.scalar = example_system("scalar")

    def test_logistic_closed_form(self):
        traj = simulate_controlled(self.scalar, [0.5], zero_feedback(self.scalar), 5.0)
        np.testing.assert_allclose(traj.x[:, 0], logistic(traj.times, 0.5), rtol=1e-7, atol=1e-9)
        self.assertEqual(traj.total_cost(), 0.0)

    def test_none_means_zero_input(self):
        traj = simulate_controlled(self.scalar, [0.5], None, 2.0)
        self.assertAlmostEqual(traj.x[-1, 0], logistic(2.0, 0.5), places=7)
        np.testing.assert_allclose(traj.inputs, 0.0)

    def test_finite_escape_is_reported(self):
        with self.assertRaises(IntegrationError):
            simulate_controlled(self.scalar, [2.0], None, 5.0)

    def test_piecewise_constant_input(self):
        sys = linear_system([[0.0]], [[1.0]], np.zeros((0, 1)))
        signal = PiecewiseConstantInput([0.0, 1.0], [[1.0], [-1.0]])
        traj = simulate_controlled(sys, [0.0], signal, 2.0)
        self.assertAlmostEqual(traj.state_at(1.0)[0], 1.0, places=8)
        self.assertAlmostEqual(traj.x[-1, 0], 0.0, places=8)
        self.assertAlmostEqual(traj.total_cost(), 1.0, places=8)
        self.assertTrue(np.all(np.diff(traj.times) > 0))

    def test_linear_feedback_cost(self):
        sys = linear_system([[0.0]], [[1.0]], [[1.0]])
        traj = simulate_controlled(sys, [1.0], linear_feedback([[1.0]]), 20.0)
        # x = exp(-t), u = -x, cost integrand x^2
        self.assertAlmostEqual(traj.total_cost(), 0.5, places=6)


class TestPiecewiseConstantInput(unittest.TestCase):
    def test_values_and_breakpoints(self):
        signal = PiecewiseConstantInput([0.0, 1.0, 3.0], [1.0, 2.0, 3.0])
        self.assertEqual(signal.m, 1)
        np.testing.assert_allclose(signal(0.5), [1.0])
        np.testing.assert_allclose(signal(1.0), [2.0])
        np.testing.assert_allclose(signal(10.0), [3.0])
        self.assertEqual(signal.breakpoints(2.0), [0.0, 1.0, 2.0])

    def test_must_start_at_zero(self):
        with self.assertRaises(ValueError):
            PiecewiseConstantInput([0.5], [1.0])

    def test_breakpoints_increase(self):
        with self.assertRaises(ValueError):
            PiecewiseConstantInput([0.0, 2.0, 1.0], [1.0, 2.0, 3.0])


@pytest.mark.parametrize("t0, t1", [(0.0, 1.0), (1.0, 0.0), (-2.0, 3.0)])
def test_sample_grid_is_increasing(t0, t1):
    grid = sample_grid(t0, t1, 10)
    assert grid[0] == min(t0, t1)
    assert grid[-1] == max(t0, t1)
    assert np.all(np.diff(grid) > 0)


class TestIntegrate(unittest.TestCase):
    def setUp(self):
        self.config = NumericsConfig.get_config("integrator")

    def test_decay_within_default_floor(self):
        run = integrate(lambda t, y: -y, [1.0], 10.0, self.config)
        self.assertEqual(run.t_stop, 10.0)
        self.assertAlmostEqual(run.dense(10.0)[0], np.exp(-10.0), places=8)

    def test_step_floor_relative_to_span(self):
        config = replace(self.config, min_step_factor=0.5)
        with self.assertRaises(StepSizeUnderflow) as caught:
            integrate(lambda t, y: -y, [1.0], 10.0, config)
        self.assertIsNotNone(caught.exception.t)
