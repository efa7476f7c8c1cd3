import unittest

import numpy as np

from config.numerics_config import NumericsConfig
from extensions.errors import IntegratorEscape, NoConvergence
from hamiltonian.hamiltonian_system import build_hamiltonian
from ocp.infinite_cost import infinite_cost, switch_radius
from ocp.shooting import (
    FiniteHorizonProblem,
    SegmentedShooting,
    continue_boundary_data,
    linear_bvp_guess,
    solve_finite_bvp,
    stretched_nodes,
)
from systems.control_system import linear_system
from systems.factory import example_system
from systems.feedbacks import lqr_feedback, zero_feedback


class TestFiniteHorizonProblem(unittest.TestCase):
    def test_horizon_must_be_positive(self):
        sys = example_system("scalar")
        for T in (0.0, -1.0):
            with self.assertRaises(ValueError):
                FiniteHorizonProblem(sys, [0.5], [0.5], T)

    def test_epsilon_must_be_positive(self):
        with self.assertRaises(ValueError):
            FiniteHorizonProblem(example_system("scalar"), [0.5], [0.5], 1.0, epsilon=0.0)


class TestShooting(unittest.TestCase):
    def setUp(self):
        sys = linear_system([[0.0, 1.0], [0.0, 0.0]], [[0.0], [1.0]], np.eye(2))
        self.hsys = build_hamiltonian(sys)

    def test_linear_guess_solves_linear_problem(self):
        x0, xf = np.array([1.0, 0.0]), np.array([0.0, 0.0])
        times = np.linspace(0.0, 4.0, 3)
        guess = linear_bvp_guess(self.hsys, x0, xf, times)
        np.testing.assert_allclose(guess[0][:2], x0, atol=1e-10)
        np.testing.assert_allclose(guess[-1][:2], xf, atol=1e-10)

        result = solve_finite_bvp(self.hsys, x0, xf, 4.0)
        self.assertLessEqual(result.residual, 1e-8)
        self.assertLess(result.terminal_residual, 1e-7)
        np.testing.assert_allclose(result.p0, guess[0][2:], atol=1e-6)

    def test_trajectory_is_sampled_across_segments(self):
        result = solve_finite_bvp(self.hsys, [1.0, 0.0], [0.5, 0.0], 5.0)
        traj = result.trajectory
        self.assertEqual(traj.t0, 0.0)
        self.assertEqual(traj.t_end, 5.0)
        self.assertTrue(np.all(np.diff(traj.times) > 0))
        np.testing.assert_allclose(traj.inputs[:, 0], -traj.p[:, 1], atol=1e-12)
        self.assertLess(traj.energy_drift(), 1e-6)

    def test_nonlinear_problem(self):
        hsys = build_hamiltonian(example_system("generator"))
        result = solve_finite_bvp(hsys, [0.3, 0.0, 0.0], [0.0, 0.0, 0.0], 6.0)
        self.assertLessEqual(result.residual, 1e-8)
        self.assertEqual(result.iterations, len(result.residual_history) - 1)

    def test_warm_start_and_override(self):
        first = solve_finite_bvp(self.hsys, [1.0, 0.0], [0.0, 0.0], 4.0)
        second = solve_finite_bvp(self.hsys, [1.0, 0.0], [0.0, 0.0], 4.0, warm_start=first)
        np.testing.assert_allclose(second.p0, first.p0, atol=1e-6)
        third = solve_finite_bvp(self.hsys, [1.0, 0.0], [0.0, 0.0], 4.0, p0_guess=[0.0, 0.0])
        np.testing.assert_allclose(third.p0, first.p0, atol=1e-6)

    def test_short_horizon_is_single_shooting(self):
        config = NumericsConfig.get_config("shooting")
        single = SegmentedShooting(self.hsys, np.ones(2), np.zeros(2), config.segment_time, config)
        self.assertEqual(single.segments, 1)
        self.assertEqual(single.size, 2)
        split = SegmentedShooting(self.hsys, np.ones(2), np.zeros(2), 5.0, config)
        self.assertEqual(split.segments, 3)
        self.assertEqual(split.size, 2 + 2 * 4)

    def test_stretched_nodes_keep_the_end_arcs(self):
        result = solve_finite_bvp(self.hsys, [1.0, 0.0], [0.5, 0.0], 4.0)
        traj = result.trajectory
        nodes = stretched_nodes(result, np.linspace(0.0, 8.0, 5))
        np.testing.assert_allclose(nodes[0], traj.state_at(0.0))
        for middle in nodes[1:4]:
            np.testing.assert_allclose(middle, traj.state_at(2.0))
        np.testing.assert_allclose(nodes[4], traj.state_at(4.0))

    def test_continuation_matches_direct_solve(self):
        config = NumericsConfig.get_config("shooting")
        x0, xf = np.array([1.0, 0.0]), np.array([0.5, 0.0])
        unknowns, norm, _ = continue_boundary_data(self.hsys, x0, xf, 5.0, config)
        direct = solve_finite_bvp(self.hsys, x0, xf, 5.0)
        self.assertLessEqual(norm, config.tol)
        np.testing.assert_allclose(unknowns[:2], direct.p0, atol=1e-6)


class TestBacksteppingShooting(unittest.TestCase):
    def setUp(self):
        self.hsys = build_hamiltonian(example_system("backstepping"))

    def test_linear_guess_escapes_without_continuation(self):
        config = NumericsConfig.get_config("shooting", continuation=False)
        with self.assertRaises(IntegratorEscape):
            solve_finite_bvp(self.hsys, [1.0, 1.0], [0.5, 0.0], 2.0, config=config)

    def test_continuation_reaches_boundary_data(self):
        result = solve_finite_bvp(self.hsys, [1.0, 1.0], [0.5, 0.0], 2.0)
        self.assertLessEqual(result.residual, 1e-8)
        self.assertLess(result.terminal_residual, 1e-7)
        np.testing.assert_allclose(result.trajectory.state_at(0.0)[:2], [1.0, 1.0])
        self.assertLess(result.trajectory.energy_drift(), 1e-6)


class TestInfiniteCost(unittest.TestCase):
    def test_lqr_value_is_riccati_form(self):
        sys = linear_system([[0.0, 1.0], [0.0, 0.0]], [[0.0], [1.0]], np.eye(2))
        hsys = build_hamiltonian(sys)
        P1 = hsys.sym.P1
        x0 = np.array([1.0, -0.5])
        cost = infinite_cost(sys, lqr_feedback(sys, P1), x0, P1=P1)
        self.assertAlmostEqual(cost.value, 0.5 * x0 @ P1 @ x0, places=6)
        self.assertLessEqual(cost.tail_estimate, cost.tail_bound + 1e-15)

    def test_scalar_closed_form(self):
        sys = linear_system([[0.0]], [[1.0]], [[1.0]])
        cost = infinite_cost(sys, lqr_feedback(sys, np.eye(1)), [2.0])
        self.assertAlmostEqual(cost.value, 2.0, places=6)
        self.assertLess(cost.switch_radius, 1e-3 + 1e-15)

    def test_start_inside_switch_radius(self):
        sys = linear_system([[0.0]], [[1.0]], [[1.0]])
        cost = infinite_cost(sys, lqr_feedback(sys, np.eye(1)), [1e-6])
        self.assertEqual(cost.accumulated, 0.0)
        self.assertAlmostEqual(cost.value, 0.5e-12)

    def test_non_decaying_loop(self):
        sys = linear_system([[0.0]], [[1.0]], [[1.0]])
        with self.assertRaises(NoConvergence):
            infinite_cost(sys, zero_feedback(sys), [1.0], t_max=5.0)

    def test_switch_radius(self):
        self.assertAlmostEqual(switch_radius(np.eye(1) * 2.0, 1e-10), 1e-5)
        self.assertEqual(switch_radius(np.zeros((1, 1)), 1e-10), 1e-3)
