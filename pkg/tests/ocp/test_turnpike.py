import unittest

import numpy as np
import pytest

from config.numerics_config import NumericsConfig
from hamiltonian.hamiltonian_system import build_hamiltonian
from hamiltonian.trajectory import Trajectory
from manifold.chart import COVERED
from manifold.globalize import stable_manifold, unstable_manifold
from ocp.turnpike import (
    NORM_CONVENTION,
    sufficient_condition,
    turnpike_metric,
    turnpike_report,
    turnpike_signal,
    uniformity_statistic,
)
from systems.factory import example_system


class TestTurnpikeMetric(unittest.TestCase):
    def setUp(self):
        self.traj = Trajectory(
            times=np.array([0.0, 0.5, 1.5, 8.5, 9.5, 10.0]),
            states=np.array([0.2, 0.2, 0.0, 0.0, 0.2, 0.2]),
            n=1,
        )

    def test_synthetic_profile(self):
        metric = turnpike_metric(self.traj, 0.1)
        self.assertAlmostEqual(metric.measure, 2.0, places=9)
        self.assertAlmostEqual(metric.first_exit, 1.0, places=9)
        self.assertAlmostEqual(metric.last_entry, 9.0, places=9)
        self.assertEqual(len(metric.intervals), 2)

    def test_never_above(self):
        metric = turnpike_metric(self.traj, 0.5)
        self.assertEqual(metric.measure, 0.0)
        self.assertIsNone(metric.first_exit)
        self.assertIsNone(metric.last_entry)

    def test_always_above(self):
        metric = turnpike_metric(self.traj, -1.0)
        self.assertAlmostEqual(metric.measure, 10.0)
        self.assertIsNone(metric.first_exit)
        self.assertIsNone(metric.last_entry)

    def test_inputs_count_towards_signal(self):
        traj = Trajectory(
            times=np.array([0.0, 1.0, 2.0]),
            states=np.zeros(3),
            n=1,
            inputs=np.array([1.0, 1.0, 0.0]),
        )
        metric = turnpike_metric(traj, 0.5)
        self.assertAlmostEqual(metric.measure, 1.5, places=9)


class TestUniformity(unittest.TestCase):
    def test_ratio(self):
        self.assertAlmostEqual(uniformity_statistic([2.0, 3.0, 2.5]), 1.5)

    def test_all_zero(self):
        self.assertEqual(uniformity_statistic([0.0, 0.0]), 1.0)

    def test_some_zero(self):
        self.assertEqual(uniformity_statistic([0.0, 1.0]), float("inf"))

    def test_empty(self):
        self.assertIsNone(uniformity_statistic([]))


class TestTurnpikeReport(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.hsys = build_hamiltonian(example_system("generator"))
        cls.report = turnpike_report(
            cls.hsys, [0.3, 0.0, 0.0], [0.2, 0.0, 0.0], horizons=[8.0, 16.0], epsilon=0.1
        )

    def test_all_horizons_converge(self):
        self.assertTrue(self.report.all_converged)
        self.assertEqual([entry.T for entry in self.report.entries], [8.0, 16.0])
        for entry in self.report.entries:
            self.assertLessEqual(entry.residual, NumericsConfig.get_config("shooting").tol)
            self.assertGreater(entry.cost, 0.0)
            self.assertLess(entry.energy_drift, 1e-6)

    def test_uniformity_matches_residences(self):
        residences = [entry.residence for entry in self.report.entries]
        self.assertAlmostEqual(self.report.uniformity, max(residences) / min(residences))
        self.assertEqual(self.report.norm, NORM_CONVENTION)

    def test_long_horizon_leaves_and_returns(self):
        entry = self.report.entries[-1]
        self.assertIsNotNone(entry.first_exit)
        self.assertIsNotNone(entry.last_entry)
        self.assertLess(entry.first_exit, entry.last_entry)

    def test_unchecked_sufficient_condition(self):
        self.assertFalse(self.report.sufficient_condition["checked"])
        self.assertIsNone(self.report.sufficient_condition["satisfied"])


class TestBacksteppingTurnpike(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        hsys = build_hamiltonian(example_system("backstepping"))
        cls.report = turnpike_report(
            hsys, [1.0, 1.0], [0.5, 0.0], horizons=[10.0, 20.0, 40.0], epsilon=0.1
        )

    def test_every_horizon_converges(self):
        self.assertTrue(self.report.all_converged)
        for entry in self.report.entries:
            self.assertLessEqual(entry.residual, 1e-8)
            self.assertLessEqual(entry.residence, entry.T)
            self.assertLess(entry.energy_drift, 1e-6)

    def test_residence_is_uniform_across_horizons(self):
        self.assertTrue(self.report.within_bound)
        self.assertLessEqual(self.report.uniformity, 1.5)

    def test_long_horizons_pass_near_the_origin(self):
        for entry in self.report.entries[1:]:
            traj = entry.result.trajectory
            self.assertLess(turnpike_signal(traj, 0.5 * entry.T), 0.1)


class TestScalarSufficientCondition(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        hsys = build_hamiltonian(example_system("scalar"))
        cls.stable = stable_manifold(hsys)
        cls.unstable = unstable_manifold(hsys)

    def test_start_beyond_equilibrium_is_unsatisfied(self):
        result = sufficient_condition(np.array([1.2]), np.zeros(1), self.stable, self.unstable)
        self.assertTrue(result["checked"])
        self.assertNotEqual(result["x0_status"], COVERED)
        self.assertEqual(result["xf_status"], COVERED)
        self.assertFalse(result["satisfied"])

    def test_covered_pair_is_satisfied(self):
        result = sufficient_condition(np.array([0.5]), np.zeros(1), self.stable, self.unstable)
        self.assertEqual(result["x0_status"], COVERED)
        self.assertTrue(result["satisfied"])


def test_failed_horizons_are_recorded():
    hsys = build_hamiltonian(example_system("scalar"))
    shooting = NumericsConfig.get_config("shooting", max_iter=0, tol=1e-300)
    report = turnpike_report(hsys, [0.5], [0.5], horizons=[4.0, 8.0], shooting=shooting)
    assert not report.all_converged
    assert report.uniformity is None
    assert not report.within_bound
    for entry in report.entries:
        assert entry.error_type == "ShootingDiverged"
        assert entry.residence is None


@pytest.mark.parametrize("horizons", [[], [5.0, 2.0], [-1.0, 2.0]])
def test_rejects_bad_horizons(horizons):
    hsys = build_hamiltonian(example_system("scalar"))
    with pytest.raises(ValueError):
        turnpike_report(hsys, [0.5], [0.5], horizons=horizons)


def test_rejects_nonpositive_epsilon():
    hsys = build_hamiltonian(example_system("scalar"))
    with pytest.raises(ValueError):
        turnpike_report(hsys, [0.5], [0.5], horizons=[1.0], epsilon=0.0)


def test_sufficient_condition_without_charts():
    result = sufficient_condition(np.zeros(1), np.zeros(1), None, None)
    assert result == {"checked": False, "x0_status": None, "xf_status": None, "satisfied": None}
