import json
import unittest

import numpy as np

from hamiltonian.hamiltonian_system import build_hamiltonian
from hamiltonian.trajectory import Trajectory
from manifold.chart import COVERED, UNCOVERED, CoverageEntry, CoverageEstimate
from manifold.lyapunov_perron import local_stable_manifold
from ocp.turnpike import TurnpikeEntry, TurnpikeReport
from storage.local_storage import canonical_json
from storage.serializers import (
    REPORT_COLUMNS,
    chart_points_columns,
    chart_points_from_dict,
    chart_to_dict,
    coverage_from_dict,
    coverage_to_dict,
    report_entries_from_dict,
    report_rows,
    report_rows_to_entries,
    report_to_dict,
    trajectory_columns,
    trajectory_from_columns,
)
from systems.control_system import linear_system


def make_report():
    entries = (
        TurnpikeEntry(T=5.0, converged=True, residence=2.0, first_exit=1.0, last_entry=4.0,
                      intervals=((0.0, 1.0), (4.0, 5.0)), cost=0.7, residual=1e-10,
                      iterations=2, energy_drift=1e-9),
        TurnpikeEntry(T=10.0, converged=False, error_type="ShootingDiverged", error="line search failed"),
    )
    return TurnpikeReport(
        x0=np.array([1.0]),
        xf=np.array([0.0]),
        epsilon=0.1,
        entries=entries,
        uniformity=1.0,
        uniformity_bound=1.5,
        sufficient_condition={"checked": False, "x0_status": None, "xf_status": None, "satisfied": None},
    )


class TestChartSerialization(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        sys = linear_system([[0.0, 1.0], [0.0, 0.0]], [[0.0], [1.0]], np.eye(2))
        cls.chart = local_stable_manifold(build_hamiltonian(sys))

    def test_points_survive_json(self):
        payload = json.loads(canonical_json(chart_to_dict(self.chart)))
        self.assertEqual(payload["kind"], "stable")
        self.assertEqual(len(payload["seeds"]), len(self.chart.seeds))
        points = chart_points_from_dict(payload)
        self.assertEqual(len(points), len(self.chart.global_points))
        for original, loaded in zip(self.chart.global_points, points):
            np.testing.assert_allclose(loaded.x, original.x, rtol=1e-11)
            self.assertEqual(loaded.seed_index, original.seed_index)

    def test_point_columns(self):
        header, rows = chart_points_columns(self.chart)
        self.assertEqual(header, ["x1", "x2", "p1", "p2", "tau", "seed_index"])
        self.assertEqual(rows.shape, (len(self.chart.global_points), 6))
        self.assertEqual(rows[0, -1], -1.0)


class TestCoverageSerialization(unittest.TestCase):
    def test_entries(self):
        estimate = CoverageEstimate(
            kind="stable",
            entries=(
                CoverageEntry(np.array([0.9]), COVERED, 0.01, (np.array([0.9, 0.0]),), 1e-12),
                CoverageEntry(np.array([1.5]), UNCOVERED, 0.6),
            ),
            method={"spacing": 0.02},
        )
        payload = json.loads(canonical_json(coverage_to_dict(estimate)))
        self.assertAlmostEqual(payload["covered_fraction"], 0.5)
        loaded = coverage_from_dict(payload)
        self.assertEqual(loaded.statuses(), [COVERED, UNCOVERED])
        np.testing.assert_allclose(loaded.entries[0].witness, [0.9, 0.0])
        self.assertIsNone(loaded.entries[1].residual)
        self.assertEqual(loaded.entries[1].witnesses, ())


class TestReportSerialization(unittest.TestCase):
    def test_json(self):
        payload = json.loads(canonical_json(report_to_dict(make_report())))
        self.assertTrue(payload["within_bound"])
        self.assertFalse(payload["all_converged"])
        entries = report_entries_from_dict(payload)
        self.assertEqual(entries[0].intervals, ((0.0, 1.0), (4.0, 5.0)))
        self.assertEqual(entries[1].error_type, "ShootingDiverged")
        self.assertIsNone(entries[1].residence)

    def test_rows_use_nan_for_failed_horizons(self):
        header, rows = report_rows(make_report())
        self.assertEqual(tuple(header), REPORT_COLUMNS)
        self.assertEqual(rows.shape, (2, len(REPORT_COLUMNS)))
        self.assertTrue(np.isnan(rows[1, 2]))
        entries = report_rows_to_entries(header, rows)
        self.assertEqual(entries[0].iterations, 2)
        self.assertFalse(entries[1].converged)
        self.assertIsNone(entries[1].cost)


class TestTrajectorySerialization(unittest.TestCase):
    def test_hamiltonian_trajectory_columns(self):
        times = np.linspace(0.0, 1.0, 5)
        states = np.column_stack([times, -times])
        traj = Trajectory(times=times, states=states, n=1, energy=np.zeros(5),
                          input_map=lambda z: -z[1:])
        header, rows = trajectory_columns(traj)
        self.assertEqual(header, ["t", "x1", "p1", "u1", "H"])
        np.testing.assert_allclose(rows[:, 3], times)

        loaded = trajectory_from_columns(header, rows)
        np.testing.assert_allclose(loaded.p[:, 0], -times)
        np.testing.assert_allclose(loaded.inputs[:, 0], times)
        self.assertIsNone(loaded.cost)

    def test_simulation_columns(self):
        times = np.linspace(0.0, 1.0, 3)
        traj = Trajectory(times=times, states=np.ones((3, 2)), n=2, inputs=np.zeros(3), cost=times)
        header, rows = trajectory_columns(traj)
        self.assertEqual(header, ["t", "x1", "x2", "u1", "cost"])
        self.assertEqual(trajectory_from_columns(header, rows).total_cost(), 1.0)
