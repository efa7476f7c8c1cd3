import unittest

import numpy as np
import pytest

from extensions.errors import NotDetectable, NotStabilizable
from linalg.pbh import is_hurwitz, pbh_detectable, pbh_stabilizable
from linalg.riccati import care_residual, hamiltonian_matrix, solve_care


class TestSolveCare(unittest.TestCase):
    def test_scalar_closed_form(self):
        for a in (-2.0, -0.5, 0.0, 0.7, 3.0):
            P = solve_care([[a]], [[1.0]], [[1.0]])
            self.assertAlmostEqual(P[0, 0], a + np.sqrt(a * a + 1.0), places=10)

    def test_double_integrator(self):
        A = np.array([[0.0, 1.0], [0.0, 0.0]])
        B = np.array([[0.0], [1.0]])
        P = solve_care(A, B, np.eye(2))
        expected = np.array([[np.sqrt(3.0), 1.0], [1.0, np.sqrt(3.0)]])
        np.testing.assert_allclose(P, expected, atol=1e-9)

    def test_zero_penalty_on_stable_system(self):
        P = solve_care([[-1.0]], [[1.0]], np.zeros((0, 1)))
        np.testing.assert_allclose(P, [[0.0]], atol=1e-12)

    def test_not_stabilizable(self):
        with self.assertRaises(NotStabilizable):
            solve_care([[1.0]], [[0.0]], [[1.0]])

    def test_not_detectable(self):
        with self.assertRaises(NotDetectable):
            solve_care([[1.0]], [[1.0]], np.zeros((0, 1)))

    def test_hamiltonian_matrix_blocks(self):
        Ham = hamiltonian_matrix([[2.0]], [[1.0]], [[3.0]])
        np.testing.assert_allclose(Ham, [[2.0, -1.0], [-9.0, -2.0]])


class TestPBH(unittest.TestCase):
    def test_uncontrollable_stable_mode_is_stabilizable(self):
        A = np.diag([-1.0, 1.0])
        B = np.array([[0.0], [1.0]])
        self.assertTrue(pbh_stabilizable(A, B))
        self.assertFalse(pbh_stabilizable(A, np.array([[1.0], [0.0]])))

    def test_detectable(self):
        A = np.diag([-1.0, 1.0])
        self.assertTrue(pbh_detectable(np.array([[0.0, 1.0]]), A))
        self.assertFalse(pbh_detectable(np.array([[1.0, 0.0]]), A))

    def test_double_integrator_needs_position(self):
        A = np.array([[0.0, 1.0], [0.0, 0.0]])
        self.assertTrue(pbh_detectable(np.array([[1.0, 0.0]]), A))
        self.assertFalse(pbh_detectable(np.array([[0.0, 1.0]]), A))

    def test_is_hurwitz(self):
        self.assertTrue(is_hurwitz([[-1.0, 5.0], [0.0, -2.0]]))
        self.assertFalse(is_hurwitz([[0.0]]))
        self.assertFalse(is_hurwitz([[-0.1]], margin=0.5))


def test_random_triples(stabilizable_triples):
    for A, B, C in stabilizable_triples:
        P = solve_care(A, B, C)
        assert care_residual(P, A, B, C) <= 1e-9 * (1.0 + np.linalg.norm(P))
        np.testing.assert_allclose(P, P.T, atol=1e-12)
        assert np.min(np.linalg.eigvalsh(P)) >= -1e-10
        assert is_hurwitz(A - B @ B.T @ P)


@pytest.mark.parametrize("a", [-1.0, 0.0, 1.0])
def test_scalar_residual(a):
    P = solve_care([[a]], [[1.0]], [[1.0]])
    assert care_residual(P, [[a]], [[1.0]], [[1.0]]) == pytest.approx(0.0, abs=1e-10)
