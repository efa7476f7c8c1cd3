import unittest

import numpy as np

from linalg.symplectic import build_symplectic, symplectic_form


class TestSymplectic(unittest.TestCase):
    def test_symplectic_form(self):
        J = symplectic_form(2)
        np.testing.assert_allclose(J @ J, -np.eye(4))

    def test_double_integrator(self):
        data = build_symplectic([[0.0, 1.0], [0.0, 0.0]], [[0.0], [1.0]], np.eye(2))
        report = data.invariant_report()
        self.assertLess(report["inverse"], 1e-10)
        self.assertLess(report["symplectic"], 1e-10)
        self.assertLess(report["off_diagonal"], 1e-8)
        self.assertLess(report["care_residual"], 1e-9)
        self.assertLess(report["closed_loop_abscissa"], 0.0)


def test_random_triples(stabilizable_triples):
    for A, B, C in stabilizable_triples:
        data = build_symplectic(A, B, C)
        n = data.n
        blocks = data.block_form()
        np.testing.assert_allclose(blocks[:n, :n], data.F, atol=1e-7)
        np.testing.assert_allclose(blocks[n:, n:], -data.F.T, atol=1e-7)
        report = data.invariant_report()
        assert report["inverse"] < 1e-8
        assert report["symplectic"] < 1e-8
