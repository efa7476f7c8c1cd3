import unittest

import numpy as np

from manifold.seeds import chart_seeds, seed_directions


class TestSeeds(unittest.TestCase):
    def test_line_has_two_directions(self):
        np.testing.assert_allclose(seed_directions(1, 8), [[1.0], [-1.0]])

    def test_unit_directions(self):
        for n in (2, 3, 5):
            directions = seed_directions(n, 7, seed=1)
            self.assertEqual(directions.shape, (7, n))
            np.testing.assert_allclose(np.linalg.norm(directions, axis=1), 1.0)

    def test_deterministic(self):
        np.testing.assert_allclose(seed_directions(3, 6, seed=4), seed_directions(3, 6, seed=4))

    def test_shells_innermost_first(self):
        seeds = chart_seeds(2, radii=[0.1, 0.05], per_shell=4)
        self.assertEqual(seeds.shape, (8, 2))
        np.testing.assert_allclose(np.linalg.norm(seeds[:4], axis=1), 0.05)
        np.testing.assert_allclose(np.linalg.norm(seeds[4:], axis=1), 0.1)

    def test_radii_must_be_positive(self):
        with self.assertRaises(ValueError):
            chart_seeds(2, radii=[0.0, 0.1])
