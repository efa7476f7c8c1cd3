from typing import Optional, Sequence

import numpy as np
from scipy.stats import norm, qmc

from config.numerics_config import ManifoldConfig, NumericsConfig


def seed_directions(n: int, count: int, seed: int = 0) -> np.ndarray:
    """
    Low-discrepancy unit directions in R^n.

    The line has only two directions. In the plane the angles come from a
    scrambled van der Corput sequence; above that a scrambled Halton sample is
    pushed through the normal quantile and normalized.
    """
    if n == 1:
        return np.array([[1.0], [-1.0]])
    count = max(count, 2)
    if n == 2:
        offsets = qmc.Halton(d=1, scramble=True, seed=seed).random(count)[:, 0]
        angles = 2.0 * np.pi * np.sort(offsets)
        return np.column_stack([np.cos(angles), np.sin(angles)])

    sample = qmc.Halton(d=n, scramble=True, seed=seed).random(count)
    gaussian = norm.ppf(np.clip(sample, 1e-12, 1.0 - 1e-12))
    return gaussian / np.linalg.norm(gaussian, axis=1, keepdims=True)


def chart_seeds(
    n: int,
    radii: Optional[Sequence[float]] = None,
    per_shell: Optional[int] = None,
    seed: Optional[int] = None,
    config: Optional[ManifoldConfig] = None,
) -> np.ndarray:
    """Seeds on spheres of geometrically spaced radii, innermost shell first."""
    config = config or NumericsConfig.get_config("manifold")
    radii = tuple(radii if radii is not None else config.seed_radii)
    if not radii or min(radii) <= 0:
        raise ValueError("Seed radii must be positive")
    directions = seed_directions(
        n,
        per_shell or config.seeds_per_shell,
        config.seed if seed is None else seed,
    )
    return np.vstack([radius * directions for radius in sorted(radii)])
