import os
from typing import List, Optional

import numpy as np

from config.experiment_config import ExperimentConfig
from extensions.logger import logger
from interfaces.validation_interface import IValidator


class ConfigValidator(IValidator):
    def __init__(self, n: Optional[int] = None) -> None:
        """
        Args:
            n: State dimension to check vectors against, when already known.
        """
        self.n = n
        self.problems: List[str] = []

    def is_valid(self, config: ExperimentConfig) -> bool:
        """
        Validates the invariants of an experiment configuration.

        Returns:
            bool: True if valid; messages are collected in `problems` as
            "field: message" strings.
        """
        logger.info("Validating experiment configuration")
        self.problems = []
        return all(
            [
                self._check_tolerances(config),
                self._check_files(config),
                self._check_manifold(config),
                self._check_turnpike(config),
                self._check_simulation(config),
            ]
        )

    def _fail(self, field: str, message: str) -> bool:
        logger.warning(f"{field}: {message}")
        self.problems.append(f"{field}: {message}")
        return False

    def _check_tolerances(self, config: ExperimentConfig) -> bool:
        values = {
            "integrator.rtol": config.integrator.rtol,
            "integrator.atol": config.integrator.atol,
            "manifold.tol": config.manifold.tol,
            "manifold.energy_tol": config.manifold.energy_tol,
            "manifold.check_tol": config.manifold.check_tol,
            "manifold.check_rtol": config.manifold.check_rtol,
            "manifold.newton_tol": config.manifold.newton_tol,
            "shooting.tol": config.shooting.tol,
            "shooting.rtol": config.shooting.rtol,
            "shooting.atol": config.shooting.atol,
        }
        bad = [name for name, value in values.items() if not value > 0]
        for name in bad:
            self._fail(name, "must be positive")
        return not bad

    def _check_files(self, config: ExperimentConfig) -> bool:
        plugin = config.system.plugin
        if config.system.kind == "plugin" and not os.path.isfile(plugin):
            return self._fail("system.plugin", f"file not found: {plugin}")
        return True

    def _check_manifold(self, config: ExperimentConfig) -> bool:
        ok = True
        manifold = config.manifold
        if not manifold.seed_radii or min(manifold.seed_radii) <= 0:
            ok = self._fail("manifold.seed_radii", "radii must be positive")
        if manifold.extend_time <= 0:
            ok = self._fail("manifold.extend_time", "must be positive")
        if manifold.max_iter < 1 or manifold.nodes_per_panel < 2:
            ok = self._fail("manifold.max_iter", "iteration and node counts are too small")
        for point in config.manifold_run.query_points:
            ok = self._check_dimension("manifold.query_points", point) and ok
        bounds = config.manifold_run.bounds
        if isinstance(bounds, tuple) and self.n is not None and len(bounds) != self.n:
            ok = self._fail("manifold.bounds", f"expected {self.n} pairs")
        return ok

    def _check_turnpike(self, config: ExperimentConfig) -> bool:
        ok = True
        horizons = config.turnpike.horizons
        if not horizons:
            ok = self._fail("turnpike.horizons", "at least one horizon is required")
        elif min(horizons) <= 0 or np.any(np.diff(horizons) <= 0):
            ok = self._fail("turnpike.horizons", "horizons must be positive and increasing")
        if config.turnpike.epsilon <= 0:
            ok = self._fail("turnpike.epsilon", "must be positive")
        for name in ("x0", "xf"):
            value = getattr(config.turnpike_run, name)
            if value is not None:
                ok = self._check_dimension(f"turnpike.{name}", value) and ok
        return ok

    def _check_simulation(self, config: ExperimentConfig) -> bool:
        ok = True
        run = config.simulation
        if run.T <= 0:
            ok = self._fail("simulate.T", "must be positive")
        if run.tail_tol <= 0:
            ok = self._fail("simulate.tail_tol", "must be positive")
        if run.x0 is not None:
            ok = self._check_dimension("simulate.x0", run.x0) and ok
        if run.input_times is not None:
            times = np.asarray(run.input_times)
            if times.size == 0 or times[0] != 0.0 or np.any(np.diff(times) <= 0):
                ok = self._fail("simulate.input.times", "must start at 0 and increase")
        return ok

    def _check_dimension(self, field: str, vector) -> bool:
        if self.n is not None and len(vector) != self.n:
            return self._fail(field, f"expected length {self.n}, got {len(vector)}")
        return True
