from typing import List, Optional, cast

import numpy as np

from config.numerics_config import NumericsConfig, SystemCheckConfig
from extensions.logger import logger
from interfaces.validation_interface import IValidator
from systems.control_system import ControlAffineSystem


class SystemValidator(IValidator):
    def __init__(self, config: Optional[SystemCheckConfig] = None) -> None:
        """
        Initializes the SystemValidator with the system-check stage config.
        """
        self.config: SystemCheckConfig = config or cast(
            SystemCheckConfig, NumericsConfig.get_config("system_check")
        )
        self.problems: List[str] = []

    def is_valid(self, sys: ControlAffineSystem) -> bool:
        """
        Checks the structural hypotheses of a control-affine system: the origin
        is an equilibrium, the penalty is nonnegative with a critical point at
        the origin, and the supplied Jacobians match central differences at
        seeded points of the ball.

        Args:
            sys: System to check.

        Returns:
            bool: True if every check passes; failures are listed in `problems`.
        """
        logger.info(f"Validating system {sys.name}")
        self.problems = []
        samples = self._samples(sys.n)
        return all(
            [
                self._check_equilibrium(sys),
                self._check_penalty(sys, samples),
                self._check_hessian(sys),
                self._check_jacobians(sys, samples),
            ]
        )

    def _samples(self, n: int) -> np.ndarray:
        rng = np.random.default_rng(self.config.seed)
        directions = rng.standard_normal((self.config.sample_count, n))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        radii = self.config.sample_radius * rng.uniform(0.0, 1.0, self.config.sample_count) ** (1.0 / n)
        return directions * radii[:, None]

    def _fail(self, message: str) -> bool:
        logger.warning(message)
        self.problems.append(message)
        return False

    def _check_equilibrium(self, sys: ControlAffineSystem) -> bool:
        residual = float(np.linalg.norm(sys.f(np.zeros(sys.n))))
        if residual > self.config.equilibrium_tol:
            return self._fail(f"f(0) = {residual:.3e}: the origin is not an equilibrium")
        return True

    def _check_penalty(self, sys: ControlAffineSystem, samples: np.ndarray) -> bool:
        origin = np.zeros(sys.n)
        tol = self.config.equilibrium_tol
        ok = True
        if abs(float(sys.h(origin))) > tol:
            ok = self._fail(f"h(0) = {float(sys.h(origin)):.3e} is not zero")
        if np.linalg.norm(sys.Dh(origin)) > tol:
            ok = self._fail("Dh(0) is not zero")
        lowest = min(float(sys.h(x)) for x in samples)
        if lowest < -tol:
            ok = self._fail(f"h takes the negative value {lowest:.3e}")
        return ok

    def _check_hessian(self, sys: ControlAffineSystem) -> bool:
        H = np.asarray(sys.D2h0, dtype=float).reshape(sys.n, sys.n)
        if np.linalg.norm(H - H.T) > 1e-10 * (1.0 + np.linalg.norm(H)):
            return self._fail("D2h(0) is not symmetric")
        if np.min(np.linalg.eigvalsh(0.5 * (H + H.T))) < -1e-10 * (1.0 + np.linalg.norm(H)):
            return self._fail("D2h(0) is not positive semidefinite")
        return True

    def _central(self, fun, x: np.ndarray) -> np.ndarray:
        """Central differences of fun at x, stacked along the last axis."""
        step = self.config.fd_step
        columns = []
        for k in range(x.size):
            dx = np.zeros(x.size)
            dx[k] = step
            columns.append((np.asarray(fun(x + dx)) - np.asarray(fun(x - dx))) / (2.0 * step))
        return np.stack(columns, axis=-1)

    def _close(self, exact, approx) -> bool:
        exact = np.asarray(exact, dtype=float)
        return np.linalg.norm(exact - approx) <= self.config.jacobian_rtol * (1.0 + np.linalg.norm(exact))

    def _check_jacobians(self, sys: ControlAffineSystem, samples: np.ndarray) -> bool:
        n, m = sys.n, sys.m
        for x in samples:
            if not self._close(sys.Df(x), self._central(sys.f, x)):
                return self._fail(f"Df disagrees with finite differences at {np.round(x, 4)}")
            Dg = np.asarray(sys.Dg(x), dtype=float).reshape(m, n, n)
            fd = self._central(lambda y: np.asarray(sys.g(y)).reshape(n, m).T, x)
            if not self._close(Dg, fd):
                return self._fail(f"Dg disagrees with finite differences at {np.round(x, 4)}")
            if not self._close(sys.Dh(x), self._central(lambda y: float(sys.h(y)), x)):
                return self._fail(f"Dh disagrees with finite differences at {np.round(x, 4)}")
        return True
