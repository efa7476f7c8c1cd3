from dataclasses import dataclass
from typing import Optional

import numpy as np

from config.numerics_config import IntegratorConfig
from extensions.errors import NoConvergence
from extensions.logger import logger
from hamiltonian.integrator import integrate, resolve_config
from interfaces.feedback_interface import IFeedbackLaw
from linalg.riccati import solve_care
from systems.control_system import ControlAffineSystem, as_vector, linearize


MAX_SWITCH_RADIUS = 1e-3


@dataclass(frozen=True)
class InfiniteCost:
    value: float
    accumulated: float
    tail_estimate: float
    tail_bound: float
    switch_time: float
    switch_radius: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def switch_radius(P1: np.ndarray, tail_tol: float) -> float:
    """r with kappa r^2 <= tail_tol, kappa = lambda_max(P1) / 2, capped at 1e-3."""
    kappa = 0.5 * float(np.max(np.linalg.eigvalsh(P1))) if P1.size else 0.0
    if kappa <= 0.0:
        return MAX_SWITCH_RADIUS
    return min(MAX_SWITCH_RADIUS, float(np.sqrt(tail_tol / kappa)))


def infinite_cost(
    sys: ControlAffineSystem,
    feedback: IFeedbackLaw,
    x0,
    tail_tol: float = 1e-10,
    t_max: float = 200.0,
    P1: Optional[np.ndarray] = None,
    config: Optional[IntegratorConfig] = None,
) -> InfiniteCost:
    """
    Cost of the closed loop x' = f + g k(x) from x0 over [0, inf).

    The running cost is integrated until |x| < r_switch; the remainder is
    estimated by x^T P1 x / 2 and bounded by kappa |x|^2.

    Raises:
        NoConvergence: If |x| does not enter r_switch by t_max.
    """
    x0 = as_vector(x0, sys.n)
    config = resolve_config(config)
    if P1 is None:
        lin = linearize(sys)
        P1 = solve_care(lin.A, lin.B, lin.C)
    P1 = np.atleast_2d(np.asarray(P1, dtype=float))
    radius = switch_radius(P1, tail_tol)
    kappa = 0.5 * float(np.max(np.linalg.eigvalsh(P1)))
    n = sys.n

    accumulated, switch_time, x_end = 0.0, 0.0, x0
    if np.linalg.norm(x0) >= radius:

        def field(t, y):
            x = y[:n]
            u = feedback(x)
            return np.concatenate([sys.drift(x, u), [sys.running_cost(x, u)]])

        def inside(t, y):
            return np.linalg.norm(y[:n]) - radius

        run = integrate(field, np.concatenate([x0, [0.0]]), (0.0, t_max), config, events=[inside])
        if run.event is None:
            raise NoConvergence(
                f"|x| did not enter r_switch={radius:.2e} by t={t_max:g}"
            )
        y_end = run.dense(run.t_stop)
        accumulated, switch_time, x_end = float(y_end[n]), run.t_stop, y_end[:n]

    tail = 0.5 * float(x_end @ P1 @ x_end)
    bound = kappa * float(x_end @ x_end)
    logger.debug(f"Infinite-horizon cost switched at t={switch_time:.4g}, tail {tail:.2e}")
    return InfiniteCost(
        value=accumulated + tail,
        accumulated=accumulated,
        tail_estimate=tail,
        tail_bound=bound,
        switch_time=float(switch_time),
        switch_radius=radius,
    )
