from dataclasses import replace
from typing import Optional, Tuple

import numpy as np

from config.numerics_config import ManifoldConfig, NumericsConfig
from extensions.errors import IntegrationError
from hamiltonian.hamiltonian_system import HamiltonianSystem
from hamiltonian.integrator import Integration, integrate


def check_config(config: ManifoldConfig):
    integrator = NumericsConfig.get_config("integrator")
    return replace(integrator, rtol=config.check_rtol, atol=config.check_rtol)


def forward_check(
    hsys: HamiltonianSystem, z0, duration: float, config: ManifoldConfig
) -> Tuple[float, Optional[Integration]]:
    """
    Flows z0 forward under `hsys` for `duration` at the check tolerance.

    Returns:
        tuple: |z(duration)|, or inf when the run escapes, and the run itself.
    """
    try:
        run = integrate(
            lambda t, z: hsys.rhs(z), np.asarray(z0, dtype=float), (0.0, duration),
            check_config(config),
        )
    except IntegrationError:
        return float("inf"), None
    return float(np.linalg.norm(run.dense(run.t_stop))), run
