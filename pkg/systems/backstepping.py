from typing import Union

import numpy as np

from extensions.errors import BadStructure, SingularG
from systems.cascade import CascadeSystem
from systems.control_system import ControlAffineSystem, FeedbackLaw


SINGULAR_COND = 1e12


def _checked_inverse(matrix: np.ndarray, label: str) -> np.ndarray:
    matrix = np.atleast_2d(matrix)
    if not np.all(np.isfinite(matrix)) or np.linalg.cond(matrix) > SINGULAR_COND:
        raise SingularG(f"{label} is not invertible")
    return np.linalg.inv(matrix)


def virtual_control(cascade: CascadeSystem, x1: np.ndarray) -> np.ndarray:
    """alpha(x1) = g1(x1)^-1 (-f1(x1) - x1)."""
    g1_inv = _checked_inverse(cascade.g1(x1), "g1")
    return g1_inv @ (-cascade.f1(x1) - x1)


def virtual_control_jacobian(cascade: CascadeSystem, x1: np.ndarray) -> np.ndarray:
    # differentiate g1 alpha = -f1 - x1
    alpha = virtual_control(cascade, x1)
    g1_inv = _checked_inverse(cascade.g1(x1), "g1")
    rhs = -cascade.Df1(x1) - np.eye(cascade.k)
    rhs -= np.einsum("j,jab->ab", alpha, cascade.Dg1(x1))
    return g1_inv @ rhs


def backstepping_feedback(
    sys: Union[CascadeSystem, ControlAffineSystem],
) -> FeedbackLaw:
    """
    Builds the backstepping stabilizer for a two-block cascade.

    With z = x2 - alpha(x1) the control

        u = g2^-1 [ -f2 + Dalpha (f1 + g1 x2) - g1^T x1 - z ]

    gives d/dt (|x1|^2 + |z|^2) / 2 = -|x1|^2 - |z|^2.

    Args:
        sys: The cascade itself, or a system built with CascadeSystem.as_control_affine.

    Returns:
        FeedbackLaw: The stabilizing feedback.

    Raises:
        BadStructure: If sys carries no cascade structure.
        SingularG: If g1 or g2 is singular at a queried point.
    """
    cascade = sys if isinstance(sys, CascadeSystem) else sys.cascade
    if not isinstance(cascade, CascadeSystem):
        raise BadStructure("Backstepping needs a two-block cascade system")

    def k(x: np.ndarray) -> np.ndarray:
        x1, x2 = cascade.split(np.asarray(x, dtype=float))
        g1 = np.atleast_2d(cascade.g1(x1))
        z = x2 - virtual_control(cascade, x1)
        x1_dot = cascade.f1(x1) + g1 @ x2
        g2_inv = _checked_inverse(cascade.g2(x1, x2), "g2")
        return g2_inv @ (
            -cascade.f2(x1, x2)
            + virtual_control_jacobian(cascade, x1) @ x1_dot
            - g1.T @ x1
            - z
        )

    return FeedbackLaw(k=k, n=2 * cascade.k, m=cascade.k, name="backstepping")


def backstepping_lyapunov(cascade: CascadeSystem, x: np.ndarray) -> float:
    """V(x) = |x1|^2 / 2 + |x2 - alpha(x1)|^2 / 2."""
    x1, x2 = cascade.split(np.asarray(x, dtype=float))
    z = x2 - virtual_control(cascade, x1)
    return 0.5 * float(x1 @ x1 + z @ z)
