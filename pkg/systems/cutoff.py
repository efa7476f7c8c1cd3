from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np

from extensions.errors import BadPartition
from systems.control_system import ControlAffineSystem


UNDERFLOW_GUARD = 1e-8


def _psi(t: float) -> float:
    return float(np.exp(-1.0 / t)) if t > UNDERFLOW_GUARD else 0.0


def _dpsi(t: float) -> float:
    return _psi(t) / t**2 if t > UNDERFLOW_GUARD else 0.0


def smoothstep(t: float) -> float:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, monotone in between."""
    left, right = _psi(t), _psi(1.0 - t)
    return left / (left + right)


def smoothstep_derivative(t: float) -> float:
    left, right = _psi(t), _psi(1.0 - t)
    total = left + right
    return (_dpsi(t) * right + left * _dpsi(1.0 - t)) / total**2


@dataclass(frozen=True)
class CutoffSpec:
    R: float
    split: Tuple[int, int]
    smoothstep: Callable[[float], float] = field(default=smoothstep, repr=False)
    smoothstep_derivative: Callable[[float], float] = field(
        default=smoothstep_derivative, repr=False
    )

    def phi(self, x2: np.ndarray) -> float:
        return 1.0 - self.smoothstep(float(np.linalg.norm(x2)) - self.R)

    def grad_phi(self, x2: np.ndarray) -> np.ndarray:
        radius = float(np.linalg.norm(x2))
        if radius == 0.0:
            return np.zeros_like(x2)
        return -self.smoothstep_derivative(radius - self.R) * x2 / radius


def cutoff_system(sys: ControlAffineSystem, spec: CutoffSpec) -> ControlAffineSystem:
    """
    Replaces x2 by phi_R(x2) x2 inside f and g, leaving the penalty untouched.

    Raises:
        BadPartition: If the split does not add up to the state dimension.
    """
    n1, n2 = spec.split
    if n1 < 0 or n2 < 0 or n1 + n2 != sys.n:
        raise BadPartition(f"Split {spec.split} does not partition dimension {sys.n}")

    def clamp(x):
        x = np.asarray(x, dtype=float)
        x2 = x[n1:]
        return np.concatenate([x[:n1], spec.phi(x2) * x2])

    def chain(x):
        x = np.asarray(x, dtype=float)
        x2 = x[n1:]
        M = np.eye(sys.n)
        M[n1:, n1:] = spec.phi(x2) * np.eye(n2) + np.outer(x2, spec.grad_phi(x2))
        return M

    return ControlAffineSystem(
        n=sys.n,
        m=sys.m,
        f=lambda x: sys.f(clamp(x)),
        g=lambda x: sys.g(clamp(x)),
        h=sys.h,
        Df=lambda x: sys.Df(clamp(x)) @ chain(x),
        Dg=lambda x: np.asarray(sys.Dg(clamp(x))) @ chain(x),
        Dh=sys.Dh,
        D2h0=sys.D2h0,
        name=f"{sys.name}_cutoff",
        params={**sys.params, "R": spec.R},
        cascade=None,
    )
