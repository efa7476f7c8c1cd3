from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from linalg.symplectic import SymplecticData, build_symplectic
from systems.control_system import ControlAffineSystem, linearize


@dataclass(frozen=True, eq=False)
class HamiltonianSystem:
    """
    Characteristic field of the HJB equation

        x' =  dH/dp = f(x) - g(x) g(x)^T p
        p' = -dH/dx = -[Df(x)^T + sum_j u_j Dg_j(x)^T] p - Dh(x),  u = -g(x)^T p

    with H(x, p) = p^T f(x) - |g(x)^T p|^2 / 2 + h(x). A negative time_sign
    gives the time-reversed field with the same H.
    """

    base: ControlAffineSystem
    sym: SymplecticData
    time_sign: float = 1.0

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def is_reversed(self) -> bool:
        return self.time_sign < 0

    def split(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        z = np.asarray(z, dtype=float)
        return z[: self.n], z[self.n: 2 * self.n]

    def control(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        return -np.atleast_2d(self.base.g(x)).T @ p

    def forward_rhs(self, z: np.ndarray) -> np.ndarray:
        x, p = self.split(z)
        base = self.base
        u = self.control(x, p)
        x_dot = base.f(x) + np.atleast_2d(base.g(x)) @ u
        Dg = np.asarray(base.Dg(x)).reshape(base.m, base.n, base.n)
        costate_matrix = np.asarray(base.Df(x)).T + np.einsum("j,jab->ba", u, Dg)
        p_dot = -costate_matrix @ p - base.Dh(x)
        return np.concatenate([x_dot, p_dot])

    def rhs(self, z: np.ndarray) -> np.ndarray:
        return self.time_sign * self.forward_rhs(z)

    def hval(self, x: np.ndarray, p: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        gtp = np.atleast_2d(self.base.g(x)).T @ p
        return float(p @ self.base.f(x) - 0.5 * gtp @ gtp + self.base.h(x))

    def energy(self, z: np.ndarray) -> float:
        return self.hval(*self.split(z))

    def reversed(self) -> "HamiltonianSystem":
        return replace(self, time_sign=-self.time_sign)

    def jacobian_at(self, z: np.ndarray, step: float = 1e-6) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        size = z.size
        jac = np.zeros((size, size))
        for k in range(size):
            dz = np.zeros(size)
            dz[k] = step
            jac[:, k] = (self.rhs(z + dz) - self.rhs(z - dz)) / (2.0 * step)
        return jac

    def nonlinear_residual(self, w: np.ndarray) -> np.ndarray:
        """(nu1, nu2) of the forward field in (xi, eta) coordinates."""
        sym = self.sym
        n = self.n
        linear = np.concatenate([sym.F @ w[:n], -sym.F.T @ w[n:]])
        return sym.Linv @ self.forward_rhs(sym.L @ w) - linear


def build_hamiltonian(
    sys: ControlAffineSystem, sym: Optional[SymplecticData] = None
) -> HamiltonianSystem:
    if sym is None:
        lin = linearize(sys)
        sym = build_symplectic(lin.A, lin.B, lin.C)
    return HamiltonianSystem(base=sys, sym=sym)


def optimal_feedback(hsys: HamiltonianSystem, x, p) -> np.ndarray:
    """u = -g(x)^T p, the minimizer of p^T (f + g u) + |u|^2 / 2."""
    return hsys.control(np.asarray(x, dtype=float), np.asarray(p, dtype=float))


def to_xi_eta(sym: SymplecticData, x, p) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    eta = p - sym.P1 @ x
    return x - sym.P2 @ eta, eta


def from_xi_eta(sym: SymplecticData, xi, eta) -> Tuple[np.ndarray, np.ndarray]:
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    x = xi + sym.P2 @ eta
    return x, sym.P1 @ x + eta
