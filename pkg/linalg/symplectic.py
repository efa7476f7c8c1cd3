from dataclasses import dataclass
from typing import Dict

import numpy as np

from extensions.logger import logger
from linalg.lyapunov import lyapunov_residual, solve_lyapunov
from linalg.riccati import as_triple, care_residual, hamiltonian_matrix, solve_care


def symplectic_form(n: int) -> np.ndarray:
    """J = [[0, I], [-I, 0]]."""
    identity = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, identity], [-identity, zero]])


@dataclass(frozen=True, eq=False)
class SymplecticData:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    P1: np.ndarray
    P2: np.ndarray
    L: np.ndarray
    Linv: np.ndarray
    F: np.ndarray
    Ham: np.ndarray

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def BBt(self) -> np.ndarray:
        return self.B @ self.B.T

    def block_form(self) -> np.ndarray:
        return self.Linv @ self.Ham @ self.L

    def invariant_report(self) -> Dict[str, float]:
        n = self.n
        J = symplectic_form(n)
        blocks = self.block_form()
        return {
            "inverse": float(np.linalg.norm(self.L @ self.Linv - np.eye(2 * n))),
            "symplectic": float(np.linalg.norm(self.L.T @ J @ self.L - J)),
            "off_diagonal": float(
                max(np.linalg.norm(blocks[:n, n:]), np.linalg.norm(blocks[n:, :n]))
            ),
            "care_residual": care_residual(self.P1, self.A, self.B, self.C),
            "lyapunov_residual": lyapunov_residual(self.P2, self.F, self.BBt),
            "closed_loop_abscissa": float(np.max(np.linalg.eigvals(self.F).real)),
        }


def build_symplectic(A, B, C) -> SymplecticData:
    """
    Block-diagonalizes the linear Hamiltonian matrix.

    With P1 the stabilizing CARE solution, F = A - B B^T P1 and P2 the solution
    of P2 F^T + F P2 = B B^T, the map L = [[I, P2], [P1, I + P1 P2]] carries
    (xi, eta) to (x, p) and Linv Ham L = diag(F, -F^T).
    """
    A, B, C = as_triple(A, B, C)
    n = A.shape[0]
    identity = np.eye(n)

    logger.info(f"Solving CARE (n={n}, m={B.shape[1]}, r={C.shape[0]})")
    P1 = solve_care(A, B, C)
    F = A - B @ B.T @ P1
    P2 = solve_lyapunov(F, B @ B.T)

    L = np.block([[identity, P2], [P1, identity + P1 @ P2]])
    Linv = np.block([[identity + P2 @ P1, -P2], [-P1, identity]])
    return SymplecticData(
        A=A,
        B=B,
        C=C,
        P1=P1,
        P2=P2,
        L=L,
        Linv=Linv,
        F=F,
        Ham=hamiltonian_matrix(A, B, C),
    )
