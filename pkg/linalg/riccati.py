import numpy as np
from scipy.linalg import schur

from extensions.errors import (
    IllConditionedSubspace,
    NotDetectable,
    NotStabilizable,
)
from extensions.logger import logger
from linalg.pbh import is_hurwitz, pbh_detectable, pbh_stabilizable


SUBSPACE_COND_LIMIT = 1e12


def as_triple(A, B, C):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    B = np.asarray(B, dtype=float).reshape(n, -1)
    C = np.asarray(C, dtype=float).reshape(-1, n)
    return A, B, C


def hamiltonian_matrix(A, B, C) -> np.ndarray:
    """[[A, -B B^T], [-C^T C, -A^T]]."""
    A, B, C = as_triple(A, B, C)
    return np.block([[A, -B @ B.T], [-C.T @ C, -A.T]])


def care_residual(P, A, B, C) -> float:
    A, B, C = as_triple(A, B, C)
    return float(np.linalg.norm(P @ A + A.T @ P - P @ B @ B.T @ P + C.T @ C))


def solve_care(A, B, C) -> np.ndarray:
    """
    Stabilizing solution of P A + A^T P - P B B^T P + C^T C = 0.

    The stable invariant subspace [X1; X2] of the Hamiltonian matrix comes from
    an ordered real Schur form and P = X2 X1^-1.

    Args:
        A: n x n state matrix.
        B: n x m input matrix.
        C: r x n penalty factor; r may be zero.

    Returns:
        np.ndarray: Symmetric positive semidefinite P with A - B B^T P Hurwitz.

    Raises:
        NotStabilizable: If (A, B) fails the PBH test.
        NotDetectable: If (C, A) fails the PBH test.
        IllConditionedSubspace: If X1 is numerically singular or the Hamiltonian
            matrix has eigenvalues on the imaginary axis.
    """
    A, B, C = as_triple(A, B, C)
    n = A.shape[0]
    if not pbh_stabilizable(A, B):
        raise NotStabilizable("(A, B) is not stabilizable")
    if not pbh_detectable(C, A):
        raise NotDetectable("(C, A) is not detectable")

    Ham = hamiltonian_matrix(A, B, C)
    _, Z, sdim = schur(Ham, output="real", sort="lhp")
    if sdim != n:
        raise IllConditionedSubspace(
            f"Stable subspace has dimension {sdim}, expected {n}"
        )
    X1, X2 = Z[:n, :n], Z[n:, :n]
    condition = np.linalg.cond(X1)
    if not np.isfinite(condition) or condition > SUBSPACE_COND_LIMIT:
        raise IllConditionedSubspace(f"cond(X1) = {condition:.3e}")

    P = np.linalg.solve(X1.T, X2.T).T
    P = 0.5 * (P + P.T)

    residual = care_residual(P, A, B, C)
    logger.debug(f"CARE residual {residual:.3e}, cond(X1) {condition:.3e}")
    if not is_hurwitz(A - B @ B.T @ P):
        raise IllConditionedSubspace("CARE solution is not stabilizing")
    return P
