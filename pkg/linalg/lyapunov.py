import numpy as np

from extensions.errors import IndefiniteSolution, NotHurwitz
from extensions.logger import logger
from linalg.pbh import is_hurwitz


def lyapunov_residual(P: np.ndarray, F: np.ndarray, Q: np.ndarray) -> float:
    return float(np.linalg.norm(P @ F.T + F @ P - Q))


def solve_lyapunov(F, Q, require_nsd: bool = True) -> np.ndarray:
    """
    Solves P F^T + F P = Q through the Kronecker form
    (I (x) F + F (x) I) vec(P) = vec(Q), with column-major vec.

    Args:
        F: Hurwitz matrix.
        Q: Symmetric right-hand side.
        require_nsd: Reject a solution with a positive eigenvalue.

    Returns:
        np.ndarray: The symmetric solution P.

    Raises:
        NotHurwitz: If F has an eigenvalue with nonnegative real part.
        IndefiniteSolution: If require_nsd and P is not negative semidefinite.
    """
    F = np.atleast_2d(np.asarray(F, dtype=float))
    n = F.shape[0]
    Q = np.asarray(Q, dtype=float).reshape(n, n)
    if not is_hurwitz(F):
        raise NotHurwitz("Lyapunov equation needs a Hurwitz matrix")

    identity = np.eye(n)
    K = np.kron(identity, F) + np.kron(F, identity)
    vec_p = np.linalg.solve(K, Q.reshape(-1, order="F"))
    P = vec_p.reshape(n, n, order="F")
    P = 0.5 * (P + P.T)

    logger.debug(f"Lyapunov residual {lyapunov_residual(P, F, Q):.3e}")
    if require_nsd and n:
        top = float(np.max(np.linalg.eigvalsh(P)))
        if top > 1e-10 * (1.0 + np.linalg.norm(P, 2)):
            raise IndefiniteSolution(
                f"Lyapunov solution has positive eigenvalue {top:.3e}"
            )
    return P
