import numpy as np


RANK_RTOL = 1e-10


def _unstable_eigenvalues(A: np.ndarray) -> np.ndarray:
    eigenvalues = np.linalg.eigvals(A)
    # nilpotent blocks put zero eigenvalues slightly off the axis
    slack = 1e-8 * (1.0 + np.linalg.norm(A, 2))
    return eigenvalues[eigenvalues.real >= -slack]


def _full_rank(M: np.ndarray, n: int, scale: float) -> bool:
    singular_values = np.linalg.svd(M, compute_uv=False)
    if singular_values.size < n:
        return False
    threshold = RANK_RTOL * max(scale, singular_values[0], np.finfo(float).tiny)
    return int(np.sum(singular_values > threshold)) >= n


def pbh_stabilizable(A, B) -> bool:
    """rank [lambda I - A, B] = n at every eigenvalue with Re lambda >= 0."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    B = np.asarray(B, dtype=float).reshape(n, -1)
    scale = np.linalg.norm(A, 2)
    for eigenvalue in _unstable_eigenvalues(A):
        M = np.hstack([eigenvalue * np.eye(n) - A, B])
        if not _full_rank(M, n, scale):
            return False
    return True


def pbh_detectable(C, A) -> bool:
    """rank [lambda I - A; C] = n at every eigenvalue with Re lambda >= 0."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    C = np.asarray(C, dtype=float).reshape(-1, n)
    scale = np.linalg.norm(A, 2)
    for eigenvalue in _unstable_eigenvalues(A):
        M = np.vstack([eigenvalue * np.eye(n) - A, C])
        if not _full_rank(M, n, scale):
            return False
    return True


def is_hurwitz(M, margin: float = 0.0) -> bool:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return bool(np.max(np.linalg.eigvals(M).real) < -margin)
