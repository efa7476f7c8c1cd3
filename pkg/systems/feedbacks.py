import numpy as np

from systems.control_system import ControlAffineSystem, FeedbackLaw


def zero_feedback(sys: ControlAffineSystem) -> FeedbackLaw:
    return FeedbackLaw(k=lambda x: np.zeros(sys.m), n=sys.n, m=sys.m, name="zero")


def linear_feedback(K, name: str = "linear") -> FeedbackLaw:
    """u = -K x."""
    K = np.atleast_2d(np.asarray(K, dtype=float))
    m, n = K.shape
    return FeedbackLaw(k=lambda x: -K @ x, n=n, m=m, name=name)


def lqr_feedback(sys: ControlAffineSystem, P1: np.ndarray) -> FeedbackLaw:
    """u = -B^T P1 x with B = g(0), the optimal law of the linearization."""
    B = np.asarray(sys.g(np.zeros(sys.n)), dtype=float).reshape(sys.n, sys.m)
    return linear_feedback(B.T @ np.asarray(P1, dtype=float), name="lqr")
