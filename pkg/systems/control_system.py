from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple, Optional

import numpy as np

from extensions.errors import BadStructure, NonPSDHessian
from interfaces.feedback_interface import IFeedbackLaw


# eigenvalues of D2h(0) at or below this are dropped from C
HESSIAN_RANK_TOL = 1e-12


def as_vector(x, size: Optional[int] = None) -> np.ndarray:
    vector = np.asarray(x, dtype=float).reshape(-1)
    if size is not None and vector.size != size:
        raise ValueError(f"Expected a vector of length {size}, got {vector.size}")
    return vector


@dataclass(frozen=True, eq=False)
class ControlAffineSystem:
    """
    Dynamics x' = f(x) + g(x) u with running cost |u|^2/2 + h(x).

    Dg(x) has shape (m, n, n): entry j is the Jacobian of the j-th column of g.
    """

    n: int
    m: int
    f: Callable[[np.ndarray], np.ndarray]
    g: Callable[[np.ndarray], np.ndarray]
    h: Callable[[np.ndarray], float]
    Df: Callable[[np.ndarray], np.ndarray]
    Dg: Callable[[np.ndarray], np.ndarray]
    Dh: Callable[[np.ndarray], np.ndarray]
    D2h0: np.ndarray
    name: str = "custom"
    params: Mapping[str, float] = field(default_factory=dict)
    cascade: Optional[object] = field(default=None, repr=False)

    def drift(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return self.f(x) + self.g(x) @ u

    def running_cost(self, x: np.ndarray, u: np.ndarray) -> float:
        return 0.5 * float(u @ u) + float(self.h(x))

    def with_penalty(
        self,
        h: Callable[[np.ndarray], float],
        Dh: Callable[[np.ndarray], np.ndarray],
        D2h0: np.ndarray,
    ) -> "ControlAffineSystem":
        return ControlAffineSystem(
            n=self.n,
            m=self.m,
            f=self.f,
            g=self.g,
            h=h,
            Df=self.Df,
            Dg=self.Dg,
            Dh=Dh,
            D2h0=np.asarray(D2h0, dtype=float),
            name=self.name,
            params=dict(self.params),
            cascade=self.cascade,
        )


@dataclass(frozen=True, eq=False)
class LinearData:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    @property
    def penalty_rank(self) -> int:
        return self.C.shape[0]

    @property
    def CtC(self) -> np.ndarray:
        return self.C.T @ self.C


class Remainders(NamedTuple):
    phi: Callable[[np.ndarray], np.ndarray]
    g_tilde: Callable[[np.ndarray], np.ndarray]
    h_tilde: Callable[[np.ndarray], float]


@dataclass(frozen=True, eq=False)
class FeedbackLaw(IFeedbackLaw):
    k: Callable[[np.ndarray], np.ndarray]
    n: int
    m: int
    domain_radius: float = np.inf
    name: str = "feedback"

    def __post_init__(self) -> None:
        u0 = self(np.zeros(self.n))
        if u0.shape != (self.m,) or np.linalg.norm(u0) > 1e-10:
            raise BadStructure(f"Feedback {self.name} does not vanish at the origin")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.k(np.asarray(x, dtype=float)), dtype=float))


def symmetric_factor(H: np.ndarray, tol: float = HESSIAN_RANK_TOL) -> np.ndarray:
    """
    Returns C with C^T C = H for a symmetric positive semidefinite H.

    Raises:
        NonPSDHessian: If H has an eigenvalue below -tol * (1 + ||H||).
    """
    H = 0.5 * (H + H.T)
    eigenvalues, eigenvectors = np.linalg.eigh(H)
    scale = 1.0 + np.linalg.norm(H, 2)
    if eigenvalues.size and eigenvalues.min() < -1e-10 * scale:
        raise NonPSDHessian(
            f"Penalty Hessian at the origin has eigenvalue {eigenvalues.min():.3e}"
        )
    keep = eigenvalues > tol
    return np.sqrt(eigenvalues[keep])[:, None] * eigenvectors[:, keep].T


def linearize(sys: ControlAffineSystem) -> LinearData:
    origin = np.zeros(sys.n)
    A = np.asarray(sys.Df(origin), dtype=float).reshape(sys.n, sys.n)
    B = np.asarray(sys.g(origin), dtype=float).reshape(sys.n, sys.m)
    C = symmetric_factor(np.asarray(sys.D2h0, dtype=float).reshape(sys.n, sys.n))
    return LinearData(A=A, B=B, C=C.reshape(-1, sys.n))


def remainders(sys: ControlAffineSystem, lin: LinearData) -> Remainders:
    return Remainders(
        phi=lambda x: sys.f(x) - lin.A @ x,
        g_tilde=lambda x: sys.g(x) - lin.B,
        h_tilde=lambda x: float(sys.h(x)) - 0.5 * float(np.sum((lin.C @ x) ** 2)),
    )


def linear_system(A, B, C, name: str = "linear") -> ControlAffineSystem:
    """The linear-quadratic system f = Ax, g = B, h = |Cx|^2 / 2."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    B = np.asarray(B, dtype=float).reshape(n, -1)
    C = np.asarray(C, dtype=float).reshape(-1, n)
    m = B.shape[1]
    Q = C.T @ C
    return ControlAffineSystem(
        n=n,
        m=m,
        f=lambda x: A @ x,
        g=lambda x: B,
        h=lambda x: 0.5 * float(np.sum((C @ x) ** 2)),
        Df=lambda x: A,
        Dg=lambda x: np.zeros((m, n, n)),
        Dh=lambda x: Q @ x,
        D2h0=Q,
        name=name,
    )
