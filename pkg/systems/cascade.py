from dataclasses import dataclass
from typing import Callable, Mapping, Optional

import numpy as np

from systems.control_system import ControlAffineSystem


@dataclass(frozen=True, eq=False)
class CascadeSystem:
    """
    Two-block cascade with blocks of equal size k:

        x1' = f1(x1) + g1(x1) x2
        x2' = f2(x1, x2) + g2(x1, x2) u

    Dg1(x1) has shape (k, k, k), entry j being the Jacobian of column j of g1.
    Df2 is k x 2k and Dg2 is (k, k, 2k); both differentiate in x = (x1, x2).
    """

    k: int
    f1: Callable[[np.ndarray], np.ndarray]
    g1: Callable[[np.ndarray], np.ndarray]
    Df1: Callable[[np.ndarray], np.ndarray]
    Dg1: Callable[[np.ndarray], np.ndarray]
    f2: Callable[[np.ndarray, np.ndarray], np.ndarray]
    g2: Callable[[np.ndarray, np.ndarray], np.ndarray]
    Df2: Callable[[np.ndarray, np.ndarray], np.ndarray]
    Dg2: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def split(self, x: np.ndarray):
        return x[: self.k], x[self.k:]

    def as_control_affine(
        self,
        h: Callable[[np.ndarray], float],
        Dh: Callable[[np.ndarray], np.ndarray],
        D2h0: np.ndarray,
        name: str = "cascade",
        params: Optional[Mapping[str, float]] = None,
    ) -> ControlAffineSystem:
        k = self.k

        def f(x):
            x1, x2 = self.split(x)
            return np.concatenate(
                [self.f1(x1) + self.g1(x1) @ x2, self.f2(x1, x2)]
            )

        def g(x):
            x1, x2 = self.split(x)
            return np.vstack([np.zeros((k, k)), self.g2(x1, x2)])

        def Df(x):
            x1, x2 = self.split(x)
            top_left = self.Df1(x1) + np.einsum("j,jab->ab", x2, self.Dg1(x1))
            top = np.hstack([top_left, self.g1(x1)])
            return np.vstack([top, self.Df2(x1, x2)])

        def Dg(x):
            x1, x2 = self.split(x)
            lower = self.Dg2(x1, x2)
            return np.concatenate([np.zeros((k, k, 2 * k)), lower], axis=1)

        return ControlAffineSystem(
            n=2 * k,
            m=k,
            f=f,
            g=g,
            h=h,
            Df=Df,
            Dg=Dg,
            Dh=Dh,
            D2h0=np.asarray(D2h0, dtype=float),
            name=name,
            params=dict(params or {}),
            cascade=self,
        )
