from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from systems.cascade import CascadeSystem
from systems.control_system import ControlAffineSystem


Penalty = Tuple[Callable[[np.ndarray], float], Callable[[np.ndarray], np.ndarray], np.ndarray]


def quadratic_penalty(Q) -> Penalty:
    """
    Builds h(x) = x^T Q x / 2 together with its gradient and Hessian.

    Args:
        Q: Symmetric weight matrix, or a vector of diagonal weights.

    Returns:
        Penalty: The triple (h, Dh, D2h0).
    """
    Q = np.asarray(Q, dtype=float)
    if Q.ndim == 1:
        Q = np.diag(Q)
    Q = 0.5 * (Q + Q.T)
    return (
        lambda x: 0.5 * float(x @ Q @ x),
        lambda x: Q @ x,
        Q,
    )


def zero_penalty(n: int) -> Penalty:
    return quadratic_penalty(np.zeros((n, n)))


def scalar_example(penalty: Optional[Penalty] = None) -> ControlAffineSystem:
    """x' = -x + x^2 + u with h = 0 by default."""
    h, Dh, D2h0 = penalty or zero_penalty(1)
    return ControlAffineSystem(
        n=1,
        m=1,
        f=lambda x: np.array([-x[0] + x[0] ** 2]),
        g=lambda x: np.ones((1, 1)),
        h=h,
        Df=lambda x: np.array([[-1.0 + 2.0 * x[0]]]),
        Dg=lambda x: np.zeros((1, 1, 1)),
        Dh=Dh,
        D2h0=D2h0,
        name="scalar",
    )


def generator_example(
    a: float = 1.0,
    b: float = 1.0,
    c: float = 1.0,
    d: float = 0.5,
    delta: float = np.pi / 4,
    weights: Optional[Sequence[float]] = None,
    penalty: Optional[Penalty] = None,
) -> ControlAffineSystem:
    """
    Synchronous generator connected to an infinite bus, actuated through the
    field voltage. The penalty defaults to |x|^2 / 2; `weights` gives a diagonal
    quadratic instead and `penalty` overrides both.
    """
    if penalty is None:
        penalty = quadratic_penalty(weights if weights is not None else np.ones(3))
    h, Dh, D2h0 = penalty
    sin_d, cos_d = np.sin(delta), np.cos(delta)

    def f(x):
        angle = x[0] + delta
        return np.array(
            [
                x[1],
                -a * ((1.0 + x[2]) * np.sin(angle) - sin_d) - b * x[1],
                -c * x[2] + d * (np.cos(angle) - cos_d),
            ]
        )

    def Df(x):
        angle = x[0] + delta
        return np.array(
            [
                [0.0, 1.0, 0.0],
                [-a * (1.0 + x[2]) * np.cos(angle), -b, -a * np.sin(angle)],
                [-d * np.sin(angle), 0.0, -c],
            ]
        )

    B = np.array([[0.0], [0.0], [1.0]])
    return ControlAffineSystem(
        n=3,
        m=1,
        f=f,
        g=lambda x: B,
        h=h,
        Df=Df,
        Dg=lambda x: np.zeros((1, 3, 3)),
        Dh=Dh,
        D2h0=D2h0,
        name="generator",
        params={"a": a, "b": b, "c": c, "d": d, "delta": delta},
    )


def pendulum_example(epsilon: float = 0.1) -> ControlAffineSystem:
    """Inverted pendulum with the cart position dropped; h = eps * |x|^2."""

    def f(x):
        s, c = np.sin(x[0]), np.cos(x[0])
        return np.array([x[1], (s - x[1] ** 2 * s * c) / (1.0 + s**2)])

    def g(x):
        s, c = np.sin(x[0]), np.cos(x[0])
        return np.array([[0.0], [-c / (1.0 + s**2)]])

    def Df(x):
        s, c = np.sin(x[0]), np.cos(x[0])
        den = 1.0 + s**2
        num = s - x[1] ** 2 * s * c
        dnum = c - x[1] ** 2 * (c**2 - s**2)
        return np.array(
            [
                [0.0, 1.0],
                [
                    (dnum * den - num * 2.0 * s * c) / den**2,
                    -2.0 * x[1] * s * c / den,
                ],
            ]
        )

    def Dg(x):
        s, c = np.sin(x[0]), np.cos(x[0])
        den = 1.0 + s**2
        jac = np.zeros((1, 2, 2))
        jac[0, 1, 0] = (s * den + 2.0 * s * c**2) / den**2
        return jac

    Q = 2.0 * epsilon * np.eye(2)
    return ControlAffineSystem(
        n=2,
        m=1,
        f=f,
        g=g,
        h=lambda x: epsilon * float(x @ x),
        Df=Df,
        Dg=Dg,
        Dh=lambda x: Q @ x,
        D2h0=Q,
        name="pendulum",
        params={"epsilon": epsilon},
    )


def zero_dynamics_example() -> ControlAffineSystem:
    h, Dh, D2h0 = quadratic_penalty(np.ones(3))
    B = np.array([[0.0], [0.0], [1.0]])
    return ControlAffineSystem(
        n=3,
        m=1,
        f=lambda x: np.array([-x[0] + x[0] ** 2 * x[1], x[2], 0.0]),
        g=lambda x: B,
        h=h,
        Df=lambda x: np.array(
            [
                [-1.0 + 2.0 * x[0] * x[1], x[0] ** 2, 0.0],
                [0.0, 0.0, 1.0],
                [0.0, 0.0, 0.0],
            ]
        ),
        Dg=lambda x: np.zeros((1, 3, 3)),
        Dh=Dh,
        D2h0=D2h0,
        name="zero_dynamics",
    )


def backstepping_cascade() -> CascadeSystem:
    return CascadeSystem(
        k=1,
        f1=lambda x1: np.array([x1[0] ** 2]),
        g1=lambda x1: np.array([[1.0 + x1[0] ** 2]]),
        Df1=lambda x1: np.array([[2.0 * x1[0]]]),
        Dg1=lambda x1: np.array([[[2.0 * x1[0]]]]),
        f2=lambda x1, x2: np.array([x2[0] ** 2]),
        g2=lambda x1, x2: np.ones((1, 1)),
        Df2=lambda x1, x2: np.array([[0.0, 2.0 * x2[0]]]),
        Dg2=lambda x1, x2: np.zeros((1, 1, 2)),
    )


def backstepping_example() -> ControlAffineSystem:
    h, Dh, D2h0 = quadratic_penalty(np.ones(2))
    return backstepping_cascade().as_control_affine(
        h=h, Dh=Dh, D2h0=D2h0, name="backstepping"
    )
