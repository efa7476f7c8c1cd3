from typing import Union

import numpy as np

from extensions.errors import OutOfDomain


Scalar = Union[float, int, "Dual"]


class Dual:
    """Forward-mode dual number: a value with its gradient in the state variables."""

    __slots__ = ("value", "grad")

    def __init__(self, value: float, grad: np.ndarray) -> None:
        self.value = float(value)
        self.grad = np.asarray(grad, dtype=float)

    @classmethod
    def variable(cls, value: float, index: int, size: int) -> "Dual":
        grad = np.zeros(size)
        grad[index] = 1.0
        return cls(value, grad)

    @classmethod
    def constant(cls, value: float, size: int) -> "Dual":
        return cls(value, np.zeros(size))

    def _lift(self, other: Scalar) -> "Dual":
        if isinstance(other, Dual):
            return other
        return Dual(other, np.zeros_like(self.grad))

    def __add__(self, other: Scalar) -> "Dual":
        other = self._lift(other)
        return Dual(self.value + other.value, self.grad + other.grad)

    __radd__ = __add__

    def __sub__(self, other: Scalar) -> "Dual":
        other = self._lift(other)
        return Dual(self.value - other.value, self.grad - other.grad)

    def __rsub__(self, other: Scalar) -> "Dual":
        return self._lift(other) - self

    def __mul__(self, other: Scalar) -> "Dual":
        other = self._lift(other)
        return Dual(
            self.value * other.value,
            self.grad * other.value + self.value * other.grad,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar) -> "Dual":
        other = self._lift(other)
        return Dual(
            self.value / other.value,
            (self.grad * other.value - self.value * other.grad) / other.value**2,
        )

    def __rtruediv__(self, other: Scalar) -> "Dual":
        return self._lift(other) / self

    def __neg__(self) -> "Dual":
        return Dual(-self.value, -self.grad)

    def __pos__(self) -> "Dual":
        return self

    def __pow__(self, other: Scalar) -> "Dual":
        other = self._lift(other)
        if not np.any(other.grad):
            exponent = other.value
            check_power(self.value, exponent)
            if exponent == 0.0:
                return Dual(1.0, np.zeros_like(self.grad))
            if self.value == 0.0 and exponent < 1.0:
                if np.any(self.grad):
                    raise OutOfDomain(f"x^{exponent:g} has no derivative at x = 0")
                return Dual(0.0, np.zeros_like(self.grad))
            return Dual(
                self.value**exponent,
                exponent * self.value ** (exponent - 1.0) * self.grad,
            )
        # variable exponent: a^b = exp(b log a), a > 0
        if self.value <= 0.0:
            raise OutOfDomain(f"variable exponent needs a positive base, got {self.value:g}")
        return exp(other * log(self))

    def __rpow__(self, other: Scalar) -> "Dual":
        return self._lift(other) ** self

    def __repr__(self) -> str:
        return f"Dual({self.value!r}, {self.grad!r})"


def check_power(base: float, exponent: float) -> None:
    """Rejects powers without a real value."""
    if base < 0.0 and not float(exponent).is_integer():
        raise OutOfDomain(f"negative base {base:g} to the fractional power {exponent:g}")
    if base == 0.0 and exponent < 0.0:
        raise OutOfDomain(f"zero to the negative power {exponent:g}")


def power(base: Scalar, exponent: Scalar) -> Scalar:
    if isinstance(base, Dual):
        return base**exponent
    if isinstance(exponent, Dual):
        return exponent.__rpow__(base)
    check_power(float(base), float(exponent))
    return float(base) ** float(exponent)


def _chain(x: Dual, value: float, derivative: float) -> Dual:
    return Dual(value, derivative * x.grad)


def sin(x: Dual) -> Dual:
    return _chain(x, np.sin(x.value), np.cos(x.value))


def cos(x: Dual) -> Dual:
    return _chain(x, np.cos(x.value), -np.sin(x.value))


def tan(x: Dual) -> Dual:
    return _chain(x, np.tan(x.value), 1.0 / np.cos(x.value) ** 2)


def exp(x: Dual) -> Dual:
    value = np.exp(x.value)
    return _chain(x, value, value)


def log(x: Dual) -> Dual:
    return _chain(x, np.log(x.value), 1.0 / x.value)


def sqrt(x: Dual) -> Dual:
    value = np.sqrt(x.value)
    return _chain(x, value, 0.5 / value if value > 0.0 else 0.0)


def tanh(x: Dual) -> Dual:
    value = np.tanh(x.value)
    return _chain(x, value, 1.0 - value**2)


FUNCTIONS = {
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "tanh": tanh,
}
