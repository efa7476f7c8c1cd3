from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class IntegratorStats:
    nfev: int
    steps: int
    rejected: int
    rtol: float
    atol: float
    message: str = ""

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Sampled solution on a strictly increasing time grid.

    `states` holds x (and p when the trajectory comes from the Hamiltonian
    flow); `n` is the dimension of x. `dense` evaluates the full state at any
    time in the span and `input_map` gives u from a full state, so dense
    quantities do not depend on the sampling grid.
    """

    times: np.ndarray
    states: np.ndarray
    n: int
    inputs: Optional[np.ndarray] = None
    energy: Optional[np.ndarray] = None
    cost: Optional[np.ndarray] = None
    dense: Optional[Callable[[float], np.ndarray]] = None
    input_map: Optional[Callable[[np.ndarray], np.ndarray]] = None
    stats: Optional[IntegratorStats] = None
    interpolant_order: int = 4

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        if times.ndim != 1 or states.shape[0] != times.size:
            raise ValueError("Trajectory samples do not match the time grid")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("Trajectory times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        for name in ("inputs", "energy", "cost"):
            value = getattr(self, name)
            if value is not None:
                value = np.asarray(value, dtype=float)
                if name == "inputs" and value.ndim == 1:
                    value = value[:, None]
                if value.shape[0] != times.size:
                    raise ValueError(f"Trajectory {name} do not match the time grid")
                object.__setattr__(self, name, value)

    @property
    def x(self) -> np.ndarray:
        return self.states[:, : self.n]

    @property
    def p(self) -> Optional[np.ndarray]:
        if self.states.shape[1] < 2 * self.n:
            return None
        return self.states[:, self.n: 2 * self.n]

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def state_at(self, t: float) -> np.ndarray:
        if self.dense is not None:
            return np.asarray(self.dense(t), dtype=float)
        return np.array(
            [np.interp(t, self.times, column) for column in self.states.T]
        )

    def input_at(self, t: float) -> np.ndarray:
        if self.input_map is not None:
            return np.atleast_1d(self.input_map(self.state_at(t)))
        if self.inputs is None:
            return np.zeros(0)
        return np.array([np.interp(t, self.times, column) for column in self.inputs.T])

    def energy_drift(self) -> float:
        if self.energy is None or self.energy.size == 0:
            return 0.0
        return float(np.max(np.abs(self.energy - self.energy[0])))

    def total_cost(self) -> Optional[float]:
        return None if self.cost is None else float(self.cost[-1])
