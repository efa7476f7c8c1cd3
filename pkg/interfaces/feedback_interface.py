from abc import ABC, abstractmethod

import numpy as np


class IFeedbackLaw(ABC):
    """A state feedback u = k(x)."""

    @abstractmethod
    def __call__(self, x: np.ndarray) -> np.ndarray:
        pass


class IInputSignal(ABC):
    """An open-loop input u = u(t) with finitely many breakpoints."""

    @abstractmethod
    def __call__(self, t: float) -> np.ndarray:
        pass

    @abstractmethod
    def breakpoints(self, t_end: float) -> list:
        pass
