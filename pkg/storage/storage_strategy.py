from abc import ABC, abstractmethod
from typing import Any, List, Sequence, Tuple

import numpy as np


class StorageStrategy(ABC):
    @abstractmethod
    def save_json(self, name: str, payload: Any) -> str:
        pass

    @abstractmethod
    def save_csv(self, name: str, header: Sequence[str], rows: np.ndarray) -> str:
        pass

    @abstractmethod
    def load_json(self, name: str) -> Any:
        pass

    @abstractmethod
    def load_csv(self, name: str) -> Tuple[List[str], np.ndarray]:
        pass
