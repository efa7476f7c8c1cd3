from abc import ABC, abstractmethod
from typing import Any, List


class IValidator(ABC):
    problems: List[str]

    @abstractmethod
    def is_valid(self, target: Any) -> bool:
        pass
