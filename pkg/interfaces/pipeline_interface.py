from abc import ABC, abstractmethod
from typing import Any, Dict


class IPipelineHandler(ABC):
    @abstractmethod
    def handle_inspect(self) -> Dict[str, Any]:
        pass

    @abstractmethod
    def handle_manifold(self) -> Dict[str, Any]:
        pass

    @abstractmethod
    def handle_turnpike(self) -> Dict[str, Any]:
        pass

    @abstractmethod
    def handle_simulate(self) -> Dict[str, Any]:
        pass
