import inspect
from typing import Callable, Dict, Tuple

from extensions.errors import UnknownExample
from extensions.logger import logger
from systems.control_system import ControlAffineSystem
from systems.examples import (
    backstepping_example,
    generator_example,
    pendulum_example,
    scalar_example,
    zero_dynamics_example,
)


class ExampleFactory:
    _examples: Dict[str, Callable[..., ControlAffineSystem]] = {
        "scalar": scalar_example,
        "generator": generator_example,
        "pendulum": pendulum_example,
        "zero_dynamics": zero_dynamics_example,
        "backstepping": backstepping_example,
    }

    @classmethod
    def names(cls) -> Tuple[str, ...]:
        return tuple(cls._examples)

    @classmethod
    def parameters(cls, name: str) -> Tuple[str, ...]:
        builder = cls._builder(name)
        return tuple(inspect.signature(builder).parameters)

    @classmethod
    def get_system(cls, name: str, **params) -> ControlAffineSystem:
        """
        Builds a named example system.

        Args:
            name: One of scalar, generator, pendulum, zero_dynamics, backstepping.
            **params: Keyword parameters accepted by the example builder.

        Returns:
            ControlAffineSystem: The example with exact Jacobians.

        Raises:
            UnknownExample: If the name is not registered or a parameter is not
                accepted by the builder.
        """
        builder = cls._builder(name)
        accepted = inspect.signature(builder).parameters
        unknown = sorted(set(params) - set(accepted))
        if unknown:
            raise UnknownExample(
                f"Example {name} does not take parameter(s): {', '.join(unknown)}"
            )
        logger.debug(f"Building example {name} with {params}")
        return builder(**params)

    @classmethod
    def _builder(cls, name: str) -> Callable[..., ControlAffineSystem]:
        builder = cls._examples.get(str(name).lower())
        if builder is None:
            raise UnknownExample(
                f"Unknown example: {name} (expected one of {', '.join(cls._examples)})"
            )
        return builder


def example_system(name: str, **params) -> ControlAffineSystem:
    return ExampleFactory.get_system(name, **params)
