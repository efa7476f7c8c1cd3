from typing import Union

from extensions.logger import logger
from validators.config_validator import ConfigValidator
from validators.system_validator import SystemValidator


class ValidatorFactory:
    _validators = {
        "system": SystemValidator,
        "config": ConfigValidator,
    }

    @classmethod
    def get_validator(cls, target: str, **kwargs) -> Union[SystemValidator, ConfigValidator]:
        """
        Gets the validator for a kind of target.

        Args:
            target: "system" or "config".
            **kwargs: Passed to the validator constructor.

        Returns:
            Union[SystemValidator, ConfigValidator]: A fresh validator instance.

        Raises:
            ValueError: If there is no validator for the target.
        """
        validator_class = cls._validators.get(str(target).lower())
        logger.debug(f"Validator class: {validator_class}")
        if validator_class is None:
            raise ValueError(f"No validator available for: {target}")
        return validator_class(**kwargs)
