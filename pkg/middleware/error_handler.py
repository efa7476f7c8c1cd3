from collections.abc import Callable
from functools import wraps
from typing import Optional

import click

from config.app_config import AppConfig
from extensions.errors import ConfigError, HamflowError
from extensions.logger import logger


class ExitCodeMiddleware:
    def __init__(self, config: AppConfig) -> None:
        self.config = config

    def exit_code_for(self, error: BaseException) -> int:
        # ValueError covers rejected input, including the structure errors
        if isinstance(error, (ConfigError, click.UsageError, ValueError)):
            return self.config.EXIT_CONFIG_ERROR
        if isinstance(error, HamflowError):
            return self.config.EXIT_NUMERICAL_FAILURE
        return self.config.EXIT_OK

    def map_errors(self, func: Optional[Callable] = None) -> Callable:
        """
        Wraps a command so hamflow errors end the process with the stable
        exit code: 2 for configuration and input errors, 3 for numerical failures.
        """

        def decorator(f: Callable) -> Callable:
            @wraps(f)
            def wrapper(*args, **kwargs):
                try:
                    return f(*args, **kwargs)
                except click.UsageError:
                    raise
                except (HamflowError, ValueError) as e:
                    code = self.exit_code_for(e)
                    kind = "Configuration error" if code == self.config.EXIT_CONFIG_ERROR else "Numerical failure"
                    logger.error(f"{kind}: {e}")
                    click.echo(f"{kind}: {e}", err=True)
                    raise click.exceptions.Exit(code)

            return wrapper

        if func:
            return decorator(func)
        return decorator


def create_error_middleware(config: AppConfig) -> ExitCodeMiddleware:
    return ExitCodeMiddleware(config)
