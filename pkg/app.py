import click

from commands.inspect_commands import inspect_command
from commands.manifold_commands import manifold_command
from commands.simulate_commands import simulate_command
from commands.turnpike_commands import turnpike_command
from config.app_config import AppConfig
from extensions.logger import logger


def create_app() -> click.Group:
    @click.group(name="hamflow")
    def app() -> None:
        """Stable manifolds, turnpike experiments and simulations for control-affine systems."""

    logger.init_app(level=AppConfig.LOG_LEVEL)

    app.add_command(inspect_command)
    app.add_command(manifold_command)
    app.add_command(turnpike_command)
    app.add_command(simulate_command)

    return app


if __name__ == "__main__":
    create_app()(prog_name="hamflow")
