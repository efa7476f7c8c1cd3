import click

from commands.setup_commands import experiment_options, setup_pipeline
from config.app_config import AppConfig
from middleware.error_handler import create_error_middleware


config = AppConfig()
errors = create_error_middleware(config)


@click.command("simulate")
@experiment_options
@errors.map_errors
def simulate_command(**options) -> None:
    """Simulate the closed loop (or an open-loop input) with cost accumulation."""
    handler = setup_pipeline(**options)
    summary = handler.handle_simulate()
    click.echo(f"finite-horizon cost: {summary['finite_cost']:.6e}")
    if summary["infinite_cost"] is not None:
        click.echo(f"infinite-horizon cost: {summary['infinite_cost']['value']:.6e}")
