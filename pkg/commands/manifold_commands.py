import click

from commands.setup_commands import experiment_options, setup_pipeline
from config.app_config import AppConfig
from middleware.error_handler import create_error_middleware


config = AppConfig()
errors = create_error_middleware(config)


@click.command("manifold")
@experiment_options
@errors.map_errors
def manifold_command(**options) -> None:
    """Compute the stable (and unstable) manifold charts and query coverage."""
    handler = setup_pipeline(**options)
    summary = handler.handle_manifold()
    click.echo(
        f"stable chart: {summary['stable_points']} points, {summary['rejected']} rejected"
    )
    if summary["unstable_points"] is not None:
        click.echo(f"unstable chart: {summary['unstable_points']} points")
    for status in summary["statuses"]:
        click.echo(status)
