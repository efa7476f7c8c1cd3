import click

from commands.setup_commands import experiment_options, setup_pipeline
from config.app_config import AppConfig
from extensions.logger import logger
from middleware.error_handler import create_error_middleware


config = AppConfig()
errors = create_error_middleware(config)


@click.command("turnpike")
@experiment_options
@errors.map_errors
def turnpike_command(**options) -> None:
    """Solve the finite-horizon problems and report the turnpike statistic."""
    handler = setup_pipeline(**options)
    summary = handler.handle_turnpike()
    uniformity = summary["uniformity"]
    click.echo(
        "uniformity: " + ("n/a" if uniformity is None else f"{uniformity:.4f}")
        + f" (within bound: {summary['within_bound']})"
    )
    if summary["sufficient_condition_unsatisfied"]:
        click.echo("warning: x0 or xf is not covered by the computed manifolds", err=True)
    if not summary["all_converged"]:
        failed = ", ".join(f"{T:g}" for T in summary["failed"])
        logger.error(f"Shooting failed for horizon(s): {failed}")
        click.echo(f"shooting failed for T = {failed}", err=True)
        raise click.exceptions.Exit(config.EXIT_NUMERICAL_FAILURE)
