import os
from collections.abc import Callable
from typing import Optional

import click

from config.app_config import AppConfig
from config.experiment_config import load_experiment
from extensions.logger import logger
from storage.local_storage import LocalFileSystemStorage
from utils.pipeline_handler import PipelineHandler
from validators.factory import ValidatorFactory


def initialize_directories(output_dir: str) -> None:
    """
    Creates the output directory if it doesn't exist.
    This function should be called once per command, before any stage runs.
    """
    logger.info("Checking and creating the output directory if necessary")
    try:
        if not os.path.exists(output_dir):
            os.makedirs(output_dir, exist_ok=True)
            logger.info(f"Created output directory: {output_dir}")
    except OSError as e:
        logger.error(f"Failed to create directory: {e}")
        raise


def experiment_options(f: Callable) -> Callable:
    """Options shared by every subcommand."""
    options = [
        click.option(
            "--config",
            "config_path",
            required=True,
            type=click.Path(exists=True, dir_okay=False),
            help="Experiment JSON document.",
        ),
        click.option("--out", "out", default=None, help="Output directory (overrides output.dir)."),
        click.option("--force", is_flag=True, help="Run the manifold stage even if the dashboard fails."),
        click.option("--seed-count", type=click.IntRange(min=1), default=None, help="Seeds per shell."),
        click.option("--tol", type=float, default=None, help="Tolerance for integrator, manifold and shooting."),
        click.option("--quiet", is_flag=True, help="Only warnings and errors on the console."),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def setup_pipeline(
    config_path: str,
    out: Optional[str] = None,
    force: bool = False,
    seed_count: Optional[int] = None,
    tol: Optional[float] = None,
    quiet: bool = False,
) -> PipelineHandler:
    """
    Loads the experiment, applies the command-line overrides and prepares the
    output directory.

    Returns:
        PipelineHandler: Handler bound to local storage in the output directory.

    Raises:
        ConfigError: If the document is invalid or an override is out of range.
    """
    logger.init_app(level=AppConfig.LOG_LEVEL, quiet=quiet)
    experiment = load_experiment(config_path)
    if tol is not None:
        experiment = experiment.with_tolerance(tol)
    if seed_count is not None:
        experiment = experiment.with_seed_count(seed_count)
    output_dir = out or experiment.output.directory
    initialize_directories(output_dir)
    return PipelineHandler(
        experiment=experiment,
        storage_strategy=LocalFileSystemStorage(output_dir),
        validator_factory=ValidatorFactory(),
        force=force,
    )
