from typing import Any, Dict, List

import click
import numpy as np

from commands.setup_commands import experiment_options, setup_pipeline
from config.app_config import AppConfig
from middleware.error_handler import create_error_middleware


config = AppConfig()
errors = create_error_middleware(config)


def _verdict(flag: bool) -> str:
    return "yes" if flag else "no"


def render_dashboard(dashboard: Dict[str, Any]) -> str:
    growth = dashboard["growth"]
    eigenvalues = np.asarray(dashboard["linearization"]["eigenvalues_real"])
    lines: List[str] = [
        f"system              {dashboard['system']} (n={dashboard['n']}, m={dashboard['m']})",
        f"max Re eig(A)       {np.max(eigenvalues):+.4e}",
        f"A Hurwitz           {_verdict(dashboard['hurwitz'])}",
        f"(A, B) stabilizable {_verdict(dashboard['stabilizable'])}",
        f"(C, A) detectable   {_verdict(dashboard['detectable'])}",
        f"penalty rank        {dashboard['penalty_rank']}",
        f"growth exponent p   {growth['exponent_p']:.3f} "
        f"(f {growth['f_exponent']:.3f}, g {growth['g_exponent']:.3f})",
        f"growth violation    {_verdict(growth['violation'])}",
        f"coercive penalty    {_verdict(dashboard['coercive'])}",
        f"system checks       {'pass' if dashboard['system_checks']['passed'] else 'FAIL'}",
        f"existence path      {dashboard['existence_path']}",
    ]
    for problem in dashboard["system_checks"]["problems"]:
        lines.append(f"  - {problem}")
    return "\n".join(lines)


@click.command("inspect")
@experiment_options
@errors.map_errors
def inspect_command(**options) -> None:
    """Print the hypothesis dashboard and write inspect.json."""
    handler = setup_pipeline(**options)
    dashboard = handler.handle_inspect()
    click.echo(render_dashboard(dashboard))
