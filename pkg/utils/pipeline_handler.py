from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from config.experiment_config import ExperimentConfig
from extensions.errors import BadStructure, ConfigError, HamflowError, NoConvergence
from extensions.logger import logger
from hamiltonian.hamiltonian_system import HamiltonianSystem, build_hamiltonian
from hamiltonian.integrator import PiecewiseConstantInput, simulate_controlled
from interfaces.pipeline_interface import IPipelineHandler
from linalg.pbh import is_hurwitz, pbh_detectable, pbh_stabilizable
from linalg.riccati import care_residual, solve_care
from manifold.chart import ManifoldChart
from manifold.coverage import coverage, manifold_feedback_law
from manifold.globalize import stable_manifold, unstable_manifold
from ocp.infinite_cost import infinite_cost
from ocp.turnpike import turnpike_report
from storage.local_storage import LocalFileSystemStorage
from storage.serializers import (
    chart_points_columns,
    chart_to_dict,
    coverage_to_dict,
    report_rows,
    report_to_dict,
    trajectory_columns,
)
from storage.storage_strategy import StorageStrategy
from systems.backstepping import backstepping_feedback
from systems.control_system import ControlAffineSystem, as_vector, linearize
from systems.feedbacks import lqr_feedback, zero_feedback
from systems.growth import growth_certificate
from validators.factory import ValidatorFactory


STABLE_FREE_DYNAMICS = "stable_free_dynamics"
STABILIZABLE_WITH_GROWTH = "stabilizable_with_growth"
NO_PATH = "none"


def existence_path(
    stabilizable: bool, detectable: bool, hurwitz: bool, growth_violation: bool
) -> str:
    """Which existence argument the dashboard can certify, if any."""
    if stabilizable and detectable and not growth_violation:
        return STABILIZABLE_WITH_GROWTH
    if hurwitz:
        return STABLE_FREE_DYNAMICS
    return NO_PATH


def horizon_label(T: float) -> str:
    return f"{T:g}"


class PipelineHandler(IPipelineHandler):
    """
    PipelineHandler runs the stages behind each command and hands the results
    to the storage strategy once computation is complete.

    Attributes:
        experiment (ExperimentConfig): Parsed experiment document.
        storage_strategy (StorageStrategy): Where result files go.
        validator_factory (ValidatorFactory): Source of system and config validators.
        force (bool): Run the manifold stage even when the dashboard fails.
    """

    def __init__(
        self,
        experiment: ExperimentConfig,
        storage_strategy: Optional[StorageStrategy] = None,
        validator_factory: Optional[ValidatorFactory] = None,
        force: bool = False,
    ) -> None:
        self.experiment = experiment
        self.storage_strategy = storage_strategy or LocalFileSystemStorage(
            output_dir=experiment.output.directory
        )
        self.validator_factory = validator_factory or ValidatorFactory()
        self.force = force
        self._sys: Optional[ControlAffineSystem] = None

    @property
    def formats(self) -> Tuple[str, ...]:
        return self.experiment.output.formats

    def system(self) -> ControlAffineSystem:
        """
        Builds the configured system once and validates the document against it.

        Raises:
            ConfigError: If the system cannot be built or the document is invalid.
        """
        if self._sys is None:
            sys = self.experiment.build_system()
            validator = self.validator_factory.get_validator("config", n=sys.n)
            if not validator.is_valid(self.experiment):
                raise ConfigError("; ".join(validator.problems), field="config")
            self._sys = sys
        return self._sys

    def hamiltonian(self) -> HamiltonianSystem:
        logger.info("Solving CARE and building the symplectic splitting")
        return build_hamiltonian(self.system())

    def handle_inspect(self) -> Dict[str, Any]:
        """
        Builds the hypothesis dashboard and saves it as inspect.json.

        Returns:
            Dict[str, Any]: The dashboard.
        """
        dashboard = self.dashboard()
        self._save_json("inspect.json", dashboard)
        return dashboard

    def dashboard(self) -> Dict[str, Any]:
        sys = self.system()
        lin = linearize(sys)
        rank = lin.penalty_rank
        stabilizable = pbh_stabilizable(lin.A, lin.B)
        # an identically zero penalty gives no detectability at all
        detectable = rank > 0 and pbh_detectable(lin.C, lin.A)
        hurwitz = is_hurwitz(lin.A)

        system_check = self.validator_factory.get_validator(
            "system", config=self.experiment.system_check
        )
        checks_pass = system_check.is_valid(sys)
        growth = growth_certificate(sys, config=self.experiment.growth)

        riccati: Dict[str, Any] = {"solved": False}
        if stabilizable and detectable:
            try:
                P1 = solve_care(lin.A, lin.B, lin.C)
                riccati = {
                    "solved": True,
                    "P1": P1,
                    "residual": care_residual(P1, lin.A, lin.B, lin.C),
                }
            except HamflowError as exc:
                logger.warning(f"CARE failed: {exc}")
                riccati = {"solved": False, "error": f"{type(exc).__name__}: {exc}"}

        path = existence_path(stabilizable, detectable, hurwitz, growth.violation)
        eigenvalues = np.linalg.eigvals(lin.A)
        dashboard = {
            "system": sys.name,
            "n": sys.n,
            "m": sys.m,
            "linearization": {
                "A": lin.A,
                "B": lin.B,
                "C": lin.C,
                "eigenvalues_real": np.sort_complex(eigenvalues).real,
                "eigenvalues_imag": np.sort_complex(eigenvalues).imag,
            },
            "stabilizable": stabilizable,
            "detectable": detectable,
            "penalty_rank": rank,
            "hurwitz": hurwitz,
            "riccati": riccati,
            "growth": growth.as_dict(),
            "coercive": growth.coercive,
            "system_checks": {"passed": checks_pass, "problems": list(system_check.problems)},
            "existence_path": path,
            "passed": checks_pass and path != NO_PATH,
        }
        logger.info(
            f"Dashboard for {sys.name}: stabilizable={stabilizable}, detectable={detectable}, "
            f"path={path}"
        )
        return dashboard

    def handle_manifold(self) -> Dict[str, Any]:
        """
        Computes the stable chart (and the unstable one when requested), the
        coverage of the configured query points, and saves them.

        Raises:
            ConfigError: If the dashboard fails and `force` is not set.
        """
        if not self.force:
            dashboard = self.dashboard()
            if not dashboard["passed"]:
                raise ConfigError(
                    "hypothesis dashboard failed; rerun with --force to compute anyway",
                    field="system",
                )
        run = self.experiment.manifold_run
        hsys = self.hamiltonian()
        stable = self._chart(hsys, unstable=False)
        unstable = self._chart(hsys, unstable=True) if run.unstable else None
        estimate = coverage(stable, list(run.query_points))

        self._save_json("stable_chart.json", chart_to_dict(stable))
        self._save_csv("stable_points.csv", *chart_points_columns(stable))
        if unstable is not None:
            self._save_json("unstable_chart.json", chart_to_dict(unstable))
            self._save_csv("unstable_points.csv", *chart_points_columns(unstable))
        self._save_json("coverage.json", coverage_to_dict(estimate))

        return {
            "stable_points": len(stable.global_points),
            "rejected": stable.rejected,
            "unstable_points": None if unstable is None else len(unstable.global_points),
            "statuses": estimate.statuses(),
            "covered_fraction": estimate.covered_fraction(),
        }

    def handle_turnpike(self) -> Dict[str, Any]:
        """
        Solves the two-point problems for every configured horizon and saves
        the report plus one trajectory table per converged horizon.

        Raises:
            ConfigError: If x0 or xf is missing.
        """
        run = self.experiment.turnpike_run
        for name in ("x0", "xf"):
            if getattr(run, name) is None:
                raise ConfigError("required for the turnpike command", field=f"turnpike.{name}")
        sys = self.system()
        x0, xf = as_vector(run.x0, sys.n), as_vector(run.xf, sys.n)
        hsys = self.hamiltonian()
        stable = unstable = None
        if run.check_coverage:
            stable = self._chart(hsys, unstable=False)
            unstable = self._chart(hsys, unstable=True)

        report = turnpike_report(
            hsys,
            x0,
            xf,
            config=self.experiment.turnpike,
            shooting=self.experiment.shooting,
            stable_chart=stable,
            unstable_chart=unstable,
        )

        self._save_json("turnpike_report.json", report_to_dict(report))
        self._save_csv("turnpike_report.csv", *report_rows(report))
        for entry in report.entries:
            if entry.result is not None:
                self._save_csv(
                    f"trajectory_T{horizon_label(entry.T)}.csv",
                    *trajectory_columns(entry.result.trajectory),
                )

        condition = report.sufficient_condition
        return {
            "all_converged": report.all_converged,
            "uniformity": report.uniformity,
            "within_bound": report.within_bound,
            "residences": [entry.residence for entry in report.entries],
            "failed": [entry.T for entry in report.entries if not entry.converged],
            "sufficient_condition_unsatisfied": bool(
                condition.get("checked") and not condition.get("satisfied")
            ),
        }

    def handle_simulate(self) -> Dict[str, Any]:
        """
        Simulates the closed loop (or an open-loop input) and saves the
        sampled trajectory with its finite and, for feedback laws, infinite
        horizon cost.
        """
        run = self.experiment.simulation
        if run.x0 is None:
            raise ConfigError("required for the simulate command", field="simulate.x0")
        sys = self.system()
        x0 = as_vector(run.x0, sys.n)
        source, P1 = self._input_source(sys)

        traj = simulate_controlled(sys, x0, source, run.T, config=self.experiment.integrator)
        tail = None
        if run.feedback is not None:
            try:
                tail = infinite_cost(
                    sys, source, x0, tail_tol=run.tail_tol, P1=P1, config=self.experiment.integrator
                ).as_dict()
            except NoConvergence as exc:
                logger.warning(f"Infinite-horizon cost unavailable: {exc}")

        summary = {
            "system": sys.name,
            "feedback": run.feedback,
            "open_loop": run.feedback is None,
            "x0": x0,
            "T": run.T,
            "final_state": traj.x[-1],
            "finite_cost": traj.total_cost(),
            "infinite_cost": tail,
            "integrator": traj.stats.as_dict() if traj.stats is not None else None,
        }
        self._save_csv("simulation.csv", *trajectory_columns(traj))
        self._save_json("simulation.json", summary)
        return summary

    def _input_source(self, sys: ControlAffineSystem):
        """The feedback law or open-loop signal to simulate, and P1 when known."""
        run = self.experiment.simulation
        if run.feedback is None:
            return PiecewiseConstantInput(run.input_times, run.input_values), None
        lin = linearize(sys)
        P1 = None
        try:
            P1 = solve_care(lin.A, lin.B, lin.C)
        except HamflowError as exc:
            if run.feedback == "lqr":
                raise
            logger.warning(f"CARE unavailable, tail estimate falls back to zero: {exc}")
        if run.feedback == "zero":
            law = zero_feedback(sys)
        elif run.feedback == "lqr":
            law = lqr_feedback(sys, P1)
        elif run.feedback == "backstepping":
            try:
                law = backstepping_feedback(sys)
            except BadStructure as exc:
                raise ConfigError(str(exc), field="simulate.feedback") from exc
        else:
            law = manifold_feedback_law(self._chart(self.hamiltonian(), unstable=False))
        if P1 is None:
            P1 = np.zeros((sys.n, sys.n))
        return law, P1

    def _chart(self, hsys: HamiltonianSystem, unstable: bool) -> ManifoldChart:
        run = self.experiment.manifold_run
        build = unstable_manifold if unstable else stable_manifold
        logger.info(f"Computing the {'unstable' if unstable else 'stable'} manifold")
        return build(hsys, bounds=run.bounds, config=self.experiment.manifold)

    def _save_json(self, name: str, payload: Any) -> Optional[str]:
        if "json" not in self.formats:
            return None
        return self.storage_strategy.save_json(name, payload)

    def _save_csv(self, name: str, header: List[str], rows: np.ndarray) -> Optional[str]:
        if "csv" not in self.formats:
            return None
        return self.storage_strategy.save_csv(name, header, rows)
