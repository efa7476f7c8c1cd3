from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq

from config.app_config import AppConfig
from config.numerics_config import NumericsConfig, ShootingConfig, TurnpikeConfig
from extensions.errors import HamflowError
from extensions.logger import logger
from hamiltonian.hamiltonian_system import HamiltonianSystem
from hamiltonian.trajectory import Trajectory
from manifold.chart import COVERED, ManifoldChart
from manifold.coverage import coverage
from ocp.shooting import ShootingResult, solve_finite_bvp
from systems.control_system import as_vector


# Uniform refinement of the sample grid used to bracket threshold crossings
CROSSING_SAMPLES_PER_UNIT = 200
NORM_CONVENTION = "euclidean(u) + euclidean(x)"


@dataclass(frozen=True)
class TurnpikeMetric:
    """
    Residence of |u| + |x| above epsilon.

    `first_exit` is the first time the signal drops to epsilon and
    `last_entry` the last time it rises above it; both are None when the
    corresponding crossing does not occur.
    """

    measure: float
    first_exit: Optional[float]
    last_entry: Optional[float]
    intervals: Tuple[Tuple[float, float], ...]


def turnpike_signal(traj: Trajectory, t: float) -> float:
    x = traj.state_at(t)[: traj.n]
    return float(np.linalg.norm(traj.input_at(t)) + np.linalg.norm(x))


def turnpike_metric(traj: Trajectory, epsilon: float) -> TurnpikeMetric:
    """
    Lebesgue measure of {t : |u(t)| + |x(t)| > epsilon} from the dense output.

    Crossings are bracketed on the sample grid refined uniformly and located
    by Brent's method.
    """
    t0, t1 = traj.t0, traj.t_end
    uniform = np.linspace(t0, t1, max(2, int(np.ceil((t1 - t0) * CROSSING_SAMPLES_PER_UNIT)) + 1))
    grid = np.union1d(traj.times, uniform)

    def excess(t):
        return turnpike_signal(traj, t) - epsilon

    values = np.array([excess(t) for t in grid])
    above = values > 0.0
    intervals: List[Tuple[float, float]] = []
    start = t0 if above[0] else None
    for k in range(1, grid.size):
        if above[k] == above[k - 1]:
            continue
        a, b = grid[k - 1], grid[k]
        crossing = brentq(excess, a, b, xtol=1e-12) if values[k - 1] * values[k] < 0 else (
            a if values[k - 1] == 0.0 else b
        )
        if above[k]:
            start = crossing
        else:
            intervals.append((float(start), float(crossing)))
            start = None
    if start is not None:
        intervals.append((float(start), float(t1)))

    measure = float(sum(b - a for a, b in intervals))
    first_exit = None
    if above[0] and intervals and intervals[0][1] < t1:
        first_exit = intervals[0][1]
    last_entry = None
    if above[-1] and intervals and intervals[-1][0] > t0:
        last_entry = intervals[-1][0]
    return TurnpikeMetric(measure, first_exit, last_entry, tuple(intervals))


def finite_horizon_cost(hsys: HamiltonianSystem, traj: Trajectory) -> float:
    """J_T = int |u|^2 / 2 + h(x) dt by Simpson's rule on the trajectory samples."""
    inputs = traj.inputs
    if inputs is None:
        inputs = np.array([traj.input_at(t) for t in traj.times])
    values = [hsys.base.running_cost(x, u) for x, u in zip(traj.x, inputs)]
    return float(simpson(np.asarray(values), x=traj.times))


@dataclass(frozen=True, eq=False)
class TurnpikeEntry:
    T: float
    converged: bool
    residence: Optional[float] = None
    first_exit: Optional[float] = None
    last_entry: Optional[float] = None
    intervals: Tuple[Tuple[float, float], ...] = ()
    cost: Optional[float] = None
    residual: Optional[float] = None
    iterations: Optional[int] = None
    energy_drift: Optional[float] = None
    error_type: Optional[str] = None
    error: Optional[str] = None
    result: Optional[ShootingResult] = field(default=None, repr=False)


@dataclass(frozen=True, eq=False)
class TurnpikeReport:
    x0: np.ndarray
    xf: np.ndarray
    epsilon: float
    entries: Tuple[TurnpikeEntry, ...]
    uniformity: Optional[float]
    uniformity_bound: float
    sufficient_condition: Dict[str, object]
    norm: str = NORM_CONVENTION

    @property
    def all_converged(self) -> bool:
        return all(entry.converged for entry in self.entries)

    @property
    def within_bound(self) -> bool:
        return self.uniformity is not None and self.uniformity <= self.uniformity_bound


def uniformity_statistic(residences: Sequence[float]) -> Optional[float]:
    """max/min residence; 1 when every residence vanishes."""
    if not residences:
        return None
    high, low = max(residences), min(residences)
    if high == 0.0:
        return 1.0
    return float(high / low) if low > 0.0 else float("inf")


def sufficient_condition(
    x0: np.ndarray,
    xf: np.ndarray,
    stable_chart: Optional[ManifoldChart],
    unstable_chart: Optional[ManifoldChart],
) -> Dict[str, object]:
    """Coverage of x0 by the stable chart and of xf by the unstable chart."""
    if stable_chart is None or unstable_chart is None:
        return {"checked": False, "x0_status": None, "xf_status": None, "satisfied": None}
    x0_status = coverage(stable_chart, [x0]).entries[0].status
    xf_status = coverage(unstable_chart, [xf]).entries[0].status
    satisfied = x0_status == COVERED and xf_status == COVERED
    if not satisfied:
        logger.warning(
            f"Turnpike sufficient condition unsatisfied: x0 {x0_status}, xf {xf_status}"
        )
    return {
        "checked": True,
        "x0_status": x0_status,
        "xf_status": xf_status,
        "satisfied": satisfied,
    }


def _entry(hsys, x0, xf, T, epsilon, shooting, warm) -> TurnpikeEntry:
    try:
        result = solve_finite_bvp(hsys, x0, xf, T, config=shooting, warm_start=warm)
    except HamflowError as exc:
        logger.warning(f"Horizon T={T:g} failed: {exc}")
        return TurnpikeEntry(
            T=float(T), converged=False, error_type=type(exc).__name__, error=str(exc)
        )
    traj = result.trajectory
    metric = turnpike_metric(traj, epsilon)
    return TurnpikeEntry(
        T=float(T),
        converged=True,
        residence=metric.measure,
        first_exit=metric.first_exit,
        last_entry=metric.last_entry,
        intervals=metric.intervals,
        cost=finite_horizon_cost(hsys, traj),
        residual=result.residual,
        iterations=result.iterations,
        energy_drift=traj.energy_drift(),
        result=result,
    )


def turnpike_report(
    hsys: HamiltonianSystem,
    x0,
    xf,
    horizons: Optional[Sequence[float]] = None,
    epsilon: Optional[float] = None,
    warm_start: Optional[bool] = None,
    config: Optional[TurnpikeConfig] = None,
    shooting: Optional[ShootingConfig] = None,
    stable_chart: Optional[ManifoldChart] = None,
    unstable_chart: Optional[ManifoldChart] = None,
) -> TurnpikeReport:
    """
    Solves the two-point problem for each horizon and compares the residence
    measures. Failed horizons are recorded and excluded from the statistic.

    Args:
        hsys: Forward Hamiltonian field.
        x0: Initial state.
        xf: Terminal state.
        horizons: Increasing horizons.
        epsilon: Turnpike threshold.
        warm_start: Chain p(0) across horizons; forces sequential solves.
        config: Turnpike stage defaults.
        shooting: Shooting stage defaults.
        stable_chart: Chart used to check coverage of x0.
        unstable_chart: Chart used to check coverage of xf.

    Returns:
        TurnpikeReport: Per-horizon entries and the uniformity statistic.
    """
    config = config or NumericsConfig.get_config("turnpike")
    horizons = [float(T) for T in (horizons if horizons is not None else config.horizons)]
    epsilon = float(epsilon if epsilon is not None else config.epsilon)
    warm_start = config.warm_start if warm_start is None else warm_start
    if not horizons:
        raise ValueError("At least one horizon is required")
    if any(T <= 0 for T in horizons) or any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise ValueError("Horizons must be positive and increasing")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    x0 = as_vector(x0, hsys.n)
    xf = as_vector(xf, hsys.n)

    if warm_start:
        entries, previous = [], None
        for T in horizons:
            entry = _entry(hsys, x0, xf, T, epsilon, shooting, previous)
            entries.append(entry)
            previous = entry.result or previous
    else:
        workers = min(AppConfig.threads(), len(horizons))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(
                pool.map(lambda T: _entry(hsys, x0, xf, T, epsilon, shooting, None), horizons)
            )

    residences = [entry.residence for entry in entries if entry.converged]
    uniformity = uniformity_statistic(residences)
    report = TurnpikeReport(
        x0=x0,
        xf=xf,
        epsilon=epsilon,
        entries=tuple(entries),
        uniformity=uniformity,
        uniformity_bound=config.uniformity_bound,
        sufficient_condition=sufficient_condition(x0, xf, stable_chart, unstable_chart),
    )
    logger.info(
        f"Turnpike report: {sum(e.converged for e in entries)}/{len(entries)} horizons "
        f"converged, uniformity {uniformity}"
    )
    return report
