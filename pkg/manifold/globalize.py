from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from config.app_config import AppConfig
from config.numerics_config import ManifoldConfig, NumericsConfig
from extensions.errors import IntegrationError
from extensions.logger import logger
from hamiltonian.hamiltonian_system import HamiltonianSystem
from hamiltonian.integrator import integrate, sample_grid
from manifold.chart import UNSTABLE, ChartPoint, ManifoldChart
from manifold.flow_check import forward_check
from manifold.lyapunov_perron import local_stable_manifold


Bounds = Union[None, float, Sequence[Tuple[float, float]]]

# Dense samples per unit time used to measure arc length along an orbit
ARC_SAMPLES_PER_UNIT = 400


def bounds_margin(bounds: Bounds, n: int, radius: float) -> Callable[[np.ndarray], float]:
    """
    Signed distance-like margin of x to the boundary: positive inside.

    `bounds` is None (ball of `radius`), a float (ball of that radius) or one
    (low, high) pair per state component.
    """
    if bounds is None or np.isscalar(bounds):
        limit = float(radius if bounds is None else bounds)
        return lambda x: limit - float(np.linalg.norm(x))
    box = np.asarray(bounds, dtype=float).reshape(n, 2)
    if np.any(box[:, 0] >= box[:, 1]):
        raise ValueError("Each bound must satisfy low < high")
    return lambda x: float(np.min(np.minimum(x - box[:, 0], box[:, 1] - x)))


def _resample(run, n: int, spacing: float) -> List[Tuple[float, np.ndarray]]:
    """Points along a backward run at x-arc-length `spacing`, as (tau, z)."""
    grid = sample_grid(run.t_start, run.t_stop, ARC_SAMPLES_PER_UNIT)[::-1]
    if grid.size == 1:
        return [(0.0, run.dense(grid[0]))]
    states = np.array([run.dense(t) for t in grid])
    arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(states[:, :n], axis=0), axis=1))])
    targets = np.arange(0.0, arc[-1] + 1e-15, spacing)
    times = np.interp(targets, arc, grid)
    return [(-float(t), run.dense(t)) for t in times]


class _OrbitGlobalizer:
    """Backward orbit of one seed, verified by forward re-integration."""

    def __init__(self, chart: ManifoldChart, hsys: HamiltonianSystem, extend_time: float,
                 margin: Callable[[np.ndarray], float]) -> None:
        self.chart = chart
        self.hsys = hsys
        self.extend_time = extend_time
        self.margin = margin
        self.config: ManifoldConfig = chart.config

    def candidates(self, z_seed: np.ndarray) -> List[Tuple[float, np.ndarray]]:
        n = self.hsys.n

        def leave(t, z):
            return self.margin(z[:n])

        try:
            run = integrate(
                lambda t, z: self.hsys.rhs(z), z_seed, (0.0, -self.extend_time),
                NumericsConfig.get_config("integrator"), events=[leave],
            )
        except IntegrationError as exc:
            logger.debug(f"Backward orbit lost: {exc}")
            return [(0.0, z_seed)]
        return _resample(run, n, self.config.arc_spacing)

    def _verify(self, points, last: int):
        """Forward run from points[last]; returns per-point check values or None."""
        tau_last, z_last = points[last]
        final, run = forward_check(self.hsys, z_last, tau_last + self.chart.settle_time, self.config)
        if run is None or final > self.config.check_tol:
            return None
        checks = []
        for tau, z in points[: last + 1]:
            deviation = float(np.linalg.norm(run.dense(tau_last - tau) - z))
            checks.append(final + deviation)
        return checks

    def accepted(self, seed_index: int, z_seed: np.ndarray) -> Tuple[List[ChartPoint], int]:
        points = self.candidates(z_seed)
        last, checks = len(points) - 1, self._verify(points, len(points) - 1)
        if checks is None:
            # largest prefix of the orbit whose outermost point still returns
            low, high = -1, len(points) - 1
            while high - low > 1:
                middle = (low + high) // 2
                trial = self._verify(points, middle)
                if trial is None:
                    high = middle
                else:
                    low, checks = middle, trial
            last = low

        accepted = []
        for index in range(last + 1):
            tau, z = points[index]
            x, p = self.hsys.split(z)
            energy = self.hsys.hval(x, p)
            if abs(energy) > self.config.energy_tol or checks[index] > self.config.check_tol:
                continue
            accepted.append(ChartPoint(x.copy(), p.copy(), energy, checks[index], tau, seed_index))
        return accepted, len(points) - len(accepted)


def globalize(
    chart: ManifoldChart,
    hsys: Optional[HamiltonianSystem] = None,
    extend_time: Optional[float] = None,
    bounds: Bounds = None,
) -> ManifoldChart:
    """
    Extends a local chart by the backward flow of its seed points.

    Each orbit is resampled at x-arc-length spacing and every candidate is
    kept only if |H| <= energy_tol and the forward flow returns it to
    |z| <= check_tol. Rejected points are counted on the chart.

    Args:
        chart: Local chart.
        hsys: Field to flow; for an unstable chart a forward field is reversed.
        extend_time: Backward integration time per seed.
        bounds: None, a ball radius, or per-component (low, high) pairs in x.

    Returns:
        ManifoldChart: A new chart whose global points include the orbits.
    """
    config = chart.config
    extend_time = float(extend_time if extend_time is not None else config.extend_time)
    if extend_time <= 0:
        raise ValueError("extend_time must be positive")
    if hsys is None:
        hsys = chart.hsys
    elif chart.kind == UNSTABLE and not hsys.is_reversed:
        hsys = hsys.reversed()

    margin = bounds_margin(bounds, hsys.n, config.bound_radius)
    worker = _OrbitGlobalizer(chart, hsys, extend_time, margin)
    seed_points = [point for point in chart.global_points if point.seed_index >= 0]

    def run(point):
        return worker.accepted(point.seed_index, point.z)

    workers = min(AppConfig.threads(), max(1, len(seed_points)))
    if workers == 1:
        results = [run(point) for point in seed_points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, seed_points))

    origin = [point for point in chart.global_points if point.seed_index < 0]
    orbit_points = [point for accepted, _ in results for point in accepted]
    orbit_points.sort(key=lambda point: (point.seed_index, point.tau))
    rejected = sum(count for _, count in results)
    logger.info(
        f"Globalized {chart.kind} chart: {len(orbit_points)} points kept, {rejected} rejected"
    )
    return replace(
        chart,
        global_points=tuple(origin + orbit_points),
        rejected=chart.rejected + rejected,
    )


def stable_manifold(
    hsys: HamiltonianSystem,
    seeds=None,
    horizon: Optional[float] = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    extend_time: Optional[float] = None,
    bounds: Bounds = None,
    config: Optional[ManifoldConfig] = None,
    extend: bool = True,
) -> ManifoldChart:
    """Local chart followed by globalization."""
    if hsys.is_reversed:
        hsys = hsys.reversed()
    chart = local_stable_manifold(hsys, seeds, horizon, tol, max_iter, config)
    return globalize(chart, extend_time=extend_time, bounds=bounds) if extend else chart


def unstable_manifold(
    hsys: HamiltonianSystem,
    seeds=None,
    horizon: Optional[float] = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    extend_time: Optional[float] = None,
    bounds: Bounds = None,
    config: Optional[ManifoldConfig] = None,
    extend: bool = True,
) -> ManifoldChart:
    """
    The stable-manifold pipeline run on the time-reversed field.

    Seeds are given in the mirrored stable coordinate eta, and the flow
    check runs in reversed time, i.e. backward for the original field.
    """
    reversed_hsys = hsys if hsys.is_reversed else hsys.reversed()
    chart = local_stable_manifold(reversed_hsys, seeds, horizon, tol, max_iter, config)
    return globalize(chart, extend_time=extend_time, bounds=bounds) if extend else chart
