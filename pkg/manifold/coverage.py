from dataclasses import replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space

from config.numerics_config import NumericsConfig
from extensions.errors import IntegrationError, NoConvergence, Uncovered
from extensions.logger import logger
from hamiltonian.integrator import integrate
from linalg.lyapunov import solve_lyapunov
from manifold.chart import (
    BOUNDARY,
    COVERED,
    UNCOVERED,
    ChartPoint,
    CoverageEntry,
    CoverageEstimate,
    ManifoldChart,
)
from manifold.flow_check import forward_check
from systems.control_system import FeedbackLaw


# Witnesses closer than this in (x, p) are the same point
WITNESS_MERGE = 1e-6
FD_STEP = 1e-7
MIN_DAMPING = 1.0 / 64.0
# Tolerance on the intermediate targets of the continuation towards a query
TRACK_TOL = 1e-6
# Backward time is capped at this multiple of the globalization time
TAU_CAP_FACTOR = 2.0
# Nearest chart points scanned for distinct candidate orbits
CANDIDATE_POOL = 256


class _ChartRefiner:
    """
    Moves a chart point along the manifold until its x-projection hits a query.

    Inside the local patch the unknown is the seed coordinate a at zero
    backward time, z(a) = to_xp(a, theta(a)). Elsewhere the seed slides on
    its Lyapunov ellipsoid a^T Q a = const of the linear part, which the flow
    crosses transversally, and the backward time tau is free:
    z(c, tau) = flow_{-tau}(to_xp(a(c), theta(a(c)))). There the target is
    moved from the starting point to the query in steps.
    """

    def __init__(self, chart: ManifoldChart) -> None:
        self.chart = chart
        self.hsys = chart.hsys
        self.config = chart.config
        self.radius = chart.local_radius * (1.0 + 1e-9)
        n = chart.n
        M_s = chart.solver.frame.M_s
        self.Q = solve_lyapunov(M_s.T, -np.eye(n), require_nsd=False)
        longest = max((point.tau for point in chart.global_points), default=0.0)
        self.tau_cap = TAU_CAP_FACTOR * max(self.config.extend_time, longest)

    def project(self, a: np.ndarray, tau: float) -> np.ndarray:
        z = self.chart.to_xp(a, self.chart.graph(a))
        if tau <= 0.0:
            return z
        run = integrate(
            lambda t, y: self.hsys.rhs(y), z, (0.0, -tau),
            NumericsConfig.get_config("integrator"),
        )
        if run.event is not None or run.t_stop > -tau:
            raise NoConvergence("Backward flow stopped before the target time")
        return run.dense(-tau)

    def _clip(self, a: np.ndarray) -> np.ndarray:
        size = np.linalg.norm(a)
        return a if size <= self.radius else a * (self.radius / size)

    def _newton(
        self,
        evaluate: Callable[[np.ndarray], np.ndarray],
        clip: Callable[[np.ndarray], np.ndarray],
        y: np.ndarray,
        target: np.ndarray,
        tol: float,
    ) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        n = self.hsys.n
        z = evaluate(y)
        residual = z[:n] - target
        for _ in range(self.config.newton_max_iter):
            if np.linalg.norm(residual) <= tol:
                break
            jac = np.empty((n, y.size))
            for k in range(y.size):
                step = FD_STEP * max(1.0, abs(y[k]))
                shifted = y.copy()
                shifted[k] += step
                jac[:, k] = (evaluate(shifted)[:n] - z[:n]) / step
            direction = np.linalg.lstsq(jac, -residual, rcond=None)[0]

            damping = 1.0
            while damping >= MIN_DAMPING:
                trial = clip(y + damping * direction)
                z_trial = evaluate(trial)
                r_trial = z_trial[:n] - target
                if np.linalg.norm(r_trial) < np.linalg.norm(residual):
                    y, z, residual = trial, z_trial, r_trial
                    break
                damping /= 2.0
            else:
                return None
        if np.linalg.norm(residual) > tol:
            return None
        return y, z

    def refine_local(self, x0: np.ndarray, point: ChartPoint) -> Optional[np.ndarray]:
        a = self._clip(self.chart.seeds[point.seed_index].xi.copy())
        try:
            found = self._newton(
                lambda y: self.project(y, 0.0), self._clip, a, x0, self.config.newton_tol
            )
        except (IntegrationError, NoConvergence):
            return None
        if found is None:
            return None
        z = found[1]
        return z if self.accepts(z, 0.0) else None

    def refine_orbit(self, x0: np.ndarray, point: ChartPoint) -> Optional[np.ndarray]:
        n = self.hsys.n
        seed = self.chart.seeds[point.seed_index].xi
        level = float(np.sqrt(seed @ self.Q @ seed))
        tangent = null_space(seed[None, :])

        def on_ellipsoid(c: np.ndarray) -> np.ndarray:
            u = seed + tangent @ c
            return level * u / np.sqrt(u @ self.Q @ u)

        def evaluate(y: np.ndarray) -> np.ndarray:
            return self.project(on_ellipsoid(y[:-1]), y[-1])

        def clip(y: np.ndarray) -> np.ndarray:
            y = y.copy()
            y[-1] = min(max(y[-1], 0.0), self.tau_cap)
            return y

        y = np.concatenate([np.zeros(n - 1), [point.tau]])
        try:
            start = evaluate(y)[:n]
            reached, step = 0.0, 1.0
            while reached < 1.0:
                goal = min(1.0, reached + step)
                tol = self.config.newton_tol
                if goal < 1.0:
                    tol = max(tol, TRACK_TOL)
                found = self._newton(evaluate, clip, y, start + goal * (x0 - start), tol)
                if found is None:
                    step /= 2.0
                    if step < MIN_DAMPING:
                        return None
                    continue
                y, z = found
                reached = goal
                step *= 2.0
        except (IntegrationError, NoConvergence):
            return None
        return z if self.accepts(z, y[-1]) else None

    def refine(self, x0: np.ndarray, point: ChartPoint) -> Optional[np.ndarray]:
        if point.tau <= 0.0:
            z = self.refine_local(x0, point)
            if z is not None:
                return z
        return self.refine_orbit(x0, point)

    def accepts(self, z: np.ndarray, tau: float) -> bool:
        if abs(self.hsys.energy(z)) > self.config.energy_tol:
            return False
        final, _ = forward_check(self.hsys, z, tau + self.chart.settle_time, self.config)
        return final <= self.config.check_tol

def _merge(witnesses: List[np.ndarray], n: int) -> tuple:
    distinct: List[np.ndarray] = []
    for z in witnesses:
        if all(np.linalg.norm(z - other) > WITNESS_MERGE for other in distinct):
            distinct.append(z)
    distinct.sort(key=lambda z: float(np.linalg.norm(z[n:])))
    return tuple(distinct)


def coverage(
    chart: ManifoldChart, query_points: Sequence, newton_tol: Optional[float] = None
) -> CoverageEstimate:
    """
    Classifies query states as covered, boundary or uncovered by pi(chart).

    A query within the snap radius of the projected chart is refined from up
    to `max_candidates` nearby orbits, skipping orbits whose costate is within
    `branch_gap` of a witness already found. All distinct witnesses are kept,
    ordered by |p|. A query that cannot be refined is a boundary point when it
    lies within `boundary_factor` spacings of the chart.

    Args:
        chart: Globalized chart.
        query_points: States x0, shape (k, n).
        newton_tol: Refinement tolerance on |pi(z) - x0|.

    Returns:
        CoverageEstimate: One entry per query plus the snap metadata.
    """
    if not chart.global_points:
        raise ValueError("Coverage needs a nonempty chart")
    n = chart.n
    if newton_tol is not None:
        chart = replace(chart, config=replace(chart.config, newton_tol=float(newton_tol)))
    config = chart.config
    queries = np.atleast_2d(np.asarray(query_points, dtype=float)).reshape(-1, n)

    spacing = chart.spacing() or config.arc_spacing
    snap = config.snap_factor * spacing
    edge = config.boundary_factor * spacing
    tree = chart.tree()
    points = chart.global_points
    refiner = _ChartRefiner(chart)
    count = min(len(points), CANDIDATE_POOL)

    entries = []
    for x0 in queries:
        distances, indices = tree.query(x0, k=count)
        distances = np.atleast_1d(distances)
        indices = np.atleast_1d(indices)
        nearest = float(distances[0])
        if nearest > snap:
            entries.append(CoverageEntry(x0.copy(), UNCOVERED, nearest))
            continue

        witnesses = []
        seen_orbits = set()
        for distance, index in zip(distances, indices):
            if len(seen_orbits) >= config.max_candidates or distance > snap:
                break
            point = points[index]
            if point.seed_index in seen_orbits:
                continue
            seen_orbits.add(point.seed_index)
            if distance <= config.newton_tol:
                witnesses.append(point.z)
            elif any(np.linalg.norm(w[n:] - point.p) <= config.branch_gap for w in witnesses):
                # same branch as a witness already found
                continue
            elif point.seed_index >= 0:
                z = refiner.refine(x0, point)
                if z is not None:
                    witnesses.append(z)

        if witnesses:
            merged = _merge(witnesses, n)
            residual = float(np.linalg.norm(merged[0][:n] - x0))
            entries.append(CoverageEntry(x0.copy(), COVERED, nearest, merged, residual))
        else:
            status = BOUNDARY if nearest <= edge else UNCOVERED
            entries.append(CoverageEntry(x0.copy(), status, nearest))

    covered = sum(entry.status == COVERED for entry in entries)
    logger.info(f"Coverage of {chart.kind} chart: {covered}/{len(entries)} queries covered")
    return CoverageEstimate(
        kind=chart.kind,
        entries=tuple(entries),
        method={
            "spacing": spacing,
            "snap_radius": snap,
            "boundary_radius": edge,
            "newton_tol": config.newton_tol,
            "max_candidates": config.max_candidates,
        },
    )


def costate_estimate(chart: ManifoldChart, x) -> np.ndarray:
    """
    Costate p_hat(x) from the chart by an inverse-distance weighted local
    linear fit over the k nearest points of the lowest-|p| branch.

    Raises:
        Uncovered: If x lies farther than the snap radius from the chart.
    """
    config = chart.config
    n = chart.n
    x = np.asarray(x, dtype=float).reshape(n)
    points_x = chart.points_x
    points_p = chart.points_p
    k = min(len(points_x), max(config.k_nearest, n + 1))
    distances, indices = chart.tree().query(x, k=k)
    distances = np.atleast_1d(distances)
    indices = np.atleast_1d(indices)

    snap = config.snap_factor * (chart.spacing() or config.arc_spacing)
    if distances[0] > snap:
        raise Uncovered(
            f"x = {np.array2string(x, precision=4)} is {distances[0]:.3g} from the "
            f"{chart.kind} chart (snap radius {snap:.3g})"
        )
    if distances[0] <= 1e-12:
        return points_p[indices[0]].copy()

    norms = np.linalg.norm(points_p[indices], axis=1)
    branch = norms <= norms.min() + config.branch_gap
    idx, dist = indices[branch], distances[branch]
    weights = 1.0 / dist ** 2
    if idx.size < n + 1:
        return weights @ points_p[idx] / weights.sum()

    design = np.hstack([np.ones((idx.size, 1)), points_x[idx] - x])
    root = np.sqrt(weights)[:, None]
    coeffs, _, rank, _ = np.linalg.lstsq(root * design, root * points_p[idx], rcond=None)
    if rank < n + 1:
        return weights @ points_p[idx] / weights.sum()
    return coeffs[0]


def manifold_feedback(chart: ManifoldChart, x) -> np.ndarray:
    """u = -g(x)^T p_hat(x)."""
    x = np.asarray(x, dtype=float).reshape(chart.n)
    p = costate_estimate(chart, x)
    return chart.hsys.control(x, p)


def manifold_feedback_law(chart: ManifoldChart) -> FeedbackLaw:
    return FeedbackLaw(
        k=lambda x: manifold_feedback(chart, x),
        n=chart.n,
        m=chart.hsys.base.m,
        domain_radius=chart.x_radius,
        name="manifold",
    )
