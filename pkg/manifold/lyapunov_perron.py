from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from config.app_config import AppConfig
from config.numerics_config import ManifoldConfig, NumericsConfig
from extensions.errors import NoConvergence
from extensions.logger import logger
from hamiltonian.hamiltonian_system import HamiltonianSystem
from manifold.chart import STABLE, UNSTABLE, ChartPoint, ChartSeed, ManifoldChart
from manifold.flow_check import forward_check
from manifold.seeds import chart_seeds


# Gauss-Legendre nodes used to integrate exponential kernels against the
# Lagrange basis of one panel
KERNEL_NODES = 24
# Iterations whose update grows this many times in a row count as stagnation
STAGNATION_RUN = 3
BLOWUP = 1e3


@dataclass(frozen=True, eq=False)
class SplitFrame:
    """
    Stable/unstable splitting of a Hamiltonian field in (xi, eta) coordinates.

    Forward in time the stable coordinate is xi with a' = F a + nu1 and the
    unstable one is eta with b' = -F^T b + nu2. For the reversed field the
    roles swap: a = eta with a' = F^T a - nu2 and b = xi with b' = -F b - nu1.
    """

    hsys: HamiltonianSystem
    M_s: np.ndarray
    M_u: np.ndarray

    @classmethod
    def for_system(cls, hsys: HamiltonianSystem) -> "SplitFrame":
        F = hsys.sym.F
        if hsys.is_reversed:
            return cls(hsys=hsys, M_s=F.T.copy(), M_u=-F)
        return cls(hsys=hsys, M_s=F, M_u=-F.T.copy())

    @property
    def n(self) -> int:
        return self.hsys.n

    def _w(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.hsys.is_reversed:
            return np.concatenate([b, a])
        return np.concatenate([a, b])

    def nonlinearity(self, a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        nu = self.hsys.nonlinear_residual(self._w(a, b))
        n = self.n
        if self.hsys.is_reversed:
            return -nu[n:], -nu[:n]
        return nu[:n], nu[n:]

    def to_xp(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return self.hsys.sym.L @ self._w(a, b)


def lagrange_basis(nodes: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Values l_j(s_k) of the Lagrange basis on `nodes`, shape (len(s), len(nodes))."""
    s = np.atleast_1d(s)
    values = np.ones((s.size, nodes.size))
    for j, node in enumerate(nodes):
        for i, other in enumerate(nodes):
            if i != j:
                values[:, j] *= (s - other) / (node - other)
    return values


def _kernel_integral(M, sigma, lower, upper, nodes) -> np.ndarray:
    """int_lower^upper expm(M (sigma - s)) l_j(s) ds for every j, shape (q, n, n)."""
    q, n = nodes.size, M.shape[0]
    if upper <= lower:
        return np.zeros((q, n, n))
    x, w = np.polynomial.legendre.leggauss(KERNEL_NODES)
    half = 0.5 * (upper - lower)
    s = lower + half * (x + 1.0)
    basis = lagrange_basis(nodes, s)
    kernels = np.array([expm(M * (sigma - sk)) for sk in s])
    return half * np.einsum("k,kj,kab->jab", w, basis, kernels)


@dataclass(frozen=True, eq=False)
class PanelWeights:
    """Exponential-kernel quadrature weights for one panel [0, h]."""

    h: float
    offsets: np.ndarray
    E_nodes: np.ndarray
    E_panel: np.ndarray
    W_nodes: np.ndarray
    W_panel: np.ndarray
    G_nodes: np.ndarray
    G_panel: np.ndarray
    V_nodes: np.ndarray
    V_panel: np.ndarray

    @classmethod
    def build(cls, M_s: np.ndarray, M_u: np.ndarray, h: float, q: int) -> "PanelWeights":
        x, _ = np.polynomial.legendre.leggauss(q)
        offsets = 0.5 * h * (x + 1.0)
        return cls(
            h=h,
            offsets=offsets,
            E_nodes=np.array([expm(M_s * sigma) for sigma in offsets]),
            E_panel=expm(M_s * h),
            W_nodes=np.array(
                [_kernel_integral(M_s, sigma, 0.0, sigma, offsets) for sigma in offsets]
            ),
            W_panel=_kernel_integral(M_s, h, 0.0, h, offsets),
            G_nodes=np.array([expm(M_u * (sigma - h)) for sigma in offsets]),
            G_panel=expm(-M_u * h),
            V_nodes=np.array(
                [_kernel_integral(M_u, sigma, sigma, h, offsets) for sigma in offsets]
            ),
            V_panel=_kernel_integral(M_u, 0.0, 0.0, h, offsets),
        )


def decay_time(M: np.ndarray, target: float, step: float, t_min: float, t_max: float) -> float:
    """Smallest multiple of `step` in [t_min, t_max] with ||expm(M t)||_2 <= target."""
    t = max(step, step * np.ceil(t_min / step))
    while t <= t_max + 1e-12:
        if np.linalg.norm(expm(M * t), 2) <= target:
            return float(t)
        t += step
    logger.warning(
        f"Exponential decay to {target:.1e} not reached by t={t_max:g}; truncating there"
    )
    return float(t_max)


@dataclass(frozen=True)
class GraphSolution:
    xi: np.ndarray
    eta: np.ndarray
    residuals: Tuple[float, ...]


class LyapunovPerronSolver:
    """
    Fixed-point iteration for the stable graph b(0) = theta(a0):

        a(t) = e^{M_s t} a0 + int_0^t e^{M_s (t-s)} N_a(a, b) ds
        b(t) = -int_t^T e^{M_u (t-s)} N_b(a, b) ds

    on composite Gauss-Legendre panels over [0, T].
    """

    def __init__(
        self,
        hsys: HamiltonianSystem,
        horizon: Optional[float] = None,
        tol: Optional[float] = None,
        max_iter: Optional[int] = None,
        config: Optional[ManifoldConfig] = None,
    ) -> None:
        self.config = config or NumericsConfig.get_config("manifold")
        self.frame = SplitFrame.for_system(hsys)
        self.tol = float(tol if tol is not None else self.config.tol)
        self.max_iter = int(max_iter if max_iter is not None else self.config.max_iter)
        h = self.config.panel_length
        if horizon is None:
            horizon = self.config.horizon
        if horizon is None:
            horizon = decay_time(
                self.frame.M_s,
                self.tol / 10.0,
                h,
                self.config.min_horizon,
                self.config.max_horizon,
            )
        if horizon <= 0:
            raise ValueError("Horizon must be positive")
        self.panels = max(1, int(np.ceil(horizon / h - 1e-9)))
        self.horizon = self.panels * h
        self.weights = PanelWeights.build(
            self.frame.M_s, self.frame.M_u, h, self.config.nodes_per_panel
        )

    @property
    def n(self) -> int:
        return self.frame.n

    def _linear_part(self, a0: np.ndarray) -> np.ndarray:
        wts = self.weights
        start = a0.copy()
        values = np.empty((self.panels, wts.offsets.size, self.n))
        for k in range(self.panels):
            values[k] = wts.E_nodes @ start
            start = wts.E_panel @ start
        return values

    def _nonlinearity(self, a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        N_a = np.empty_like(a)
        N_b = np.empty_like(b)
        for k in range(a.shape[0]):
            for i in range(a.shape[1]):
                N_a[k, i], N_b[k, i] = self.frame.nonlinearity(a[k, i], b[k, i])
        return N_a, N_b

    def _sweep(self, linear, N_a, N_b) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        wts = self.weights
        a = np.empty_like(linear)
        carried = np.zeros(self.n)
        for k in range(self.panels):
            a[k] = (
                linear[k]
                + wts.E_nodes @ carried
                + np.einsum("ijab,jb->ia", wts.W_nodes, N_a[k])
            )
            carried = wts.E_panel @ carried + np.einsum("jab,jb->a", wts.W_panel, N_a[k])

        b = np.empty_like(linear)
        carried = np.zeros(self.n)
        for k in reversed(range(self.panels)):
            b[k] = -(
                wts.G_nodes @ carried + np.einsum("ijab,jb->ia", wts.V_nodes, N_b[k])
            )
            carried = wts.G_panel @ carried + np.einsum("jab,jb->a", wts.V_panel, N_b[k])
        return a, b, -carried

    def solve(self, a0) -> GraphSolution:
        """
        Args:
            a0: Stable coordinate of the seed.

        Returns:
            GraphSolution: The seed, theta(a0) and the sup-norm update history.

        Raises:
            NoConvergence: If the updates grow, stagnate or exceed max_iter.
        """
        a0 = np.asarray(a0, dtype=float).reshape(self.n)
        linear = self._linear_part(a0)
        a, b = linear.copy(), np.zeros_like(linear)
        theta = np.zeros(self.n)
        residuals: List[float] = []
        rising = 0
        for _ in range(self.max_iter):
            N_a, N_b = self._nonlinearity(a, b)
            a_next, b_next, theta = self._sweep(linear, N_a, N_b)
            update = float(max(np.max(np.abs(a_next - a)), np.max(np.abs(b_next - b))))
            residuals.append(update)
            a, b = a_next, b_next
            if not np.isfinite(update) or update > BLOWUP:
                raise NoConvergence("Lyapunov-Perron iteration diverged", residuals)
            if update <= self.tol:
                return GraphSolution(a0, theta, tuple(residuals))
            rising = rising + 1 if len(residuals) > 1 and update >= residuals[-2] else 0
            if rising >= STAGNATION_RUN:
                raise NoConvergence("Lyapunov-Perron iteration stagnated", residuals)
        raise NoConvergence(
            f"Lyapunov-Perron iteration not converged after {self.max_iter} iterations",
            residuals,
        )


def _settle_time(frame: SplitFrame, radius: float, config: ManifoldConfig) -> float:
    if config.settle_time is not None:
        return float(config.settle_time)
    target = config.check_tol / (10.0 * max(radius, 1e-300))
    return decay_time(
        frame.M_s, min(target, 1.0), config.panel_length, config.panel_length, config.max_horizon
    )


def _solve_seeds(
    solver: LyapunovPerronSolver, seeds: np.ndarray
) -> List[Optional[GraphSolution]]:
    def attempt(a0):
        try:
            return solver.solve(a0)
        except NoConvergence as exc:
            logger.debug(f"Seed {np.array2string(a0, precision=4)} rejected: {exc}")
            return None

    workers = min(AppConfig.threads(), max(1, len(seeds)))
    if workers == 1:
        return [attempt(a0) for a0 in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(attempt, seeds))


def local_stable_manifold(
    hsys: HamiltonianSystem,
    seeds: Optional[Sequence] = None,
    horizon: Optional[float] = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    config: Optional[ManifoldConfig] = None,
) -> ManifoldChart:
    """
    Local chart of the stable manifold of `hsys` near the origin.

    Seeds that fail to converge are dropped and counted; the chart keeps the
    origin as its first global point together with the converged seed points.

    Args:
        hsys: Hamiltonian field; pass the reversed field for an unstable chart.
        seeds: Stable coordinates of the seeds, default from the seed config.
        horizon: Truncation time, default chosen from the decay of e^{M_s t}.
        tol: Sup-norm stopping tolerance.
        max_iter: Iteration cap per seed.
        config: Manifold stage defaults.

    Returns:
        ManifoldChart: Local chart with seeds and their (x, p) points.

    Raises:
        NoConvergence: If no seed converges.
    """
    config = config or NumericsConfig.get_config("manifold")
    solver = LyapunovPerronSolver(hsys, horizon=horizon, tol=tol, max_iter=max_iter, config=config)
    if seeds is None:
        seeds = chart_seeds(hsys.n, config=config)
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float)).reshape(-1, hsys.n)
    kind = UNSTABLE if hsys.is_reversed else STABLE

    logger.info(
        f"Solving {kind} chart: {len(seeds)} seeds, horizon {solver.horizon:g}, "
        f"{solver.panels * solver.weights.offsets.size} nodes"
    )
    solutions = _solve_seeds(solver, seeds)
    converged = [sol for sol in solutions if sol is not None]
    failed = len(solutions) - len(converged)
    if not converged:
        raise NoConvergence(f"None of the {len(seeds)} {kind} seeds converged")
    if failed:
        logger.warning(f"{failed} of {len(seeds)} {kind} seeds did not converge")

    chart_seeds_ = tuple(ChartSeed(sol.xi, sol.eta, sol.residuals) for sol in converged)
    radius = max(float(np.linalg.norm(sol.xi)) for sol in converged)
    settle = _settle_time(solver.frame, radius, config)
    n = hsys.n
    points = [ChartPoint(np.zeros(n), np.zeros(n), 0.0, 0.0, 0.0, -1)]
    for index, sol in enumerate(converged):
        z = solver.frame.to_xp(sol.xi, sol.eta)
        x, p = hsys.split(z)
        final, _ = forward_check(hsys, z, settle, config)
        points.append(ChartPoint(x.copy(), p.copy(), hsys.hval(x, p), final, 0.0, index))

    return ManifoldChart(
        kind=kind,
        tol=solver.tol,
        seeds=chart_seeds_,
        global_points=tuple(points),
        local_radius=radius,
        horizon=solver.horizon,
        settle_time=settle,
        hsys=hsys,
        config=config,
        solver=solver,
        failed_seeds=failed,
    )
