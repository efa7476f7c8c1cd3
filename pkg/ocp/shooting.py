from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import expm

from config.numerics_config import NumericsConfig, ShootingConfig
from extensions.errors import IntegrationError, IntegratorEscape, ShootingDiverged
from extensions.logger import logger
from hamiltonian.hamiltonian_system import HamiltonianSystem
from hamiltonian.integrator import Integration, integrate, sample_grid, stats_for
from hamiltonian.trajectory import Trajectory
from systems.control_system import ControlAffineSystem, as_vector


@dataclass(frozen=True)
class FiniteHorizonProblem:
    sys: ControlAffineSystem
    x0: np.ndarray
    xf: np.ndarray
    T: float
    epsilon: float = 0.1

    def __post_init__(self) -> None:
        if not self.T > 0:
            raise ValueError("Horizon T must be positive")
        object.__setattr__(self, "x0", as_vector(self.x0, self.sys.n))
        object.__setattr__(self, "xf", as_vector(self.xf, self.sys.n))
        if not self.epsilon > 0:
            raise ValueError("Turnpike threshold epsilon must be positive")


@dataclass(frozen=True, eq=False)
class ShootingResult:
    trajectory: Trajectory
    p0: np.ndarray
    residual: float
    terminal_residual: float
    iterations: int
    residual_history: Tuple[float, ...]
    nodes: np.ndarray


def linear_bvp_guess(
    hsys: HamiltonianSystem, x0: np.ndarray, xf: np.ndarray, times: np.ndarray
) -> np.ndarray:
    """
    States z(t_k) of the linearized two-point problem.

    In (xi, eta) coordinates xi(t) = e^{Ft} xi0 and eta(t) = e^{F^T (T - t)} eta_T,
    so both unknowns enter through decaying exponentials.
    """
    sym = hsys.sym
    n = hsys.n
    T = float(times[-1])
    forward = expm(sym.F * T)
    backward = expm(sym.F.T * T)
    system = np.block([[np.eye(n), sym.P2 @ backward], [forward, sym.P2]])
    rhs = np.concatenate([x0, xf])
    solution = np.linalg.lstsq(system, rhs, rcond=None)[0]
    xi0, eta_T = solution[:n], solution[n:]
    states = []
    for t in times:
        w = np.concatenate([expm(sym.F * t) @ xi0, expm(sym.F.T * (T - t)) @ eta_T])
        states.append(sym.L @ w)
    return np.array(states)


class SegmentedShooting:
    """
    Newton iteration on p(0) and the interior node states.

    With K segments on [0, T] the unknowns are [p0, z_1, ..., z_{K-1}] and the
    residual stacks the continuity defects phi(z_k) - z_{k+1} with the
    terminal defect x(T) - xf. A horizon no longer than `segment_time` is one
    segment, i.e. single shooting on p0; longer ones are split because the
    sensitivity of x(T) to p0 grows exponentially with T.
    """

    def __init__(
        self,
        hsys: HamiltonianSystem,
        x0: np.ndarray,
        xf: np.ndarray,
        T: float,
        config: ShootingConfig,
    ) -> None:
        self.hsys = hsys
        self.n = hsys.n
        self.x0 = x0
        self.xf = xf
        self.T = float(T)
        self.config = config
        self.segments = max(1, int(np.ceil(self.T / config.segment_time - 1e-9)))
        self.times = np.linspace(0.0, self.T, self.segments + 1)
        self.integrator = replace(
            NumericsConfig.get_config("integrator"), rtol=config.rtol, atol=config.atol
        )

    @property
    def size(self) -> int:
        return self.n + 2 * self.n * (self.segments - 1)

    def pack(self, p0: np.ndarray, nodes: np.ndarray) -> np.ndarray:
        return np.concatenate([p0, nodes[1:-1].reshape(-1)])

    def starts(self, unknowns: np.ndarray) -> np.ndarray:
        n = self.n
        first = np.concatenate([self.x0, unknowns[:n]])
        interior = unknowns[n:].reshape(self.segments - 1, 2 * n)
        return np.vstack([first[None, :], interior])

    def _run(self, k: int, z: np.ndarray) -> Integration:
        return integrate(
            lambda t, y: self.hsys.rhs(y), z, (self.times[k], self.times[k + 1]), self.integrator
        )

    def _end(self, k: int, z: np.ndarray) -> np.ndarray:
        run = self._run(k, z)
        return run.dense(run.t_stop)

    def residual(self, unknowns: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        starts = self.starts(unknowns)
        ends = np.array([self._end(k, z) for k, z in enumerate(starts)])
        defects = [ends[k] - starts[k + 1] for k in range(self.segments - 1)]
        defects.append(ends[-1][: self.n] - self.xf)
        return np.concatenate(defects), ends

    def jacobian(self, unknowns: np.ndarray, ends: np.ndarray) -> np.ndarray:
        n = self.n
        starts = self.starts(unknowns)
        jac = np.zeros((self.size, self.size))
        for k, z in enumerate(starts):
            # columns of this segment's own unknowns
            if k == 0:
                components, column0 = range(n, 2 * n), 0
            else:
                components, column0 = range(2 * n), n + 2 * n * (k - 1)
            row0 = 2 * n * k
            last = k == self.segments - 1
            for offset, index in enumerate(components):
                step = self.config.fd_step * max(1.0, abs(z[index]))
                shifted = z.copy()
                shifted[index] += step
                derivative = (self._end(k, shifted) - ends[k]) / step
                if last:
                    jac[row0: row0 + n, column0 + offset] = derivative[:n]
                else:
                    jac[row0: row0 + 2 * n, column0 + offset] = derivative
            if k > 0:
                jac[row0 - 2 * n: row0, column0: column0 + 2 * n] -= np.eye(2 * n)
        return jac

    def solve(self, unknowns: np.ndarray) -> Tuple[np.ndarray, float, List[float]]:
        config = self.config
        try:
            residual, ends = self.residual(unknowns)
        except IntegrationError as exc:
            raise IntegratorEscape(f"Shooting initial guess escapes: {exc}") from exc
        norm = float(np.linalg.norm(residual))
        history = [norm]
        best = (norm, unknowns.copy())

        for iteration in range(config.max_iter):
            if norm <= config.tol:
                return unknowns, norm, history
            try:
                jac = self.jacobian(unknowns, ends)
            except IntegrationError as exc:
                raise IntegratorEscape(f"Sensitivity run escapes: {exc}") from exc
            try:
                direction = np.linalg.solve(jac, -residual)
            except np.linalg.LinAlgError:
                direction = np.linalg.lstsq(jac, -residual, rcond=None)[0]

            damping = 1.0
            for _ in range(config.max_halvings + 1):
                trial = unknowns + damping * direction
                try:
                    trial_residual, trial_ends = self.residual(trial)
                except IntegrationError:
                    damping /= 2.0
                    continue
                trial_norm = float(np.linalg.norm(trial_residual))
                if trial_norm < (1.0 - 1e-4 * damping) * norm:
                    unknowns, residual, ends, norm = trial, trial_residual, trial_ends, trial_norm
                    break
                damping /= 2.0
            else:
                raise ShootingDiverged(
                    f"Line search failed at iteration {iteration} with residual {norm:.3e}",
                    best_residual=best[0],
                    best_iterate=best[1][: self.n],
                )
            history.append(norm)
            logger.debug(f"Shooting T={self.T:g} iteration {iteration}: residual {norm:.3e}")
            if norm < best[0]:
                best = (norm, unknowns.copy())

        if norm <= config.tol:
            return unknowns, norm, history
        raise ShootingDiverged(
            f"Shooting not converged after {config.max_iter} iterations (residual {norm:.3e})",
            best_residual=best[0],
            best_iterate=best[1][: self.n],
        )

    def trajectory(self, unknowns: np.ndarray) -> Tuple[Trajectory, np.ndarray]:
        starts = self.starts(unknowns)
        runs = [self._run(k, z) for k, z in enumerate(starts)]
        boundaries = self.times

        def dense(t: float) -> np.ndarray:
            k = int(np.clip(np.searchsorted(boundaries, t, side="right") - 1, 0, self.segments - 1))
            return runs[k].dense(t)

        times, states = [], []
        for k, run in enumerate(runs):
            grid = sample_grid(boundaries[k], boundaries[k + 1], self.config.samples_per_unit)
            if k:
                grid = grid[1:]
            for t in grid:
                times.append(t)
                states.append(run.dense(t))
        states = np.array(states)
        hsys = self.hsys

        def input_map(z):
            return hsys.control(*hsys.split(z))

        traj = Trajectory(
            times=np.array(times),
            states=states,
            n=self.n,
            inputs=np.array([input_map(z) for z in states]),
            energy=np.array([hsys.energy(z) for z in states]),
            dense=dense,
            input_map=input_map,
            stats=stats_for(runs, self.integrator),
        )
        return traj, np.vstack([starts, runs[-1].dense(self.T)[None, :]])


def stretched_nodes(previous: ShootingResult, times: np.ndarray) -> np.ndarray:
    """
    Node states for a new horizon from a solved one.

    The opening and closing arcs of the previous solution are kept and the
    middle is filled with its state at half time, near the turnpike.
    """
    traj = previous.trajectory
    T_old, T = traj.t_end - traj.t0, float(times[-1])
    half = 0.5 * min(T_old, T)
    nodes = []
    for t in times:
        if t <= half:
            nodes.append(traj.state_at(traj.t0 + t))
        elif t >= T - half:
            nodes.append(traj.state_at(traj.t0 + t - T + T_old))
        else:
            nodes.append(traj.state_at(traj.t0 + half))
    return np.array(nodes)


def continue_boundary_data(
    hsys: HamiltonianSystem, x0: np.ndarray, xf: np.ndarray, T: float, config: ShootingConfig
) -> Tuple[np.ndarray, float, List[float]]:
    """
    Solves the problem with data (s x0, s xf) for s increasing from 0 to 1.

    At s = 0 the solution is z = 0 and its tangent in s is the linearized
    solution; later predictions extrapolate the last two solutions. A failed
    step is halved down to `continuation_min_step`.
    """
    base = SegmentedShooting(hsys, x0, xf, T, config)
    linear = linear_bvp_guess(hsys, x0, xf, base.times)
    slope = base.pack(linear[0][hsys.n:], linear)
    s, unknowns = 0.0, np.zeros(base.size)
    step = config.continuation_step
    norm, history = 0.0, [0.0]
    while s < 1.0:
        target = min(1.0, s + step)
        shooting = SegmentedShooting(hsys, target * x0, target * xf, T, config)
        try:
            solution, norm, history = shooting.solve(unknowns + (target - s) * slope)
        except (IntegratorEscape, ShootingDiverged) as exc:
            step /= 2.0
            logger.debug(f"Continuation step to s={target:.4g} failed ({exc}); step {step:.3g}")
            if step < config.continuation_min_step:
                raise ShootingDiverged(
                    f"Continuation stalled at s={s:.4g} (T={T:g})",
                    best_iterate=unknowns[: hsys.n],
                ) from exc
            continue
        slope = (solution - unknowns) / (target - s)
        s, unknowns = target, solution
        logger.debug(f"Continuation reached s={s:.4g} with residual {norm:.3e}")
        step *= 2.0
    return unknowns, norm, history


def solve_finite_bvp(
    hsys: HamiltonianSystem,
    x0,
    xf,
    T: float,
    tol: Optional[float] = None,
    p0_guess=None,
    config: Optional[ShootingConfig] = None,
    warm_start: Optional[ShootingResult] = None,
) -> ShootingResult:
    """
    Solves x(0) = x0, x(T) = xf for the Hamiltonian field by damped Newton
    shooting with finite-difference sensitivities.

    The default guess is the solution of the linearized problem. A warm start
    from another horizon contributes its opening and closing arcs; `p0_guess`
    replaces p(0). When the direct solve escapes or diverges, the boundary
    data are continued from zero.

    Args:
        hsys: Forward Hamiltonian field.
        x0: Initial state.
        xf: Terminal state.
        T: Horizon.
        tol: Stopping tolerance on the stacked defect.
        p0_guess: Initial costate override.
        config: Shooting stage defaults.
        warm_start: Previous solution to continue from.

    Returns:
        ShootingResult: The converged (x, p) trajectory with u = -g^T p.

    Raises:
        ShootingDiverged: With the best residual and best p(0).
        IntegratorEscape: If the guess or a sensitivity run escapes.
    """
    config = config or NumericsConfig.get_config("shooting")
    if tol is not None:
        config = replace(config, tol=float(tol))
    problem = FiniteHorizonProblem(hsys.base, x0, xf, T)
    if hsys.is_reversed:
        hsys = hsys.reversed()
    shooting = SegmentedShooting(hsys, problem.x0, problem.xf, problem.T, config)

    if warm_start is not None:
        nodes = stretched_nodes(warm_start, shooting.times)
    else:
        nodes = linear_bvp_guess(hsys, problem.x0, problem.xf, shooting.times)
    p0 = nodes[0][hsys.n:]
    if p0_guess is not None:
        p0 = as_vector(p0_guess, hsys.n)
    unknowns = shooting.pack(p0, nodes)

    logger.info(f"Shooting T={problem.T:g} with {shooting.segments} segment(s)")
    try:
        unknowns, norm, history = shooting.solve(unknowns)
    except (IntegratorEscape, ShootingDiverged) as exc:
        if not config.continuation:
            raise
        logger.info(f"Direct shooting failed ({exc}); continuing the boundary data from zero")
        unknowns, norm, history = continue_boundary_data(
            hsys, problem.x0, problem.xf, problem.T, config
        )
    traj, nodes = shooting.trajectory(unknowns)
    terminal = float(np.linalg.norm(traj.state_at(problem.T)[: hsys.n] - problem.xf))
    return ShootingResult(
        trajectory=traj,
        p0=unknowns[: hsys.n].copy(),
        residual=norm,
        terminal_residual=terminal,
        iterations=len(history) - 1,
        residual_history=tuple(history),
        nodes=nodes,
    )
