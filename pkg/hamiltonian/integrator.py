from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp

from config.numerics_config import IntegratorConfig, NumericsConfig
from extensions.errors import NonFiniteState, StepSizeUnderflow
from extensions.logger import logger
from hamiltonian.hamiltonian_system import HamiltonianSystem
from hamiltonian.trajectory import IntegratorStats, Trajectory
from interfaces.feedback_interface import IFeedbackLaw, IInputSignal
from systems.control_system import ControlAffineSystem, as_vector


Span = Union[float, Tuple[float, float]]
Field = Callable[[float, np.ndarray], np.ndarray]

# RK45 spends six evaluations per attempted step and two to start
STAGES_PER_STEP = 6
STARTUP_EVALUATIONS = 2


@dataclass(frozen=True)
class Integration:
    """Raw outcome of one adaptive run: dense solution plus how it ended."""

    t_start: float
    t_stop: float
    dense: Callable[[float], np.ndarray]
    step_times: np.ndarray
    nfev: int
    event: Optional[int]
    message: str

    @property
    def steps(self) -> int:
        return max(0, self.step_times.size - 1)


class PiecewiseConstantInput(IInputSignal):
    """u(t) = values[k] on [times[k], times[k+1]); the last value holds afterwards."""

    def __init__(self, times: Sequence[float], values) -> None:
        self.times = np.asarray(times, dtype=float).reshape(-1)
        values = np.asarray(values, dtype=float)
        self.values = values.reshape(self.times.size, -1)
        if self.times.size == 0 or self.times[0] > 0.0:
            raise ValueError("Piecewise-constant input must start at t = 0")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("Piecewise-constant input breakpoints must increase")

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def __call__(self, t: float) -> np.ndarray:
        index = int(np.searchsorted(self.times, t, side="right")) - 1
        return self.values[min(max(index, 0), self.times.size - 1)]

    def breakpoints(self, t_end: float) -> list:
        inner = [float(t) for t in self.times if 0.0 < t < t_end]
        return [0.0, *inner, float(t_end)]


def resolve_config(
    config: Optional[IntegratorConfig] = None, tol: Optional[float] = None
) -> IntegratorConfig:
    config = config or NumericsConfig.get_config("integrator")
    if tol is not None:
        config = replace(config, rtol=tol, atol=tol)
    return config


def _span(t_span: Span) -> Tuple[float, float]:
    if np.isscalar(t_span):
        return 0.0, float(t_span)
    t0, t1 = t_span
    return float(t0), float(t1)


def integrate(
    fun: Field,
    y0: np.ndarray,
    t_span: Span,
    config: IntegratorConfig,
    events: Sequence[Callable[[float, np.ndarray], float]] = (),
) -> Integration:
    """
    Adaptive Dormand-Prince 5(4) run with dense output.

    Extra events are terminal and reported by index in `event`; the escape
    guard |y| > escape_norm is always installed and raises.

    Raises:
        StepSizeUnderflow: On step collapse or escape past escape_norm.
        NonFiniteState: If the field returns a non-finite value.
    """
    t0, t1 = _span(t_span)
    y0 = np.asarray(y0, dtype=float)
    if t1 == t0:
        return Integration(t0, t0, lambda t: y0.copy(), np.array([t0]), 0, None, "empty span")

    def guarded(t, y):
        value = fun(t, y)
        if not np.all(np.isfinite(value)):
            raise NonFiniteState(f"Non-finite vector field at t={t:.6g}", t=t)
        return value

    def escape(t, y):
        return np.linalg.norm(y) - config.escape_norm

    escape.terminal = True
    for event in events:
        event.terminal = True

    sol = solve_ivp(
        guarded,
        (t0, t1),
        y0,
        method="RK45",
        rtol=config.rtol,
        atol=config.atol,
        dense_output=True,
        events=[escape, *events],
    )
    if sol.status == -1:
        raise StepSizeUnderflow(f"Integration failed: {sol.message}", t=float(sol.t[-1]))
    if not np.all(np.isfinite(sol.y)):
        raise NonFiniteState("Non-finite state", t=float(sol.t[-1]))
    # the final step may be cut short by t1 or an event
    steps = np.abs(np.diff(sol.t))[:-1]
    floor = config.min_step_factor * abs(t1 - t0)
    if steps.size and float(steps.min()) < floor:
        index = int(np.argmin(steps))
        raise StepSizeUnderflow(
            f"Step size {steps[index]:.3e} below {floor:.3e} at t={sol.t[index]:.6g}",
            t=float(sol.t[index]),
        )

    event = None
    if sol.status == 1:
        fired = [index for index, times in enumerate(sol.t_events) if len(times)]
        if fired[0] == 0:
            raise StepSizeUnderflow(
                f"State escaped |z| > {config.escape_norm:.1e} at t={sol.t[-1]:.6g}",
                t=float(sol.t[-1]),
            )
        event = fired[0] - 1

    return Integration(
        t_start=t0,
        t_stop=float(sol.t[-1]),
        dense=sol.sol,
        step_times=np.asarray(sol.t),
        nfev=int(sol.nfev),
        event=event,
        message=sol.message,
    )


def sample_grid(t0: float, t1: float, samples_per_unit: float) -> np.ndarray:
    """Increasing uniform grid covering [min(t0, t1), max(t0, t1)]."""
    low, high = min(t0, t1), max(t0, t1)
    if high == low:
        return np.array([low])
    count = max(2, int(np.ceil((high - low) * samples_per_unit)) + 1)
    return np.linspace(low, high, count)


def stats_for(runs: Sequence[Integration], config: IntegratorConfig) -> IntegratorStats:
    nfev = sum(run.nfev for run in runs)
    steps = sum(run.steps for run in runs)
    attempted = (nfev - STARTUP_EVALUATIONS * len(runs)) // STAGES_PER_STEP
    return IntegratorStats(
        nfev=nfev,
        steps=steps,
        rejected=max(0, attempted - steps),
        rtol=config.rtol,
        atol=config.atol,
        message=runs[-1].message if runs else "",
    )


def trajectory_from(
    run: Integration,
    n: int,
    config: IntegratorConfig,
    energy_fn: Optional[Callable[[np.ndarray], float]] = None,
    input_map: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    samples_per_unit: Optional[float] = None,
) -> Trajectory:
    grid = sample_grid(run.t_start, run.t_stop, samples_per_unit or config.samples_per_unit)
    states = np.array([run.dense(t) for t in grid])
    return Trajectory(
        times=grid,
        states=states,
        n=n,
        inputs=None if input_map is None else np.array([np.atleast_1d(input_map(z)) for z in states]),
        energy=None if energy_fn is None else np.array([energy_fn(z) for z in states]),
        dense=run.dense,
        input_map=input_map,
        stats=stats_for([run], config),
    )


def flow(
    hsys: HamiltonianSystem,
    z0,
    t_span: Span,
    tol: Optional[float] = None,
    config: Optional[IntegratorConfig] = None,
    samples_per_unit: Optional[float] = None,
) -> Trajectory:
    """
    Integrates the Hamiltonian field from z0 over t_span.

    A negative span integrates backward. The sampled trajectory is returned on
    an increasing grid whatever the direction, with H and u = -g^T p attached.

    Raises:
        StepSizeUnderflow: On finite escape or step collapse.
        NonFiniteState: If the state or field becomes non-finite.
    """
    config = resolve_config(config, tol)
    z0 = as_vector(z0, 2 * hsys.n)
    run = integrate(lambda t, z: hsys.rhs(z), z0, t_span, config)
    traj = trajectory_from(
        run,
        hsys.n,
        config,
        energy_fn=hsys.energy,
        input_map=lambda z: hsys.control(*hsys.split(z)),
        samples_per_unit=samples_per_unit,
    )
    drift = traj.energy_drift()
    if drift > config.conservation_tol:
        logger.warning(
            f"Hamiltonian drift {drift:.3e} exceeds {config.conservation_tol:.1e}"
        )
    return traj


def simulate_controlled(
    sys: ControlAffineSystem,
    x0,
    u_source: Union[IFeedbackLaw, IInputSignal, None],
    T: float,
    tol: Optional[float] = None,
    config: Optional[IntegratorConfig] = None,
    samples_per_unit: Optional[float] = None,
) -> Trajectory:
    """
    Simulates x' = f(x) + g(x) u with the running cost appended as a state.

    Open-loop signals are integrated segment by segment so that each
    discontinuity of u is a restart point.

    Args:
        sys: Plant.
        x0: Initial state.
        u_source: A feedback law, a piecewise-constant input signal, or None for u = 0.
        T: Final time.
        tol: Overrides both integrator tolerances.
        config: Integrator defaults.
        samples_per_unit: Output sampling density.

    Returns:
        Trajectory: States, inputs and the accumulated cost.
    """
    config = resolve_config(config, tol)
    x0 = as_vector(x0, sys.n)
    n = sys.n
    density = samples_per_unit or config.samples_per_unit

    if isinstance(u_source, IInputSignal):
        segments = u_source.breakpoints(float(T))
        input_map = None
    else:
        segments = [0.0, float(T)]
        if u_source is None:
            input_map = lambda z: np.zeros(sys.m)  # noqa: E731
        else:
            input_map = lambda z: np.atleast_1d(u_source(z[:n]))  # noqa: E731

    runs, times, states, inputs = [], [], [], []
    y = np.concatenate([x0, [0.0]])
    for start, stop in zip(segments[:-1], segments[1:]):
        if input_map is None:
            held = np.atleast_1d(u_source(start))
            control = lambda t, x, held=held: held  # noqa: E731
        else:
            control = lambda t, x: input_map(x)  # noqa: E731

        def field(t, y, control=control):
            x = y[:n]
            u = control(t, x)
            return np.concatenate([sys.drift(x, u), [sys.running_cost(x, u)]])

        run = integrate(field, y, (start, stop), config)
        grid = sample_grid(start, stop, density)
        if times:
            grid = grid[1:]
        for t in grid:
            yk = run.dense(t)
            times.append(t)
            states.append(yk)
            inputs.append(control(t, yk[:n]))
        runs.append(run)
        y = run.dense(stop)

    states = np.asarray(states)
    return Trajectory(
        times=np.asarray(times),
        states=states[:, :n],
        n=n,
        inputs=np.asarray(inputs),
        cost=states[:, n],
        input_map=input_map,
        stats=stats_for(runs, config),
    )
