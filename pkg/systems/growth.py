from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from config.numerics_config import GrowthConfig, NumericsConfig
from extensions.errors import InsufficientSamples
from extensions.logger import logger
from systems.control_system import ControlAffineSystem, linearize


TINY = 1e-300
# h / r^p on shells past rho keeps at least this share of its outermost value
COERCIVE_FRACTION = 0.5


@dataclass(frozen=True)
class GrowthCertificate:
    exponent_p: float
    growth_theta: float
    c_f: float
    c_g: float
    c_h: Optional[float]
    rho: Optional[float]
    sample_radii: Tuple[float, ...]
    fit_residual: float
    f_exponent: float
    g_exponent: float
    h_exponent: Optional[float]
    coercive: bool
    violation: bool
    decay_rate: Optional[float] = None
    decay_gain: Optional[float] = None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def shell_directions(n: int, count: int, seed: int) -> np.ndarray:
    if n == 1:
        return np.array([[1.0], [-1.0]])
    rng = np.random.default_rng(seed)
    directions = rng.standard_normal((count, n))
    return directions / np.linalg.norm(directions, axis=1, keepdims=True)


def _fit_line(x: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    design = np.column_stack([x, np.ones_like(x)])
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.sqrt(np.mean((design @ coeffs - y) ** 2)))
    return float(coeffs[0]), residual


def _fit_power(radii: np.ndarray, values: np.ndarray) -> Tuple[float, float]:
    """Slope of log(values) against log(radii) and its RMS residual."""
    if np.max(values) <= TINY:
        return 0.0, 0.0
    return _fit_line(np.log(radii), np.log(np.maximum(values, TINY)))


def _decay_constants(
    sys: ControlAffineSystem, config: GrowthConfig
) -> Tuple[Optional[float], Optional[float]]:
    """Fits |x(t)| <= K |x0| exp(-mu t) over free-dynamics runs from a small shell."""
    times = np.linspace(0.0, config.decay_horizon, 201)
    rates, runs = [], []

    def escape(t, x):
        return np.linalg.norm(x) - 1e6

    escape.terminal = True

    for direction in shell_directions(sys.n, config.decay_samples, config.seed):
        x0 = config.decay_radius * direction
        sol = solve_ivp(
            lambda t, x: sys.f(x),
            (0.0, config.decay_horizon),
            x0,
            t_eval=times,
            rtol=1e-10,
            atol=1e-14,
            events=escape,
        )
        if sol.status != 0 or sol.y.shape[1] != times.size:
            return None, None
        ratio = np.linalg.norm(sol.y, axis=0) / config.decay_radius
        keep = ratio > 1e-10
        if keep.sum() < 2:
            continue
        slope, _ = _fit_line(times[keep], np.log(ratio[keep]))
        rates.append(-slope)
        runs.append((times[keep], ratio[keep]))

    if not rates or min(rates) <= 0.0:
        return None, None
    mu = min(rates)
    gain = max(float(np.max(r * np.exp(mu * t))) for t, r in runs)
    return mu, gain


def _coercivity_onset(radii: np.ndarray, h_min: np.ndarray, p: float) -> Tuple[float, float]:
    """
    Smallest sampled radius rho beyond which h_min / r^p stays within
    COERCIVE_FRACTION of its value on the outermost shell, and the constant
    c_h = min h_min / r^p over those shells.
    """
    ratios = h_min / radii**p
    settled = ratios >= COERCIVE_FRACTION * ratios[-1]
    start = radii.size - 1
    while start > 0 and settled[start - 1]:
        start -= 1
    return float(np.min(ratios[start:])), float(radii[start])


def growth_certificate(
    sys: ControlAffineSystem,
    radii: Optional[Sequence[float]] = None,
    samples_per_shell: Optional[int] = None,
    config: Optional[GrowthConfig] = None,
) -> GrowthCertificate:
    """
    Estimates the polynomial growth of f, g and h at infinity.

    |f| and ||g|| are bounded by their maxima over each shell and h by its
    minimum; exponents come from log-log least squares. When h is not coercive
    on the sampled shells, p falls back to the smallest value that makes the
    f and g bounds hold with theta = 0 and c_h, rho are left unset. Shells
    inside the outermost run of positive h_min do not enter the h fit.

    Args:
        sys: System to certify.
        radii: Increasing shell radii, at least two.
        samples_per_shell: Directions sampled on every shell.
        config: Growth defaults; the registry defaults when omitted.

    Returns:
        GrowthCertificate: Exponents, constants and the violation flag.

    Raises:
        InsufficientSamples: If fewer than two increasing radii are given.
    """
    config = config or NumericsConfig.get_config("growth")
    radii = np.asarray(radii if radii is not None else config.radii, dtype=float)
    samples = int(samples_per_shell or config.samples_per_shell)
    if radii.size < 2 or np.any(np.diff(radii) <= 0) or np.any(radii <= 0):
        raise InsufficientSamples("Growth fit needs at least two increasing positive radii")
    if samples < 1:
        raise InsufficientSamples("Growth fit needs at least one sample per shell")

    directions = shell_directions(sys.n, samples, config.seed)
    f_max, g_max, h_min = [], [], []
    for radius in radii:
        points = radius * directions
        f_max.append(max(np.linalg.norm(sys.f(x)) for x in points))
        g_max.append(max(np.linalg.norm(np.atleast_2d(sys.g(x)), 2) for x in points))
        h_min.append(min(float(sys.h(x)) for x in points))
    f_max, g_max, h_min = map(np.asarray, (f_max, g_max, h_min))

    f_exponent, f_residual = _fit_power(radii, f_max)
    g_exponent, _ = _fit_power(radii, g_max)

    # innermost shell from which h stays positive outward
    first = radii.size
    while first > 0 and h_min[first - 1] > 0.0:
        first -= 1
    coercive = radii.size - first >= 2
    h_exponent = None
    if coercive:
        h_exponent, _ = _fit_power(radii[first:], h_min[first:])
        coercive = h_exponent > 0.0
    if coercive:
        p = h_exponent
    else:
        p = max(1.0, f_exponent, 2.0 * g_exponent)
    theta = max(0.0, f_exponent - p, g_exponent - 0.5 * p)

    c_f = float(np.max(f_max / radii ** (p + theta)))
    c_g = float(np.max(g_max / radii ** (0.5 * p + theta)))
    c_h = rho = None
    if coercive:
        c_h, rho = _coercivity_onset(radii[first:], h_min[first:], p)

    violation = theta >= 1.0
    if violation:
        logger.warning(
            f"Growth of {sys.name} exceeds the admissible range (theta={theta:.3f})"
        )

    decay_rate = decay_gain = None
    A = linearize(sys).A
    if np.all(np.linalg.eigvals(A).real < 0.0):
        decay_rate, decay_gain = _decay_constants(sys, config)

    return GrowthCertificate(
        exponent_p=float(p),
        growth_theta=float(theta),
        c_f=c_f,
        c_g=c_g,
        c_h=c_h,
        rho=rho,
        sample_radii=tuple(float(r) for r in radii),
        fit_residual=f_residual,
        f_exponent=f_exponent,
        g_exponent=g_exponent,
        h_exponent=h_exponent,
        coercive=coercive,
        violation=violation,
        decay_rate=decay_rate,
        decay_gain=decay_gain,
    )
