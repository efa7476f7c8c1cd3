from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple, Union


def default_growth_radii() -> Tuple[float, ...]:
    return (10.0, 20.0, 40.0, 80.0, 160.0, 320.0)


def default_seed_radii() -> Tuple[float, ...]:
    return (0.025, 0.05, 0.1)


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-9
    atol: float = 1e-9
    escape_norm: float = 1e8
    # step underflow threshold, relative to the span
    min_step_factor: float = 1e-14
    conservation_tol: float = 1e-6
    samples_per_unit: int = 20


@dataclass(frozen=True)
class ManifoldConfig:
    tol: float = 1e-10
    max_iter: int = 60
    nodes_per_panel: int = 8
    panel_length: float = 0.5
    horizon: Optional[float] = None
    min_horizon: float = 5.0
    max_horizon: float = 60.0
    seed_radii: Tuple[float, ...] = field(default_factory=default_seed_radii)
    seeds_per_shell: int = 8
    seed: int = 0
    extend_time: float = 6.0
    bound_radius: float = 10.0
    arc_spacing: float = 0.02
    energy_tol: float = 1e-6
    check_tol: float = 1e-3
    check_rtol: float = 1e-11
    settle_time: Optional[float] = None
    snap_factor: float = 10.0
    boundary_factor: float = 3.0
    k_nearest: int = 6
    newton_tol: float = 1e-9
    newton_max_iter: int = 20
    max_candidates: int = 3
    branch_gap: float = 0.5


@dataclass(frozen=True)
class ShootingConfig:
    tol: float = 1e-8
    max_iter: int = 30
    max_halvings: int = 12
    segment_time: float = 2.0
    fd_step: float = 1e-7
    # boundary-data continuation after a failed direct solve
    continuation: bool = True
    continuation_step: float = 0.125
    continuation_min_step: float = 1.0 / 256.0
    rtol: float = 1e-11
    atol: float = 1e-11
    samples_per_unit: int = 50


@dataclass(frozen=True)
class TurnpikeConfig:
    epsilon: float = 0.1
    uniformity_bound: float = 1.5
    horizons: Tuple[float, ...] = (10.0, 20.0, 40.0)
    warm_start: bool = True


@dataclass(frozen=True)
class GrowthConfig:
    radii: Tuple[float, ...] = field(default_factory=default_growth_radii)
    samples_per_shell: int = 200
    seed: int = 0
    decay_horizon: float = 20.0
    decay_radius: float = 0.5
    decay_samples: int = 8


@dataclass(frozen=True)
class SystemCheckConfig:
    sample_count: int = 20
    sample_radius: float = 1.0
    fd_step: float = 1e-6
    jacobian_rtol: float = 1e-5
    equilibrium_tol: float = 1e-10
    seed: int = 0


StageConfigType = Union[
    IntegratorConfig,
    ManifoldConfig,
    ShootingConfig,
    TurnpikeConfig,
    GrowthConfig,
    SystemCheckConfig,
]


class NumericsConfig:
    CONFIGS: Dict[str, StageConfigType] = {
        "integrator": IntegratorConfig(),
        "manifold": ManifoldConfig(),
        "shooting": ShootingConfig(),
        "turnpike": TurnpikeConfig(),
        "growth": GrowthConfig(),
        "system_check": SystemCheckConfig(),
    }

    @classmethod
    def get_config(cls, stage: str, **overrides) -> StageConfigType:
        try:
            config = cls.CONFIGS[stage.lower()]
        except KeyError:
            raise ValueError(f"Unknown numerics stage: {stage}") from None
        return replace(config, **overrides) if overrides else config

    @classmethod
    def stages(cls) -> Tuple[str, ...]:
        return tuple(cls.CONFIGS)
