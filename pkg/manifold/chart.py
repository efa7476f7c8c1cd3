from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from config.numerics_config import ManifoldConfig
from hamiltonian.hamiltonian_system import HamiltonianSystem


STABLE = "stable"
UNSTABLE = "unstable"

COVERED = "covered"
UNCOVERED = "uncovered"
BOUNDARY = "boundary"


@dataclass(frozen=True)
class ChartSeed:
    """A converged local-chart point: eta = theta(xi) in the chart's own splitting."""

    xi: np.ndarray
    eta: np.ndarray
    residuals: Tuple[float, ...]


@dataclass(frozen=True)
class ChartPoint:
    x: np.ndarray
    p: np.ndarray
    H: float
    flow_check: float
    tau: float
    seed_index: int

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.x, self.p])


@dataclass(frozen=True, eq=False)
class ManifoldChart:
    """
    Sampled stable manifold of `hsys`. An unstable chart is the stable chart of
    the time-reversed field, so `hsys` is already reversed for kind == "unstable"
    and the seed coordinates are the mirrored ones.
    """

    kind: str
    tol: float
    seeds: Tuple[ChartSeed, ...]
    global_points: Tuple[ChartPoint, ...]
    local_radius: float
    horizon: float
    settle_time: float
    hsys: HamiltonianSystem = field(repr=False)
    config: ManifoldConfig = field(repr=False)
    solver: Any = field(default=None, repr=False)
    rejected: int = 0
    failed_seeds: int = 0

    @property
    def n(self) -> int:
        return self.hsys.n

    @property
    def points_x(self) -> np.ndarray:
        if not self.global_points:
            return np.zeros((0, self.n))
        return np.array([point.x for point in self.global_points])

    @property
    def points_p(self) -> np.ndarray:
        if not self.global_points:
            return np.zeros((0, self.n))
        return np.array([point.p for point in self.global_points])

    @property
    def x_radius(self) -> float:
        """Largest |x| over the chart points."""
        points = self.points_x
        return float(np.max(np.linalg.norm(points, axis=1))) if len(points) else 0.0

    def tree(self) -> cKDTree:
        return cKDTree(self.points_x)

    def spacing(self) -> float:
        """
        Resolution of the x-projection: the larger of the median nearest-neighbour
        distance and the median distance from a point to the nearest other orbit.
        """
        points = self.points_x
        if len(points) < 2:
            return 0.0
        distances, _ = cKDTree(points).query(points, k=2)
        positive = distances[:, 1][distances[:, 1] > 0.0]
        along = float(np.median(positive)) if positive.size else 0.0

        orbits = np.array([point.seed_index for point in self.global_points])
        across = []
        for orbit in np.unique(orbits):
            mine = orbits == orbit
            if mine.all():
                break
            gaps, _ = cKDTree(points[~mine]).query(points[mine])
            across.append(gaps)
        if not across:
            return along
        return max(along, float(np.median(np.concatenate(across))))

    def graph(self, xi) -> np.ndarray:
        """theta(xi) by a fresh fixed-point solve."""
        return self.solver.solve(np.asarray(xi, dtype=float)).eta

    def to_xp(self, xi, eta) -> np.ndarray:
        return self.solver.frame.to_xp(xi, eta)


@dataclass(frozen=True)
class CoverageEntry:
    query: np.ndarray
    status: str
    distance: float
    witnesses: Tuple[np.ndarray, ...] = ()
    residual: Optional[float] = None

    @property
    def witness(self) -> Optional[np.ndarray]:
        return self.witnesses[0] if self.witnesses else None


@dataclass(frozen=True)
class CoverageEstimate:
    kind: str
    entries: Tuple[CoverageEntry, ...]
    method: Dict[str, float]

    def statuses(self) -> List[str]:
        return [entry.status for entry in self.entries]

    def covered_fraction(self) -> float:
        if not self.entries:
            return 0.0
        return sum(entry.status == COVERED for entry in self.entries) / len(self.entries)
