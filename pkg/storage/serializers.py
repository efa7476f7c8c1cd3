from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from hamiltonian.trajectory import Trajectory
from manifold.chart import ChartPoint, CoverageEntry, CoverageEstimate, ManifoldChart
from ocp.turnpike import TurnpikeEntry, TurnpikeReport


REPORT_COLUMNS = (
    "T",
    "converged",
    "residence",
    "first_exit",
    "last_entry",
    "cost",
    "residual",
    "iterations",
    "energy_drift",
)


def _optional(value) -> float:
    return float("nan") if value is None else float(value)


def _from_optional(value) -> Optional[float]:
    value = float(value)
    return None if np.isnan(value) else value


def chart_to_dict(chart: ManifoldChart) -> Dict[str, Any]:
    return {
        "kind": chart.kind,
        "n": chart.n,
        "tol": chart.tol,
        "local_radius": chart.local_radius,
        "horizon": chart.horizon,
        "settle_time": chart.settle_time,
        "spacing": chart.spacing(),
        "rejected": chart.rejected,
        "failed_seeds": chart.failed_seeds,
        "seeds": [
            {"xi": seed.xi, "eta": seed.eta, "residuals": list(seed.residuals)}
            for seed in chart.seeds
        ],
        "points": [
            {
                "x": point.x,
                "p": point.p,
                "H": point.H,
                "flow_check": point.flow_check,
                "tau": point.tau,
                "seed_index": point.seed_index,
            }
            for point in chart.global_points
        ],
    }


def chart_points_from_dict(payload: Mapping[str, Any]) -> Tuple[ChartPoint, ...]:
    return tuple(
        ChartPoint(
            x=np.asarray(item["x"], dtype=float),
            p=np.asarray(item["p"], dtype=float),
            H=float(item["H"]),
            flow_check=float(item["flow_check"]),
            tau=float(item["tau"]),
            seed_index=int(item["seed_index"]),
        )
        for item in payload["points"]
    )


def chart_points_columns(chart: ManifoldChart) -> Tuple[List[str], np.ndarray]:
    """x-projection point cloud with the costate and backward time of each point."""
    n = chart.n
    header = [f"x{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)] + ["tau", "seed_index"]
    if not chart.global_points:
        return header, np.zeros((0, len(header)))
    rows = np.array(
        [
            np.concatenate([point.x, point.p, [point.tau, point.seed_index]])
            for point in chart.global_points
        ]
    )
    return header, rows


def coverage_to_dict(estimate: CoverageEstimate) -> Dict[str, Any]:
    return {
        "kind": estimate.kind,
        "method": dict(estimate.method),
        "covered_fraction": estimate.covered_fraction(),
        "entries": [
            {
                "query": entry.query,
                "status": entry.status,
                "distance": entry.distance,
                "residual": entry.residual,
                "witnesses": list(entry.witnesses),
            }
            for entry in estimate.entries
        ],
    }


def coverage_from_dict(payload: Mapping[str, Any]) -> CoverageEstimate:
    entries = tuple(
        CoverageEntry(
            query=np.asarray(item["query"], dtype=float),
            status=item["status"],
            distance=float(item["distance"]),
            witnesses=tuple(np.asarray(w, dtype=float) for w in item["witnesses"]),
            residual=None if item["residual"] is None else float(item["residual"]),
        )
        for item in payload["entries"]
    )
    return CoverageEstimate(kind=payload["kind"], entries=entries, method=dict(payload["method"]))


def _entry_to_dict(entry: TurnpikeEntry) -> Dict[str, Any]:
    return {
        "T": entry.T,
        "converged": entry.converged,
        "residence": entry.residence,
        "first_exit": entry.first_exit,
        "last_entry": entry.last_entry,
        "intervals": [list(interval) for interval in entry.intervals],
        "cost": entry.cost,
        "residual": entry.residual,
        "iterations": entry.iterations,
        "energy_drift": entry.energy_drift,
        "error_type": entry.error_type,
        "error": entry.error,
    }


def report_to_dict(report: TurnpikeReport) -> Dict[str, Any]:
    return {
        "x0": report.x0,
        "xf": report.xf,
        "epsilon": report.epsilon,
        "norm": report.norm,
        "uniformity": report.uniformity,
        "uniformity_bound": report.uniformity_bound,
        "within_bound": report.within_bound,
        "all_converged": report.all_converged,
        "sufficient_condition": dict(report.sufficient_condition),
        "entries": [_entry_to_dict(entry) for entry in report.entries],
    }


def report_entries_from_dict(payload: Mapping[str, Any]) -> Tuple[TurnpikeEntry, ...]:
    return tuple(
        TurnpikeEntry(
            T=float(item["T"]),
            converged=bool(item["converged"]),
            residence=item["residence"],
            first_exit=item["first_exit"],
            last_entry=item["last_entry"],
            intervals=tuple(tuple(interval) for interval in item["intervals"]),
            cost=item["cost"],
            residual=item["residual"],
            iterations=item["iterations"],
            energy_drift=item["energy_drift"],
            error_type=item["error_type"],
            error=item["error"],
        )
        for item in payload["entries"]
    )


def report_rows(report: TurnpikeReport) -> Tuple[List[str], np.ndarray]:
    """One row per horizon; missing values of failed horizons are NaN."""
    rows = [
        [
            entry.T,
            1.0 if entry.converged else 0.0,
            _optional(entry.residence),
            _optional(entry.first_exit),
            _optional(entry.last_entry),
            _optional(entry.cost),
            _optional(entry.residual),
            _optional(entry.iterations),
            _optional(entry.energy_drift),
        ]
        for entry in report.entries
    ]
    return list(REPORT_COLUMNS), np.array(rows, dtype=float).reshape(-1, len(REPORT_COLUMNS))


def report_rows_to_entries(header: Sequence[str], rows: np.ndarray) -> Tuple[TurnpikeEntry, ...]:
    index = {name: k for k, name in enumerate(header)}
    entries = []
    for row in np.atleast_2d(rows):
        iterations = _from_optional(row[index["iterations"]])
        entries.append(
            TurnpikeEntry(
                T=float(row[index["T"]]),
                converged=bool(row[index["converged"]]),
                residence=_from_optional(row[index["residence"]]),
                first_exit=_from_optional(row[index["first_exit"]]),
                last_entry=_from_optional(row[index["last_entry"]]),
                cost=_from_optional(row[index["cost"]]),
                residual=_from_optional(row[index["residual"]]),
                iterations=None if iterations is None else int(iterations),
                energy_drift=_from_optional(row[index["energy_drift"]]),
            )
        )
    return tuple(entries)


def trajectory_columns(traj: Trajectory) -> Tuple[List[str], np.ndarray]:
    """
    Flattens a trajectory into t, x, p (when present), u, H (when present)
    and the accumulated cost (when present).
    """
    n = traj.n
    header = ["t"] + [f"x{i + 1}" for i in range(n)]
    columns = [traj.times[:, None], traj.x]
    if traj.p is not None:
        header += [f"p{i + 1}" for i in range(n)]
        columns.append(traj.p)
    inputs = traj.inputs
    if inputs is None and traj.input_map is not None:
        inputs = np.array([np.atleast_1d(traj.input_map(z)) for z in traj.states])
    if inputs is not None:
        inputs = np.asarray(inputs, dtype=float).reshape(traj.times.size, -1)
        header += [f"u{i + 1}" for i in range(inputs.shape[1])]
        columns.append(inputs)
    if traj.energy is not None:
        header.append("H")
        columns.append(traj.energy[:, None])
    if traj.cost is not None:
        header.append("cost")
        columns.append(traj.cost[:, None])
    return header, np.hstack(columns)


def trajectory_from_columns(header: Sequence[str], rows: np.ndarray) -> Trajectory:
    """Rebuilds a sampled trajectory (without dense output) from `trajectory_columns`."""
    rows = np.atleast_2d(rows)

    def block(prefix: str) -> Optional[np.ndarray]:
        picked = [k for k, name in enumerate(header) if name[0] == prefix and name[1:].isdigit()]
        return rows[:, picked] if picked else None

    x, p, u = block("x"), block("p"), block("u")
    states = x if p is None else np.hstack([x, p])
    return Trajectory(
        times=rows[:, header.index("t")],
        states=states,
        n=x.shape[1],
        inputs=u,
        energy=rows[:, header.index("H")] if "H" in header else None,
        cost=rows[:, header.index("cost")] if "cost" in header else None,
    )
