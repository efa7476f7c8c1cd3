import json
import os
import re
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from config.app_config import AppConfig
from config.numerics_config import (
    GrowthConfig,
    IntegratorConfig,
    ManifoldConfig,
    NumericsConfig,
    ShootingConfig,
    SystemCheckConfig,
    TurnpikeConfig,
)
from extensions.errors import ConfigError, HamflowError
from systems.control_system import ControlAffineSystem, linear_system
from systems.examples import quadratic_penalty
from systems.expression import load_plugin_system
from systems.factory import ExampleFactory


FEEDBACKS = ("zero", "backstepping", "manifold", "lqr")
FORMATS = ("json", "csv")

TOP_LEVEL = (
    "system",
    "penalty",
    "integrator",
    "manifold",
    "shooting",
    "turnpike",
    "growth",
    "system_check",
    "simulate",
    "output",
)


@dataclass(frozen=True)
class SystemSpec:
    kind: str
    name: Optional[str] = None
    params: Dict[str, Any] = field(default_factory=dict)
    plugin: Optional[str] = None
    A: Optional[np.ndarray] = None
    B: Optional[np.ndarray] = None
    C: Optional[np.ndarray] = None


@dataclass(frozen=True)
class ManifoldRun:
    unstable: bool = False
    query_points: Tuple[Tuple[float, ...], ...] = ()
    bounds: Union[None, float, Tuple[Tuple[float, float], ...]] = None


@dataclass(frozen=True)
class TurnpikeRun:
    x0: Optional[Tuple[float, ...]] = None
    xf: Optional[Tuple[float, ...]] = None
    check_coverage: bool = False


@dataclass(frozen=True)
class SimulationRun:
    x0: Optional[Tuple[float, ...]] = None
    T: float = 10.0
    feedback: Optional[str] = "zero"
    input_times: Optional[Tuple[float, ...]] = None
    input_values: Optional[Tuple[Tuple[float, ...], ...]] = None
    tail_tol: float = 1e-10


@dataclass(frozen=True)
class OutputSpec:
    directory: str = AppConfig.OUTPUT_DIR
    formats: Tuple[str, ...] = FORMATS


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment document: the system, stage numerics and run sections."""

    source: Optional[str]
    system: SystemSpec
    penalty: Optional[np.ndarray] = None
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    manifold: ManifoldConfig = field(default_factory=ManifoldConfig)
    shooting: ShootingConfig = field(default_factory=ShootingConfig)
    turnpike: TurnpikeConfig = field(default_factory=TurnpikeConfig)
    growth: GrowthConfig = field(default_factory=GrowthConfig)
    system_check: SystemCheckConfig = field(default_factory=SystemCheckConfig)
    manifold_run: ManifoldRun = field(default_factory=ManifoldRun)
    turnpike_run: TurnpikeRun = field(default_factory=TurnpikeRun)
    simulation: SimulationRun = field(default_factory=SimulationRun)
    output: OutputSpec = field(default_factory=OutputSpec)

    def build_system(self) -> ControlAffineSystem:
        """
        Raises:
            ConfigError: If the system section does not describe a valid system.
        """
        spec = self.system
        try:
            if spec.kind == "example":
                sys = ExampleFactory.get_system(spec.name, **spec.params)
            elif spec.kind == "plugin":
                sys = load_plugin_system(spec.plugin)
            else:
                sys = linear_system(spec.A, spec.B, spec.C)
        except ConfigError:
            raise
        except (HamflowError, ValueError, TypeError) as exc:
            raise ConfigError(str(exc), field="system") from exc

        if self.penalty is not None:
            weights = self.penalty
            size = weights.shape[0]
            if size != sys.n:
                raise ConfigError(
                    f"penalty has dimension {size}, system has n={sys.n}", field="penalty"
                )
            sys = sys.with_penalty(*quadratic_penalty(weights))
        return sys

    def with_tolerance(self, tol: float) -> "ExperimentConfig":
        """--tol: one tolerance for the integrator, manifold and shooting stages."""
        if not tol > 0:
            raise ConfigError("tolerance must be positive", field="--tol")
        return replace(
            self,
            integrator=replace(self.integrator, rtol=tol, atol=tol),
            manifold=replace(self.manifold, tol=tol),
            shooting=replace(self.shooting, tol=tol),
        )

    def with_seed_count(self, count: int) -> "ExperimentConfig":
        if count < 1:
            raise ConfigError("seed count must be positive", field="--seed-count")
        return replace(self, manifold=replace(self.manifold, seeds_per_shell=int(count)))


class _Document:
    """JSON text plus the lookups needed to report line numbers."""

    def __init__(self, text: str, source: Optional[str]) -> None:
        self.text = text
        self.source = source

    def line_of(self, path: str) -> Optional[int]:
        key = path.split(".")[-1].split("[")[0]
        match = re.search(r'"%s"\s*:' % re.escape(key), self.text)
        if match is None:
            return None
        return self.text.count("\n", 0, match.start()) + 1

    def error(self, message: str, path: str) -> ConfigError:
        return ConfigError(message, field=path, line=self.line_of(path))


def _number(doc: _Document, value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise doc.error(f"expected a number, got {type(value).__name__}", path)
    return float(value)


def _integer(doc: _Document, value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise doc.error(f"expected an integer, got {type(value).__name__}", path)
    return value


def _boolean(doc: _Document, value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise doc.error(f"expected true or false, got {type(value).__name__}", path)
    return value


def _vector(doc: _Document, value: Any, path: str) -> Tuple[float, ...]:
    if not isinstance(value, list):
        raise doc.error("expected a list of numbers", path)
    return tuple(_number(doc, item, f"{path}[{k}]") for k, item in enumerate(value))


def _matrix(doc: _Document, value: Any, path: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise doc.error("expected a nonempty list of rows", path)
    if not isinstance(value[0], list):
        return np.atleast_2d(np.array(_vector(doc, value, path)))
    rows = [_vector(doc, row, f"{path}[{k}]") for k, row in enumerate(value)]
    if len({len(row) for row in rows}) != 1:
        raise doc.error("rows have different lengths", path)
    return np.array(rows)


def _object(doc: _Document, value: Any, path: str) -> Mapping[str, Any]:
    if not isinstance(value, dict):
        raise doc.error("expected an object", path)
    return value


def _unknown(doc: _Document, section: Mapping[str, Any], allowed, path: str) -> None:
    extra = sorted(set(section) - set(allowed))
    if extra:
        raise doc.error(f"unknown key(s): {', '.join(extra)}", f"{path}.{extra[0]}")


def _stage(doc: _Document, section: Mapping[str, Any], default, path: str, skip=()):
    """Overrides of a numerics dataclass, typed by its default values."""
    known = {item.name: item for item in fields(default)}
    _unknown(doc, {k: v for k, v in section.items() if k not in skip}, known, path)
    overrides = {}
    for key, value in section.items():
        if key in skip:
            continue
        where = f"{path}.{key}"
        current = getattr(default, key)
        if value is None and current is None:
            overrides[key] = None
        elif isinstance(current, bool):
            overrides[key] = _boolean(doc, value, where)
        elif isinstance(current, int):
            overrides[key] = _integer(doc, value, where)
        elif isinstance(current, tuple):
            overrides[key] = _vector(doc, value, where)
        else:
            overrides[key] = _number(doc, value, where)
    return replace(default, **overrides)


def _system(doc: _Document, section: Mapping[str, Any], base_dir: str) -> SystemSpec:
    choices = [key for key in ("example", "plugin", "linear") if key in section]
    if len(choices) != 1:
        raise doc.error("exactly one of example, plugin or linear is required", "system")
    _unknown(doc, section, ("example", "plugin", "linear", "params"), "system")
    kind = choices[0]

    if kind == "example":
        name = section["example"]
        if not isinstance(name, str):
            raise doc.error("expected an example name", "system.example")
        if name.lower() not in ExampleFactory.names():
            raise doc.error(
                f"unknown example {name} (expected one of {', '.join(ExampleFactory.names())})",
                "system.example",
            )
        params = dict(_object(doc, section.get("params", {}), "system.params"))
        accepted = ExampleFactory.parameters(name)
        for key, value in params.items():
            if key not in accepted or key == "penalty":
                raise doc.error(f"example {name} does not take {key}", f"system.params.{key}")
            if isinstance(value, list):
                params[key] = np.asarray(_vector(doc, value, f"system.params.{key}"))
            else:
                params[key] = _number(doc, value, f"system.params.{key}")
        return SystemSpec(kind=kind, name=name.lower(), params=params)

    if kind == "plugin":
        path = section["plugin"]
        if not isinstance(path, str):
            raise doc.error("expected a file path", "system.plugin")
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        return SystemSpec(kind=kind, plugin=path)

    linear = _object(doc, section["linear"], "system.linear")
    _unknown(doc, linear, ("A", "B", "C"), "system.linear")
    for key in ("A", "B", "C"):
        if key not in linear:
            raise doc.error("missing matrix", f"system.linear.{key}")
    return SystemSpec(
        kind=kind,
        A=_matrix(doc, linear["A"], "system.linear.A"),
        B=_matrix(doc, linear["B"], "system.linear.B"),
        C=_matrix(doc, linear["C"], "system.linear.C"),
    )


def _penalty(doc: _Document, value: Any) -> Optional[np.ndarray]:
    if value is None:
        return None
    section = _object(doc, value, "penalty")
    _unknown(doc, section, ("weights", "matrix"), "penalty")
    if ("weights" in section) == ("matrix" in section):
        raise doc.error("exactly one of weights or matrix is required", "penalty")
    if "weights" in section:
        return np.diag(_vector(doc, section["weights"], "penalty.weights"))
    matrix = _matrix(doc, section["matrix"], "penalty.matrix")
    if matrix.shape[0] != matrix.shape[1]:
        raise doc.error("matrix must be square", "penalty.matrix")
    return matrix


def _bounds(doc: _Document, value: Any):
    if value is None:
        return None
    if not isinstance(value, list):
        return _number(doc, value, "manifold.bounds")
    pairs = []
    for k, pair in enumerate(value):
        where = f"manifold.bounds[{k}]"
        bound = _vector(doc, pair, where)
        if len(bound) != 2 or bound[0] >= bound[1]:
            raise doc.error("expected a [low, high] pair with low < high", where)
        pairs.append(bound)
    return tuple(pairs)


def _manifold(doc: _Document, section: Mapping[str, Any]) -> Tuple[ManifoldConfig, ManifoldRun]:
    run_keys = ("unstable", "query_points", "bounds")
    config = _stage(doc, section, NumericsConfig.get_config("manifold"), "manifold", skip=run_keys)
    queries = section.get("query_points", [])
    if not isinstance(queries, list):
        raise doc.error("expected a list of points", "manifold.query_points")
    points = tuple(
        _vector(doc, q, f"manifold.query_points[{k}]") if isinstance(q, list)
        else (_number(doc, q, f"manifold.query_points[{k}]"),)
        for k, q in enumerate(queries)
    )
    run = ManifoldRun(
        unstable=_boolean(doc, section.get("unstable", False), "manifold.unstable"),
        query_points=points,
        bounds=_bounds(doc, section.get("bounds")),
    )
    return config, run


def _turnpike(doc: _Document, section: Mapping[str, Any]) -> Tuple[TurnpikeConfig, TurnpikeRun]:
    run_keys = ("x0", "xf", "check_coverage")
    config = _stage(doc, section, NumericsConfig.get_config("turnpike"), "turnpike", skip=run_keys)
    run = TurnpikeRun(
        x0=_vector(doc, section["x0"], "turnpike.x0") if "x0" in section else None,
        xf=_vector(doc, section["xf"], "turnpike.xf") if "xf" in section else None,
        check_coverage=_boolean(
            doc, section.get("check_coverage", False), "turnpike.check_coverage"
        ),
    )
    return config, run


def _simulation(doc: _Document, section: Mapping[str, Any]) -> SimulationRun:
    _unknown(doc, section, ("x0", "T", "feedback", "input", "tail_tol"), "simulate")
    feedback = section.get("feedback", None if "input" in section else "zero")
    if feedback is not None and feedback not in FEEDBACKS:
        raise doc.error(f"feedback must be one of {', '.join(FEEDBACKS)}", "simulate.feedback")
    times = values = None
    if "input" in section:
        if feedback is not None:
            raise doc.error("give either feedback or input, not both", "simulate.input")
        signal = _object(doc, section["input"], "simulate.input")
        _unknown(doc, signal, ("times", "values"), "simulate.input")
        times = _vector(doc, signal.get("times"), "simulate.input.times")
        raw = signal.get("values")
        if not isinstance(raw, list) or len(raw) != len(times):
            raise doc.error("one value per breakpoint is required", "simulate.input.values")
        values = tuple(
            _vector(doc, v, f"simulate.input.values[{k}]") if isinstance(v, list)
            else (_number(doc, v, f"simulate.input.values[{k}]"),)
            for k, v in enumerate(raw)
        )
    return SimulationRun(
        x0=_vector(doc, section["x0"], "simulate.x0") if "x0" in section else None,
        T=_number(doc, section.get("T", 10.0), "simulate.T"),
        feedback=feedback,
        input_times=times,
        input_values=values,
        tail_tol=_number(doc, section.get("tail_tol", 1e-10), "simulate.tail_tol"),
    )


def _output(doc: _Document, section: Mapping[str, Any]) -> OutputSpec:
    _unknown(doc, section, ("dir", "formats"), "output")
    directory = section.get("dir", AppConfig.OUTPUT_DIR)
    if not isinstance(directory, str):
        raise doc.error("expected a directory path", "output.dir")
    formats = section.get("formats", list(FORMATS))
    if not isinstance(formats, list) or any(item not in FORMATS for item in formats):
        raise doc.error(f"formats must be a subset of {', '.join(FORMATS)}", "output.formats")
    return OutputSpec(directory=directory, formats=tuple(formats))


def parse_experiment(text: str, source: Optional[str] = None) -> ExperimentConfig:
    """
    Parses an experiment document.

    Args:
        text: JSON text.
        source: Path of the document, used to resolve relative plugin paths.

    Returns:
        ExperimentConfig: The parsed configuration.

    Raises:
        ConfigError: With the dotted field path and the line number when known.
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as error:
        raise ConfigError(error.msg, field="config", line=error.lineno) from None
    doc = _Document(text, source)
    document = _object(doc, document, "config")
    _unknown(doc, document, TOP_LEVEL, "config")
    if "system" not in document:
        raise doc.error("missing section", "system")

    base_dir = os.path.dirname(os.path.abspath(source)) if source else os.getcwd()
    manifold, manifold_run = _manifold(doc, _object(doc, document.get("manifold", {}), "manifold"))
    turnpike, turnpike_run = _turnpike(doc, _object(doc, document.get("turnpike", {}), "turnpike"))
    sections: Dict[str, Any] = {
        name: _stage(doc, _object(doc, document.get(name, {}), name),
                     NumericsConfig.get_config(name), name)
        for name in ("integrator", "shooting", "growth", "system_check")
    }
    return ExperimentConfig(
        source=source,
        system=_system(doc, _object(doc, document["system"], "system"), base_dir),
        penalty=_penalty(doc, document.get("penalty")),
        manifold=manifold,
        turnpike=turnpike,
        manifold_run=manifold_run,
        turnpike_run=turnpike_run,
        simulation=_simulation(doc, _object(doc, document.get("simulate", {}), "simulate")),
        output=_output(doc, _object(doc, document.get("output", {}), "output")),
        **sections,
    )


def load_experiment(path: Union[str, os.PathLike]) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as error:
        raise ConfigError(f"cannot read {path}: {error.strerror}", field="--config") from None
    return parse_experiment(text, source=str(path))

