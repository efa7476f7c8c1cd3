import json
from dataclasses import replace

import pytest

from config.experiment_config import parse_experiment
from validators.factory import ValidatorFactory


def parse(document):
    return parse_experiment(json.dumps(document))


@pytest.fixture
def base_document():
    return {
        "system": {"example": "generator"},
        "turnpike": {"x0": [0.1, 0.0, 0.0], "xf": [0.0, 0.0, 0.0]},
        "simulate": {"x0": [0.1, 0.0, 0.0], "T": 5.0},
    }


def test_valid_configuration(base_document):
    validator = ValidatorFactory.get_validator("config", n=3)
    assert validator.is_valid(parse(base_document))
    assert validator.problems == []


def test_dimension_mismatch(base_document):
    base_document["turnpike"]["x0"] = [0.1, 0.0]
    base_document["manifold"] = {"query_points": [[1.0]]}
    validator = ValidatorFactory.get_validator("config", n=3)
    assert not validator.is_valid(parse(base_document))
    assert "turnpike.x0: expected length 3, got 2" in validator.problems
    assert any(problem.startswith("manifold.query_points") for problem in validator.problems)


def test_dimensions_unchecked_without_n(base_document):
    base_document["turnpike"]["x0"] = [0.1, 0.0]
    assert ValidatorFactory.get_validator("config").is_valid(parse(base_document))


@pytest.mark.parametrize(
    "horizons, message",
    [
        ([], "turnpike.horizons: at least one horizon is required"),
        ([10.0, 5.0], "turnpike.horizons: horizons must be positive and increasing"),
        ([0.0, 5.0], "turnpike.horizons: horizons must be positive and increasing"),
    ],
)
def test_bad_horizons(base_document, horizons, message):
    base_document["turnpike"]["horizons"] = horizons
    validator = ValidatorFactory.get_validator("config", n=3)
    assert not validator.is_valid(parse(base_document))
    assert message in validator.problems


def test_nonpositive_tolerances(base_document):
    config = parse(base_document)
    config = replace(config, integrator=replace(config.integrator, rtol=0.0),
                     shooting=replace(config.shooting, tol=-1.0))
    validator = ValidatorFactory.get_validator("config")
    assert not validator.is_valid(config)
    assert "integrator.rtol: must be positive" in validator.problems
    assert "shooting.tol: must be positive" in validator.problems


def test_missing_plugin(tmp_path):
    config = parse_experiment(json.dumps({"system": {"plugin": "toy.json"}}),
                              source=str(tmp_path / "experiment.json"))
    validator = ValidatorFactory.get_validator("config")
    assert not validator.is_valid(config)
    assert validator.problems[0].startswith("system.plugin: file not found")


def test_input_times_must_start_at_zero(base_document):
    base_document["simulate"] = {"x0": [0.1, 0.0, 0.0], "input": {"times": [0.5, 1.0], "values": [1.0, 0.0]}}
    validator = ValidatorFactory.get_validator("config", n=3)
    assert not validator.is_valid(parse(base_document))
    assert "simulate.input.times: must start at 0 and increase" in validator.problems


def test_simulation_horizon(base_document):
    base_document["simulate"]["T"] = 0.0
    validator = ValidatorFactory.get_validator("config", n=3)
    assert not validator.is_valid(parse(base_document))
    assert "simulate.T: must be positive" in validator.problems
