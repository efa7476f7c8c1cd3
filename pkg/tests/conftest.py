import json

import numpy as np
import pytest
from click.testing import CliRunner

from app import create_app
from systems.control_system import linear_system
from systems.factory import ExampleFactory


@pytest.fixture(scope="session")
def app():
    return create_app()


@pytest.fixture(scope="function")
def runner():
    return CliRunner()


@pytest.fixture(scope="function")
def output_dir(tmp_path):
    directory = tmp_path / "results"
    directory.mkdir()
    return directory


@pytest.fixture(scope="function")
def write_config(tmp_path):
    """Writes an experiment document and returns its path."""

    def write(document, name="experiment.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document, indent=2))
        return str(path)

    return write


@pytest.fixture(scope="session")
def scalar_system():
    return ExampleFactory.get_system("scalar")


@pytest.fixture(scope="session")
def double_integrator():
    return linear_system(
        A=[[0.0, 1.0], [0.0, 0.0]],
        B=[[0.0], [1.0]],
        C=np.eye(2),
        name="double_integrator",
    )


@pytest.fixture(scope="session")
def example_systems():
    return {name: ExampleFactory.get_system(name) for name in ExampleFactory.names()}


def _controllable(A, B):
    blocks = [B]
    for _ in range(A.shape[0] - 1):
        blocks.append(A @ blocks[-1])
    return np.linalg.matrix_rank(np.hstack(blocks)) == A.shape[0]


def random_triples(count=20, seed=7, max_n=4):
    """Random controllable (A, B) with C = I, hence stabilizable and detectable."""
    rng = np.random.default_rng(seed)
    triples = []
    while len(triples) < count:
        n = int(rng.integers(1, max_n + 1))
        m = int(rng.integers(1, n + 1))
        A = rng.standard_normal((n, n)) / np.sqrt(n)
        B = rng.standard_normal((n, m))
        if _controllable(A, B):
            triples.append((A, B, np.eye(n)))
    return triples


@pytest.fixture(scope="session")
def stabilizable_triples():
    return random_triples()
