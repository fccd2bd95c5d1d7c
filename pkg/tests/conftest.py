from pathlib import Path

import numpy as np
import pytest

from ppt_discrimination.constants import ENV_GAP_TOL
from ppt_discrimination.states import DiscriminationInstance, example_set

from tests.utils import write_json


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Tests never pick up a tolerance from the developer's shell"""
    monkeypatch.delenv(ENV_GAP_TOL, raising=False)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20120901)


@pytest.fixture(scope="session")
def yde4() -> DiscriminationInstance:
    return example_set("yde4")


@pytest.fixture(scope="session")
def bell_basis() -> DiscriminationInstance:
    return example_set("bell_basis")


@pytest.fixture
def state_set_doc() -> dict:
    """Two Bell states and a product of Bell states written with every record kind"""
    return {
        "schema_version": "1.0",
        "name": "mixed-kinds",
        "dim_a": 2,
        "dim_b": 2,
        "states": [
            {"kind": "bell_tensor", "indices": [0]},
            {"kind": "generalized_bell", "d": 2, "a": 1, "b": 0},
            {
                "kind": "raw_vector",
                "re": [0.0, 0.7071067811865476, 0.7071067811865476, 0.0],
                "im": [0.0, 0.0, 0.0, 0.0],
            },
        ],
    }


@pytest.fixture
def write_state_set(tmp_path):
    """Write a state set document to a JSON file under tmp_path"""

    def _write(doc: dict, name: str = "states.json") -> Path:
        return write_json(tmp_path / name, doc)

    return _write
