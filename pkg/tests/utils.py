import json
from pathlib import Path
from typing import Any

import numpy as np
from scipy.stats import unitary_group

from ppt_discrimination.cli import entry_point
from ppt_discrimination.hermlin import HermOp
from ppt_discrimination.states import (
    DiscriminationInstance,
    GeneralizedBellSpec,
    generalized_bell_vector,
    make_instance,
)


def random_hermitian(rng: np.random.Generator, dim_a: int, dim_b: int) -> HermOp:
    n = dim_a * dim_b
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return HermOp.hermitian_part(m, dim_a, dim_b)


def random_psd(rng: np.random.Generator, dim_a: int, dim_b: int) -> HermOp:
    n = dim_a * dim_b
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return HermOp.hermitian_part(g @ g.conj().T, dim_a, dim_b)


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    return unitary_group.rvs(d, random_state=rng)


def rotated_maximally_entangled(
    rng: np.random.Generator,
    d: int,
    pairs: list[tuple[int, int]],
    priors: list[float] | None = None,
) -> DiscriminationInstance:
    """Generalized Bell states moved by a random local unitary U ⊗ V"""
    local = np.kron(random_unitary(rng, d), random_unitary(rng, d))
    states = [
        HermOp.from_vector(local @ generalized_bell_vector(GeneralizedBellSpec(d, a, b)), d, d)
        for a, b in pairs
    ]
    return make_instance(states, priors=priors, name=f"rotated-{d}")


def write_json(path: Path, data: Any) -> Path:
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def read_json(path: Path) -> Any:
    return json.loads(path.read_text(encoding="utf-8"))


def run_cli(monkeypatch, *args: str) -> int:
    monkeypatch.setattr("sys.argv", ["pptdiscrim", *args])
    return entry_point()
