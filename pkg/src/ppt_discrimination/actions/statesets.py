import logging
from pathlib import Path
from typing import Any

import numpy as np
from jsonschema.exceptions import ValidationError
from jsonschema.validators import Draft202012Validator
from ruamel.yaml.error import YAMLError

from ppt_discrimination.actions.exceptions import InvalidStateSetFile
from ppt_discrimination.constants import SCHEMA_STATE_SET, TRACE_TOL
from ppt_discrimination.hermlin import HermOp
from ppt_discrimination.states import (
    DiscriminationInstance,
    GeneralizedBellSpec,
    InvalidInstanceError,
    InvalidStateError,
    LatticeVector,
    UnknownExampleError,
    example_set,
    generalized_bell_density,
    lattice_density,
    make_instance,
)
from ppt_discrimination.types import StateRecordT, StateSetFileT
from ppt_discrimination.utils import check_schema_version, load_yaml

__all__ = [
    "instance_from_document",
    "load_state_set",
    "resolve_state_set",
]

logger = logging.getLogger("statesets")


def _state_from_record(record: StateRecordT, dim_a: int, dim_b: int, index: int) -> HermOp:
    where = f"state {index + 1}"
    match record["kind"]:
        case "bell_tensor":
            v = LatticeVector.of(*record["indices"])
            if dim_a != 2**v.t or dim_b != 2**v.t:
                raise InvalidStateError(
                    f"{where}: {v.t} Bell pairs live on {2**v.t}x{2**v.t}, not {dim_a}x{dim_b}"
                )
            return lattice_density(v)
        case "generalized_bell":
            spec = GeneralizedBellSpec(record["d"], record["a"], record["b"])
            if dim_a != spec.d or dim_b != spec.d:
                raise InvalidStateError(
                    f"{where}: generalized Bell state on {spec.d}x{spec.d}, not {dim_a}x{dim_b}"
                )
            return generalized_bell_density(spec)
        case "raw_vector":
            re, im = record["re"], record["im"]
            if len(re) != dim_a * dim_b or len(im) != dim_a * dim_b:
                raise InvalidStateError(
                    f"{where}: expected {dim_a * dim_b} amplitudes, got {len(re)} and {len(im)}"
                )
            u = np.asarray(re, dtype=np.float64) + 1j * np.asarray(im, dtype=np.float64)
            norm = float(np.linalg.norm(u))
            if abs(norm - 1.0) > TRACE_TOL:
                raise InvalidStateError(f"{where}: vector has norm {norm!r}, expected 1")
            return HermOp.from_vector(u, dim_a, dim_b)
    raise InvalidStateError(f"{where}: unknown kind {record['kind']!r}")  # pragma: no cover


def instance_from_document(doc: Any, name: str = "custom") -> DiscriminationInstance:
    """Validate a loaded state set document and build its instance

    :raises InvalidStateSetFile: if the document breaks the schema or the states are invalid, with
        a message naming the offending state or pair.
    """
    validator = Draft202012Validator(SCHEMA_STATE_SET)
    try:
        validator.validate(doc)
    except ValidationError as e:
        raise InvalidStateSetFile(f"State set does not match the schema: {e.message}") from e
    data: StateSetFileT = doc
    try:
        check_schema_version(data.get("schema_version"))
    except ValueError as e:
        raise InvalidStateSetFile(str(e)) from e
    dim_a, dim_b = data["dim_a"], data["dim_b"]
    try:
        states = [
            _state_from_record(record, dim_a, dim_b, i) for i, record in enumerate(data["states"])
        ]
        return make_instance(
            states,
            priors=data.get("priors"),
            labels=data.get("labels"),
            name=data.get("name", name),
        )
    except (InvalidStateError, InvalidInstanceError) as e:
        raise InvalidStateSetFile(str(e)) from e


def load_state_set(path: Path) -> DiscriminationInstance:
    """Load a JSON or YAML state set file

    :raises InvalidStateSetFile: if the file cannot be read or its content is invalid.
    """
    try:
        doc = load_yaml(path)
    except (OSError, YAMLError) as e:
        raise InvalidStateSetFile(f"Cannot load state set file {path}: {e}") from e
    logger.debug("Loaded state set file %s", path)
    return instance_from_document(doc, name=path.stem)


def resolve_state_set(value: str) -> DiscriminationInstance:
    """A built-in example name or the path of a state set file"""
    try:
        return example_set(value)
    except UnknownExampleError:
        path = Path(value)
        if path.exists():
            return load_state_set(path)
        raise

