from typing import Any, Final

# Numerical tolerances. Every one of them is also accepted as a parameter by the operation using it.
HERMITIAN_RTOL: Final[float] = 1e-12
IMAG_TOL: Final[float] = 1e-10
PSD_TOL: Final[float] = 1e-9
TRACE_TOL: Final[float] = 1e-10
ORTHO_TOL: Final[float] = 1e-10
PRIOR_TOL: Final[float] = 1e-12
MAX_ENTANGLED_TOL: Final[float] = 1e-9
COMPLETENESS_TOL: Final[float] = 1e-8
CHAIN_TOL: Final[float] = 1e-7
# PSD tolerance for measurements read back from an interior-point iterate.
EXTRACTION_TOL: Final[float] = 1e-7

# Interior-point defaults
GAP_TOL: Final[float] = 1e-8
FEAS_TOL: Final[float] = 1e-8
MAX_ITER: Final[int] = 200
STEP_FRACTION: Final[float] = 0.98
SCHUR_REGULARIZATION: Final[float] = 1e-12
SCHUR_REGULARIZATION_MAX: Final[float] = 1e-6
# A stalled solve is still accepted as near optimal when its best iterate meets the gap and
# feasibility tolerances scaled by this factor.
RELAXED_TOL_FACTOR: Final[float] = 100.0
# Times a failed iteration is retried from the best iterate with a halved step fraction.
MAX_RECOVERIES: Final[int] = 4

# Problem size guards
MAX_MATRIX_ORDER: Final[int] = 4096
MAX_EMBEDDED_BLOCK_ORDER: Final[int] = 200
MAX_BLOCKS: Final[int] = 64
MAX_ROWS: Final[int] = 20000
MAX_DENSE_SCHUR_ROWS: Final[int] = 6000

# Largest denominator accepted when floating data is lifted to exact rationals.
MAX_DYADIC_DENOMINATOR: Final[int] = 2**20

ENV_GAP_TOL: Final = "PPTDISCRIM_TOL"

SCHEMA_VERSION: Final = "1.0"

_OPERATOR_SCHEMA: Final[dict[str, Any]] = {
    "type": "object",
    "properties": {
        "re": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "im": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
    },
    "required": ["re", "im"],
}

SCHEMA_STATE_SET: Final[dict[str, Any]] = {
    "$schema": "https://json-schema.org/draft/2020-12",
    "title": "Schema for a set of bipartite states to discriminate",
    "type": "object",
    "properties": {
        "schema_version": {"type": "string", "pattern": r"^[0-9]+\.[0-9]+$"},
        "name": {"type": "string"},
        "dim_a": {"type": "integer", "minimum": 1},
        "dim_b": {"type": "integer", "minimum": 1},
        "states": {
            "type": "array",
            "minItems": 1,
            "items": {
                "oneOf": [
                    {
                        "type": "object",
                        "properties": {
                            "kind": {"const": "bell_tensor"},
                            "indices": {
                                "type": "array",
                                "minItems": 1,
                                "items": {"type": "integer", "minimum": 0, "maximum": 3},
                            },
                        },
                        "required": ["kind", "indices"],
                        "additionalProperties": False,
                    },
                    {
                        "type": "object",
                        "properties": {
                            "kind": {"const": "generalized_bell"},
                            "d": {"type": "integer", "minimum": 2},
                            "a": {"type": "integer", "minimum": 0},
                            "b": {"type": "integer", "minimum": 0},
                        },
                        "required": ["kind", "d", "a", "b"],
                        "additionalProperties": False,
                    },
                    {
                        "type": "object",
                        "properties": {
                            "kind": {"const": "raw_vector"},
                            "re": {"type": "array", "minItems": 1, "items": {"type": "number"}},
                            "im": {"type": "array", "minItems": 1, "items": {"type": "number"}},
                        },
                        "required": ["kind", "re", "im"],
                        "additionalProperties": False,
                    },
                ]
            },
        },
        "priors": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "labels": {"type": "array", "items": {"type": "string"}},
    },
    "additionalProperties": False,
    "required": ["dim_a", "dim_b", "states"],
}

SCHEMA_CERTIFICATE: Final[dict[str, Any]] = {
    "$schema": "https://json-schema.org/draft/2020-12",
    "title": "Schema for a dual certificate",
    "type": "object",
    "properties": {
        "form": {"enum": ["dual2", "dual3", "dual5"]},
        "y": _OPERATOR_SCHEMA,
        "q_ops": {"type": "array", "items": _OPERATOR_SCHEMA},
        "y_offdiag": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}},
        },
    },
    "required": ["form", "y"],
}
