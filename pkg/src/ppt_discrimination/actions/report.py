"""Machine readable reports

Operators are written as parallel ``re``/``im`` arrays and floats keep Python's shortest round-trip
representation, so a report re-verifies to the value it records.
"""

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np
from jsonschema.exceptions import ValidationError
from jsonschema.validators import Draft202012Validator

from ppt_discrimination import __version__
from ppt_discrimination.actions.exceptions import InvalidCertificateFile
from ppt_discrimination.constants import SCHEMA_CERTIFICATE, SCHEMA_VERSION
from ppt_discrimination.discrim import (
    BoundReport,
    DualCertificate,
    Measurement,
    SolveReport,
)
from ppt_discrimination.hermlin import HermOp
from ppt_discrimination.states import DiscriminationInstance
from ppt_discrimination.types import CertificateT, OperatorT
from ppt_discrimination.utils import check_schema_version, dump_json

__all__ = [
    "bound_report_to_dict",
    "certificate_from_dict",
    "certificate_to_dict",
    "load_report_file",
    "measurement_from_dict",
    "measurement_to_dict",
    "operator_from_dict",
    "operator_to_dict",
    "solve_report_to_dict",
    "write_report",
]

logger = logging.getLogger("report")


def operator_to_dict(op: HermOp) -> OperatorT:
    return {"re": op.matrix.real.tolist(), "im": op.matrix.imag.tolist()}


def operator_from_dict(data: OperatorT, inst: DiscriminationInstance) -> HermOp:
    re = np.asarray(data["re"], dtype=np.float64)
    im = np.asarray(data["im"], dtype=np.float64)
    shape = (inst.order, inst.order)
    if re.shape != shape or im.shape != shape:
        raise InvalidCertificateFile(
            f"Operator of shape {re.shape} does not act on {inst.dim_a}x{inst.dim_b}"
        )
    return HermOp(inst.dim_a, inst.dim_b, re + 1j * im)


def certificate_to_dict(cert: DualCertificate) -> dict[str, Any]:
    data: dict[str, Any] = {
        "form": str(cert.form),
        "y": operator_to_dict(cert.y),
        "shift": cert.shift,
    }
    if cert.q_ops is not None:
        data["q_ops"] = [operator_to_dict(q) for q in cert.q_ops]
    if cert.y_offdiag is not None:
        data["y_offdiag"] = cert.y_offdiag.tolist()
    return data


def certificate_from_dict(data: Any, inst: DiscriminationInstance) -> DualCertificate:
    """Validate and decode a certificate document against inst

    :raises InvalidCertificateFile: if the document breaks the schema or does not fit inst.
    """
    try:
        Draft202012Validator(SCHEMA_CERTIFICATE).validate(data)
    except ValidationError as e:
        raise InvalidCertificateFile(f"Certificate does not match the schema: {e.message}") from e
    cert: CertificateT = data
    q_ops = None
    if "q_ops" in cert:
        q_ops = tuple(operator_from_dict(q, inst) for q in cert["q_ops"])
    offdiag = np.asarray(cert["y_offdiag"], dtype=np.float64) if "y_offdiag" in cert else None
    return DualCertificate(operator_from_dict(cert["y"], inst), cert["form"], q_ops, offdiag)


def measurement_to_dict(m: Measurement) -> dict[str, Any]:
    return {"ppt": m.ppt_flag, "operators": [operator_to_dict(p) for p in m.operators]}


def measurement_from_dict(data: dict[str, Any], inst: DiscriminationInstance) -> Measurement:
    ops = tuple(operator_from_dict(p, inst) for p in data["operators"])
    return Measurement(ops, ppt_flag=bool(data.get("ppt", True)))


def _header() -> dict[str, Any]:
    return {"schema_version": SCHEMA_VERSION, "tool_version": __version__}


def solve_report_to_dict(report: SolveReport) -> dict[str, Any]:
    data = {
        **_header(),
        "kind": "solve",
        "problem": {
            "mode": str(report.mode),
            "cone": str(report.cone),
            "path": str(report.path),
            "instance": report.instance,
        },
        "optimal_value": report.primal_value,
        "dual_value": report.dual_value,
        "duality_gap": report.gap,
        "per_state": list(report.per_state),
        "theorem1_bound": report.theorem1_bound,
        "certificate": certificate_to_dict(report.certificate),
        "measurement": measurement_to_dict(report.measurement),
        "diagnostics": report.diagnostics,
    }
    if report.eq3_bound is not None and report.eq3_certificate is not None:
        data["eq3_bound"] = report.eq3_bound
        data["eq3_certificate"] = certificate_to_dict(report.eq3_certificate)
    return data


def bound_report_to_dict(report: BoundReport, inst: DiscriminationInstance) -> dict[str, Any]:
    return {
        **_header(),
        "kind": "bound",
        "problem": {"path": str(report.path), "instance": inst.summary()},
        "eq3_bound": report.bound,
        "theorem1_bound": report.theorem1_bound,
        "certificate": certificate_to_dict(report.certificate),
        "diagnostics": report.diagnostics,
    }


def write_report(path: Path, data: dict[str, Any]) -> None:
    path.write_text(dump_json(data), encoding="utf-8")
    logger.info("Report is written to %s", path)


def load_report_file(path: Path) -> dict[str, Any]:
    """Load a JSON report or bare certificate file

    :raises InvalidCertificateFile: if the file cannot be read, is not a mapping or has an
        unsupported schema version.
    """
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidCertificateFile(f"Cannot load {path}: {e}") from e
    if not isinstance(data, dict):
        raise InvalidCertificateFile(f"{path} does not contain a mapping")
    try:
        check_schema_version(data.get("schema_version"))
    except ValueError as e:
        raise InvalidCertificateFile(str(e)) from e
    return data
