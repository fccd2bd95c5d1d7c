from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from typing import Any

import numpy as np
import numpy.typing as npt

from ppt_discrimination.hermlin import HermOp
from ppt_discrimination.types import Cone, Mode


class CertificateForm(StrEnum):
    DUAL2 = "dual2"
    DUAL3 = "dual3"
    DUAL5 = "dual5"


class BuildPath(StrEnum):
    SDP = "sdp"
    LATTICE = "lattice_lp"
    WEYL = "weyl"


@dataclass(frozen=True)
class Measurement:
    """Outcome operators P_a; for unambiguous discrimination the last one is inconclusive"""

    operators: tuple[HermOp, ...]
    ppt_flag: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "operators", tuple(self.operators))

    @property
    def count(self) -> int:
        return len(self.operators)


@dataclass(frozen=True)
class DualCertificate:
    """Feasible dual point whose value (1/k)·Tr(Y) bounds the success probability

    ``y_offdiag[i][j]`` is the coefficient of ρ_i in the constraint of outcome j.
    """

    y: HermOp
    form: CertificateForm
    q_ops: tuple[HermOp, ...] | None = None
    y_offdiag: npt.NDArray[np.float64] | None = None
    shift: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "form", CertificateForm(self.form))
        if self.q_ops is not None:
            object.__setattr__(self, "q_ops", tuple(self.q_ops))
        if self.y_offdiag is not None:
            object.__setattr__(self, "y_offdiag", np.asarray(self.y_offdiag, dtype=np.float64))

    def shifted(self, amount: float) -> "DualCertificate":
        """Same certificate with Y replaced by Y + amount·1"""
        ident = HermOp.identity(self.y.dim_a, self.y.dim_b)
        return DualCertificate(
            self.y + amount * ident, self.form, self.q_ops, self.y_offdiag, self.shift + amount
        )


@dataclass(frozen=True)
class CertificateCheck:
    valid: bool
    bound: float | Fraction | None
    backend: str
    min_eigenvalues: tuple[float, ...] = ()
    failures: tuple[str, ...] = ()


@dataclass(frozen=True)
class MeasurementCheck:
    valid: bool
    success_prob: float
    per_state: tuple[float, ...]
    failures: tuple[str, ...] = ()


@dataclass
class SolveReport:
    instance: dict[str, Any]
    mode: Mode
    cone: Cone
    path: BuildPath
    primal_value: float
    dual_value: float
    measurement: Measurement
    certificate: DualCertificate
    per_state: tuple[float, ...]
    eq3_bound: float | None = None
    eq3_certificate: DualCertificate | None = None
    theorem1_bound: float | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return self.dual_value - self.primal_value
