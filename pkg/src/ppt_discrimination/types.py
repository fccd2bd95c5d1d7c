from enum import StrEnum
from os import PathLike
from typing import Literal
from typing import NotRequired
from typing import TypedDict

import numpy as np
import numpy.typing as npt

FilePath = PathLike[str] | str

CMatrix = npt.NDArray[np.complex128]
RMatrix = npt.NDArray[np.float64]
CVector = npt.NDArray[np.complex128]


class Subsystem(StrEnum):
    A = "A"
    B = "B"


class Mode(StrEnum):
    MIN_ERROR = "min_error"
    UNAMBIGUOUS = "unambiguous"


class Cone(StrEnum):
    PPT = "ppt"
    PSD = "psd"


class OperatorT(TypedDict):
    re: list[list[float]]
    im: list[list[float]]


class BellTensorRecordT(TypedDict):
    kind: Literal["bell_tensor"]
    indices: list[int]


class GeneralizedBellRecordT(TypedDict):
    kind: Literal["generalized_bell"]
    d: int
    a: int
    b: int


class RawVectorRecordT(TypedDict):
    kind: Literal["raw_vector"]
    re: list[float]
    im: list[float]


StateRecordT = BellTensorRecordT | GeneralizedBellRecordT | RawVectorRecordT


class StateSetFileT(TypedDict):
    dim_a: int
    dim_b: int
    states: list[StateRecordT]
    schema_version: NotRequired[str]
    name: NotRequired[str]
    priors: NotRequired[list[float]]
    labels: NotRequired[list[str]]


class CertificateT(TypedDict):
    form: Literal["dual2", "dual3", "dual5"]
    y: OperatorT
    q_ops: NotRequired[list[OperatorT]]
    y_offdiag: NotRequired[list[list[float]]]
