from ppt_discrimination.discrim.builders import (
    build_eq3_bound,
    build_min_error,
    build_unambiguous,
    extract_eq3,
    extract_min_error,
    extract_unambiguous,
)
from ppt_discrimination.discrim.certificates import (
    repair_certificate,
    theorem1_bound,
    theorem1_certificate,
    verify_certificate,
    verify_measurement,
)
from ppt_discrimination.discrim.exact import is_psd_exact, round_certificate, to_dyadic
from ppt_discrimination.discrim.exceptions import (
    DualityChainError,
    MalformedCertificateError,
    MeasurementSizeError,
    NonLatticeStateError,
    NonWeylStateError,
    NotDyadicError,
    VerificationError,
)
from ppt_discrimination.discrim.main import (
    BoundReport,
    eq3_bound,
    polish_measurement,
    select_path,
    solve_instance,
)
from ppt_discrimination.discrim.models import (
    BuildPath,
    CertificateCheck,
    CertificateForm,
    DualCertificate,
    Measurement,
    MeasurementCheck,
    SolveReport,
)
from ppt_discrimination.discrim.reductions import (
    extract_lattice,
    extract_weyl,
    lattice_eq3,
    lattice_eq3_closed_form,
    lattice_reduce,
    weyl_eq3,
    weyl_reduce,
)

__all__ = [
    "BoundReport",
    "BuildPath",
    "CertificateCheck",
    "CertificateForm",
    "DualCertificate",
    "DualityChainError",
    "MalformedCertificateError",
    "Measurement",
    "MeasurementCheck",
    "MeasurementSizeError",
    "NonLatticeStateError",
    "NonWeylStateError",
    "NotDyadicError",
    "SolveReport",
    "VerificationError",
    "build_eq3_bound",
    "build_min_error",
    "build_unambiguous",
    "eq3_bound",
    "extract_eq3",
    "extract_lattice",
    "extract_min_error",
    "extract_unambiguous",
    "extract_weyl",
    "is_psd_exact",
    "lattice_eq3",
    "lattice_eq3_closed_form",
    "lattice_reduce",
    "polish_measurement",
    "repair_certificate",
    "round_certificate",
    "select_path",
    "solve_instance",
    "theorem1_bound",
    "theorem1_certificate",
    "to_dyadic",
    "verify_certificate",
    "verify_measurement",
    "weyl_eq3",
    "weyl_reduce",
]
