import argparse
import logging
import re
from fractions import Fraction
from pathlib import Path
from typing import Final

from ppt_discrimination.actions.exceptions import InvalidCertificateFile
from ppt_discrimination.actions.report import (
    certificate_from_dict,
    load_report_file,
    measurement_from_dict,
)
from ppt_discrimination.actions.solve import add_set_argument, format_value
from ppt_discrimination.actions.statesets import resolve_state_set
from ppt_discrimination.constants import EXTRACTION_TOL
from ppt_discrimination.discrim import (
    CertificateForm,
    DualCertificate,
    Measurement,
    round_certificate,
    verify_certificate,
    verify_measurement,
)
from ppt_discrimination.discrim.fixtures import FIXTURE_NAMES, builtin_certificate
from ppt_discrimination.hermlin import HermOp
from ppt_discrimination.states import DiscriminationInstance

logger = logging.getLogger("cli")

SUBCMD_DESCRIPTION: Final = f"""\
Check that a dual certificate is feasible for a state set and print the bound it proves.
The certificate can be given as

* a report written by the solve or bound command (its embedded certificate is checked, and
  its measurement too when there is one),
* a certificate JSON file with fields form, y, q_ops and y_offdiag,
* a built-in closed-form certificate: {", ".join(f"fixture:{n}" for n in FIXTURE_NAMES)},
* a multiple of the identity: Y=identity or Y=identity/N.

    pptdiscrim certify --set yde4 --certificate fixture:thm3 --exact
    pptdiscrim certify --set pow2_3 --certificate fixture:thm5
    pptdiscrim certify --set yde4 --certificate Y=identity/4

With --exact every PSD condition is decided in rational arithmetic; entries must be dyadic
rationals, which --round enforces by rounding onto a fine grid and shifting Y.
"""

_IDENTITY: Final = re.compile(r"^Y=identity(?:/(\d+))?$")


def register_cli(subparser) -> None:
    certify_parser = subparser.add_parser(
        "certify",
        help="Verify a dual certificate (and optionally a measurement) for a state set.",
        description=SUBCMD_DESCRIPTION,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    add_set_argument(certify_parser)
    certify_parser.add_argument(
        "-C",
        "--certificate",
        metavar="SOURCE",
        required=True,
        help="Report file, certificate file, fixture:NAME or Y=identity[/N].",
    )
    certify_parser.add_argument(
        "-e",
        "--exact",
        action="store_true",
        help="Decide positivity exactly over the rationals.",
    )
    certify_parser.add_argument(
        "-r",
        "--round",
        action="store_true",
        dest="round_grid",
        help="Round the certificate onto a dyadic grid before checking.",
    )
    certify_parser.set_defaults(action=action)


def load_certificate(
    source: str, inst: DiscriminationInstance
) -> tuple[DualCertificate, Measurement | None]:
    """Resolve a --certificate value

    :raises InvalidCertificateFile: if the source is neither a known form nor a readable file.
    :raises MalformedCertificateError: for an unknown fixture or one that does not fit inst.
    """
    if source.startswith("fixture:"):
        return builtin_certificate(source.removeprefix("fixture:"), inst), None
    if match := _IDENTITY.match(source):
        denominator = int(match.group(1) or 1)
        if denominator == 0:
            raise InvalidCertificateFile("Y=identity/N needs a positive N")
        y = HermOp.identity(inst.dim_a, inst.dim_b) / denominator
        return DualCertificate(y, CertificateForm.DUAL3), None
    path = Path(source)
    if not path.exists():
        raise InvalidCertificateFile(f"Certificate file {source} does not exist.")
    data = load_report_file(path)
    if "certificate" not in data:
        return certificate_from_dict(data, inst), None
    measurement = None
    if "measurement" in data:
        measurement = measurement_from_dict(data["measurement"], inst)
    return certificate_from_dict(data["certificate"], inst), measurement


def _format_bound(bound: float | Fraction | None) -> str:
    if isinstance(bound, Fraction):
        return f"{bound} ({format_value(float(bound))})"
    return "n/a" if bound is None else format_value(bound)


def action(args) -> int:
    inst = resolve_state_set(args.state_set)
    cert, measurement = load_certificate(args.certificate, inst)
    if args.round_grid:
        cert = round_certificate(cert, inst)
    check = verify_certificate(cert, inst, exact=args.exact)
    print(f"certificate  {'valid' if check.valid else 'invalid'} ({check.backend} backend)")
    print(f"bound        {_format_bound(check.bound)}")
    for failure in check.failures:
        print(f"  {failure}")
    valid = check.valid
    if measurement is not None:
        m_check = verify_measurement(measurement, inst, tol=EXTRACTION_TOL)
        print(f"measurement  {'valid' if m_check.valid else 'invalid'}")
        print(f"success      {format_value(m_check.success_prob)}")
        for failure in m_check.failures:
            print(f"  {failure}")
        valid = valid and m_check.valid
    if not valid:
        logger.error("Verification failed for %s", inst.name)
    return 0 if valid else 1
