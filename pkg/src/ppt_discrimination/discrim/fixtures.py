"""Closed-form certificates and measurements for the built-in example sets

Every operator here is assembled from Bell projectors with dyadic entries, so the exact backend of
verify_certificate can check them without rounding.
"""

from typing import Final

import numpy as np

from ppt_discrimination.discrim.certificates import theorem1_certificate
from ppt_discrimination.discrim.exceptions import MalformedCertificateError
from ppt_discrimination.discrim.models import CertificateForm, DualCertificate, Measurement
from ppt_discrimination.hermlin import HermOp, bipartite_tensor
from ppt_discrimination.states import DiscriminationInstance, bell_density

__all__ = [
    "FIXTURE_NAMES",
    "LABEL_READINGS",
    "builtin_certificate",
    "thm1_certificate",
    "thm3_certificate",
    "thm4_measurement",
    "thm5_certificate",
    "thm6_certificate",
]

FIXTURE_NAMES: Final = ("thm1", "thm3", "thm5", "thm6")
LABEL_READINGS: Final = ("shift", "wrap")


def _psi(*indices: int) -> HermOp:
    return sum((bell_density(i) for i in indices[1:]), bell_density(indices[0]))


def _one() -> HermOp:
    return HermOp.identity(2, 2)


def _tensor(*ops: HermOp) -> HermOp:
    return bipartite_tensor(*ops)


def thm1_certificate(inst: DiscriminationInstance) -> DualCertificate:
    """Y = (max_j w_j / d)·1 for maximally entangled sets on C^d ⊗ C^d

    :raises MalformedCertificateError: if some state is not maximally entangled.
    """
    cert = theorem1_certificate(inst)
    if cert is None:
        raise MalformedCertificateError(
            f"The analytic certificate needs maximally entangled states; {inst.name} has others"
        )
    return cert


def thm3_certificate() -> DualCertificate:
    """Y = ¼·1⊗1 − ½(ψ₂⊗ψ₁) for yde4, bound 7/8"""
    ident = HermOp.identity(4, 4)
    y = ident * 0.25 - _tensor(_psi(2), _psi(1)) * 0.5
    return DualCertificate(y, CertificateForm.DUAL3)


def thm5_certificate(n: int) -> DualCertificate:
    """Y = (1/k)·1 − (2/k)·ψ₂^{⊗n} for pow2(n), k = 2ⁿ, bound 1 − 2/k²"""
    if n < 2:
        raise ValueError(f"The product certificate needs n >= 2, got {n}")
    k = 2**n
    y = HermOp.identity(k, k) / k - _tensor(*([_psi(2)] * n)) * (2 / k)
    return DualCertificate(y, CertificateForm.DUAL3)


def thm4_measurement() -> Measurement:
    """A PPT measurement reaching 7/8 on yde4 with ⟨P_i, ρ_i⟩ = 7/8 for every i"""
    q = _tensor(_one(), _psi(1, 2)) * 0.25
    r = _psi(0) * (7 / 8) + _psi(3) * (1 / 8)
    s = _psi(0) * (1 / 8) + _psi(3) * (7 / 8)
    ops = [q + _tensor(_psi(0) * (2 / 3) + _one() / 3, r)]
    for i in (1, 2, 3):
        rest = [j for j in (1, 2, 3) if j != i]
        ops.append(
            q
            + _tensor(_psi(0) / 3 + _psi(i), s)
            + _tensor(_psi(*rest) / 3, r)
        )
    return Measurement(tuple(ops), ppt_flag=True)


def _relabel(reading: str) -> dict[int, int]:
    match reading:
        case "shift":
            return {i: i - 1 for i in range(1, 5)}
        case "wrap":
            return {i: i % 4 for i in range(1, 5)}
    raise ValueError(f"Unknown label reading {reading!r}, expected one of {LABEL_READINGS}")


def thm6_certificate(reading: str = "shift") -> DualCertificate:
    """The printed unambiguous certificate for yde4 with 1-based Bell labels, y_ij = 1

    ``reading`` selects how the labels 1..4 map onto ψ₀..ψ₃. Feasibility is not assumed for
    either reading; verify before use.
    """
    label = _relabel(reading)

    def psi(*indices: int) -> HermOp:
        return _psi(*(label[i] for i in indices))

    one = _one()
    y = (
        _tensor(one - psi(1), one - psi(4) * 2.0)
        + _tensor(psi(1), psi(2, 3) * 3.0 + psi(4) - psi(1))
    ) * 0.25
    q_ops = (
        _tensor(one - psi(3), psi(3)) + _tensor(psi(3), psi(2, 3)),
        _tensor(psi(1, 2), psi(2)) + _tensor(psi(4), one - psi(2)),
        _tensor(psi(2, 4), psi(2)) + _tensor(psi(1), one - psi(2)),
        _tensor(psi(1, 4), psi(2)) + _tensor(psi(2), one - psi(2)),
        _tensor(psi(3), psi(2)),
    )
    offdiag = np.ones((4, 4)) - np.eye(4)
    return DualCertificate(y, CertificateForm.DUAL5, q_ops, offdiag)


def builtin_certificate(name: str, inst: DiscriminationInstance) -> DualCertificate:
    """Resolve ``thm1``, ``thm3``, ``thm5`` or ``thm6[-wrap]`` against inst

    :raises MalformedCertificateError: if the fixture does not exist or does not fit inst.
    """
    match name:
        case "thm1":
            return thm1_certificate(inst)
        case "thm3":
            return thm3_certificate()
        case "thm5":
            n = inst.dim_a.bit_length() - 1
            if inst.dim_a != 2**n or inst.dim_a != inst.dim_b or n < 2:
                raise MalformedCertificateError(
                    "The product certificate needs C^(2^n) x C^(2^n), "
                    f"got {inst.dim_a}x{inst.dim_b}"
                )
            return thm5_certificate(n)
        case "thm6" | "thm6-shift":
            return thm6_certificate("shift")
        case "thm6-wrap":
            return thm6_certificate("wrap")
    raise MalformedCertificateError(
        f"Unknown certificate fixture {name!r}. Known: {', '.join(FIXTURE_NAMES)}"
    )

