"""Exact verification of dual certificates over the rationals

Floating entries are lifted to dyadic rationals with bounded denominators; positive
semidefiniteness is then decided by LDLᵀ elimination with maximal-diagonal pivoting.
"""

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass
from fractions import Fraction
from typing import Self

import numpy as np

from ppt_discrimination.constants import MAX_DYADIC_DENOMINATOR
from ppt_discrimination.discrim.certificates import (
    certificate_conditions,
    evaluate_condition,
    psd_part,
)
from ppt_discrimination.discrim.exceptions import NotDyadicError
from ppt_discrimination.discrim.models import CertificateCheck, DualCertificate
from ppt_discrimination.hermlin import HermOp, NotHermitianError, min_eigenvalue
from ppt_discrimination.states import DiscriminationInstance

__all__ = [
    "ExactMatrix",
    "is_psd_exact",
    "round_certificate",
    "to_dyadic",
    "verify_certificate_exact",
]

logger = logging.getLogger("discrim")

ZERO = Fraction(0)

Entries = dict[tuple[int, int], Fraction]


def to_dyadic(x: float, max_denominator: int = MAX_DYADIC_DENOMINATOR) -> Fraction:
    """The float x as an exact fraction

    :raises NotDyadicError: if x is not finite or its denominator exceeds max_denominator.
    """
    try:
        f = Fraction(float(x))
    except (ValueError, OverflowError) as e:
        raise NotDyadicError(f"{x!r} is not a finite number") from e
    if f.denominator > max_denominator:
        raise NotDyadicError(f"{x!r} is not a multiple of 1/{max_denominator}")
    return f


def _lift(values: np.ndarray) -> Entries:
    return {(int(p), int(q)): to_dyadic(values[p, q]) for p, q in zip(*np.nonzero(values))}


@dataclass
class ExactMatrix:
    """Hermitian matrix with rational real and imaginary parts, stored sparsely"""

    order: int
    re: Entries
    im: Entries

    @classmethod
    def from_operator(cls, op: HermOp) -> Self:
        m = op.matrix
        out = cls(op.order, _lift(m.real), _lift(m.imag))
        for (p, q), v in out.re.items():
            if out.re.get((q, p), ZERO) != v:
                raise NotHermitianError(f"Entry ({p}, {q}) has no exactly symmetric partner")
        for (p, q), v in out.im.items():
            if out.im.get((q, p), ZERO) != -v:
                raise NotHermitianError(f"Entry ({p}, {q}) has no exactly conjugate partner")
        return out

    @classmethod
    def combine(cls, order: int, terms: Iterable[tuple[Fraction, "ExactMatrix"]]) -> Self:
        re: Entries = {}
        im: Entries = {}
        for coeff, m in terms:
            if not coeff:
                continue
            for target, source in ((re, m.re), (im, m.im)):
                for key, v in source.items():
                    nv = target.get(key, ZERO) + coeff * v
                    if nv:
                        target[key] = nv
                    else:
                        target.pop(key, None)
        return cls(order, re, im)

    def partial_transpose(self, dim_a: int, dim_b: int) -> "ExactMatrix":
        def move(key: tuple[int, int]) -> tuple[int, int]:
            i, k = divmod(key[0], dim_b)
            j, l_ = divmod(key[1], dim_b)
            return j * dim_b + k, i * dim_b + l_

        return ExactMatrix(
            self.order,
            {move(key): v for key, v in self.re.items()},
            {move(key): v for key, v in self.im.items()},
        )

    @property
    def trace(self) -> Fraction:
        return sum((self.re.get((p, p), ZERO) for p in range(self.order)), ZERO)

    def symmetric_rows(self) -> dict[int, dict[int, Fraction]]:
        """Rows of the real symmetric form; [[Re, −Im], [Im, Re]] for complex entries"""
        n = self.order
        size = 2 * n if self.im else n
        rows: dict[int, dict[int, Fraction]] = {i: {} for i in range(size)}
        for (p, q), v in self.re.items():
            rows[p][q] = v
            if self.im:
                rows[p + n][q + n] = v
        for (p, q), v in self.im.items():
            rows[p + n][q] = v
            rows[p][q + n] = -v
        return rows


def is_psd_exact(rows: dict[int, dict[int, Fraction]]) -> bool:
    """Decide positive semidefiniteness of a symmetric rational matrix given by its rows

    Eliminates the largest remaining diagonal entry each step; a negative diagonal, or a zero
    diagonal with a nonzero entry in its row, proves the matrix indefinite.
    """
    active = {i: dict(r) for i, r in rows.items()}
    while active:
        diag = {i: r.get(i, ZERO) for i, r in active.items()}
        if min(diag.values()) < 0:
            return False
        p = max(diag, key=diag.__getitem__)
        d = diag[p]
        row_p = active.pop(p)
        if d == 0:
            return not any(v for r in (row_p, *active.values()) for v in r.values())
        neighbors = [(i, v) for i, v in row_p.items() if i != p and v]
        for i, a_ip in neighbors:
            row_i = active[i]
            f = a_ip / d
            for j, a_pj in neighbors:
                nv = row_i.get(j, ZERO) - f * a_pj
                if nv:
                    row_i[j] = nv
                else:
                    row_i.pop(j, None)
            row_i.pop(p, None)
    return True


def exact_weights(inst: DiscriminationInstance) -> list[Fraction]:
    if max(inst.priors) == min(inst.priors):
        return [Fraction(1)] * inst.k
    return [to_dyadic(w) for w in inst.weights]


def verify_certificate_exact(
    cert: DualCertificate, inst: DiscriminationInstance
) -> CertificateCheck:
    """Rational version of verify_certificate

    :raises NotDyadicError: if an entry of the certificate or the states is not small dyadic.
    """
    offdiag = None
    if cert.y_offdiag is not None:
        offdiag = [[to_dyadic(v) for v in row] for row in cert.y_offdiag]
    conditions = certificate_conditions(
        cert, inst, exact_weights(inst), offdiag, one=Fraction(1)
    )
    lifted: dict[int, ExactMatrix] = {}

    def lift(op: HermOp, transposed: bool) -> ExactMatrix:
        if id(op) not in lifted:
            lifted[id(op)] = ExactMatrix.from_operator(op)
        m = lifted[id(op)]
        return m.partial_transpose(inst.dim_a, inst.dim_b) if transposed else m

    failures = []
    for cond in conditions:
        total = ExactMatrix.combine(
            inst.order, ((coeff, lift(op, t)) for coeff, op, t in cond.terms)
        )
        if not is_psd_exact(total.symmetric_rows()):
            failures.append(f"{cond.name}: not positive semidefinite")
    bound = ExactMatrix.from_operator(cert.y).trace / inst.k
    logger.debug("Exact certificate check: bound %s, %d failures", bound, len(failures))
    return CertificateCheck(not failures, bound, "exact", (), tuple(failures))


def _round_operator(op: HermOp, denominator: int) -> HermOp:
    m = (op.matrix + op.matrix.conj().T) / 2
    rounded = (np.round(m.real * denominator) + 1j * np.round(m.imag * denominator)) / denominator
    return HermOp(op.dim_a, op.dim_b, rounded)


def round_certificate(
    cert: DualCertificate,
    inst: DiscriminationInstance,
    denominator: int = MAX_DYADIC_DENOMINATOR,
) -> DualCertificate:
    """Round a floating certificate onto the grid (1/denominator)·Z for exact checking

    Q operators are lifted by n/denominator times the identity to stay positive after rounding,
    and Y is shifted by a grid multiple of the identity covering the remaining violation.
    """
    n = inst.order
    lift_q = Fraction(n, denominator)
    q_ops = None
    if cert.q_ops is not None:
        ident = HermOp.identity(inst.dim_a, inst.dim_b)
        q_ops = tuple(
            _round_operator(psd_part(q), denominator) + float(lift_q) * ident for q in cert.q_ops
        )
    offdiag = None
    if cert.y_offdiag is not None:
        offdiag = np.round(cert.y_offdiag * denominator) / denominator
    rounded = DualCertificate(
        _round_operator(cert.y, denominator), cert.form, q_ops, offdiag, cert.shift
    )
    worst = 0.0
    for cond in certificate_conditions(rounded, inst):
        if cond.contains_y:
            worst = min(worst, min_eigenvalue(evaluate_condition(cond)))
    steps = math.ceil(-worst * denominator) + 2
    return rounded.shifted(steps / denominator)
