import itertools
import logging
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cache, cached_property
from typing import Final

import numpy as np
import numpy.typing as npt

from ppt_discrimination.constants import (
    MAX_ENTANGLED_TOL,
    ORTHO_TOL,
    PRIOR_TOL,
    PSD_TOL,
    TRACE_TOL,
)
from ppt_discrimination.hermlin import (
    DimensionMismatchError,
    HermOp,
    bipartite_tensor,
    hs_inner,
    is_psd,
    kron,
    max_norm,
    partial_trace,
)
from ppt_discrimination.types import CMatrix, CVector, Subsystem

logger = logging.getLogger("states")


class InvalidStateError(ValueError):
    """A state constructor received invalid arguments"""


class InvalidInstanceError(ValueError):
    """A set of states violates the requirements of a discrimination instance"""

    def __init__(self, msg: str, indices: tuple[int, ...] = ()) -> None:
        super().__init__(msg)
        self.indices = indices


class UnknownExampleError(ValueError):
    """The requested example set does not exist"""


class BellIndex(IntEnum):
    PSI0 = 0
    PSI1 = 1
    PSI2 = 2
    PSI3 = 3


def _bell_index(i: int) -> BellIndex:
    try:
        return BellIndex(i)
    except ValueError:
        raise InvalidStateError(f"Bell index must be in [0, 3], got {i!r}") from None


@dataclass(frozen=True)
class LatticeVector:
    """Indices v = (v₁, …, v_t) of the product Bell state ψ_{v₁} ⊗ … ⊗ ψ_{v_t}"""

    indices: tuple[BellIndex, ...]

    def __post_init__(self) -> None:
        if not self.indices:
            raise InvalidStateError("A lattice vector needs at least one Bell index.")
        object.__setattr__(self, "indices", tuple(_bell_index(i) for i in self.indices))

    @classmethod
    def of(cls, *indices: int) -> "LatticeVector":
        return cls(tuple(_bell_index(i) for i in indices))

    @property
    def t(self) -> int:
        return len(self.indices)

    def __str__(self) -> str:
        return "psi[" + ",".join(str(int(i)) for i in self.indices) + "]"


@dataclass(frozen=True)
class GeneralizedBellSpec:
    d: int
    a: int
    b: int

    def __post_init__(self) -> None:
        if self.d < 2:
            raise InvalidStateError(f"Local dimension must be at least 2, got {self.d}")
        if not (0 <= self.a < self.d and 0 <= self.b < self.d):
            raise InvalidStateError(f"Indices a={self.a}, b={self.b} are not in Z_{self.d}")

    @property
    def omega(self) -> complex:
        return complex(np.exp(2j * np.pi / self.d))

    def __str__(self) -> str:
        return f"psi[{self.a},{self.b}]_d{self.d}"


_PAULI: Final = (
    ((1, 0), (0, 1)),
    ((0, 1), (1, 0)),
    ((0, -1j), (1j, 0)),
    ((1, 0), (0, -1)),
)

# f: index of the Bell state appearing in the partial transpose of ψ_i
_TRANSPOSE_INDEX: Final = (2, 3, 0, 1)


def pauli(i: int) -> CMatrix:
    """Pauli matrix σ_i with σ₀ the identity"""
    return np.array(_PAULI[_bell_index(i)], dtype=np.complex128)


def bell_transpose_index(i: int) -> BellIndex:
    """The involution f with T_A(ψ_i) = ½·1 − ψ_{f(i)}"""
    return BellIndex(_TRANSPOSE_INDEX[_bell_index(i)])


def bell_vector(i: int) -> CVector:
    """|ψ_i⟩ = (1 ⊗ σ_i)|ψ₀⟩ with |ψ₀⟩ = (|00⟩ + |11⟩)/√2"""
    psi0 = np.array([1, 0, 0, 1], dtype=np.complex128) / np.sqrt(2)
    return kron(np.eye(2), pauli(i)) @ psi0


@cache
def bell_density(i: int) -> HermOp:
    """Projector onto |ψ_i⟩ with exactly dyadic entries"""
    proj0 = np.zeros((4, 4), dtype=np.complex128)
    proj0[0, 0] = proj0[0, 3] = proj0[3, 0] = proj0[3, 3] = 0.5
    local = kron(np.eye(2), pauli(i))
    return HermOp(2, 2, local @ proj0 @ local.conj().T)


def _regroup_vector(u: CVector, t: int) -> CVector:
    # A₁B₁A₂B₂… -> A₁A₂…B₁B₂…
    order = list(range(0, 2 * t, 2)) + list(range(1, 2 * t, 2))
    return u.reshape([2] * (2 * t)).transpose(order).reshape(-1)


def lattice_vector_state(v: LatticeVector) -> CVector:
    """|ψ_v⟩ in the A:B ordering where Alice holds every A_l"""
    u = np.ones(1, dtype=np.complex128)
    for i in v.indices:
        u = np.kron(u, bell_vector(i))
    return _regroup_vector(u, v.t)


def lattice_density(v: LatticeVector) -> HermOp:
    """ψ_v on C^{2^t} ⊗ C^{2^t}, exact for dyadic entries"""
    return bipartite_tensor(*(bell_density(i) for i in v.indices))


def lattice_vectors(t: int) -> list[LatticeVector]:
    """All v ∈ Z₄^t in lexicographic order"""
    if t < 1:
        raise InvalidStateError(f"Number of qubit pairs must be positive, got {t}")
    return [LatticeVector.of(*w) for w in itertools.product(range(4), repeat=t)]


def lattice_position(v: LatticeVector) -> int:
    """Position of v in the lexicographic order of lattice_vectors(v.t)"""
    pos = 0
    for i in v.indices:
        pos = 4 * pos + int(i)
    return pos


@cache
def _lattice_basis(t: int) -> CMatrix:
    basis = np.column_stack([lattice_vector_state(v) for v in lattice_vectors(t)])
    basis.setflags(write=False)
    return basis


def lattice_basis(t: int) -> CMatrix:
    """Unitary whose column lattice_position(v) is |ψ_v⟩"""
    return _lattice_basis(t)


def lattice_operator(coefficients: npt.ArrayLike, t: int) -> HermOp:
    """Σ_v c_v ψ_v for real coefficients listed in lexicographic order of v"""
    c = np.asarray(coefficients, dtype=np.float64).reshape(-1)
    if c.size != 4**t:
        raise DimensionMismatchError(f"Expected {4**t} lattice coefficients, got {c.size}")
    basis = lattice_basis(t)
    return HermOp.hermitian_part((basis * c) @ basis.conj().T, 2**t, 2**t)


def transpose_sign(w: LatticeVector, u: LatticeVector) -> float:
    """Coefficient of ψ_u in T_A(ψ_w), (1/2^t)·(−1)^{#{l : u_l = f(w_l)}}"""
    if w.t != u.t:
        raise DimensionMismatchError("Lattice vectors have different lengths.")
    flips = sum(1 for wl, ul in zip(w.indices, u.indices) if ul == bell_transpose_index(wl))
    return (-1) ** flips / 2**w.t


@cache
def transpose_sign_matrix(t: int) -> npt.NDArray[np.float64]:
    """Matrix S with S[u, w] = transpose_sign(w, u) over lexicographic positions"""
    one = np.full((4, 4), 0.5)
    for w in range(4):
        one[_TRANSPOSE_INDEX[w], w] = -0.5
    m = np.ones((1, 1))
    for _ in range(t):
        m = np.kron(m, one)
    m.setflags(write=False)
    return m


def parity_set(v: LatticeVector) -> list[LatticeVector]:
    """Lattice vectors agreeing with v in an odd number of positions

    With this set T_A(ψ_v) = (1/2^t)(1 − 2 Σ_{w} ψ_{f(w₁)} ⊗ … ⊗ ψ_{f(w_t)}).
    """
    return [
        w
        for w in lattice_vectors(v.t)
        if sum(1 for wl, vl in zip(w.indices, v.indices) if wl == vl) % 2 == 1
    ]


def generalized_bell_vector(spec: GeneralizedBellSpec) -> CVector:
    """|ψ_{a,b}⟩ = (1/√d) Σ_j ω^{aj} |j⟩ ⊗ |j+b⟩"""
    d = spec.d
    u = np.zeros(d * d, dtype=np.complex128)
    for j in range(d):
        u[j * d + (j + spec.b) % d] = np.exp(2j * np.pi * spec.a * j / d) / np.sqrt(d)
    return u


def generalized_bell_density(spec: GeneralizedBellSpec) -> HermOp:
    return HermOp.from_vector(generalized_bell_vector(spec), spec.d, spec.d)


@cache
def _generalized_bell_basis(d: int) -> CMatrix:
    basis = np.column_stack(
        [
            generalized_bell_vector(GeneralizedBellSpec(d, a, b))
            for a, b in itertools.product(range(d), repeat=2)
        ]
    )
    basis.setflags(write=False)
    return basis


def generalized_bell_basis(d: int) -> CMatrix:
    """Unitary whose column a·d + b is |ψ_{a,b}⟩"""
    if d < 2:
        raise InvalidStateError(f"Local dimension must be at least 2, got {d}")
    return _generalized_bell_basis(d)


def gbell_operator(coefficients: npt.ArrayLike, d: int) -> HermOp:
    """Σ_{a,b} c_{a,b} ψ_{a,b} for real coefficients indexed by a·d + b"""
    c = np.asarray(coefficients, dtype=np.float64).reshape(-1)
    if c.size != d * d:
        raise DimensionMismatchError(f"Expected {d * d} coefficients, got {c.size}")
    basis = generalized_bell_basis(d)
    return HermOp.hermitian_part((basis * c) @ basis.conj().T, d, d)


def is_maximally_entangled(
    u: npt.ArrayLike, dim_a: int, dim_b: int, tol: float = MAX_ENTANGLED_TOL
) -> bool:
    """True iff both reduced states of the unit vector u are within tol of 1/d"""
    vec = np.asarray(u, dtype=np.complex128).reshape(-1)
    if vec.size != dim_a * dim_b:
        raise DimensionMismatchError(
            f"Vector of length {vec.size} does not live on C^{dim_a} ⊗ C^{dim_b}"
        )
    if dim_a != dim_b:
        raise DimensionMismatchError("Maximal entanglement is tested on equal local dimensions.")
    rho = HermOp.from_vector(vec, dim_a, dim_b)
    mixed = np.eye(dim_a) / dim_a
    return all(
        max_norm(partial_trace(rho, side) - mixed) <= tol for side in (Subsystem.A, Subsystem.B)
    )


def _qubit_pairs(x: HermOp) -> int:
    if x.dim_a != x.dim_b or x.dim_a < 2 or x.dim_a & (x.dim_a - 1):
        raise DimensionMismatchError(
            f"Bell dephasing needs equal power-of-2 dimensions, got {x.dim_a}x{x.dim_b}"
        )
    return x.dim_a.bit_length() - 1


def _dephase(x: HermOp, basis: CMatrix) -> HermOp:
    coefficients = np.einsum("ij,ik,kj->j", basis.conj(), x.matrix, basis).real
    return HermOp.hermitian_part((basis * coefficients) @ basis.conj().T, x.dim_a, x.dim_b)


def lattice_coefficients(x: HermOp) -> npt.NDArray[np.float64]:
    """⟨ψ_v|X|ψ_v⟩ for every v in lexicographic order"""
    basis = lattice_basis(_qubit_pairs(x))
    return np.einsum("ij,ik,kj->j", basis.conj(), x.matrix, basis).real


def dephase_bell(x: HermOp) -> HermOp:
    """Completely dephase x in the lattice basis, Σ_v ⟨ψ_v|X|ψ_v⟩ ψ_v"""
    return _dephase(x, lattice_basis(_qubit_pairs(x)))


def local_pauli_group() -> list[CMatrix]:
    """The local symmetries {σ_i ⊗ σ_i} fixing every Bell state"""
    return [kron(pauli(i), pauli(i)) for i in range(4)]


def twirl_bell(x: HermOp) -> HermOp:
    """(1/|G|) Σ_{U ∈ G} U X U* on a single qubit pair"""
    if x.dim_a != 2 or x.dim_b != 2:
        raise DimensionMismatchError("Twirling acts on C² ⊗ C².")
    group = local_pauli_group()
    total = sum((u @ x.matrix @ u.conj().T for u in group), np.zeros((4, 4), np.complex128))
    return HermOp.hermitian_part(total / len(group), 2, 2)


def dephase_gbell(x: HermOp) -> HermOp:
    """Completely dephase x in the generalized Bell basis of C^d ⊗ C^d"""
    if x.dim_a != x.dim_b:
        raise DimensionMismatchError("Generalized Bell dephasing needs equal local dimensions.")
    return _dephase(x, generalized_bell_basis(x.dim_a))


def _basis_label(rho: HermOp, basis: CMatrix, tol: float) -> int | None:
    weights = np.einsum("ij,ik,kj->j", basis.conj(), rho.matrix, basis).real
    pos = int(np.argmax(weights))
    if abs(weights[pos] - 1.0) <= tol and abs(rho.trace - 1.0) <= tol:
        return pos
    return None


def lattice_index(rho: HermOp, tol: float = PSD_TOL) -> LatticeVector | None:
    """Return v when the density operator rho equals ψ_v, otherwise None"""
    try:
        t = _qubit_pairs(rho)
    except DimensionMismatchError:
        return None
    pos = _basis_label(rho, lattice_basis(t), tol)
    return None if pos is None else lattice_vectors(t)[pos]


def gbell_index(rho: HermOp, tol: float = PSD_TOL) -> GeneralizedBellSpec | None:
    """Return (d, a, b) when the density operator rho equals ψ_{a,b}, otherwise None"""
    d = rho.dim_a
    if d != rho.dim_b or d < 2:
        return None
    pos = _basis_label(rho, generalized_bell_basis(d), tol)
    return None if pos is None else GeneralizedBellSpec(d, *divmod(pos, d))


@dataclass(frozen=True)
class DiscriminationInstance:
    """k mutually orthogonal density operators with prior probabilities"""

    dim_a: int
    dim_b: int
    states: tuple[HermOp, ...]
    priors: tuple[float, ...] = ()
    labels: tuple[str, ...] = ()
    name: str = "custom"
    reference: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if not self.states:
            raise InvalidInstanceError("An instance needs at least one state.")
        object.__setattr__(self, "states", tuple(self.states))
        k = len(self.states)
        priors = tuple(float(p) for p in self.priors) if self.priors else (1.0 / k,) * k
        labels = tuple(self.labels) if self.labels else tuple(f"rho_{j + 1}" for j in range(k))
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "labels", labels)
        self._validate()

    def _validate(self) -> None:
        k = self.k
        if len(self.priors) != k:
            raise InvalidInstanceError(f"Expected {k} priors, got {len(self.priors)}")
        if len(self.labels) != k:
            raise InvalidInstanceError(f"Expected {k} labels, got {len(self.labels)}")
        if any(p < 0 for p in self.priors) or abs(sum(self.priors) - 1.0) > PRIOR_TOL:
            raise InvalidInstanceError("Priors must be nonnegative and sum to 1.")
        for j, rho in enumerate(self.states):
            if rho.dim_a != self.dim_a or rho.dim_b != self.dim_b:
                raise InvalidInstanceError(
                    f"State {self.labels[j]} lives on {rho.dim_a}x{rho.dim_b}, "
                    f"expected {self.dim_a}x{self.dim_b}",
                    (j,),
                )
            if abs(rho.trace - 1.0) > TRACE_TOL:
                raise InvalidInstanceError(
                    f"State {self.labels[j]} has trace {rho.trace!r}, expected 1", (j,)
                )
            if not is_psd(rho, PSD_TOL):
                raise InvalidInstanceError(f"State {self.labels[j]} is not positive.", (j,))
        for i, j in itertools.combinations(range(k), 2):
            overlap = hs_inner(self.states[i], self.states[j])
            if abs(overlap) > ORTHO_TOL:
                raise InvalidInstanceError(
                    f"States {self.labels[i]} and {self.labels[j]} are not orthogonal: "
                    f"overlap {overlap:.3e}",
                    (i, j),
                )

    @property
    def k(self) -> int:
        return len(self.states)

    @property
    def order(self) -> int:
        return self.dim_a * self.dim_b

    @property
    def weights(self) -> tuple[float, ...]:
        """k·p_j, equal to 1 for uniform priors"""
        return tuple(self.k * p for p in self.priors)

    @cached_property
    def lattice_labels(self) -> tuple[LatticeVector, ...] | None:
        labels = [lattice_index(rho) for rho in self.states]
        if any(v is None for v in labels):
            return None
        return tuple(v for v in labels if v is not None)

    @cached_property
    def gbell_labels(self) -> tuple[GeneralizedBellSpec, ...] | None:
        labels = [gbell_index(rho) for rho in self.states]
        if any(s is None for s in labels):
            return None
        return tuple(s for s in labels if s is not None)

    def summary(self) -> dict:
        return {
            "name": self.name,
            "dim_a": self.dim_a,
            "dim_b": self.dim_b,
            "k": self.k,
            "labels": list(self.labels),
            "priors": list(self.priors),
        }


def make_instance(
    states: Sequence[HermOp],
    priors: Sequence[float] | None = None,
    labels: Sequence[str] | None = None,
    name: str = "custom",
    reference: str = "",
) -> DiscriminationInstance:
    """Validate states and priors into a DiscriminationInstance

    :raises InvalidInstanceError: naming the offending state or pair.
    """
    if not states:
        raise InvalidInstanceError("An instance needs at least one state.")
    return DiscriminationInstance(
        dim_a=states[0].dim_a,
        dim_b=states[0].dim_b,
        states=tuple(states),
        priors=tuple(priors) if priors is not None else (),
        labels=tuple(labels) if labels is not None else (),
        name=name,
        reference=reference,
    )


def lattice_instance(
    vectors: Iterable[LatticeVector | Sequence[int]], name: str = "lattice", reference: str = ""
) -> DiscriminationInstance:
    vs = [v if isinstance(v, LatticeVector) else LatticeVector.of(*v) for v in vectors]
    if len({v.t for v in vs}) > 1:
        raise InvalidInstanceError("Lattice vectors must share the number of qubit pairs.")
    return make_instance(
        [lattice_density(v) for v in vs],
        labels=[str(v) for v in vs],
        name=name,
        reference=reference,
    )


def gbell_instance(
    d: int, pairs: Iterable[tuple[int, int]], name: str = "gbell", reference: str = ""
) -> DiscriminationInstance:
    specs = [GeneralizedBellSpec(d, a, b) for a, b in pairs]
    return make_instance(
        [generalized_bell_density(s) for s in specs],
        labels=[str(s) for s in specs],
        name=name,
        reference=reference,
    )


YDE4_VECTORS: Final = ((0, 0), (1, 3), (2, 3), (3, 3))

# Eight-state set written with 1-based Bell labels. The frozen reading shifts every label down by
# one; the alternative maps label 4 to 0 and keeps the others.
LATTICE8_LABELS: Final = (
    (1, 1, 1),
    (1, 1, 3),
    (1, 1, 4),
    (2, 2, 2),
    (3, 3, 1),
    (3, 3, 3),
    (3, 3, 4),
    (4, 2, 2),
)


def lattice8_vectors(reading: str = "shift") -> list[tuple[int, ...]]:
    match reading:
        case "shift":
            return [tuple(i - 1 for i in v) for v in LATTICE8_LABELS]
        case "wrap":
            return [tuple(i % 4 for i in v) for v in LATTICE8_LABELS]
    raise ValueError(f"Unknown label reading {reading!r}")


GBELL5_PAIRS: Final = ((0, 0), (1, 1), (2, 1), (1, 3), (2, 3))
GBELL6_PAIRS: Final = ((0, 0), (1, 0), (2, 0), (3, 0), (4, 0), (0, 3))

MAX_POW2: Final = 4


def pow2_vectors(n: int) -> list[tuple[int, ...]]:
    """ψ₀ ⊗ ψ_w for the first 2ⁿ words w ∈ {1,2,3}^{n−1} in lexicographic order"""
    if n < 3:
        raise UnknownExampleError(f"pow2 sets need n >= 3, got {n}")
    if n > MAX_POW2:
        raise UnknownExampleError(f"pow2 sets are supported up to n = {MAX_POW2}, got {n}")
    words = itertools.islice(itertools.product((1, 2, 3), repeat=n - 1), 2**n)
    return [(0, *w) for w in words]


# name -> (description shown by the examples command, reference value)
EXAMPLE_REFERENCES: Final[dict[str, tuple[str, str]]] = {
    "bell_basis": ("4 Bell states on C2xC2", "PPT optimum 1/2 = d/k"),
    "yde4": ("4 lattice states on C4xC4", "PPT optimum 7/8; unambiguous 3/4"),
    "pow2_3": ("8 lattice states on C8xC8", "PPT optimum ≤ 31/32"),
    "pow2_4": ("16 lattice states on C16xC16", "PPT optimum ≤ 127/128"),
    "lattice8": ("8 lattice states on C8xC8", "PPT optimum ≤ 15/16"),
    "gbell5": ("5 generalized Bell states on C5xC5", "PPT error ≥ 0.0101"),
    "gbell6": ("6 generalized Bell states on C6xC6", "PPT error ≥ 0.002"),
}

_POW2_NAME: Final = re.compile(r"^pow2(?:_(\d+)|\((\d+)\))$")


def example_names() -> list[str]:
    return list(EXAMPLE_REFERENCES)


def example_set(name: str) -> DiscriminationInstance:
    """Build one of the named example sets with uniform priors

    Accepted names: bell_basis, yde4, pow2_<n> (also pow2(<n>)), lattice8, lattice8_wrap, gbell5,
    gbell6.

    :raises UnknownExampleError: for an unknown name or a pow2 size out of range.
    """
    if match := _POW2_NAME.match(name):
        n = int(match.group(1) or match.group(2))
        canonical = f"pow2_{n}"
        reference = f"PPT optimum ≤ 1 - 2/{2**n}^2"
        return lattice_instance(pow2_vectors(n), name=canonical, reference=reference)
    match name:
        case "bell_basis":
            return lattice_instance([(i,) for i in range(4)], name, EXAMPLE_REFERENCES[name][1])
        case "yde4":
            return lattice_instance(YDE4_VECTORS, name, EXAMPLE_REFERENCES[name][1])
        case "lattice8":
            return lattice_instance(lattice8_vectors("shift"), name, EXAMPLE_REFERENCES[name][1])
        case "lattice8_wrap":
            return lattice_instance(lattice8_vectors("wrap"), name, "PPT optimum ≤ 15/16")
        case "gbell5":
            return gbell_instance(5, GBELL5_PAIRS, name, EXAMPLE_REFERENCES[name][1])
        case "gbell6":
            return gbell_instance(6, GBELL6_PAIRS, name, EXAMPLE_REFERENCES[name][1])
    raise UnknownExampleError(f"Unknown example set {name!r}. Known: {', '.join(example_names())}")
