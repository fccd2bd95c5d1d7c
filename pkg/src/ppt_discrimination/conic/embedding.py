import numpy as np
import numpy.typing as npt

from ppt_discrimination.hermlin import HermOp, as_cmatrix
from ppt_discrimination.types import CMatrix, RMatrix


def real_embed(h: HermOp | npt.ArrayLike) -> RMatrix:
    """[[Re H, −Im H], [Im H, Re H]]

    The spectrum of the embedding is the spectrum of H with doubled multiplicities, and
    ⟨A, B⟩ = ½·Tr(embed(A)·embed(B)) for Hermitian A and B.
    """
    m = h.matrix if isinstance(h, HermOp) else as_cmatrix(h)
    re, im = m.real, m.imag
    return np.block([[re, -im], [im, re]])


def real_unembed(m: npt.ArrayLike) -> CMatrix:
    """Complex Hermitian matrix closest to a real symmetric matrix of doubled order

    The input does not have to carry the embedding structure exactly; it is projected onto it.
    """
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] % 2:
        raise ValueError(f"Expected a square matrix of even order, got shape {arr.shape}")
    n = arr.shape[0] // 2
    arr = (arr + arr.T) / 2
    re = (arr[:n, :n] + arr[n:, n:]) / 2
    im = (arr[n:, :n] - arr[:n, n:]) / 2
    out = re + 1j * im
    return (out + out.conj().T) / 2
