"""
PAM Mapping Module

The bijection ψ between binary codewords of length n = m·n_s and sequences of
n_s odd-integer 2^m-PAM amplitudes, using bit-reflected binary Gray labels.

A codeword is read as m blocks (v_{m-1}, ..., v_1, v_0) of n_s bits. Column j
of the stacked blocks, read with v_0 as the most significant bit, is the Gray
label of amplitude j. v_0 is therefore the sign bit of every signal and the
remaining blocks carry amplitude bits.

Amplitudes stay unnormalized odd integers here; energy normalization is the
channel's business.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import numpy.typing as npt

from .errors import DimensionError, ParameterError
from .gf2lin import BinVec, as_bits

MAX_BITS_PER_SIGNAL = 8


@dataclass(frozen=True)
class GrayTable:
    """
    Gray labels of 2^m-PAM.

    Attributes:
        m: Bits per signal.
        labels: MSB-first label strings; labels[i] belongs to amplitude 2i − 2^m + 1.
    """

    m: int
    labels: tuple[str, ...]

    @property
    def order(self) -> int:
        return 1 << self.m

    @cached_property
    def amplitudes(self) -> npt.NDArray[np.int64]:
        return amplitude_table(self.m)

    @cached_property
    def label_ints(self) -> npt.NDArray[np.int64]:
        """Integer label of each amplitude index."""
        return np.array([int(lbl, 2) for lbl in self.labels], dtype=np.int64)

    @cached_property
    def amplitude_of_label(self) -> npt.NDArray[np.int64]:
        """Lookup table: integer label -> amplitude."""
        out = np.empty(self.order, dtype=np.int64)
        out[self.label_ints] = self.amplitudes
        return out

    def bit_matrix(self) -> npt.NDArray[np.uint8]:
        """(2^m, m) array; row i is the label of amplitude index i, MSB first."""
        shifts = np.arange(self.m - 1, -1, -1)
        return ((self.label_ints[:, None] >> shifts) & 1).astype(np.uint8)

    def rows(self) -> list[tuple[int, str]]:
        return list(zip(self.amplitudes.tolist(), self.labels))


def amplitude_table(m: int) -> npt.NDArray[np.int64]:
    """Amplitudes (−2^m+1, ..., −1, 1, ..., 2^m−1) in increasing order."""
    order = 1 << m
    return 2 * np.arange(order, dtype=np.int64) - order + 1


@lru_cache(maxsize=None)
def gray_table(m: int) -> GrayTable:
    """
    Build the binary-reflected Gray table for 2^m-PAM.

    Index i maps to label g(i) = i XOR (i >> 1), written MSB first.

    Raises:
        ParameterError: If m is outside 1..8.
    """
    if not 1 <= m <= MAX_BITS_PER_SIGNAL:
        raise ParameterError(f"m must be in 1..{MAX_BITS_PER_SIGNAL}, got {m}", {"m": m})
    labels = tuple(format(i ^ (i >> 1), f"0{m}b") for i in range(1 << m))
    return GrayTable(m=m, labels=labels)


@dataclass(frozen=True, eq=False)
class SignalSeq:
    """
    A sequence of 2^m-PAM amplitudes.

    Attributes:
        m: Bits per signal.
        amps: Odd integer amplitudes within ±(2^m − 1).
    """

    m: int
    amps: npt.NDArray[np.int64]

    def __post_init__(self) -> None:
        amps = np.array(self.amps, dtype=np.int64)
        if amps.ndim != 1 or amps.size == 0:
            raise DimensionError(f"Signal sequence must be 1-D and non-empty, got {amps.shape}")
        limit = (1 << self.m) - 1
        if np.any(amps % 2 == 0) or np.any(np.abs(amps) > limit):
            raise ParameterError(
                f"Amplitudes must be odd and within ±{limit}",
                {"amps": amps.tolist()},
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def of(cls, m: int, amps: Sequence[int]) -> SignalSeq:
        return cls(m, np.asarray(amps, dtype=np.int64))

    @property
    def n_s(self) -> int:
        return int(self.amps.size)

    @property
    def energy(self) -> int:
        """Squared Euclidean norm."""
        return int(np.dot(self.amps, self.amps))

    def __len__(self) -> int:
        return self.n_s

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SignalSeq):
            return NotImplemented
        return self.m == other.m and np.array_equal(self.amps, other.amps)

    def __hash__(self) -> int:
        return hash((self.m, self.amps.tobytes()))

    def __repr__(self) -> str:
        return f"SignalSeq(m={self.m}, amps={tuple(self.amps.tolist())})"


def map_psi_batch(v: npt.NDArray[np.uint8], m: int) -> npt.NDArray[np.int64]:
    """
    Apply ψ to every row of a 2-D bit array.

    Returns:
        Integer amplitudes of shape (rows, n / m).
    """
    table = gray_table(m)
    n = v.shape[-1]
    if n % m:
        raise DimensionError(f"Codeword length {n} is not divisible by m={m}")
    n_s = n // m
    # Block b (counted from the left) is v_{m-1-b}, whose label weight is 2^b.
    blocks = v.reshape(*v.shape[:-1], m, n_s).astype(np.int64)
    weights = (1 << np.arange(m, dtype=np.int64))[:, None]
    labels = (blocks * weights).sum(axis=-2)
    return table.amplitude_of_label[labels]


def map_psi(v: BinVec, m: int) -> SignalSeq:
    """
    Map a codeword to its PAM image ψ(v).

    Raises:
        DimensionError: If len(v) is not divisible by m.
    """
    v = as_bits(v)
    return SignalSeq(m, map_psi_batch(v[None, :], m)[0])


def unmap_psi(s: SignalSeq) -> BinVec:
    """Inverse of map_psi."""
    m = s.m
    index = (s.amps + (1 << m) - 1) // 2
    labels = index ^ (index >> 1)
    blocks = [(labels >> b) & 1 for b in range(m)]
    return np.concatenate(blocks).astype(np.uint8)


def pair_qam(s: SignalSeq) -> list[tuple[int, int]]:
    """
    Pair consecutive amplitudes into (I, Q) points of a 2^{2m}-QAM constellation.

    Raises:
        DimensionError: If the sequence has odd length.
    """
    if s.n_s % 2:
        raise DimensionError(f"Cannot pair an odd-length sequence ({s.n_s} signals)")
    amps = s.amps.tolist()
    return list(zip(amps[0::2], amps[1::2]))


def total_energy(points: Iterable[SignalSeq]) -> int:
    """Sum of ‖s‖² over a collection of sequences."""
    return sum(p.energy for p in points)
