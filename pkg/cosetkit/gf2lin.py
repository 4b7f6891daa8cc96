"""
GF(2) Linear Algebra Module

Dense bit matrices over GF(2) and the handful of operations the shaping
construction is built from: encoding, rank, systematic forms, null spaces
and row-space comparison.

Matrices are stored word-packed (eight columns per byte, row-major) and all
elimination is done with XOR on packed rows. Values are immutable, so a
BinMatrix can be shared freely between threads.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import numpy.typing as npt

from .errors import DimensionError, EnumerationLimitError, FormatError, RankDeficientError

logger = logging.getLogger(__name__)

BinVec = npt.NDArray[np.uint8]

# Largest information length enumerate_codewords accepts by default.
DEFAULT_ENUMERATION_LIMIT = 20


def as_bits(values: Iterable[int] | npt.ArrayLike) -> BinVec:
    """
    Validate and convert a sequence of 0/1 values to a bit vector.

    Raises:
        DimensionError: If the input is empty or not one-dimensional.
        FormatError: If an entry is not 0 or 1.
    """
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"Bit vector must be 1-D and non-empty, got shape {arr.shape}")
    if not np.all((arr == 0) | (arr == 1)):
        raise FormatError("Bit vector entries must be 0 or 1")
    return arr.astype(np.uint8)


def parse_bits(text: str) -> BinVec:
    """Parse "0110" or "0 1 1 0" into a bit vector."""
    tokens = text.split()
    if len(tokens) == 1:
        tokens = list(tokens[0])
    try:
        return as_bits(int(t) for t in tokens)
    except ValueError as e:
        raise FormatError(f"Invalid bit string {text!r}") from e


def format_bits(v: BinVec) -> str:
    return "".join(str(int(b)) for b in v)


@dataclass(frozen=True, eq=False)
class BinMatrix:
    """
    A dense matrix over GF(2).

    Attributes:
        packed: Row-major packed storage, shape (rows, ceil(cols / 8)).
        cols: Number of columns.
    """

    packed: npt.NDArray[np.uint8]
    cols: int

    def __post_init__(self) -> None:
        if self.packed.ndim != 2 or self.packed.shape[0] < 1 or self.cols < 1:
            raise DimensionError(
                f"BinMatrix needs at least one row and column, got "
                f"{self.packed.shape[0] if self.packed.ndim == 2 else 0}x{self.cols}"
            )
        self.packed.setflags(write=False)

    @classmethod
    def from_dense(cls, array: npt.ArrayLike) -> BinMatrix:
        """Build a matrix from a 2-D array of 0/1 entries."""
        arr = np.asarray(array)
        if arr.ndim != 2:
            raise DimensionError(f"Expected a 2-D array, got shape {arr.shape}")
        if not np.all((arr == 0) | (arr == 1)):
            raise FormatError("Matrix entries must be 0 or 1")
        return cls(np.packbits(arr.astype(np.uint8), axis=1), int(arr.shape[1]))

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int] | str]) -> BinMatrix:
        """Build a matrix from rows given as bit sequences or bit strings."""
        parsed = [parse_bits(r) if isinstance(r, str) else as_bits(r) for r in rows]
        if not parsed:
            raise DimensionError("BinMatrix needs at least one row")
        widths = {len(r) for r in parsed}
        if len(widths) != 1:
            raise DimensionError(f"Rows have differing lengths: {sorted(widths)}")
        return cls.from_dense(np.vstack(parsed))

    @classmethod
    def identity(cls, n: int) -> BinMatrix:
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @property
    def rows(self) -> int:
        return int(self.packed.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @cached_property
    def dense(self) -> npt.NDArray[np.uint8]:
        """Unpacked 0/1 view of the matrix, shape (rows, cols)."""
        out = np.unpackbits(self.packed, axis=1, count=self.cols)
        out.setflags(write=False)
        return out

    @cached_property
    def dense_float(self) -> npt.NDArray[np.float64]:
        """Float copy of `dense` for BLAS products; row sums stay exact below 2^53."""
        out = self.dense.astype(np.float64)
        out.setflags(write=False)
        return out

    def row(self, i: int) -> BinVec:
        return self.dense[i].copy()

    def select_columns(self, indices: Sequence[int]) -> BinMatrix:
        return BinMatrix.from_dense(self.dense[:, list(indices)])

    def permute_columns(self, perm: Sequence[int]) -> BinMatrix:
        """Return the matrix whose column j is column perm[j] of this one."""
        if sorted(perm) != list(range(self.cols)):
            raise DimensionError(f"Not a permutation of {self.cols} columns")
        return self.select_columns(perm)

    def vstack(self, other: BinMatrix) -> BinMatrix:
        if other.cols != self.cols:
            raise DimensionError(f"Cannot stack {self.shape} on {other.shape}")
        return BinMatrix(np.vstack([self.packed, other.packed]), self.cols)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinMatrix):
            return NotImplemented
        return self.cols == other.cols and np.array_equal(self.packed, other.packed)

    def __hash__(self) -> int:
        return hash((self.cols, self.packed.tobytes()))

    def __repr__(self) -> str:
        return f"BinMatrix({self.rows}x{self.cols})"


def mod2_product(u: npt.NDArray[np.uint8], dense: npt.NDArray[np.float64]) -> npt.NDArray[np.uint8]:
    """u·G mod 2 for 0/1 inputs, via a float matrix product."""
    return (np.rint(u.astype(np.float64) @ dense) % 2).astype(np.uint8)


def encode(u: BinVec, g: BinMatrix) -> BinVec:
    """
    Compute the codeword u·G over GF(2).

    Raises:
        DimensionError: If len(u) differs from the number of rows of G.
    """
    u = as_bits(u)
    if u.size != g.rows:
        raise DimensionError(
            f"Message length {u.size} does not match generator rows {g.rows}",
            {"message": int(u.size), "rows": g.rows},
        )
    return mod2_product(u, g.dense_float)


def encode_batch(u: npt.NDArray[np.uint8], g: BinMatrix) -> npt.NDArray[np.uint8]:
    """Encode each row of a 2-D message array."""
    if u.ndim != 2 or u.shape[1] != g.rows:
        raise DimensionError(f"Messages of shape {u.shape} do not fit a {g.shape} generator")
    return mod2_product(u, g.dense_float)


def _eliminate(g: BinMatrix) -> tuple[npt.NDArray[np.uint8], list[int]]:
    """
    Reduce G to reduced row echelon form.

    Pivots are taken leftmost column first and, within a column, from the
    lowest available row index, so the output is deterministic.

    Returns:
        The packed reduced matrix and the list of pivot columns.
    """
    work = g.packed.copy()
    pivots: list[int] = []
    r = 0
    for col in range(g.cols):
        if r == g.rows:
            break
        byte, mask = col >> 3, np.uint8(0x80 >> (col & 7))
        below = np.flatnonzero(work[r:, byte] & mask)
        if below.size == 0:
            continue
        p = r + int(below[0])
        if p != r:
            work[[r, p]] = work[[p, r]]
        hits = np.flatnonzero(work[:, byte] & mask)
        hits = hits[hits != r]
        work[hits] ^= work[r]
        pivots.append(col)
        r += 1
    return work, pivots


def rank(g: BinMatrix) -> int:
    """GF(2) rank of G."""
    return len(_eliminate(g)[1])


def to_systematic(g: BinMatrix) -> tuple[BinMatrix, list[int]]:
    """
    Bring a full-rank generator matrix to systematic form (I | B).

    Parity-check matrices and layouts tied to G must be permuted with the
    returned perm as well.

    Returns:
        (S, perm) where S = (I | B) and column j of S comes from column
        perm[j] of the row-reduced input. The row space of S equals the row
        space of G with its columns permuted by perm.

    Raises:
        RankDeficientError: If G does not have full row rank.
    """
    work, pivots = _eliminate(g)
    if len(pivots) < g.rows:
        raise RankDeficientError(len(pivots), g.rows)
    pivot_set = set(pivots)
    perm = pivots + [c for c in range(g.cols) if c not in pivot_set]
    reduced = BinMatrix(work, g.cols)
    logger.debug(f"Systematic form of {g!r}: pivots={pivots}")
    return reduced.permute_columns(perm), perm


def rowspace_equal(a: BinMatrix, b: BinMatrix) -> bool:
    """Check whether A and B generate the same binary code."""
    if a.cols != b.cols:
        return False
    ra, rb = rank(a), rank(b)
    return ra == rb and rank(a.vstack(b)) == ra


def null_space(h: BinMatrix) -> BinMatrix:
    """
    Basis of the right null space {x : H·xᵀ = 0}.

    Used to derive a generator matrix from a parity-check matrix; the result
    G satisfies G·Hᵀ = 0 and has n − rank(H) rows.

    Raises:
        DimensionError: If H has full column rank (the null space is trivial).
    """
    work, pivots = _eliminate(h)
    reduced = np.unpackbits(work, axis=1, count=h.cols)
    pivot_set = set(pivots)
    free = [c for c in range(h.cols) if c not in pivot_set]
    if not free:
        raise DimensionError("Null space is trivial")
    basis = np.zeros((len(free), h.cols), dtype=np.uint8)
    basis[np.arange(len(free)), free] = 1
    basis[:, pivots] = reduced[: len(pivots)][:, free].T
    return BinMatrix.from_dense(basis)


def info_words(k: int) -> npt.NDArray[np.uint8]:
    """All 2^k information words in lexicographic order (bit 0 most significant)."""
    idx = np.arange(1 << k, dtype=np.int64)[:, None]
    return ((idx >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8)


def enumerate_codewords(
    g: BinMatrix,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> tuple[npt.NDArray[np.uint8], npt.NDArray[np.uint8]]:
    """
    Enumerate the code generated by G.

    Returns:
        (info, codewords): both 2-D arrays with 2^k rows, in lexicographic
        order of the information word.

    Raises:
        EnumerationLimitError: If G has more than `limit` rows.
    """
    if g.rows > limit:
        raise EnumerationLimitError("codebook", g.rows, limit)
    info = info_words(g.rows)
    return info, encode_batch(info, g)


def read_matrix_block(text: str) -> tuple[BinMatrix, list[tuple[int, str]]]:
    """
    Parse a matrix at the head of a document.

    Returns the matrix and the remaining non-empty lines with their 1-based
    line numbers.
    """
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines()) if ln.strip()]
    if not lines:
        raise FormatError("Empty matrix document")
    header_line, header = lines[0]
    try:
        n_rows, n_cols = (int(t) for t in header.split())
    except ValueError as e:
        raise FormatError(f"Expected 'rows cols' header, got {header!r}", header_line) from e
    body = lines[1 : 1 + n_rows]
    if len(body) != n_rows:
        raise FormatError(f"Expected {n_rows} rows, found {len(body)}", header_line)
    rows = []
    for line_no, line in body:
        try:
            bits = parse_bits(line)
        except FormatError as e:
            raise FormatError(e.message, line_no) from e
        if bits.size != n_cols:
            raise FormatError(f"Expected {n_cols} columns, found {bits.size}", line_no)
        rows.append(bits)
    return BinMatrix.from_dense(np.vstack(rows)), lines[1 + n_rows :]


def parse_matrix(text: str) -> BinMatrix:
    """
    Parse the plain-text matrix format.

    The first line holds "rows cols"; each following non-empty line holds one
    row of 0/1 characters separated by spaces.

    Raises:
        FormatError: On a bad header, a malformed row, or lines beyond the
            declared row count.
    """
    g, rest = read_matrix_block(text)
    if rest:
        line_no, _ = rest[0]
        raise FormatError(f"Found more rows than the declared {g.rows}", line_no)
    return g


def format_matrix(g: BinMatrix) -> str:
    lines = [f"{g.rows} {g.cols}"]
    lines.extend(" ".join(str(int(b)) for b in row) for row in g.dense)
    return "\n".join(lines) + "\n"
