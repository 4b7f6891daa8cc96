"""
Decoding Module

Recovers transmitted information from channel output:

- demap_llr: bit LLRs for Gray-labeled PAM (exact or max-log)
- ml_decode: exhaustive minimum-distance decoding for small codes
- bp_decode: flooding sum-product (or min-sum) on a binary Tanner graph
- alist I/O and a seeded regular LDPC construction for desk-scale runs

LLRs use the natural log and are positive when bit 0 is more likely.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Literal

import numpy as np
import numpy.typing as npt
from scipy import sparse
from scipy.special import logsumexp

from .errors import DimensionError, EnumerationLimitError, FormatError, ParameterError
from .gf2lin import BinMatrix, BinVec, encode_batch, info_words
from .mapper import gray_table
from .shaping import ShapingConstruction

logger = logging.getLogger(__name__)

LlrVec = npt.NDArray[np.float64]

LLR_CLIP = 30.0
# Normalization of min-sum check messages.
MIN_SUM_SCALE = 0.75
DEFAULT_ML_LIMIT = 20
# Floor for |message| inside the tanh rule; keeps -log(tanh(x/2)) finite.
_PHI_FLOOR = 1e-12

DemapMode = Literal["exact", "maxlog"]
BpMode = Literal["sum_product", "min_sum"]


# ---------------------------------------------------------------------------
# Parity-check structure
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ParityCheck:
    """
    Sparse binary parity-check matrix.

    Attributes:
        matrix: CSR matrix of shape (checks, variables) with unit entries.
    """

    matrix: sparse.csr_matrix

    def __post_init__(self) -> None:
        h = sparse.csr_matrix(self.matrix, dtype=np.int64)
        h.sum_duplicates()
        h.sort_indices()
        if h.nnz and (h.data != 1).any():
            raise FormatError("Parity-check entries must be single ones")
        if h.shape[0] < 1 or h.shape[1] < 1:
            raise DimensionError(f"Parity-check matrix has shape {h.shape}")
        if (np.diff(h.indptr) == 0).any():
            raise ParameterError("Every check must involve at least one variable")
        if (np.bincount(h.indices, minlength=h.shape[1]) == 0).any():
            raise ParameterError("Every variable must take part in at least one check")
        object.__setattr__(self, "matrix", h)

    @classmethod
    def from_checks(cls, n: int, checks: list[list[int]]) -> ParityCheck:
        """Build from 0-based variable lists, one per check."""
        rows = np.repeat(np.arange(len(checks)), [len(c) for c in checks])
        cols = np.concatenate([np.asarray(c, dtype=np.int64) for c in checks]) if checks else []
        data = np.ones(len(rows), dtype=np.int64)
        return cls(sparse.csr_matrix((data, (rows, cols)), shape=(len(checks), n)))

    @classmethod
    def from_dense(cls, h: npt.ArrayLike | BinMatrix) -> ParityCheck:
        arr = h.dense if isinstance(h, BinMatrix) else np.asarray(h)
        return cls(sparse.csr_matrix(arr.astype(np.int64)))

    @property
    def n(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def checks(self) -> int:
        return int(self.matrix.shape[0])

    @cached_property
    def check_idx(self) -> npt.NDArray[np.intp]:
        return np.repeat(np.arange(self.checks), np.diff(self.matrix.indptr))

    @property
    def var_idx(self) -> npt.NDArray[np.int32]:
        return self.matrix.indices

    @cached_property
    def check_starts(self) -> npt.NDArray[np.intp]:
        return self.matrix.indptr[:-1]

    def check_lists(self) -> list[list[int]]:
        ptr, idx = self.matrix.indptr, self.matrix.indices
        return [idx[ptr[i] : ptr[i + 1]].tolist() for i in range(self.checks)]

    def variable_lists(self) -> list[list[int]]:
        csc = self.matrix.tocsc()
        csc.sort_indices()
        ptr, idx = csc.indptr, csc.indices
        return [idx[ptr[j] : ptr[j + 1]].tolist() for j in range(self.n)]

    def to_dense(self) -> npt.NDArray[np.uint8]:
        return self.matrix.toarray().astype(np.uint8)

    def to_binmatrix(self) -> BinMatrix:
        return BinMatrix.from_dense(self.to_dense())

    def permute_columns(self, perm: list[int] | npt.NDArray[np.intp]) -> ParityCheck:
        """Column j of the result is column perm[j] of this matrix."""
        return ParityCheck(self.matrix[:, np.asarray(perm)])

    def syndrome(self, v: BinVec) -> npt.NDArray[np.uint8]:
        if len(v) != self.n:
            raise DimensionError(f"Word has length {len(v)}, need {self.n}")
        return (self.matrix @ np.asarray(v, dtype=np.int64) % 2).astype(np.uint8)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ParityCheck):
            return NotImplemented
        return self.matrix.shape == other.matrix.shape and (self.matrix != other.matrix).nnz == 0

    __hash__ = object.__hash__

    def __repr__(self) -> str:
        return f"ParityCheck({self.checks}x{self.n}, edges={self.matrix.nnz})"


def parse_alist(text: str) -> ParityCheck:
    """
    Parse a parity-check matrix in alist format.

    Layout: "n m", max degrees, n column degrees, m row degrees, then n
    column adjacency lines and m row adjacency lines with 1-based indices
    (zero entries are padding).

    Raises:
        FormatError: On a malformed header, an index out of range, or
            degree/adjacency mismatches.
    """
    lines = [(i + 1, ln.split()) for i, ln in enumerate(text.splitlines()) if ln.strip()]

    def ints(pos: int, expected: int | None = None) -> list[int]:
        if pos >= len(lines):
            raise FormatError("Unexpected end of alist document")
        line_no, tokens = lines[pos]
        try:
            values = [int(t) for t in tokens]
        except ValueError as e:
            raise FormatError(f"Non-integer token in {' '.join(tokens)!r}", line_no) from e
        if expected is not None and len(values) != expected:
            raise FormatError(f"Expected {expected} values, found {len(values)}", line_no)
        return values

    n, m = ints(0, 2)
    if n < 1 or m < 1:
        raise FormatError(f"Invalid dimensions n={n}, m={m}", lines[0][0])
    max_col, max_row = ints(1, 2)
    col_deg = ints(2, n)
    row_deg = ints(3, m)
    if max(col_deg) != max_col or max(row_deg) != max_row:
        raise FormatError(
            f"Max degrees ({max_col}, {max_row}) disagree with the degree lists "
            f"({max(col_deg)}, {max(row_deg)})",
            lines[1][0],
        )

    columns: list[list[int]] = []
    for j in range(n):
        entries = [e for e in ints(4 + j) if e != 0]
        line_no = lines[4 + j][0]
        if any(not 1 <= e <= m for e in entries):
            raise FormatError(f"Check index out of range 1..{m}", line_no)
        if len(entries) != col_deg[j]:
            raise FormatError(
                f"Column {j + 1} lists {len(entries)} checks, degree says {col_deg[j]}", line_no
            )
        columns.append([e - 1 for e in entries])

    checks: list[list[int]] = [[] for _ in range(m)]
    for j, col in enumerate(columns):
        for i in col:
            checks[i].append(j)

    for i in range(m):
        pos = 4 + n + i
        if pos >= len(lines):
            break  # row section is optional
        entries = sorted(e - 1 for e in ints(pos) if e != 0)
        line_no = lines[pos][0]
        if any(not 0 <= e < n for e in entries):
            raise FormatError(f"Variable index out of range 1..{n}", line_no)
        if len(entries) != row_deg[i] or entries != sorted(checks[i]):
            raise FormatError(f"Row {i + 1} disagrees with the column lists", line_no)

    if [len(c) for c in checks] != row_deg:
        raise FormatError("Row degrees disagree with the column lists")
    return ParityCheck.from_checks(n, checks)


def serialize_alist(h: ParityCheck) -> str:
    """Write a parity-check matrix in alist format (zero-padded lists)."""
    cols, rows = h.variable_lists(), h.check_lists()
    max_col, max_row = max(map(len, cols)), max(map(len, rows))

    def padded(items: list[int], width: int) -> str:
        return " ".join(str(x + 1) for x in items) + " 0" * (width - len(items))

    lines = [
        f"{h.n} {h.checks}",
        f"{max_col} {max_row}",
        " ".join(str(len(c)) for c in cols),
        " ".join(str(len(r)) for r in rows),
    ]
    lines.extend(padded(c, max_col) for c in cols)
    lines.extend(padded(r, max_row) for r in rows)
    return "\n".join(lines) + "\n"


def make_regular_ldpc(n: int, dv: int, dc: int, seed: int) -> ParityCheck:
    """
    Gallager-style (dv, dc)-regular parity-check matrix.

    The first band of n/dc checks covers consecutive groups of dc variables;
    each further band is a seeded column permutation of the first.

    Raises:
        ParameterError: If dc does not divide n or the degrees are invalid.
    """
    if dv < 1 or dc < 2 or n % dc:
        raise ParameterError(f"Need dv >= 1, dc >= 2 and dc | n, got n={n}, dv={dv}, dc={dc}")
    rng = np.random.default_rng(seed)
    band = np.arange(n).reshape(n // dc, dc)
    checks: list[list[int]] = [sorted(row.tolist()) for row in band]
    for _ in range(dv - 1):
        perm = rng.permutation(n)
        checks.extend(sorted(perm[row].tolist()) for row in band)
    h = ParityCheck.from_checks(n, checks)
    logger.debug(f"Regular ({dv},{dc}) LDPC: {h!r}")
    return h


# ---------------------------------------------------------------------------
# Soft demapping and ML decoding
# ---------------------------------------------------------------------------


def demap_llr(
    y: npt.ArrayLike,
    m: int,
    sigma2: float,
    mode: DemapMode = "exact",
) -> LlrVec:
    """
    Bit LLRs of Gray-labeled 2^m-PAM observations.

    The output follows the codeword layout of map_psi: m blocks of n_s LLRs,
    v_{m-1} first and the sign block v_0 last.

    Args:
        y: Channel output, one value per PAM signal.
        m: Bits per signal.
        sigma2: Noise variance per real dimension.
        mode: "exact" (log-sum-exp) or "maxlog".

    Raises:
        ParameterError: If sigma2 is not positive.
    """
    if sigma2 <= 0:
        raise ParameterError(f"Noise variance must be positive, got {sigma2}")
    table = gray_table(m)
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    metric = -((y[:, None] - table.amplitudes[None, :]) ** 2) / (2 * sigma2)

    blocks = []
    for b in range(m):
        zero = ((table.label_ints >> b) & 1) == 0
        if mode == "maxlog":
            llr = metric[:, zero].max(axis=1) - metric[:, ~zero].max(axis=1)
        else:
            llr = logsumexp(metric[:, zero], axis=1) - logsumexp(metric[:, ~zero], axis=1)
        blocks.append(llr)
    return np.concatenate(blocks)


@lru_cache(maxsize=8)
def _codebook(c: ShapingConstruction) -> tuple[npt.NDArray[np.uint8], npt.NDArray[np.float64]]:
    info = info_words(c.params.k_c)
    images = c.image(encode_batch(info, c.g_so)).astype(np.float64)
    return info, images


def ml_decode(
    y: npt.ArrayLike,
    c: ShapingConstruction,
    limit: int = DEFAULT_ML_LIMIT,
) -> BinVec:
    """
    Exact minimum-distance decoding in the unshaped code.

    Returns the information word (u_sh, u) whose codeword image is closest to
    y; ties go to the lexicographically smaller information word.

    Raises:
        EnumerationLimitError: If k_c exceeds `limit`.
        DimensionError: If y has the wrong length.
    """
    if c.params.k_c > limit:
        raise EnumerationLimitError("codebook", c.params.k_c, limit)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (c.params.n_s,):
        raise DimensionError(f"Observation has shape {y.shape}, need ({c.params.n_s},)")
    info, images = _codebook(c)
    distances = ((images - y) ** 2).sum(axis=1)
    return info[int(np.argmin(distances))].copy()


# ---------------------------------------------------------------------------
# Belief propagation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BpResult:
    """
    Outcome of belief-propagation decoding.

    Attributes:
        bits: Hard decisions.
        satisfied: Whether every check holds (and no bit was undecided).
        iterations: Iterations run.
    """

    bits: BinVec
    satisfied: bool
    iterations: int


def _phi(x: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    x = np.clip(x, _PHI_FLOOR, LLR_CLIP)
    return -np.log(np.tanh(x / 2))


def _check_update(
    v2c: npt.NDArray[np.float64],
    h: ParityCheck,
    mode: BpMode,
    scale: float = MIN_SUM_SCALE,
) -> npt.NDArray[np.float64]:
    check_idx, starts = h.check_idx, h.check_starts
    mag = np.abs(v2c)
    neg = (v2c < 0).astype(np.int64)
    zero = (v2c == 0).astype(np.int64)

    n_neg = np.add.reduceat(neg, starts)[check_idx] - neg
    n_zero = np.add.reduceat(zero, starts)[check_idx] - zero
    sign = np.where(n_neg % 2 == 1, -1.0, 1.0)
    sign[n_zero > 0] = 0.0

    if mode == "min_sum":
        min1 = np.minimum.reduceat(mag, starts)
        is_min = mag == min1[check_idx]
        ties = np.add.reduceat(is_min.astype(np.int64), starts)[check_idx]
        masked = np.where(is_min, np.inf, mag)
        min2 = np.minimum.reduceat(masked, starts)[check_idx]
        out = np.where(is_min & (ties == 1), min2, min1[check_idx])
        out = np.minimum(scale * out, LLR_CLIP)
    else:
        phis = _phi(mag)
        totals = np.add.reduceat(phis, starts)[check_idx]
        out = np.minimum(_phi(np.maximum(totals - phis, 0.0)), LLR_CLIP)
    return sign * out


def bp_decode(
    llr: LlrVec,
    h: ParityCheck,
    max_iters: int = 50,
    mode: BpMode = "sum_product",
    min_sum_scale: float = MIN_SUM_SCALE,
) -> BpResult:
    """
    Flooding belief propagation with early exit.

    Channel LLRs are clipped to ±30. The check update uses the tanh rule in
    its -log(tanh(x/2)) form; `mode="min_sum"` swaps in the min-sum
    approximation, with messages scaled by `min_sum_scale` (normalized
    min-sum). A bit whose posterior is exactly zero counts as
    undecided and keeps the result unsatisfied.

    Raises:
        DimensionError: If len(llr) differs from the number of variables.
        ParameterError: If min_sum_scale is outside (0, 1].
    """
    if not 0 < min_sum_scale <= 1:
        raise ParameterError(f"min_sum_scale must lie in (0, 1], got {min_sum_scale}")
    llr = np.clip(np.asarray(llr, dtype=np.float64), -LLR_CLIP, LLR_CLIP)
    if llr.shape != (h.n,):
        raise DimensionError(f"LLR vector has shape {llr.shape}, need ({h.n},)")
    var_idx, check_idx = h.var_idx, h.check_idx

    v2c = llr[var_idx]
    hard = (llr < 0).astype(np.uint8)
    for iteration in range(1, max_iters + 1):
        c2v = _check_update(v2c, h, mode, min_sum_scale)
        posterior = llr + np.bincount(var_idx, weights=c2v, minlength=h.n)
        hard = (posterior < 0).astype(np.uint8)
        parity = np.bincount(check_idx, weights=hard[var_idx], minlength=h.checks) % 2
        if not parity.any() and not (posterior == 0).any():
            logger.debug(f"BP converged after {iteration} iterations")
            return BpResult(bits=hard, satisfied=True, iterations=iteration)
        v2c = np.clip(posterior[var_idx] - c2v, -LLR_CLIP, LLR_CLIP)
    return BpResult(bits=hard, satisfied=False, iterations=max_iters)
