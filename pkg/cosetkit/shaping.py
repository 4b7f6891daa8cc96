"""
Coset Shaping Module

Builds the shaping-oriented generator matrix, encodes each message as the
minimum-energy member of its coset family, and strips the shaping component
again after an unshaped decoder has run.

Coordinate conventions of a construction with parameters (k_c, k_sh, n):
    0 .. k_sh-1      shaping (coset-leader) coordinates
    k_sh .. k_c-1    message coordinates, a-bits first
    k_c .. n-1       parity coordinates

The layout string tags every code coordinate 'a' or 's'. Coordinates tagged
'a' fill the amplitude blocks of ψ in order, those tagged 's' fill the sign
block, so the natural layout ('a' * (m-1)·n_s + 's' * n_s) is the identity.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import (
    DimensionError,
    EnumerationLimitError,
    FormatError,
    ParameterError,
    RankDeficientError,
)
from .gf2lin import (
    BinMatrix,
    BinVec,
    as_bits,
    encode,
    encode_batch,
    format_matrix,
    mod2_product,
    info_words,
    read_matrix_block,
    rank,
)
from .mapper import SignalSeq, map_psi_batch

logger = logging.getLogger(__name__)

# Cap on k_sh for the exhaustive coset-leader search (override per call).
DEFAULT_SEARCH_LIMIT = 24
# Cap on k_c (or k) for whole-codebook enumerations.
DEFAULT_ENUMERATION_LIMIT = 24
# Candidate rows evaluated per chunk of the coset-leader search.
SEARCH_CHUNK = 4096
# Shaping codebooks up to this many bytes are kept in memory.
_CACHE_BYTES = 1 << 24


def natural_layout(m: int, n_s: int) -> str:
    return "a" * ((m - 1) * n_s) + "s" * n_s


class ShapingParams(BaseModel):
    """
    Dimensions of a shaping construction.

    Attributes:
        m: Bits per PAM signal.
        n_s: Signals per codeword.
        k: Message bits.
        k_sh: Shaping (coset-leader) bits.
        k_a: Message bits carried as amplitude bits.
        k_s: Message bits carried as sign bits.
        r_a: Parity bits carried as amplitude bits.
        r_s: Parity bits carried as sign bits.
    """

    model_config = ConfigDict(frozen=True)

    m: int = Field(ge=1, le=8)
    n_s: int = Field(ge=1)
    k: int = Field(ge=1)
    k_sh: int = Field(ge=0)
    k_a: int = Field(ge=0)
    k_s: int = Field(ge=0)
    r_a: int = Field(ge=0)
    r_s: int = Field(ge=0)

    @model_validator(mode="after")
    def _check_counts(self) -> ShapingParams:
        problems = []
        if self.k != self.k_a + self.k_s:
            problems.append("k != k_a + k_s")
        if self.k_c > self.n:
            problems.append("k + k_sh > m * n_s")
        if self.k_s + self.r_s != self.n_s:
            problems.append("k_s + r_s != n_s")
        if self.k_a + self.r_a + self.k_sh != self.n_s * (self.m - 1):
            problems.append("k_a + r_a + k_sh != n_s * (m - 1)")
        if self.n_sh > self.k_c:
            problems.append("n_sh exceeds the systematic block")
        if problems:
            raise ValueError("; ".join(problems))
        return self

    @property
    def n(self) -> int:
        return self.m * self.n_s

    @property
    def k_c(self) -> int:
        return self.k + self.k_sh

    @property
    def n_sh(self) -> int:
        return self.k_a + self.k_sh

    @property
    def code_rate(self) -> float:
        """R_c = k_c / n."""
        return self.k_c / self.n

    @property
    def code_rate_per_signal(self) -> float:
        """R̃_c = k_c / n_s."""
        return self.k_c / self.n_s

    @property
    def target_rate(self) -> float:
        """R_T = k / n."""
        return self.k / self.n

    @property
    def target_rate_per_signal(self) -> float:
        """R̃_T = k / n_s."""
        return self.k / self.n_s

    @property
    def shaping_rate(self) -> float:
        """R_sh = k_sh / n_sh."""
        return self.k_sh / self.n_sh if self.n_sh else 0.0

    @classmethod
    def derive(
        cls,
        m: int,
        n_s: int,
        k_c: int,
        k_sh: int,
        layout: str | None = None,
    ) -> ShapingParams:
        """
        Fill in the bit-role counts from a layout.

        Raises:
            ParameterError: If the layout is malformed or puts shaping bits on
                sign positions.
        """
        layout = layout or natural_layout(m, n_s)
        _check_layout(layout, m, n_s)
        if not 0 <= k_sh < k_c <= len(layout):
            raise ParameterError(
                f"Need 0 <= k_sh < k_c <= n, got k_sh={k_sh}, k_c={k_c}, n={len(layout)}"
            )
        if "s" in layout[:k_sh]:
            raise ParameterError("Shaping coordinates must be amplitude bits")
        message, parity = layout[k_sh:k_c], layout[k_c:]
        k_a = message.count("a")
        if "a" in message[k_a:]:
            raise ParameterError("Message amplitude bits must precede message sign bits")
        try:
            return cls(
                m=m,
                n_s=n_s,
                k=k_c - k_sh,
                k_sh=k_sh,
                k_a=k_a,
                k_s=message.count("s"),
                r_a=parity.count("a"),
                r_s=parity.count("s"),
            )
        except ValueError as e:
            raise ParameterError(f"Inconsistent shaping parameters: {e}") from e


def _check_layout(layout: str, m: int, n_s: int) -> None:
    if len(layout) != m * n_s or set(layout) - {"a", "s"}:
        raise ParameterError(f"Layout must be {m * n_s} characters of 'a'/'s'")
    if layout.count("s") != n_s:
        raise ParameterError(f"Layout needs exactly {n_s} sign positions")


@dataclass(frozen=True, eq=False)
class ShapingConstruction:
    """
    A shaping-oriented generator matrix together with its bit layout.

    The top k_sh rows of `g_so` generate the coset leaders, the bottom k rows
    carry the message through an identity block on coordinates k_sh..k_c-1.
    """

    params: ShapingParams
    g_so: BinMatrix
    layout: str

    def __post_init__(self) -> None:
        p = self.params
        if self.g_so.shape != (p.k_c, p.n):
            raise DimensionError(
                f"Generator is {self.g_so.shape}, parameters need {(p.k_c, p.n)}"
            )
        _check_layout(self.layout, p.m, p.n_s)

    @property
    def m(self) -> int:
        return self.params.m

    @property
    def k(self) -> int:
        return self.params.k

    @property
    def k_sh(self) -> int:
        return self.params.k_sh

    @cached_property
    def shaping_rows(self) -> npt.NDArray[np.uint8]:
        """Dense (k_sh, n) block of coset-leader generators."""
        return self.g_so.dense[: self.k_sh]

    @cached_property
    def message_rows(self) -> npt.NDArray[np.uint8]:
        """Dense (k, n) block of message generators."""
        return self.g_so.dense[self.k_sh :]

    @cached_property
    def _message_float(self) -> npt.NDArray[np.float64]:
        return self.g_so.dense_float[self.k_sh :]

    @cached_property
    def _shaping_float(self) -> npt.NDArray[np.float64]:
        return self.g_so.dense_float[: self.k_sh]

    def message_part(self, u: npt.NDArray[np.uint8]) -> npt.NDArray[np.uint8]:
        """u·(message rows) for one message or a 2-D batch."""
        return mod2_product(u, self._message_float)

    def shaping_part(self, u_sh: npt.NDArray[np.uint8]) -> npt.NDArray[np.uint8]:
        """u_sh·(shaping rows); all zeros when k_sh = 0."""
        if not self.k_sh:
            return np.zeros((*u_sh.shape[:-1], self.params.n), dtype=np.uint8)
        return mod2_product(u_sh, self._shaping_float)

    @cached_property
    def psi_order(self) -> npt.NDArray[np.intp]:
        """Code coordinate placed at each ψ position."""
        roles = np.frombuffer(self.layout.encode(), dtype=np.uint8)
        amplitude = np.flatnonzero(roles == ord("a"))
        sign = np.flatnonzero(roles == ord("s"))
        return np.concatenate([amplitude, sign])

    @cached_property
    def code_order(self) -> npt.NDArray[np.intp]:
        """ψ position of each code coordinate (inverse of psi_order)."""
        return np.argsort(self.psi_order)

    @cached_property
    def g_l(self) -> BinMatrix | None:
        """Columns n_sh..n-1 of the shaping rows."""
        if not self.k_sh:
            return None
        return BinMatrix.from_dense(self.shaping_rows[:, self.params.n_sh :])

    def image(self, v: npt.NDArray[np.uint8]) -> npt.NDArray[np.int64]:
        """PAM image of codewords given in code coordinate order (last axis)."""
        return map_psi_batch(v[..., self.psi_order], self.m)

    def signal(self, v: BinVec) -> SignalSeq:
        return SignalSeq(self.m, self.image(v[None, :])[0])

    def shaping_codewords(self, start: int, stop: int) -> npt.NDArray[np.uint8]:
        """Coset leaders u_sh·G_sh for u_sh indices start..stop-1 (lexicographic)."""
        if not self.k_sh:
            return np.zeros((1, self.params.n), dtype=np.uint8)
        cached = self._leader_cache
        if cached is not None:
            return cached[start:stop]
        idx = np.arange(start, stop, dtype=np.int64)[:, None]
        bits = (idx >> np.arange(self.k_sh - 1, -1, -1)) & 1
        return self.shaping_part(bits.astype(np.uint8))

    @cached_property
    def _leader_cache(self) -> npt.NDArray[np.uint8] | None:
        if not self.k_sh or (1 << self.k_sh) * self.params.n > _CACHE_BYTES:
            return None
        leaders = self.shaping_part(info_words(self.k_sh))
        leaders.setflags(write=False)
        return leaders

    def __repr__(self) -> str:
        p = self.params
        return f"ShapingConstruction(m={p.m}, n_s={p.n_s}, k={p.k}, k_sh={p.k_sh})"


@dataclass(frozen=True)
class ShapedWord:
    """
    Result of shaped encoding.

    Attributes:
        u: Message.
        u_sh: Chosen shaping bits.
        v: Transmitted codeword.
        s: Its PAM image.
        energy: Squared norm of s.
        unshaped_energy: Squared norm of the u_sh = 0 candidate.
    """

    u: BinVec
    u_sh: BinVec
    v: BinVec
    s: SignalSeq
    energy: int
    unshaped_energy: int


def random_shaping_code(k_sh: int, n_sh: int, seed: int) -> BinMatrix:
    """Systematic shaping generator (I | P_sh) with P_sh drawn uniformly from a seed."""
    if not 0 < k_sh <= n_sh:
        raise ParameterError(f"Need 0 < k_sh <= n_sh, got k_sh={k_sh}, n_sh={n_sh}")
    rng = np.random.default_rng(seed)
    p_sh = rng.integers(0, 2, size=(k_sh, n_sh - k_sh), dtype=np.uint8)
    return BinMatrix.from_dense(np.hstack([np.eye(k_sh, dtype=np.uint8), p_sh]))


def _is_identity(block: npt.NDArray[np.uint8]) -> bool:
    return bool(np.array_equal(block, np.eye(block.shape[0], dtype=np.uint8)))


def build_construction(
    g: BinMatrix,
    g_sh: BinMatrix | None,
    params: ShapingParams,
    layout: str | None = None,
) -> ShapingConstruction:
    """
    Turn a systematic generator matrix into shaping-oriented form.

    Each of the first k_sh rows is replaced by the sum of the rows of G picked
    out by the support of the matching G_sh row. Because G starts with an
    identity block, the new rows agree with G_sh on the first n_sh columns;
    the remaining columns form G_l = G_sh × G'.

    Args:
        g: k_c × n generator in systematic form (I | B).
        g_sh: k_sh × n_sh shaping generator (I | P_sh), or None when k_sh = 0.
        params: Construction dimensions.
        layout: Per-coordinate 'a'/'s' roles; natural ψ layout by default.

    Raises:
        DimensionError: If matrix shapes do not match the parameters.
        ParameterError: If G or G_sh is not systematic.
        RankDeficientError: If the result lost rank.
    """
    p = params
    if g.shape != (p.k_c, p.n):
        raise DimensionError(f"Generator is {g.shape}, parameters need {(p.k_c, p.n)}")
    dense = g.dense
    if not _is_identity(dense[:, : p.k_c]):
        raise ParameterError("Generator matrix is not in systematic form (I | B)")

    if p.k_sh == 0:
        if g_sh is not None:
            raise DimensionError("Shaping generator given but k_sh = 0")
        g_so = g
    else:
        if g_sh is None or g_sh.shape != (p.k_sh, p.n_sh):
            shape = None if g_sh is None else g_sh.shape
            raise DimensionError(f"Shaping generator is {shape}, need {(p.k_sh, p.n_sh)}")
        sh = g_sh.dense
        if not _is_identity(sh[:, : p.k_sh]):
            raise ParameterError("Shaping generator is not in systematic form (I | P_sh)")
        selector = np.zeros((p.k_sh, p.k_c), dtype=np.uint8)
        selector[:, : p.n_sh] = sh
        top = (selector.astype(np.int64) @ dense) & 1
        g_so = BinMatrix.from_dense(np.vstack([top, dense[p.k_sh :]]).astype(np.uint8))
        if rank(g_so) < p.k_c:
            raise RankDeficientError(rank(g_so), p.k_c)

    construction = ShapingConstruction(params=p, g_so=g_so, layout=layout or natural_layout(p.m, p.n_s))
    logger.debug(f"Built {construction!r} with layout {construction.layout}")
    return construction


def from_shaping_oriented(
    g_so: BinMatrix,
    params: ShapingParams,
    layout: str | None = None,
) -> ShapingConstruction:
    """
    Wrap a matrix that is already in shaping-oriented form.

    Raises:
        ParameterError: If the identity blocks are missing.
    """
    p = params
    c = ShapingConstruction(params=p, g_so=g_so, layout=layout or natural_layout(p.m, p.n_s))
    head = g_so.dense[:, : p.k_c]
    if not _is_identity(head[: p.k_sh, : p.k_sh]) or head[p.k_sh :, : p.k_sh].any():
        raise ParameterError("Shaping rows must start with an identity block")
    if not _is_identity(head[p.k_sh :, p.k_sh :]):
        raise ParameterError("Message rows must carry an identity block on message coordinates")
    return c


def _search_chunk(
    c: ShapingConstruction,
    base: npt.NDArray[np.uint8],
    start: int,
    stop: int,
) -> tuple[int, int]:
    candidates = base ^ c.shaping_codewords(start, stop)
    amps = c.image(candidates)
    energies = np.einsum("ij,ij->i", amps, amps)
    best = int(np.argmin(energies))
    return int(energies[best]), start + best


def encode_shaped(
    u: BinVec,
    c: ShapingConstruction,
    search_limit: int = DEFAULT_SEARCH_LIMIT,
    workers: int = 1,
) -> ShapedWord:
    """
    Encode a message as the minimum-energy candidate over all coset leaders.

    All 2^k_sh candidates (u_sh u)·G_so are evaluated; ties go to the
    lexicographically smallest u_sh. With workers > 1 the candidate range is
    split across threads and reduced by (energy, u_sh), so the result does
    not depend on scheduling.

    Raises:
        DimensionError: If len(u) != k.
        EnumerationLimitError: If k_sh exceeds search_limit.
    """
    u = as_bits(u)
    if u.size != c.k:
        raise DimensionError(f"Message length {u.size} does not match k={c.k}")
    if c.k_sh > search_limit:
        raise EnumerationLimitError("coset leaders", c.k_sh, search_limit)

    base = c.message_part(u)
    total = 1 << c.k_sh
    bounds = [(lo, min(lo + SEARCH_CHUNK, total)) for lo in range(0, total, SEARCH_CHUNK)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda b: _search_chunk(c, base, *b), bounds))
    else:
        results = [_search_chunk(c, base, lo, hi) for lo, hi in bounds]
    energy, index = min(results)

    u_sh = ((index >> np.arange(c.k_sh - 1, -1, -1)) & 1).astype(np.uint8)
    v = base ^ c.shaping_codewords(index, index + 1)[0]
    s = c.signal(v)
    unshaped = c.image(base[None, :])[0]
    return ShapedWord(
        u=u,
        u_sh=u_sh,
        v=v,
        s=s,
        energy=energy,
        unshaped_energy=int(np.dot(unshaped, unshaped)),
    )


def decode_shaped(info_hat: BinVec, c: ShapingConstruction) -> BinVec:
    """
    Recover the message from an unshaped decoder's information estimate.

    The shaping component v̂_sh = ũ_sh·(shaping rows) is stripped from the
    estimated codeword and the message is read from the systematic message
    coordinates.

    Raises:
        DimensionError: If len(info_hat) != k_c.
    """
    info_hat = as_bits(info_hat)
    p = c.params
    if info_hat.size != p.k_c:
        raise DimensionError(f"Information estimate has length {info_hat.size}, need {p.k_c}")
    v_tilde = encode(info_hat, c.g_so)
    v_sh = c.shaping_part(info_hat[: p.k_sh])
    v_hat = v_tilde ^ v_sh
    return v_hat[p.k_sh : p.k_c]


def info_from_codeword(v: BinVec, c: ShapingConstruction) -> BinVec:
    """
    Read (ũ_sh, ũ) off a codeword estimate of G_so.

    Exact for codewords; for non-codewords (a failed BP run) it returns the
    information word implied by the systematic coordinates.
    """
    v = as_bits(v)
    p = c.params
    if v.size != p.n:
        raise DimensionError(f"Codeword has length {v.size}, need {p.n}")
    u_sh = v[: p.k_sh]
    v_sh = c.shaping_part(u_sh)
    return np.concatenate([u_sh, (v ^ v_sh)[p.k_sh : p.k_c]])


def _check_enumerable(bits: int, what: str, limit: int) -> None:
    if bits > limit:
        raise EnumerationLimitError(what, bits, limit)


def shaped_signal_set(
    c: ShapingConstruction,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> list[SignalSeq]:
    """
    The shaped sequence selected for every message, in lexicographic message order.

    Matches encode_shaped message by message, including its tie rule.
    """
    _check_enumerable(c.k, "messages", limit)
    base = c.message_part(info_words(c.k))
    best_energy = np.full(base.shape[0], np.iinfo(np.int64).max, dtype=np.int64)
    best_amps = np.zeros((base.shape[0], c.params.n_s), dtype=np.int64)
    for index in range(1 << c.k_sh):
        amps = c.image(base ^ c.shaping_codewords(index, index + 1))
        energies = np.einsum("ij,ij->i", amps, amps)
        better = energies < best_energy
        best_energy[better] = energies[better]
        best_amps[better] = amps[better]
    return [SignalSeq(c.m, row) for row in best_amps]


def coset_energy_table(
    c: ShapingConstruction,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> list[float]:
    """
    Per-signal average energy of each coset, in lexicographic coset-leader order.
    """
    _check_enumerable(c.params.k_c, "codebook", limit)
    base = c.message_part(info_words(c.k))
    table = []
    for index in range(1 << c.k_sh):
        amps = c.image(base ^ c.shaping_codewords(index, index + 1))
        table.append(float(np.sum(amps * amps)) / (amps.shape[0] * c.params.n_s))
    return table


def sphere_shaper_bruteforce(
    c: ShapingConstruction,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> list[SignalSeq]:
    """
    The 2^k minimum-energy members of the whole code's PAM image.

    A brute-force stand-in for sphere shaping at desk scale. Ties are broken
    by lexicographic order of the codeword.
    """
    _check_enumerable(c.params.k_c, "codebook", limit)
    codewords = encode_batch(info_words(c.params.k_c), c.g_so)
    amps = c.image(codewords)
    energies = np.einsum("ij,ij->i", amps, amps)
    keys = [codewords[:, j] for j in range(codewords.shape[1] - 1, -1, -1)]
    order = np.lexsort((*keys, energies))
    return [SignalSeq(c.m, amps[i]) for i in order[: 1 << c.k]]


_PARAM_KEYS = ("m", "n_s", "k", "k_sh", "k_a", "k_s", "r_a", "r_s")


def dump_construction(c: ShapingConstruction) -> str:
    """Serialize as the matrix text format followed by a key = value block."""
    lines = [format_matrix(c.g_so).rstrip("\n")]
    values = c.params.model_dump()
    lines.extend(f"{key} = {values[key]}" for key in _PARAM_KEYS)
    lines.append(f"layout = {c.layout}")
    return "\n".join(lines) + "\n"


def load_construction(text: str) -> ShapingConstruction:
    """
    Parse the output of dump_construction.

    Raises:
        FormatError: On malformed documents or missing keys.
        ParameterError: If the matrix is not in shaping-oriented form.
    """
    g_so, rest = read_matrix_block(text)
    values: dict[str, str] = {}
    for line_no, line in rest:
        key, sep, value = line.partition("=")
        if not sep:
            raise FormatError(f"Expected 'key = value', got {line!r}", line_no)
        values[key.strip()] = value.strip()
    missing = [k for k in (*_PARAM_KEYS, "layout") if k not in values]
    if missing:
        raise FormatError(f"Missing construction keys: {', '.join(missing)}")
    unknown = set(values) - {*_PARAM_KEYS, "layout"}
    if unknown:
        raise FormatError(f"Unknown construction keys: {', '.join(sorted(unknown))}")
    try:
        params = ShapingParams(**{k: int(values[k]) for k in _PARAM_KEYS})
    except ValueError as e:
        raise FormatError(f"Invalid construction parameters: {e}") from e
    return from_shaping_oriented(g_so, params, values["layout"])
