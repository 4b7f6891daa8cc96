"""
Tests for demapping, ML decoding and belief propagation.
"""

import math

import numpy as np
import pytest

from cosetkit.channel import ChannelParams, RngSeed, add_noise
from cosetkit.decoding import (
    LLR_CLIP,
    ParityCheck,
    bp_decode,
    demap_llr,
    make_regular_ldpc,
    ml_decode,
    parse_alist,
    serialize_alist,
)
from cosetkit.errors import DimensionError, EnumerationLimitError, FormatError, ParameterError
from cosetkit.gf2lin import BinMatrix, enumerate_codewords, info_words
from cosetkit.mapper import gray_table
from cosetkit.presets import example2_construction, example3_construction
from cosetkit.shaping import ShapingParams, build_construction, encode_shaped

HAMMING = [
    [1, 0, 1, 0, 1, 0, 1],
    [0, 1, 1, 0, 0, 1, 1],
    [0, 0, 0, 1, 1, 1, 1],
]

SMALL_ALIST = """4 2
2 3
1 2 1 1
2 3
1 0
1 2
2 0
2 0
1 2 0
2 3 4
"""


@pytest.fixture
def hamming():
    return ParityCheck.from_dense(HAMMING)


@pytest.fixture
def ldpc():
    return make_regular_ldpc(96, 3, 6, seed=1)


class TestDemapper:
    """Test bit LLRs of Gray-labeled PAM."""

    def test_bpsk_value(self):
        """Test 2-PAM: LLR = -2y/σ², so y = 1, σ² = 0.5 gives -4."""
        assert demap_llr([1.0], 1, 0.5)[0] == pytest.approx(-4.0)

    def test_block_layout(self):
        """Test LLR blocks follow the codeword layout, sign block last."""
        llr = demap_llr([100.0, -100.0], 3, 1.0)
        # +7 carries label 100 and -7 carries 000.
        assert llr.shape == (6,)
        assert (llr[:4] > 0).all()
        assert llr[4] < 0 and llr[5] > 0

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_matches_symbol_posterior(self, m):
        """Test exact LLRs reproduce bit posteriors from the symbol posterior."""
        table = gray_table(m)
        sigma2 = 0.8
        y = np.linspace(-(1 << m), 1 << m, 17)
        llr = demap_llr(y, m, sigma2).reshape(m, -1)
        post = np.exp(-((y[:, None] - table.amplitudes[None, :]) ** 2) / (2 * sigma2))
        post /= post.sum(axis=1, keepdims=True)
        for b in range(m):
            zero = ((table.label_ints >> b) & 1) == 0
            p0 = post[:, zero].sum(axis=1)
            assert 1 / (1 + np.exp(-llr[b])) == pytest.approx(p0, rel=1e-9, abs=1e-12)

    def test_maxlog_close_to_exact(self):
        """Test max-log stays within log 4 of the exact LLR for 8-PAM."""
        y = np.linspace(-10, 10, 201)
        exact = demap_llr(y, 3, 1.0)
        maxlog = demap_llr(y, 3, 1.0, mode="maxlog")
        assert np.abs(exact - maxlog).max() <= math.log(4) + 1e-9

    def test_bad_variance(self):
        """Test non-positive noise variance."""
        with pytest.raises(ParameterError):
            demap_llr([0.0], 2, 0.0)


class TestMlDecode:
    """Test exhaustive minimum-distance decoding."""

    def test_noiseless(self):
        """Test noiseless images decode to their information words."""
        c = example2_construction()
        for u in info_words(c.k):
            word = encode_shaped(u, c)
            info = ml_decode(word.s.amps.astype(float), c)
            assert info.tolist() == word.u_sh.tolist() + u.tolist()

    def test_matches_naive_search(self):
        """Test against a plain loop over the codebook."""
        c = example3_construction()
        info, codewords = enumerate_codewords(c.g_so)
        images = c.image(codewords).astype(float)
        rng = np.random.default_rng(2)
        for _ in range(50):
            y = rng.normal(0, 2, size=3)
            distances = [float(((img - y) ** 2).sum()) for img in images]
            best = distances.index(min(distances))
            assert ml_decode(y, c).tolist() == info[best].tolist()

    def test_tie_goes_to_smaller_word(self):
        """Test an observation halfway between -1 and +1."""
        params = ShapingParams(m=1, n_s=1, k=1, k_sh=0, k_a=0, k_s=1, r_a=0, r_s=0)
        c = build_construction(BinMatrix.identity(1), None, params)
        assert ml_decode([0.0], c).tolist() == [0]

    def test_high_snr_no_errors(self):
        """Test ten thousand noisy frames at σ² = 1e-4 decode without error."""
        c = example3_construction()
        p = ChannelParams(sigma2=1e-4, es=3.0)
        rng = np.random.default_rng(0)
        for frame in range(10_000):
            u = rng.integers(0, 2, size=c.k).astype(np.uint8)
            word = encode_shaped(u, c)
            y = add_noise(word.s, p, RngSeed(master=0, stream=frame))
            assert ml_decode(y, c)[1:].tolist() == u.tolist()

    def test_limits(self):
        """Test the codebook cap and the observation length."""
        c = example3_construction()
        with pytest.raises(EnumerationLimitError):
            ml_decode([0.0, 0.0, 0.0], c, limit=2)
        with pytest.raises(DimensionError):
            ml_decode([0.0, 0.0], c)


class TestParityCheck:
    """Test parity-check structure and alist I/O."""

    def test_parse_alist(self):
        """Test a small alist document."""
        h = parse_alist(SMALL_ALIST)
        assert (h.checks, h.n) == (2, 4)
        assert h.to_dense().tolist() == [[1, 1, 0, 0], [0, 1, 1, 1]]
        assert h.variable_lists() == [[0], [0, 1], [1], [1]]

    def test_serialize_alist(self, hamming):
        """Test serialized documents parse back to the same matrix."""
        assert parse_alist(serialize_alist(hamming)) == hamming
        assert parse_alist(SMALL_ALIST) == parse_alist(serialize_alist(parse_alist(SMALL_ALIST)))

    def test_row_section_optional(self):
        """Test documents without the row lists."""
        text = "\n".join(SMALL_ALIST.splitlines()[:8])
        assert parse_alist(text).to_dense().tolist() == [[1, 1, 0, 0], [0, 1, 1, 1]]

    def test_index_out_of_range(self):
        """Test a check index beyond m."""
        text = SMALL_ALIST.replace("1 0\n1 2\n", "3 0\n1 2\n", 1)
        with pytest.raises(FormatError):
            parse_alist(text)

    def test_degree_mismatch(self):
        """Test a column list that disagrees with its degree."""
        text = SMALL_ALIST.replace("1 2 1 1", "2 2 1 1", 1)
        with pytest.raises(FormatError):
            parse_alist(text)

    def test_max_degree_mismatch(self):
        """Test the max-degree line must match the degree lists."""
        text = SMALL_ALIST.replace("4 2\n2 3\n", "4 2\n3 3\n", 1)
        with pytest.raises(FormatError) as exc_info:
            parse_alist(text)
        assert exc_info.value.details == {"line": 2}

    def test_malformed_header(self):
        """Test a non-numeric header."""
        with pytest.raises(FormatError):
            parse_alist("x y\n" + SMALL_ALIST.split("\n", 1)[1])

    def test_empty_column(self):
        """Test a variable in no check."""
        with pytest.raises(ParameterError):
            ParityCheck.from_dense([[1, 0], [1, 0]])

    def test_syndrome(self, hamming):
        """Test a codeword has zero syndrome and a flipped bit does not."""
        assert not hamming.syndrome([1, 1, 1, 0, 0, 0, 0]).any()
        assert hamming.syndrome([0, 0, 0, 0, 0, 0, 1]).tolist() == [1, 1, 1]

    def test_regular_ldpc(self, ldpc):
        """Test degrees of the seeded regular construction."""
        dense = ldpc.to_dense()
        assert dense.shape == (48, 96)
        assert (dense.sum(axis=0) == 3).all()
        assert (dense.sum(axis=1) == 6).all()
        assert make_regular_ldpc(96, 3, 6, seed=1) == ldpc
        with pytest.raises(ParameterError):
            make_regular_ldpc(100, 3, 6, seed=0)


class TestBeliefPropagation:
    """Test flooding BP decoding."""

    @pytest.mark.parametrize("position", [0, 1, 3])
    @pytest.mark.parametrize("mode", ["sum_product", "min_sum"])
    def test_corrects_single_error(self, hamming, position, mode):
        """Test one flipped bit of the all-zero Hamming codeword is corrected."""
        llr = np.full(7, 10.0)
        llr[position] = -10.0
        result = bp_decode(llr, hamming, max_iters=10, mode=mode)
        assert result.satisfied
        assert not result.bits.any()

    @pytest.mark.parametrize("position", [0, 1, 3])
    def test_min_sum_equal_magnitudes(self, hamming, position):
        """Test normalized min-sum settles a single error on equal-magnitude LLRs in two iterations."""
        llr = np.full(7, 10.0)
        llr[position] = -10.0
        result = bp_decode(llr, hamming, max_iters=2, mode="min_sum")
        assert result.satisfied
        assert result.iterations == 2
        assert not result.bits.any()

    def test_min_sum_scale_range(self, hamming):
        """Test the min-sum normalization must lie in (0, 1]."""
        for scale in (0.0, 1.5):
            with pytest.raises(ParameterError):
                bp_decode(np.ones(7), hamming, mode="min_sum", min_sum_scale=scale)

    def test_clean_codeword_one_iteration(self, hamming):
        """Test confident codeword LLRs converge at once."""
        c = np.array([1, 1, 1, 0, 0, 0, 0])
        result = bp_decode(LLR_CLIP * (1 - 2 * c), hamming)
        assert result.satisfied
        assert result.iterations == 1
        assert result.bits.tolist() == c.tolist()

    def test_zero_llrs_never_satisfied(self, hamming):
        """Test all-zero LLRs leave every bit undecided."""
        result = bp_decode(np.zeros(7), hamming, max_iters=5)
        assert not result.satisfied
        assert result.iterations == 5

    def test_negation_symmetry(self, ldpc):
        """Test negated LLRs give complemented decisions when dc is even."""
        rng = np.random.default_rng(4)
        for _ in range(5):
            llr = rng.normal(2.0, 2.0, size=96)
            a = bp_decode(llr, ldpc, max_iters=20)
            b = bp_decode(-llr, ldpc, max_iters=20)
            assert b.bits.tolist() == (1 - a.bits).tolist()
            assert a.satisfied == b.satisfied
            assert a.iterations == b.iterations

    def test_more_iterations_never_hurt(self, ldpc):
        """Test frame errors do not grow with the iteration cap."""
        rng = np.random.default_rng(8)
        sigma = 0.8
        frames = [2 * (1 + sigma * rng.standard_normal(96)) / sigma**2 for _ in range(40)]
        errors = []
        for cap in (1, 5, 50):
            results = [bp_decode(llr, ldpc, max_iters=cap) for llr in frames]
            errors.append(sum(1 for r in results if r.bits.any() or not r.satisfied))
        assert errors[0] >= errors[1] >= errors[2]

    def test_wrong_length(self, hamming):
        """Test an LLR vector of the wrong size."""
        with pytest.raises(DimensionError):
            bp_decode(np.zeros(6), hamming)
