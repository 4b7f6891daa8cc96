"""
Tests for Gray-labeled PAM mapping.
"""

import numpy as np
import pytest

from cosetkit.errors import DimensionError, ParameterError
from cosetkit.gf2lin import info_words
from cosetkit.mapper import (
    SignalSeq,
    amplitude_table,
    gray_table,
    map_psi,
    map_psi_batch,
    pair_qam,
    total_energy,
    unmap_psi,
)


def test_gray_table_8pam():
    """Test the 8-PAM labels, most negative amplitude first."""
    table = gray_table(3)
    assert table.labels == ("000", "001", "011", "010", "110", "111", "101", "100")
    assert table.amplitudes.tolist() == [-7, -5, -3, -1, 1, 3, 5, 7]
    assert table.rows()[4] == (1, "110")


def test_gray_table_bad_m():
    """Test m outside 1..8."""
    with pytest.raises(ParameterError):
        gray_table(0)
    with pytest.raises(ParameterError):
        gray_table(9)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 6])
def test_gray_property(m):
    """Test neighbouring amplitudes differ in exactly one label bit."""
    bits = gray_table(m).bit_matrix()
    assert (np.abs(np.diff(bits.astype(int), axis=0)).sum(axis=1) == 1).all()


@pytest.mark.parametrize("m", [2, 3, 4])
def test_first_label_bit_is_sign(m):
    """Test the most significant label bit is set exactly on positive amplitudes."""
    table = gray_table(m)
    msb = table.bit_matrix()[:, 0]
    assert msb.tolist() == (table.amplitudes > 0).astype(int).tolist()


def test_amplitude_table():
    """Test amplitudes are odd and symmetric."""
    amps = amplitude_table(4)
    assert amps[0] == -15 and amps[-1] == 15
    assert (amps % 2 == 1).all()
    assert (amps == -amps[::-1]).all()


def test_map_psi_example1():
    """Test the codeword 110011 maps to (5, 5)."""
    s = map_psi([1, 1, 0, 0, 1, 1], 3)
    assert s == SignalSeq.of(3, [5, 5])
    assert s.energy == 50


def test_map_psi_sign_block():
    """Test the last block alone decides the signs."""
    s = map_psi([0, 0, 0, 0, 1, 0], 3)
    assert s.amps.tolist() == [7, -7]


def test_map_psi_bad_length():
    """Test a length not divisible by m."""
    with pytest.raises(DimensionError):
        map_psi([1, 0, 1, 1], 3)


def test_unmap_psi_inverts_map():
    """Test unmap_psi on every 2-signal 4-PAM word."""
    for v in info_words(4):
        assert unmap_psi(map_psi(v, 2)).tolist() == v.tolist()


def test_psi_is_bijective():
    """Test all 2^16 words with m = 4, n_s = 4 map to distinct sequences."""
    images = map_psi_batch(info_words(16), 4)
    assert images.shape == (1 << 16, 4)
    assert len(np.unique(images, axis=0)) == 1 << 16


def test_pair_qam():
    """Test pairing consecutive signals."""
    assert pair_qam(SignalSeq.of(2, [1, -1, 3, -3])) == [(1, -1), (3, -3)]
    with pytest.raises(DimensionError):
        pair_qam(SignalSeq.of(2, [1, -1, 3]))


class TestSignalSeq:
    """Test signal sequence validation."""

    def test_even_amplitude(self):
        """Test even amplitudes are rejected."""
        with pytest.raises(ParameterError):
            SignalSeq.of(2, [1, 2])

    def test_out_of_range(self):
        """Test amplitudes beyond 2^m - 1."""
        with pytest.raises(ParameterError):
            SignalSeq.of(2, [5])

    def test_empty(self):
        """Test the empty sequence."""
        with pytest.raises(DimensionError):
            SignalSeq.of(2, [])

    def test_immutable(self):
        """Test the amplitude array is read-only and detached from the input."""
        source = np.array([1, 3])
        s = SignalSeq(2, source)
        source[0] = -3
        assert s.amps.tolist() == [1, 3]
        with pytest.raises(ValueError):
            s.amps[0] = 3

    def test_hash_and_energy(self):
        """Test equal sequences hash alike and energies add up."""
        a, b = SignalSeq.of(3, [1, -1]), SignalSeq.of(3, [1, -1])
        assert a == b and hash(a) == hash(b)
        assert len({a, b}) == 1
        assert total_energy([a, SignalSeq.of(3, [7, 7])]) == 100
