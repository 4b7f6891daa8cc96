"""
Tests for the AWGN channel.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from cosetkit.channel import ChannelParams, RngSeed, add_noise, sigma_to_snr, snr_to_sigma
from cosetkit.errors import ParameterError
from cosetkit.mapper import SignalSeq


def test_snr_convention():
    """Test σ² = Es / 10^(SNR/10)."""
    assert snr_to_sigma(0.0, 5.0) == pytest.approx(5.0)
    assert snr_to_sigma(10.0, 21.0) == pytest.approx(2.1)
    assert sigma_to_snr(2.1, 21.0) == pytest.approx(10.0)


def test_snr_rejects_bad_energy():
    """Test non-positive energies and variances."""
    with pytest.raises(ParameterError):
        snr_to_sigma(10.0, 0.0)
    with pytest.raises(ParameterError):
        sigma_to_snr(0.0, 1.0)


def test_channel_params():
    """Test ChannelParams built from an SNR reports it back."""
    p = ChannelParams.from_snr(12.5, 9.0)
    assert p.snr_db == pytest.approx(12.5)
    assert p.model_dump()["snr_db"] == pytest.approx(12.5)
    with pytest.raises(ValidationError):
        ChannelParams(sigma2=0.0, es=1.0)


def test_noise_is_reproducible():
    """Test the same stream gives the same noise and other streams differ."""
    s = SignalSeq.of(3, [1, -1, 5, 7])
    p = ChannelParams(sigma2=0.5, es=21.0)
    a = add_noise(s, p, RngSeed(master=3, stream=9))
    b = add_noise(s, p, RngSeed(master=3, stream=9))
    c = add_noise(s, p, RngSeed(master=3, stream=10))
    d = add_noise(s, p, RngSeed(master=4, stream=9))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_purposes_are_independent():
    """Test sub-streams of one seed differ."""
    seed = RngSeed(master=1, stream=2)
    assert seed.generator(1).random() != seed.generator().random()


def test_noise_statistics():
    """Test the noise is zero-mean with the requested variance."""
    p = ChannelParams(sigma2=0.25, es=1.0)
    y = add_noise(np.zeros(200_000), p, RngSeed(master=0))
    assert abs(y.mean()) < 0.005
    assert y.var() == pytest.approx(0.25, rel=0.02)


def test_rng_seed_validation():
    """Test seeds must be non-negative."""
    with pytest.raises(ValidationError):
        RngSeed(master=-1)


def test_noise_independent_of_signal():
    """Test the noise is uncorrelated with the signal and the variances add."""
    rng = np.random.default_rng(11)
    x = (2 * rng.integers(0, 8, size=200_000) - 7).astype(np.float64)
    p = ChannelParams(sigma2=2.0, es=21.0)
    y = add_noise(x, p, RngSeed(master=6))
    e = y - x
    assert abs(np.corrcoef(x, e)[0, 1]) < 0.01
    assert y.var() == pytest.approx(x.var() + 2.0, rel=0.02)
