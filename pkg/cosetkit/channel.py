"""
Channel Module

AWGN channel with an explicit SNR convention and reproducible noise.

SNR is defined per real (PAM) dimension as Es/σ², where Es is the average
energy per PAM signal and σ² the noise variance per real dimension. A QAM
symbol uses the same convention on both of its dimensions, so QAM-level SNR
in reports is the same number.
"""

from __future__ import annotations

import math

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, computed_field

from .errors import ParameterError
from .mapper import SignalSeq


class ChannelParams(BaseModel):
    """
    Noise and signal levels of one AWGN operating point.

    Attributes:
        sigma2: Noise variance per real dimension.
        es: Average signal energy per PAM signal.
    """

    model_config = ConfigDict(frozen=True)

    sigma2: float = Field(gt=0)
    es: float = Field(gt=0)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def snr_db(self) -> float:
        return sigma_to_snr(self.sigma2, self.es)

    @classmethod
    def from_snr(cls, snr_db: float, es: float) -> ChannelParams:
        return cls(sigma2=snr_to_sigma(snr_db, es), es=es)


class RngSeed(BaseModel):
    """
    Identifies one reproducible random stream.

    The same (master, stream) pair always yields the same numbers, whatever
    thread or process draws them.
    """

    model_config = ConfigDict(frozen=True)

    master: int = Field(ge=0, lt=1 << 64)
    stream: int = Field(default=0, ge=0)

    def generator(self, *purpose: int) -> np.random.Generator:
        """A Generator for this stream; `purpose` separates independent sub-streams."""
        seq = np.random.SeedSequence(entropy=self.master, spawn_key=(self.stream, *purpose))
        return np.random.Generator(np.random.PCG64(seq))


def snr_to_sigma(snr_db: float, es: float) -> float:
    """
    Noise variance for a given SNR: σ² = Es / 10^(snr_db / 10).

    Raises:
        ParameterError: If es is not positive.
    """
    if es <= 0:
        raise ParameterError(f"Signal energy must be positive, got {es}")
    return es / 10 ** (snr_db / 10)


def sigma_to_snr(sigma2: float, es: float) -> float:
    """SNR in dB for a given noise variance."""
    if sigma2 <= 0 or es <= 0:
        raise ParameterError(f"Need positive es and sigma2, got es={es}, sigma2={sigma2}")
    return 10 * math.log10(es / sigma2)


def add_noise(
    s: SignalSeq | npt.ArrayLike,
    p: ChannelParams,
    seed: RngSeed,
) -> npt.NDArray[np.float64]:
    """
    Pass a signal sequence through the AWGN channel.

    Returns:
        y = s + e with e i.i.d. zero-mean Gaussian of variance p.sigma2,
        drawn from the stream named by `seed`.

    Raises:
        ParameterError: If the noise variance is not positive.
    """
    if p.sigma2 <= 0:
        raise ParameterError(f"Noise variance must be positive, got {p.sigma2}")
    x = np.asarray(s.amps if isinstance(s, SignalSeq) else s, dtype=np.float64)
    noise = seed.generator().standard_normal(x.shape)
    return x + math.sqrt(p.sigma2) * noise
