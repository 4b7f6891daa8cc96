"""
Metrics Module

Energy, gain, capacity-limit and NSM computations used to quantify shaping.

Mutual information is computed per real dimension with Gauss–Hermite
quadrature over the Gaussian noise; square 2^{2m}-QAM values are twice the
2^m-PAM values because the two quadratures are independent. SNR follows the
channel convention (average energy per PAM signal over noise variance per
real dimension).
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from functools import lru_cache
from typing import Literal

import numpy as np
import numpy.typing as npt
from numpy.polynomial.hermite import hermgauss
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import brentq, minimize_scalar
from scipy.special import gammaln, logsumexp

from .errors import DimensionError, NumericalError, ParameterError
from .mapper import GrayTable, SignalSeq, amplitude_table, gray_table, total_energy

logger = logging.getLogger(__name__)

CapacityKind = Literal["shannon", "cm_qam", "bicm", "shaped_qam"]

# Thresholds below this are reported as the floor value.
SNR_FLOOR_DB = -50.0
SNR_CEILING_DB = 80.0
MI_TOLERANCE = 1e-6
_MIN_NODES = 32
_MAX_NODES = 512
_LOG2E = 1 / math.log(2)


class CapacityPoint(BaseModel):
    """
    One threshold on a capacity curve.

    Attributes:
        snr_db: SNR where the curve reaches `bits_per_qam`.
        bits_per_qam: Target rate in bits per QAM symbol.
        kind: Which curve.
        m: Bits per PAM dimension of the constellation, when one is involved.
    """

    model_config = ConfigDict(frozen=True)

    snr_db: float
    bits_per_qam: float = Field(ge=0)
    kind: CapacityKind
    m: int | None = Field(default=None, ge=1, le=8)

    @model_validator(mode="after")
    def _check_rate(self) -> CapacityPoint:
        if self.m is not None and self.bits_per_qam > 2 * self.m:
            raise ValueError(f"bits_per_qam {self.bits_per_qam} exceeds 2m = {2 * self.m}")
        return self


class EnergyReport(BaseModel):
    """
    Energy and rate summary of a shaping construction.

    Attributes:
        per_signal_energy: Average shaped energy per PAM signal.
        unshaped_energy: Uniform 2^m-PAM reference, (M² − 1) / 3.
        gain_db: 10·log10(unshaped / shaped).
        rate_per_signal: R̃_T, message bits per signal.
        code_rate_per_signal: R̃_c, code bits (message + shaping) per signal.
        sphere_energy: Energy of the brute-force sphere shaper, when enumerable.
        exact: Whether the energy came from full enumeration.
        samples: Messages drawn when it did not.
    """

    model_config = ConfigDict(frozen=True)

    per_signal_energy: float = Field(gt=0)
    unshaped_energy: float = Field(gt=0)
    gain_db: float
    rate_per_signal: float
    code_rate_per_signal: float
    sphere_energy: float | None = None
    exact: bool = True
    samples: int | None = None


# ---------------------------------------------------------------------------
# Energy
# ---------------------------------------------------------------------------


def avg_energy(points: Sequence[SignalSeq]) -> float:
    """
    Average energy per signal over a set of sequences: mean ‖s‖² / n_s.

    Raises:
        ParameterError: If the set is empty.
        DimensionError: If the sequences differ in length.
    """
    if not points:
        raise ParameterError("Cannot average over an empty set")
    lengths = {p.n_s for p in points}
    if len(lengths) != 1:
        raise DimensionError(f"Sequences differ in length: {sorted(lengths)}")
    n_s = lengths.pop()
    return total_energy(points) / (len(points) * n_s)


def uniform_pam_energy(m: int) -> float:
    """(M² − 1) / 3, the energy of uniform 2^m-PAM."""
    order = 1 << m
    return (order * order - 1) / 3


def shaping_gain_db(e_unshaped: float, e_shaped: float) -> float:
    """
    Shaping gain 10·log10(e_unshaped / e_shaped).

    Raises:
        ParameterError: If either energy is not positive.
    """
    if e_unshaped <= 0 or e_shaped <= 0:
        raise ParameterError(f"Energies must be positive, got {e_unshaped} and {e_shaped}")
    return 10 * math.log10(e_unshaped / e_shaped)


def nsm_estimate(points: Sequence[SignalSeq]) -> float:
    """
    Discrete estimate of the normalized second moment of a signal set.

    Each point is credited a Voronoi cell of volume 2^{n_s} (PAM spacing 2),
    which gives G ≈ P / (4·|set|^{2/n_s}) with P the per-signal energy. The
    estimate approaches the continuous NSM as the set grows denser. Duplicate
    points count once.
    """
    distinct = list(dict.fromkeys(points))
    p = avg_energy(distinct)
    n_s = distinct[0].n_s
    return p / (4 * len(distinct) ** (2 / n_s))


# ---------------------------------------------------------------------------
# Capacity and mutual information
# ---------------------------------------------------------------------------


def shannon_limit_snr(bits_per_qam: float) -> float:
    """
    SNR in dB where log₂(1 + snr) reaches the given rate per QAM symbol.

    Raises:
        ParameterError: If the rate is not positive.
    """
    if bits_per_qam <= 0:
        raise ParameterError(f"Rate must be positive, got {bits_per_qam}")
    return 10 * math.log10(2**bits_per_qam - 1)


def shannon_capacity(snr_db: float) -> float:
    """AWGN capacity in bits per QAM symbol."""
    return math.log2(1 + 10 ** (snr_db / 10))


@lru_cache(maxsize=16)
def _hermite(nodes: int) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    t, w = hermgauss(nodes)
    # E[f(Z)] for Z ~ N(0, 1) is Σ w_k f(√2 t_k) / √π.
    return math.sqrt(2) * t, w / math.sqrt(math.pi)


def _expect(fn: Callable[[npt.NDArray[np.float64]], float]) -> float:
    """Gauss–Hermite expectation over a standard normal, doubling nodes until stable."""
    nodes = _MIN_NODES
    z, w = _hermite(nodes)
    value = fn(z) @ w
    while nodes < _MAX_NODES:
        nodes *= 2
        z, w = _hermite(nodes)
        refined = fn(z) @ w
        if abs(refined - value) < MI_TOLERANCE:
            return float(refined)
        value = refined
    logger.debug(f"Quadrature stopped at {nodes} nodes")
    return float(value)


def _pam_setup(
    m: int,
    snr_db: float,
    probabilities: npt.ArrayLike | None,
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64], float]:
    x = amplitude_table(m).astype(np.float64)
    if probabilities is None:
        p = np.full(x.size, 1 / x.size)
    else:
        p = np.asarray(probabilities, dtype=np.float64)
        if p.shape != x.shape or (p < 0).any() or not math.isclose(p.sum(), 1.0, rel_tol=1e-9):
            raise ParameterError(f"Need {x.size} probabilities summing to one")
    es = float(p @ (x * x))
    sigma = math.sqrt(es / 10 ** (snr_db / 10))
    return x, p, sigma


def pam_mi(m: int, snr_db: float, probabilities: npt.ArrayLike | None = None) -> float:
    """
    Mutual information of 2^m-PAM over AWGN in bits per real dimension.

    Args:
        m: Bits per signal.
        snr_db: Es/σ² in dB, Es taken under `probabilities`.
        probabilities: Input distribution over amplitudes in increasing
            order; uniform when omitted.
    """
    gray_table(m)
    x, p, sigma = _pam_setup(m, snr_db, probabilities)
    support = p > 0
    x, p = x[support], p[support]
    d = x[:, None] - x[None, :]
    log_p = np.log(p)

    def loss(z: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        # Exponent of p(y|x_j)/p(y|x_i) for y = x_i + σz, shape (i, j, node).
        expo = -(d[:, :, None] ** 2 + 2 * d[:, :, None] * sigma * z) / (2 * sigma * sigma)
        lse = logsumexp(expo + log_p[None, :, None], axis=1)
        return p @ lse

    mi = (-_expect(loss)) * _LOG2E
    if not math.isfinite(mi):
        raise NumericalError(f"Mutual information is not finite at {snr_db} dB")
    return min(max(mi, 0.0), float(m))


def qam_cm_mi(m: int, snr_db: float) -> float:
    """Coded-modulation mutual information of uniform square 2^{2m}-QAM, bits per QAM symbol."""
    return 2 * pam_mi(m, snr_db)


def bicm_mi(m: int, snr_db: float, labeling: GrayTable | None = None) -> float:
    """
    BICM mutual information of square 2^{2m}-QAM with uniform input, bits per QAM symbol.

    Sums the bit-level mutual informations Σ_ℓ I(B_ℓ; Y) of one PAM dimension
    under the given labeling (Gray by default) and doubles the result.
    """
    table = labeling or gray_table(m)
    if table.m != m:
        raise ParameterError(f"Labeling is for m={table.m}, not m={m}")
    x, _, sigma = _pam_setup(m, snr_db, None)
    d = x[:, None] - x[None, :]
    same = [
        ((table.label_ints[:, None] >> b) & 1) == ((table.label_ints[None, :] >> b) & 1)
        for b in range(m)
    ]

    def loss(z: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        expo = -(d[:, :, None] ** 2 + 2 * d[:, :, None] * sigma * z) / (2 * sigma * sigma)
        total = logsumexp(expo, axis=1)
        per_bit = 0.0
        for mask in same:
            matched = np.where(mask[:, :, None], expo, -np.inf)
            per_bit = per_bit + (total - logsumexp(matched, axis=1)).mean(axis=0)
        return per_bit

    mi = m - _expect(loss) * _LOG2E
    if not math.isfinite(mi):
        raise NumericalError(f"BICM mutual information is not finite at {snr_db} dB")
    return 2 * min(max(mi, 0.0), float(m))


def maxwell_boltzmann(m: int, lam: float) -> npt.NDArray[np.float64]:
    """Input distribution P(x) ∝ exp(−λ·x²) over 2^m-PAM amplitudes."""
    x = amplitude_table(m).astype(np.float64)
    logits = -lam * x * x
    return np.exp(logits - logsumexp(logits))


def shaped_qam_mi(m: int, snr_db: float) -> float:
    """
    Mutual information of square 2^{2m}-QAM with a Maxwell–Boltzmann input.

    The shaping parameter is optimized at each SNR, so the result is the
    shaped-constellation counterpart of qam_cm_mi and never falls below it.
    """
    uniform = pam_mi(m, snr_db)
    if m == 1:
        return 2 * uniform

    def negative(log_lam: float) -> float:
        return -pam_mi(m, snr_db, maxwell_boltzmann(m, math.exp(log_lam)))

    result = minimize_scalar(negative, bounds=(math.log(1e-6), math.log(2.0)), method="bounded")
    return 2 * max(uniform, -float(result.fun))


def threshold_snr(
    mi_fn: Callable[[float], float],
    rate: float,
    floor_db: float = SNR_FLOOR_DB,
    ceiling_db: float = SNR_CEILING_DB,
) -> float:
    """
    SNR where a monotone mutual-information curve first reaches `rate`.

    Returns `floor_db` when the curve is already above the rate there.

    Raises:
        ParameterError: If the rate is negative.
        NumericalError: If the curve stays below the rate up to `ceiling_db`.
    """
    if rate < 0:
        raise ParameterError(f"Rate must be non-negative, got {rate}")
    if mi_fn(floor_db) >= rate:
        return floor_db
    if mi_fn(ceiling_db) < rate:
        raise NumericalError(f"Rate {rate} not reached below {ceiling_db} dB")
    return float(brentq(lambda s: mi_fn(s) - rate, floor_db, ceiling_db, xtol=1e-5))


# ---------------------------------------------------------------------------
# Lattice-style bounds
# ---------------------------------------------------------------------------


def theorem1_rate_bound(p: float, sigma2: float, g: float) -> float:
    """
    Achievable rate per dimension of a shaping region with NSM g.

    Evaluates ½·log₂(1 + P/σ²) − ½·log₂(2πe·g); the o(n) term is omitted.
    With g = 1/(2πe) (the infinite-dimensional sphere) this is the AWGN
    capacity, with g = 1/12 (the cube) it falls 0.2546 bit short.

    Raises:
        ParameterError: If any argument is not positive.
    """
    if p <= 0 or sigma2 <= 0 or g <= 0:
        raise ParameterError(f"Need positive p, sigma2 and g, got {p}, {sigma2}, {g}")
    return 0.5 * math.log2(1 + p / sigma2) - 0.5 * math.log2(2 * math.pi * math.e * g)


def sphere_volume(n_s: int, sigma2: float) -> float:
    """
    Asymptotic volume of the n_s-dimensional sphere of radius σ·√n_s.

    Evaluates (2πeσ²)^{n_s/2} / √(2π·n_s). This is an asymptotic form, not the
    exact Γ-function volume (see exact_sphere_volume); the two agree per
    dimension as n_s grows while their ratio tends to 1/√2.

    Raises:
        ParameterError: If n_s is odd or below 2, or sigma2 is not positive.
    """
    if n_s < 2 or n_s % 2:
        raise ParameterError(f"n_s must be even and at least 2, got {n_s}")
    if sigma2 <= 0:
        raise ParameterError(f"Noise variance must be positive, got {sigma2}")
    return (2 * math.pi * math.e * sigma2) ** (n_s / 2) / math.sqrt(2 * math.pi * n_s)


def exact_sphere_volume(n: int, radius: float) -> float:
    """π^{n/2}·ρ^n / Γ(n/2 + 1)."""
    if n < 1 or radius < 0:
        raise ParameterError(f"Need n >= 1 and radius >= 0, got n={n}, radius={radius}")
    if radius == 0:
        return 0.0
    log_volume = (n / 2) * math.log(math.pi) + n * math.log(radius) - gammaln(n / 2 + 1)
    return math.exp(log_volume)
