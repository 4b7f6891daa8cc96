"""
Harness Module

End-to-end Monte Carlo simulation, energy reports, capacity sweeps and CSV
output.

Every frame draws its message and noise from its own random stream, keyed by
(seed, SNR index, frame index). Frames are processed in fixed-size batches
and batches are folded in frame order, so results do not depend on the
number of worker threads.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .channel import ChannelParams, RngSeed, add_noise
from .config import ExperimentConfig, LoadedConstruction, load_construction_source
from .decoding import ParityCheck, bp_decode, demap_llr, ml_decode
from .errors import ParameterError
from .gf2lin import encode, info_words
from .metrics import (
    SNR_FLOOR_DB,
    CapacityPoint,
    EnergyReport,
    avg_energy,
    bicm_mi,
    qam_cm_mi,
    shaped_qam_mi,
    shannon_capacity,
    shaping_gain_db,
    threshold_snr,
    uniform_pam_energy,
)
from .shaping import (
    ShapingConstruction,
    decode_shaped,
    encode_shaped,
    info_from_codeword,
    shaped_signal_set,
    sphere_shaper_bruteforce,
)

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("snr_db", "frames", "bit_errors", "frame_errors", "ber", "fer", "avg_energy", "seed")
# Largest k (or k_c for the sphere baseline) enumerated for exact energies.
EXACT_ENERGY_BITS = 16
BP_SUBSTITUTION_NOTE = (
    "Belief propagation runs on binary LDPC codes; nonbinary codes are not supported."
)
_STREAM_STRIDE = 1 << 32
_MESSAGE_PURPOSE = 1


class TrialResult(BaseModel):
    """
    Counters and averages for one SNR point.

    Attributes:
        snr_db: Es/σ² in dB.
        sigma2: Noise variance used.
        frames: Frames simulated.
        bit_errors: Message-bit errors after removing the shaping component.
        frame_errors: Frames with at least one message-bit error.
        ber: bit_errors / (frames · k).
        fer: frame_errors / frames.
        avg_energy: Mean transmitted energy per PAM signal.
        energy_reduction: Mean per-signal energy saved by the coset search.
        codeword_bit_errors: Code-bit errors of the unshaped decoder output.
        seed: Master seed.
    """

    model_config = ConfigDict(frozen=True)

    snr_db: float
    sigma2: float = Field(gt=0)
    frames: int = Field(ge=1)
    bit_errors: int = Field(ge=0)
    frame_errors: int = Field(ge=0)
    ber: float = Field(ge=0, le=1)
    fer: float = Field(ge=0, le=1)
    avg_energy: float = Field(ge=0)
    energy_reduction: float = 0.0
    codeword_bit_errors: int = Field(default=0, ge=0)
    seed: int

    @model_validator(mode="after")
    def _check_rates(self) -> TrialResult:
        if not math.isclose(self.fer, self.frame_errors / self.frames, rel_tol=1e-12):
            raise ValueError("fer must equal frame_errors / frames")
        if self.frame_errors > self.frames:
            raise ValueError("frame_errors exceeds frames")
        return self


class SimulationSummary(BaseModel):
    """Outcome of a simulation run."""

    results: list[TrialResult]
    energy_per_signal: float
    decoder: str
    output: str | None = None
    note: str | None = None


@dataclass
class _Tally:
    frames: int = 0
    bit_errors: int = 0
    frame_errors: int = 0
    codeword_bit_errors: int = 0
    energy: int = 0
    reduction: int = 0

    def add(self, other: _Tally) -> None:
        self.frames += other.frames
        self.bit_errors += other.bit_errors
        self.frame_errors += other.frame_errors
        self.codeword_bit_errors += other.codeword_bit_errors
        self.energy += other.energy
        self.reduction += other.reduction


@dataclass(frozen=True)
class _Link:
    """Everything a worker needs to simulate frames at one SNR point."""

    cfg: ExperimentConfig
    construction: ShapingConstruction
    parity: ParityCheck | None
    channel: ChannelParams
    snr_index: int

    def frame(self, index: int) -> _Tally:
        c, cfg = self.construction, self.cfg
        seed = RngSeed(master=cfg.seed, stream=self.snr_index * _STREAM_STRIDE + index)
        u = seed.generator(_MESSAGE_PURPOSE).integers(0, 2, size=c.k, dtype=np.uint8)
        if cfg.shaped:
            word = encode_shaped(u, c, search_limit=cfg.search_limit)
            v, energy, reduction = word.v, word.energy, word.unshaped_energy - word.energy
        else:
            v = c.message_part(u)
            energy, reduction = int(np.sum(c.image(v) ** 2)), 0
        y = add_noise(c.image(v), self.channel, seed)

        if cfg.decoder == "ml":
            info_hat = ml_decode(y, c)
            v_hat = encode(info_hat, c.g_so)
        else:
            assert self.parity is not None
            llr = demap_llr(y, c.m, self.channel.sigma2, cfg.demap_mode)[c.code_order]
            result = bp_decode(llr, self.parity, cfg.max_iters, cfg.bp_mode, cfg.min_sum_scale)
            v_hat = result.bits
            info_hat = info_from_codeword(v_hat, c)
        u_hat = decode_shaped(info_hat, c)

        errors = int(np.count_nonzero(u_hat != u))
        return _Tally(
            frames=1,
            bit_errors=errors,
            frame_errors=int(errors > 0),
            codeword_bit_errors=int(np.count_nonzero(v_hat != v)),
            energy=energy,
            reduction=reduction,
        )

    def batch(self, bounds: tuple[int, int]) -> _Tally:
        tally = _Tally()
        for index in range(*bounds):
            tally.add(self.frame(index))
        return tally


def _transmit_energy(
    c: ShapingConstruction,
    shaped: bool,
    seed: int,
    samples: int,
    search_limit: int,
) -> tuple[float, bool]:
    """Average transmitted energy per signal and whether it is exact."""
    if c.k <= EXACT_ENERGY_BITS:
        if shaped:
            return avg_energy(shaped_signal_set(c)), True
        amps = c.image(c.message_part(info_words(c.k)))
        return float(np.mean(np.sum(amps * amps, axis=1))) / c.params.n_s, True

    rng = RngSeed(master=seed, stream=0).generator(0)
    messages = rng.integers(0, 2, size=(samples, c.k), dtype=np.uint8)
    if shaped:
        total = sum(encode_shaped(u, c, search_limit).energy for u in messages)
    else:
        amps = c.image(c.message_part(messages))
        total = int(np.sum(amps * amps))
    return total / (samples * c.params.n_s), False


def _simulate_point(link: _Link, pool: ThreadPoolExecutor | None) -> _Tally:
    cfg = link.cfg
    bounds = [
        (lo, min(lo + cfg.batch_size, cfg.max_frames))
        for lo in range(0, cfg.max_frames, cfg.batch_size)
    ]
    total = _Tally()
    wave = max(cfg.workers, 1)
    for start in range(0, len(bounds), wave):
        chunk = bounds[start : start + wave]
        tallies = list(pool.map(link.batch, chunk)) if pool else [link.batch(b) for b in chunk]
        for tally in tallies:
            total.add(tally)
            if total.frame_errors >= cfg.target_frame_errors:
                return total
    return total


def run_experiment(
    cfg: ExperimentConfig,
    loaded: LoadedConstruction | None = None,
) -> list[TrialResult]:
    """
    Simulate every SNR point of an experiment.

    For each point, messages are drawn, shaped, sent through the AWGN channel
    and decoded (ML, or demapper + BP), then the shaping component is
    stripped and message bits are compared. A point stops after the batch in
    which frame errors reach the target, or at max_frames.

    Args:
        cfg: Experiment configuration.
        loaded: Pre-built construction; loaded from cfg when omitted.

    Returns:
        One TrialResult per SNR point, in configuration order.

    Raises:
        OSError: If a referenced file cannot be read.
        CosetKitError: If the construction or parameters are invalid.
    """
    loaded = loaded or load_construction_source(cfg.construction)
    c = loaded.construction
    parity = loaded.parity_check() if cfg.decoder == "bp" else None
    if cfg.decoder == "bp":
        logger.info(BP_SUBSTITUTION_NOTE)

    es, exact = _transmit_energy(c, cfg.shaped, cfg.seed, cfg.energy_samples, cfg.search_limit)
    logger.info(f"{c!r}: Es = {es:.4f} per signal ({'exact' if exact else 'sampled'})")

    results = []
    pool = ThreadPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        for snr_index, snr_db in enumerate(cfg.snr_db):
            channel = ChannelParams.from_snr(snr_db, es)
            link = _Link(cfg, c, parity, channel, snr_index)
            tally = _simulate_point(link, pool)
            n_s = c.params.n_s
            result = TrialResult(
                snr_db=snr_db,
                sigma2=channel.sigma2,
                frames=tally.frames,
                bit_errors=tally.bit_errors,
                frame_errors=tally.frame_errors,
                ber=tally.bit_errors / (tally.frames * c.k),
                fer=tally.frame_errors / tally.frames,
                avg_energy=tally.energy / (tally.frames * n_s),
                energy_reduction=tally.reduction / (tally.frames * n_s),
                codeword_bit_errors=tally.codeword_bit_errors,
                seed=cfg.seed,
            )
            logger.info(
                f"SNR {snr_db:.2f} dB: {result.frames} frames, BER {result.ber:.3e}, "
                f"FER {result.fer:.3e}, codeword BER "
                f"{tally.codeword_bit_errors / (tally.frames * c.params.n):.3e}"
            )
            results.append(result)
    finally:
        if pool is not None:
            pool.shutdown()
    return results


def energy_report(
    cfg: ExperimentConfig | None = None,
    loaded: LoadedConstruction | None = None,
) -> EnergyReport:
    """
    Shaped energy, uniform reference, gain and rates of a construction.

    Exact when the message set is enumerable, otherwise estimated from
    `cfg.energy_samples` messages. The brute-force sphere-shaper energy is
    included when the whole codebook is enumerable.

    Raises:
        ParameterError: If neither a config nor a construction is given.
    """
    if loaded is None:
        if cfg is None:
            raise ParameterError("energy_report needs a config or a construction")
        loaded = load_construction_source(cfg.construction)
    c = loaded.construction
    seed, samples, limit = (cfg.seed, cfg.energy_samples, cfg.search_limit) if cfg else (0, 2000, 24)
    energy, exact = _transmit_energy(c, True, seed, samples, limit)
    reference = uniform_pam_energy(c.m)

    sphere = None
    if c.params.k_c <= EXACT_ENERGY_BITS:
        sphere = avg_energy(sphere_shaper_bruteforce(c))

    return EnergyReport(
        per_signal_energy=energy,
        unshaped_energy=reference,
        gain_db=shaping_gain_db(reference, energy),
        rate_per_signal=c.params.target_rate_per_signal,
        code_rate_per_signal=c.params.code_rate_per_signal,
        sphere_energy=sphere,
        exact=exact,
        samples=None if exact else samples,
    )


def capacity_sweep(m: int, rate_bits_per_qam: float) -> list[CapacityPoint]:
    """
    Threshold SNRs at a target rate for Shannon, uniform CM, Gray BICM and
    Maxwell–Boltzmann shaped 2^{2m}-QAM.

    Thresholds at or below the floor are reported as the floor value.

    Raises:
        ParameterError: If the rate is negative or exceeds 2m bits.
    """
    if not 0 <= rate_bits_per_qam <= 2 * m:
        raise ParameterError(f"Rate {rate_bits_per_qam} is outside [0, {2 * m}] bits per QAM")
    rate = rate_bits_per_qam
    curves = {
        "shannon": shannon_capacity,
        "shaped_qam": lambda s: shaped_qam_mi(m, s),
        "cm_qam": lambda s: qam_cm_mi(m, s),
        "bicm": lambda s: bicm_mi(m, s),
    }
    points = []
    for kind, curve in curves.items():
        snr = threshold_snr(curve, rate)
        logger.info(f"{kind} threshold at {rate:.4f} bits/QAM: {snr:.3f} dB")
        points.append(
            CapacityPoint(
                snr_db=max(snr, SNR_FLOOR_DB),
                bits_per_qam=rate,
                kind=kind,  # type: ignore[arg-type]
                m=None if kind == "shannon" else m,
            )
        )
    return points


def write_csv(results: list[TrialResult], path: str | Path) -> Path:
    """
    Write results with the fixed column set.

    Raises:
        OSError: If the file cannot be written.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in results:
            writer.writerow(
                [repr(r.snr_db), r.frames, r.bit_errors, r.frame_errors,
                 repr(r.ber), repr(r.fer), repr(r.avg_energy), r.seed]
            )
    logger.debug(f"Wrote {len(results)} rows to {path}")
    return path
