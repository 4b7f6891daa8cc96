"""
Commands Module

The toolkit's user-facing commands: encode, energy, simulate, capacity and
tables. Importing this module registers them; the CLI and the HTTP server
expose whatever is registered.
"""

from __future__ import annotations

import logging
from pathlib import Path

from pydantic import BaseModel, Field

from .config import ConstructionSource, LoadedConstruction, load_config, load_construction_source
from .gf2lin import format_bits, parse_bits
from .harness import (
    BP_SUBSTITUTION_NOTE,
    SimulationSummary,
    capacity_sweep,
    energy_report,
    run_experiment,
    write_csv,
)
from .mapper import gray_table, pair_qam
from .metrics import CapacityPoint, EnergyReport
from .registry import command
from .shaping import DEFAULT_SEARCH_LIMIT, encode_shaped

logger = logging.getLogger(__name__)


def _load(preset: str, config: Path | None) -> LoadedConstruction:
    if config is not None:
        return load_construction_source(load_config(config).construction)
    return load_construction_source(ConstructionSource(preset=preset))


class EncodeRequest(BaseModel):
    """Arguments of the encode command."""

    message: str = Field(description="Message bits, e.g. 01 or '0 1'")
    preset: str = Field(default="example2", description="Preset construction")
    config: Path | None = Field(default=None, description="Experiment config supplying the construction")
    search_limit: int = Field(default=DEFAULT_SEARCH_LIMIT, ge=0, description="Largest k_sh searched")


class EncodeResponse(BaseModel):
    """A shaped codeword and its PAM image."""

    message: str
    shaping_bits: str
    codeword: str
    signals: list[int]
    qam: list[tuple[int, int]] | None = None
    energy: int
    unshaped_energy: int
    per_signal_energy: float


@command
def encode(request: EncodeRequest) -> EncodeResponse:
    """Shape-encode one message and show its codeword, signals and energy."""
    c = _load(request.preset, request.config).construction
    word = encode_shaped(parse_bits(request.message), c, search_limit=request.search_limit)
    return EncodeResponse(
        message=format_bits(word.u),
        shaping_bits=format_bits(word.u_sh),
        codeword=format_bits(word.v),
        signals=word.s.amps.tolist(),
        qam=pair_qam(word.s) if word.s.n_s % 2 == 0 else None,
        energy=word.energy,
        unshaped_energy=word.unshaped_energy,
        per_signal_energy=word.energy / word.s.n_s,
    )


class EnergyRequest(BaseModel):
    """Arguments of the energy command."""

    preset: str = Field(default="example2", description="Preset construction")
    config: Path | None = Field(default=None, description="Experiment config supplying the construction")


@command
def energy(request: EnergyRequest) -> EnergyReport:
    """Report shaped energy, uniform reference, gain and rates."""
    if request.config is not None:
        cfg = load_config(request.config)
        return energy_report(cfg, load_construction_source(cfg.construction))
    return energy_report(loaded=_load(request.preset, None))


class SimulateRequest(BaseModel):
    """Arguments of the simulate command."""

    config: Path = Field(description="Experiment config (JSON)")
    output: Path | None = Field(default=None, description="CSV path, overrides the config")
    workers: int | None = Field(default=None, ge=1, description="Worker threads, overrides the config")


@command
def simulate(request: SimulateRequest) -> SimulationSummary:
    """Run a Monte Carlo BER/FER experiment and write the CSV."""
    cfg = load_config(request.config)
    updates: dict[str, object] = {}
    if request.output is not None:
        updates["output"] = request.output
    if request.workers is not None:
        updates["workers"] = request.workers
    cfg = cfg.model_copy(update=updates)

    loaded = load_construction_source(cfg.construction)
    results = run_experiment(cfg, loaded)
    output = write_csv(results, cfg.output) if cfg.output is not None else None
    if output is not None:
        logger.info(f"Results written to {output}")
    report = energy_report(cfg, loaded)
    return SimulationSummary(
        results=results,
        energy_per_signal=report.per_signal_energy,
        decoder=cfg.decoder,
        output=str(output) if output is not None else None,
        note=BP_SUBSTITUTION_NOTE if cfg.decoder == "bp" else None,
    )


class CapacityRequest(BaseModel):
    """Arguments of the capacity command."""

    m: int = Field(default=4, ge=1, le=8, description="Bits per PAM dimension")
    rate: float = Field(default=16 / 3, ge=0, description="Target rate, bits per QAM symbol")


class CapacityResponse(BaseModel):
    points: list[CapacityPoint]


@command
def capacity(request: CapacityRequest) -> CapacityResponse:
    """Threshold SNRs of Shannon, shaped QAM, uniform QAM and BICM at a rate."""
    return CapacityResponse(points=capacity_sweep(request.m, request.rate))


class TablesRequest(BaseModel):
    """Arguments of the tables command."""

    m: int = Field(default=3, ge=1, le=8, description="Bits per PAM signal")


class GrayRow(BaseModel):
    amplitude: int
    label: str


class GrayTableResponse(BaseModel):
    m: int
    rows: list[GrayRow]


@command
def tables(request: TablesRequest) -> GrayTableResponse:
    """Print the Gray labeling of 2^m-PAM."""
    table = gray_table(request.m)
    return GrayTableResponse(
        m=request.m,
        rows=[GrayRow(amplitude=a, label=lbl) for a, lbl in table.rows()],
    )
