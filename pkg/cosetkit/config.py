"""
Configuration Module

Experiment configuration read from JSON documents and validated with pydantic.
Unknown keys are rejected. Relative paths inside a document resolve against
the document's directory.

Usage:
    cfg = load_config("runs/example3.json")
    loaded = load_construction_source(cfg.construction)
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .decoding import ParityCheck, make_regular_ldpc, parse_alist
from .errors import ConfigError, DimensionError, ParameterError
from .gf2lin import BinMatrix, null_space, parse_matrix, to_systematic
from .presets import PRESETS, preset_construction
from .shaping import (
    ShapingConstruction,
    ShapingParams,
    build_construction,
    load_construction,
    random_shaping_code,
)

logger = logging.getLogger(__name__)

_CODE_SOURCES = ("preset", "generator", "generator_path", "construction_path", "alist_path", "ldpc")
_SHAPING_SOURCES = ("shaping", "shaping_path", "shaping_seed")


class RegularLdpc(BaseModel):
    """Seeded (dv, dc)-regular LDPC recipe."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    n: int = Field(ge=2)
    dv: int = Field(default=3, ge=1)
    dc: int = Field(default=6, ge=2)
    seed: int = Field(default=0, ge=0)


class ConstructionSource(BaseModel):
    """
    Where the code and shaping matrices come from.

    Exactly one code source is set: `preset`, `generator` (inline rows),
    `generator_path`, `construction_path` (a dumped construction), `alist_path`
    or `ldpc`. Generator and parity-check sources also need `m`; with
    `k_sh > 0` they need one shaping source: `shaping` (inline rows),
    `shaping_path` or `shaping_seed`.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    preset: str | None = None
    generator: list[str] | None = None
    generator_path: Path | None = None
    construction_path: Path | None = None
    alist_path: Path | None = None
    ldpc: RegularLdpc | None = None

    m: int | None = Field(default=None, ge=1, le=8)
    k_sh: int = Field(default=0, ge=0)
    shaping: list[str] | None = None
    shaping_path: Path | None = None
    shaping_seed: int | None = Field(default=None, ge=0)
    layout: str | None = None

    @model_validator(mode="after")
    def _check_sources(self) -> ConstructionSource:
        code = [name for name in _CODE_SOURCES if getattr(self, name) is not None]
        if len(code) != 1:
            raise ValueError(f"Exactly one code source required, got {code or 'none'}")
        shaping = [name for name in _SHAPING_SOURCES if getattr(self, name) is not None]
        if len(shaping) > 1:
            raise ValueError(f"At most one shaping source allowed, got {shaping}")

        fixed = code[0] in ("preset", "construction_path")
        if fixed and (shaping or self.k_sh or self.m is not None or self.layout is not None):
            raise ValueError(f"'{code[0]}' fixes m, layout and shaping; drop those keys")
        if not fixed:
            if self.m is None:
                raise ValueError(f"'{code[0]}' needs m")
            if self.k_sh and not shaping:
                raise ValueError("k_sh > 0 needs shaping, shaping_path or shaping_seed")
            if not self.k_sh and shaping:
                raise ValueError("Shaping source given but k_sh = 0")
        if self.preset is not None and self.preset not in PRESETS:
            raise ValueError(f"Unknown preset '{self.preset}', choose from {sorted(PRESETS)}")
        return self

    def resolve(self, base: Path) -> ConstructionSource:
        """Copy with relative paths anchored at `base`."""
        updates = {}
        for name in ("generator_path", "construction_path", "alist_path", "shaping_path"):
            path = getattr(self, name)
            if path is not None and not path.is_absolute():
                updates[name] = base / path
        return self.model_copy(update=updates)


class ExperimentConfig(BaseModel):
    """
    One Monte Carlo experiment.

    Attributes:
        construction: Code and shaping source.
        snr_db: SNR points (Es/σ² per real dimension, dB).
        decoder: "ml" (exhaustive) or "bp" (demapper + belief propagation).
        max_iters: BP iteration cap.
        bp_mode: Check-node rule for BP.
        min_sum_scale: Normalization of min-sum check messages.
        demap_mode: Exact or max-log LLRs.
        shaped: Run coset shaping; False always sends the zero coset leader.
        target_frame_errors: Stop a point after this many frame errors.
        max_frames: Frame cap per point.
        batch_size: Frames per work unit.
        workers: Threads running work units.
        seed: Master seed.
        energy_samples: Messages drawn when the signal set is too large to enumerate.
        output: CSV destination.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    construction: ConstructionSource
    snr_db: list[float] = Field(min_length=1)
    decoder: Literal["ml", "bp"] = "ml"
    max_iters: int = Field(default=50, ge=1)
    bp_mode: Literal["sum_product", "min_sum"] = "sum_product"
    min_sum_scale: float = Field(default=0.75, gt=0, le=1)
    demap_mode: Literal["exact", "maxlog"] = "exact"
    shaped: bool = True
    target_frame_errors: int = Field(default=100, ge=1)
    max_frames: int = Field(default=10_000, ge=1)
    batch_size: int = Field(default=256, ge=1)
    workers: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0, lt=1 << 64)
    search_limit: int = Field(default=24, ge=0)
    energy_samples: int = Field(default=2000, ge=1)
    output: Path | None = None


def load_config(path: str | Path) -> ExperimentConfig:
    """
    Read and validate an experiment configuration.

    Raises:
        ConfigError: On invalid JSON or failed validation.
        OSError: If the file cannot be read.
    """
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e}") from e
    return parse_config(data, base=path.parent)


def parse_config(data: object, base: Path | None = None) -> ExperimentConfig:
    """Validate an already-decoded configuration document."""
    try:
        cfg = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(
            "Invalid experiment configuration",
            [{"loc": list(err["loc"]), "msg": err["msg"]} for err in e.errors()],
        ) from e
    if base is not None:
        updates: dict[str, object] = {"construction": cfg.construction.resolve(base)}
        if cfg.output is not None and not cfg.output.is_absolute():
            updates["output"] = base / cfg.output
        cfg = cfg.model_copy(update=updates)
    return cfg


@dataclass(frozen=True)
class LoadedConstruction:
    """
    A construction ready for simulation.

    Attributes:
        construction: The shaping construction.
        parity: Parity-check matrix in the construction's coordinates, when
            the source provided one.
    """

    construction: ShapingConstruction
    parity: ParityCheck | None = None

    def parity_check(self) -> ParityCheck:
        """The given parity-check matrix, or one derived from the generator."""
        if self.parity is not None:
            return self.parity
        return ParityCheck.from_dense(null_space(self.construction.g_so))


def _shaping_matrix(src: ConstructionSource, n_sh: int) -> BinMatrix | None:
    if not src.k_sh:
        return None
    if src.shaping is not None:
        return BinMatrix.from_rows(src.shaping)
    if src.shaping_path is not None:
        return parse_matrix(src.shaping_path.read_text())
    assert src.shaping_seed is not None
    return random_shaping_code(src.k_sh, n_sh, src.shaping_seed)


def _from_generator(
    src: ConstructionSource,
    g: BinMatrix,
    parity: ParityCheck | None = None,
) -> LoadedConstruction:
    assert src.m is not None
    if g.cols % src.m:
        raise DimensionError(f"Code length {g.cols} is not divisible by m={src.m}")
    systematic, perm = to_systematic(g)
    if perm != list(range(g.cols)):
        logger.info("Generator columns permuted to reach systematic form")
        if parity is not None:
            parity = parity.permute_columns(perm)
    params = ShapingParams.derive(src.m, g.cols // src.m, g.rows, src.k_sh, src.layout)
    g_sh = _shaping_matrix(src, params.n_sh)
    c = build_construction(systematic, g_sh, params, src.layout)
    return LoadedConstruction(construction=c, parity=parity)


def _from_parity(src: ConstructionSource, h: ParityCheck) -> LoadedConstruction:
    g = null_space(h.to_binmatrix())
    logger.info(f"Parity-check {h!r} gives a [{h.n}, {g.rows}] code")
    return _from_generator(src, g, h)


def load_construction_source(src: ConstructionSource) -> LoadedConstruction:
    """
    Build the construction a source describes.

    Raises:
        OSError: If a referenced file cannot be read.
        FormatError: If a referenced file is malformed.
        ParameterError: If the matrices do not fit the requested parameters.
    """
    if src.preset is not None:
        return LoadedConstruction(preset_construction(src.preset))
    if src.construction_path is not None:
        return LoadedConstruction(load_construction(src.construction_path.read_text()))
    if src.generator is not None:
        return _from_generator(src, BinMatrix.from_rows(src.generator))
    if src.generator_path is not None:
        return _from_generator(src, parse_matrix(src.generator_path.read_text()))
    if src.alist_path is not None:
        return _from_parity(src, parse_alist(src.alist_path.read_text()))
    if src.ldpc is not None:
        recipe = src.ldpc
        return _from_parity(src, make_regular_ldpc(recipe.n, recipe.dv, recipe.dc, recipe.seed))
    raise ParameterError("Construction source is empty")
