"""
Presets Module

The small worked constructions used throughout the documentation and tests.

- EXAMPLE1_GENERATOR: a [6, 3] code mapped to two 8-PAM signals.
- example2: 8-PAM, n_s = 2, one shaping bit; coset energies 23 and 19,
  shaped energy 9 against the uniform 21.
- example3: 4-PAM, n_s = 3, one shaping bit; shaped energy 3 against 5.
"""

from __future__ import annotations

from collections.abc import Callable

from .errors import ParameterError
from .gf2lin import BinMatrix
from .shaping import ShapingConstruction, ShapingParams, build_construction

EXAMPLE1_GENERATOR = BinMatrix.from_rows(["100110", "010101", "001011"])

EXAMPLE2_GENERATOR = BinMatrix.from_rows(["100011", "010101", "001110"])
EXAMPLE2_SHAPING = BinMatrix.from_rows(["111"])
EXAMPLE2_PARAMS = ShapingParams(m=3, n_s=2, k=2, k_sh=1, k_a=2, k_s=0, r_a=1, r_s=2)

EXAMPLE3_GENERATOR = BinMatrix.from_rows(
    ["100001", "010001", "001001", "000101", "000011"]
)
EXAMPLE3_SHAPING = BinMatrix.from_rows(["111"])
EXAMPLE3_PARAMS = ShapingParams(m=2, n_s=3, k=4, k_sh=1, k_a=2, k_s=2, r_a=0, r_s=1)


def example2_construction() -> ShapingConstruction:
    return build_construction(EXAMPLE2_GENERATOR, EXAMPLE2_SHAPING, EXAMPLE2_PARAMS)


def example3_construction() -> ShapingConstruction:
    return build_construction(EXAMPLE3_GENERATOR, EXAMPLE3_SHAPING, EXAMPLE3_PARAMS)


PRESETS: dict[str, Callable[[], ShapingConstruction]] = {
    "example2": example2_construction,
    "example3": example3_construction,
}


def preset_construction(name: str) -> ShapingConstruction:
    """
    Look up a preset construction by name.

    Raises:
        ParameterError: If the name is unknown.
    """
    try:
        return PRESETS[name]()
    except KeyError:
        raise ParameterError(
            f"Unknown preset '{name}'", {"available": sorted(PRESETS)}
        ) from None
