"""
cosetkit - Coset Shaping for Gray-Labeled PAM/QAM

Encodes messages as the minimum-energy member of a family of cosets of a
linear binary code mapped to 2^m-PAM, and measures what that buys: energy,
shaping gain, capacity limits and simulated error rates.

Example usage:

    from cosetkit import encode_shaped, example2_construction

    c = example2_construction()
    word = encode_shaped([0, 1], c)
    print(word.s, word.energy)        # SignalSeq(m=3, amps=(1, -1)) 2

From the command line:

    cosetkit tables --m 3
    cosetkit energy --preset example3
    cosetkit simulate --config run.json
"""

__version__ = "0.1.0"

from .channel import ChannelParams, RngSeed, add_noise, sigma_to_snr, snr_to_sigma
from .config import (
    ConstructionSource,
    ExperimentConfig,
    LoadedConstruction,
    load_config,
    load_construction_source,
)
from .decoding import (
    BpResult,
    ParityCheck,
    bp_decode,
    demap_llr,
    make_regular_ldpc,
    ml_decode,
    parse_alist,
    serialize_alist,
)
from .errors import (
    ConfigError,
    CosetKitError,
    DimensionError,
    EnumerationLimitError,
    FormatError,
    NumericalError,
    ParameterError,
    RankDeficientError,
)
from .gf2lin import (
    BinMatrix,
    encode,
    null_space,
    parse_matrix,
    rank,
    rowspace_equal,
    to_systematic,
)
from .harness import (
    SimulationSummary,
    TrialResult,
    capacity_sweep,
    energy_report,
    run_experiment,
    write_csv,
)
from .mapper import GrayTable, SignalSeq, gray_table, map_psi, pair_qam, unmap_psi
from .metrics import (
    CapacityPoint,
    EnergyReport,
    avg_energy,
    bicm_mi,
    nsm_estimate,
    qam_cm_mi,
    shannon_limit_snr,
    shaping_gain_db,
    sphere_volume,
    theorem1_rate_bound,
)
from .presets import example2_construction, example3_construction
from .registry import command, get_registry
from .shaping import (
    ShapedWord,
    ShapingConstruction,
    ShapingParams,
    build_construction,
    coset_energy_table,
    decode_shaped,
    encode_shaped,
    sphere_shaper_bruteforce,
)

__all__ = [
    # Version
    "__version__",
    # gf2lin
    "BinMatrix",
    "encode",
    "rank",
    "to_systematic",
    "rowspace_equal",
    "null_space",
    "parse_matrix",
    # mapper
    "GrayTable",
    "SignalSeq",
    "gray_table",
    "map_psi",
    "unmap_psi",
    "pair_qam",
    # shaping
    "ShapingParams",
    "ShapingConstruction",
    "ShapedWord",
    "build_construction",
    "encode_shaped",
    "decode_shaped",
    "coset_energy_table",
    "sphere_shaper_bruteforce",
    "example2_construction",
    "example3_construction",
    # channel
    "ChannelParams",
    "RngSeed",
    "add_noise",
    "snr_to_sigma",
    "sigma_to_snr",
    # decoding
    "ParityCheck",
    "BpResult",
    "demap_llr",
    "ml_decode",
    "bp_decode",
    "parse_alist",
    "serialize_alist",
    "make_regular_ldpc",
    # metrics
    "CapacityPoint",
    "EnergyReport",
    "avg_energy",
    "shaping_gain_db",
    "shannon_limit_snr",
    "qam_cm_mi",
    "bicm_mi",
    "nsm_estimate",
    "theorem1_rate_bound",
    "sphere_volume",
    # harness
    "ConstructionSource",
    "ExperimentConfig",
    "LoadedConstruction",
    "load_config",
    "load_construction_source",
    "TrialResult",
    "SimulationSummary",
    "run_experiment",
    "energy_report",
    "capacity_sweep",
    "write_csv",
    # commands
    "command",
    "get_registry",
    # errors
    "CosetKitError",
    "DimensionError",
    "RankDeficientError",
    "ParameterError",
    "EnumerationLimitError",
    "FormatError",
    "ConfigError",
    "NumericalError",
]
