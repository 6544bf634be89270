"""
htcsim: Hybrid Temporal Computing simulator

Bit-accurate models of HTC arithmetic (regulated and temporal bitstreams,
single-gate multipliers, MUX scaled addition, counting accumulators), the
counting-based SC and unary baselines, accuracy and switching-activity
benches, and FIR/DCT image pipelines built on any of the designs.
"""

__version__ = "0.1.0"

# Registers the built-in designs
from htcsim import designs  # noqa: F401
from htcsim.apps import (
    AppResult,
    DctSpec,
    FirMode,
    FirSpec,
    PsnrReference,
    dct8_matrix,
    dct_roundtrip,
    fir_apply,
    fir_run,
    gaussian6_taps,
)
from htcsim.baselines import (
    UnaryStream,
    cbsc_mac,
    cbsc_multiply,
    unary_accuracy_bound,
    unary_add_or,
    unary_mac,
    unary_multiply,
)
from htcsim.config import RunConfig
from htcsim.design import DesignOptions, MacDesign

# Encodings
from htcsim.encodings import (
    Bitstream,
    BitstreamFormat,
    FixedPoint,
    LfsrState,
    Polarity,
    decode,
    encode_rb,
    encode_tb,
    lfsr_next,
    signed_to_offset,
)

# Exceptions
from htcsim.errors import (
    ConfigurationError,
    HtcSimError,
    ImageError,
    PgmError,
    PgmHeaderError,
    PgmMaxvalError,
    PgmTruncatedError,
    RangeError,
)

# HTC arithmetic
from htcsim.htc_arith import (
    MacConfig,
    MacResult,
    SelectorKind,
    WireTrace,
    accumulate,
    htc_dot,
    htc_mac,
    htc_multiply,
    scaled_add,
)

# Logging configuration
from htcsim.logging_config import (
    get_logger,
    set_module_level,
    setup_logging,
)
from htcsim.metrics import (
    ActivityReport,
    ErrorStats,
    exhaustive_mul_error,
    image_metrics,
    mac_error_bench,
    switching_activity,
)
from htcsim.pgm import GrayImage, pgm_read, pgm_write
from htcsim.registry import design_registry

__all__ = [
    # Version
    "__version__",
    # Encodings
    "Polarity",
    "BitstreamFormat",
    "FixedPoint",
    "Bitstream",
    "LfsrState",
    "encode_tb",
    "encode_rb",
    "decode",
    "signed_to_offset",
    "lfsr_next",
    # HTC arithmetic
    "MacConfig",
    "MacResult",
    "SelectorKind",
    "WireTrace",
    "htc_multiply",
    "scaled_add",
    "accumulate",
    "htc_mac",
    "htc_dot",
    # Baselines
    "UnaryStream",
    "cbsc_multiply",
    "cbsc_mac",
    "unary_multiply",
    "unary_add_or",
    "unary_accuracy_bound",
    "unary_mac",
    # Designs
    "MacDesign",
    "DesignOptions",
    "design_registry",
    # Metrics
    "ErrorStats",
    "ActivityReport",
    "mac_error_bench",
    "exhaustive_mul_error",
    "switching_activity",
    "image_metrics",
    # Applications
    "GrayImage",
    "FirSpec",
    "FirMode",
    "DctSpec",
    "PsnrReference",
    "AppResult",
    "gaussian6_taps",
    "fir_apply",
    "fir_run",
    "dct8_matrix",
    "dct_roundtrip",
    "pgm_read",
    "pgm_write",
    # Configuration
    "RunConfig",
    # Logging configuration
    "setup_logging",
    "get_logger",
    "set_module_level",
    # Exceptions
    "HtcSimError",
    "ConfigurationError",
    "RangeError",
    "ImageError",
    "PgmError",
    "PgmHeaderError",
    "PgmMaxvalError",
    "PgmTruncatedError",
]
