"""
Run configuration shared by every command.

RunConfig pins the defaults that make runs reproducible and round-trips
through a plain-text key = value file. Values merge with precedence
defaults < config file < command-line flags.
"""

from pathlib import Path
from typing import Any, Optional, Union

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from htcsim.apps import DctSpec, FirMode, FirSpec, PsnrReference, gaussian6_taps
from htcsim.design import DesignOptions
from htcsim.encodings import LfsrState, Polarity
from htcsim.errors import ConfigurationError
from htcsim.htc_arith import MacConfig, SelectorKind
from htcsim.logging_config import get_logger
from htcsim.metrics import Normalization, VectorDistribution

logger = get_logger(__name__)

_INT_KEYS = {"bits", "fanin", "trials", "seed", "lfsr_seed", "lfsr_width", "evaluations", "threads"}
_INT_TUPLE_KEYS = {"lfsr_taps"}
_FLOAT_TUPLE_KEYS = {"taps"}


class RunConfig(BaseModel):
    """
    Every parameter a command needs.

    Attributes:
        design: Design name (htc, cbsc, unary, exact; fir/dct also accept oracle)
        bits: Operand width N
        fanin: MAC fan-in K and bench vector length
        polarity: Operand polarity for benches and sweeps
        trials: Random vector pairs per bench
        seed: Seed of the bench random number generator
        lfsr_width: LFSR register width
        lfsr_taps: LFSR tap positions
        lfsr_seed: LFSR start state
        selector: MUX select source
        normalization: Percentage scale of bench errors
        vectors: Bench operand distribution
        reference: PSNR reference of the FIR command
        mode: FIR dimensionality
        taps: FIR taps (None = binomial Gaussian)
        evaluations: MAC evaluations of the activity command
        threads: Worker threads (None = HTC_SIM_THREADS)
        input: Input image
        output: Output CSV or image
        metrics: Metrics CSV of the image commands
    """

    design: str = "htc"
    bits: int = Field(default=8, ge=1, le=16)
    fanin: int = Field(default=4, ge=2, le=16)
    polarity: Polarity = Polarity.UNIPOLAR
    trials: int = Field(default=100_000, ge=1)
    seed: int = Field(default=42, ge=0)
    lfsr_width: int = Field(default=8, ge=2, le=32)
    lfsr_taps: tuple[int, ...] = (8, 6, 5, 4)
    lfsr_seed: int = 0x5A
    selector: SelectorKind = SelectorKind.LFSR
    normalization: Normalization = Normalization.UNIT
    vectors: VectorDistribution = VectorDistribution.UNIFORM
    reference: PsnrReference = PsnrReference.ORIGINAL
    mode: FirMode = FirMode.SEPARABLE
    taps: Optional[tuple[float, ...]] = None
    evaluations: int = Field(default=1000, ge=1)
    threads: Optional[int] = Field(default=None, ge=1)
    input: Optional[Path] = None
    output: Optional[Path] = None
    metrics: Optional[Path] = None

    model_config = {"frozen": True}

    @field_validator("design")
    @classmethod
    def normalize_design(cls, v):
        return v.strip().lower()

    @field_validator("fanin")
    @classmethod
    def validate_fanin(cls, v):
        if v & (v - 1):
            raise ValueError(f"fanin must be a power of two, got {v}")
        return v

    @model_validator(mode="after")
    def validate_lfsr(self):
        """The LFSR settings must form a valid register."""
        self.lfsr_state()
        return self

    def lfsr_state(self) -> LfsrState:
        return LfsrState(width=self.lfsr_width, taps=self.lfsr_taps, state=self.lfsr_seed)

    def design_options(self) -> DesignOptions:
        return DesignOptions(fan_in=self.fanin, selector=self.selector, lfsr=self.lfsr_state())

    def mac_config(self) -> MacConfig:
        return MacConfig(
            bits=self.bits,
            fan_in=self.fanin,
            polarity=self.polarity,
            selector=self.selector,
            lfsr=self.lfsr_state(),
        )

    def fir_spec(self) -> FirSpec:
        taps = self.taps if self.taps is not None else tuple(gaussian6_taps())
        return FirSpec(taps=taps, bits=self.bits, design=self.design, mode=self.mode)

    def dct_spec(self) -> DctSpec:
        return DctSpec(bits=self.bits, design=self.design)

    @classmethod
    def from_values(cls, values: dict[str, Any]) -> "RunConfig":
        """
        Build a config from already typed values.

        Raises:
            ConfigurationError: On unknown keys or invalid values
        """
        unknown = sorted(set(values) - set(cls.model_fields))
        if unknown:
            raise ConfigurationError(f"unknown configuration keys: {', '.join(unknown)}")
        try:
            return cls(**values)
        except ValidationError as e:
            details = "; ".join(f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors())
            raise ConfigurationError(f"invalid configuration: {details}") from None

    @classmethod
    def merged(cls, file_values: dict[str, Any], flag_values: dict[str, Any]) -> "RunConfig":
        """Defaults < file values < flags; flags set to None are ignored."""
        values = dict(file_values)
        values.update({k: v for k, v in flag_values.items() if v is not None})
        return cls.from_values(values)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RunConfig":
        """Load a key = value config file."""
        return cls.from_values(read_config_values(path))

    def to_text(self) -> str:
        """Serialize every field as key = value lines."""
        lines = []
        for key in type(self).model_fields:
            value = getattr(self, key)
            if value is None:
                continue
            if isinstance(value, tuple):
                text = ", ".join(str(v) for v in value)
            elif key == "lfsr_seed":
                text = hex(value)
            elif hasattr(value, "value"):
                text = str(value.value)
            else:
                text = str(value)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"

    def to_file(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")


def _coerce(key: str, raw: str) -> Any:
    try:
        if key in _INT_KEYS:
            return int(raw, 0)
        if key in _INT_TUPLE_KEYS:
            return tuple(int(part, 0) for part in raw.split(",") if part.strip())
        if key in _FLOAT_TUPLE_KEYS:
            return tuple(float(part) for part in raw.split(",") if part.strip())
    except ValueError:
        raise ConfigurationError(f"invalid value for '{key}': {raw!r}") from None
    return raw


def parse_config_text(text: str, source: str = "<config>") -> dict[str, Any]:
    """
    Parse key = value lines; '#' starts a comment, blank lines are skipped.

    Raises:
        ConfigurationError: On lines without '=' or repeated keys
    """
    values: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key in values:
            raise ConfigurationError(f"{source}:{lineno}: duplicate key '{key}'")
        values[key] = _coerce(key, raw)
    return values


def read_config_values(path: Union[str, Path]) -> dict[str, Any]:
    """Read and parse a config file."""
    path = Path(path)
    values = parse_config_text(path.read_text(encoding="utf-8"), str(path))
    logger.debug(f"loaded {len(values)} settings from {path}")
    return values
