"""
Quantized values and the three HTC bitstream formats.

A FixedPoint holds an N-bit code n. Its value is n / 2^N (unipolar) or
2n / 2^N - 1 (bipolar). Bitstreams carry one value over an epoch of 2^N
cycles:

- TB (temporal): n ones followed by zeros, a single time window.
- RB (regulated): every binary digit X_i of n appears 2^i times, spread
  evenly over the epoch by the trailing-zeros rule driven by the up-counter.
- GB (general): any stream whose ones-density is the value (gate/MUX output).

All models are frozen pydantic models; stream payloads are read-only numpy
uint8 arrays so values can be shared freely between threads.
"""

from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from htcsim.errors import ConfigurationError, RangeError
from htcsim.logging_config import get_logger

logger = get_logger(__name__)

MAX_BITS = 16

# Vectorized lookup tables grow as 4^N; benches and sweeps stay below this.
MAX_TABLE_BITS = 12


class Polarity(str, Enum):
    """Value interpretation of a ones-density p."""

    UNIPOLAR = "unipolar"  # X = p in [0, 1)
    BIPOLAR = "bipolar"  # X = 2p - 1 in [-1, 1)


class BitstreamFormat(str, Enum):
    """The three HTC stream formats."""

    TB = "tb"
    RB = "rb"
    GB = "gb"


class FixedPoint(BaseModel):
    """
    An N-bit quantized number.

    Attributes:
        bits: Bit width N (1..16)
        code: Integer code n with 0 <= n < 2^N
        polarity: Unipolar or bipolar interpretation of n
    """

    bits: int = Field(ge=1, le=MAX_BITS)
    code: int = Field(ge=0)
    polarity: Polarity = Polarity.UNIPOLAR

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def validate_code_range(self):
        """Codes run from 0 to 2^N - 1; exactly 1.0 is not representable."""
        if self.code >= 1 << self.bits:
            raise ValueError(f"code {self.code} does not fit in {self.bits} bits")
        return self

    @property
    def n_max(self) -> int:
        """Cycles in one epoch (2^N)."""
        return 1 << self.bits

    @property
    def p(self) -> Fraction:
        """Ones-density n / 2^N."""
        return Fraction(self.code, self.n_max)

    @property
    def value(self) -> Fraction:
        """Exact represented value."""
        if self.polarity == Polarity.UNIPOLAR:
            return self.p
        return 2 * self.p - 1

    @property
    def signed(self) -> int:
        """Signed two's-complement code of a bipolar value (n - 2^(N-1))."""
        return self.code - (1 << (self.bits - 1))

    @classmethod
    def zero(cls, bits: int, polarity: Polarity = Polarity.UNIPOLAR) -> "FixedPoint":
        """Exact zero: code 0 (unipolar) or the midpoint 2^(N-1) (bipolar)."""
        code = 0 if polarity == Polarity.UNIPOLAR else 1 << (bits - 1)
        return cls(bits=bits, code=code, polarity=polarity)

    @classmethod
    def from_real(cls, value: float, bits: int, polarity: Polarity = Polarity.UNIPOLAR) -> "FixedPoint":
        """
        Quantize a real value by rounding to the nearest code, saturating.

        Args:
            value: Real value to quantize
            bits: Bit width N
            polarity: Target interpretation

        Returns:
            FixedPoint nearest to value inside the representable range
        """
        code = int(quantize_codes(np.asarray([value], dtype=np.float64), bits, polarity)[0])
        return cls(bits=bits, code=code, polarity=polarity)


def quantize_codes(values: np.ndarray, bits: int, polarity: Polarity) -> np.ndarray:
    """Round real values to N-bit codes (vectorized), saturating at both ends."""
    scale = 1 << bits
    p = values if polarity == Polarity.UNIPOLAR else (values + 1.0) / 2.0
    return np.clip(np.rint(p * scale), 0, scale - 1).astype(np.int64)


class Bitstream(BaseModel):
    """
    A bit sequence of length 2^N tagged with its format and polarity.

    Attributes:
        bits: Read-only uint8 array of 0/1 values, one per cycle
        format: TB, RB or GB
        polarity: Interpretation used by decode()
    """

    bits: np.ndarray
    format: BitstreamFormat = BitstreamFormat.GB
    polarity: Polarity = Polarity.UNIPOLAR

    model_config = {"frozen": True, "arbitrary_types_allowed": True}

    @field_validator("bits", mode="before")
    @classmethod
    def convert_bits(cls, v):
        """Accept any 0/1 sequence and freeze it as uint8."""
        arr = np.array(v, dtype=np.uint8).reshape(-1)
        if arr.size == 0 or arr.size & (arr.size - 1):
            raise ValueError(f"bitstream length must be a power of two, got {arr.size}")
        if arr.size > 1 << MAX_BITS:
            raise ValueError(f"bitstream longer than 2^{MAX_BITS} cycles")
        if np.any(arr > 1):
            raise ValueError("bitstream values must be 0 or 1")
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def validate_tb_prefix(self):
        """TB streams hold a single prefix window of ones."""
        if self.format == BitstreamFormat.TB and np.any(np.diff(self.bits.astype(np.int8)) > 0):
            raise ValueError("TB bitstream must be a prefix of ones")
        return self

    @classmethod
    def from_string(
        cls,
        text: str,
        format: BitstreamFormat = BitstreamFormat.GB,
        polarity: Polarity = Polarity.UNIPOLAR,
    ) -> "Bitstream":
        """Build a stream from a '0'/'1' string such as '01010100'."""
        return cls(bits=[int(ch) for ch in text.strip()], format=format, polarity=polarity)

    def to_string(self) -> str:
        """Render as a '0'/'1' string, first cycle first."""
        return "".join("1" if b else "0" for b in self.bits)

    @property
    def epoch(self) -> int:
        """Number of cycles (2^N)."""
        return int(self.bits.size)

    @property
    def n_bits(self) -> int:
        """Bit width N of the owning context."""
        return self.epoch.bit_length() - 1

    @property
    def popcount(self) -> int:
        """Number of ones."""
        return int(self.bits.sum(dtype=np.int64))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Bitstream):
            return NotImplemented
        return (
            self.format == other.format
            and self.polarity == other.polarity
            and np.array_equal(self.bits, other.bits)
        )

    def __hash__(self):
        """Make hashable for use in dicts/sets."""
        return hash((self.format, self.polarity, self.bits.tobytes()))


class LfsrState(BaseModel):
    """
    Fibonacci LFSR configuration and state.

    Tap p reads state bit (width - p), so tap `width` is the output bit and the
    taps list the exponents of the feedback polynomial. The default taps
    (8, 6, 5, 4) give x^8 + x^4 + x^3 + x^2 + 1, a primitive polynomial with
    period 255.

    Attributes:
        width: Register width (2..32)
        taps: Tap positions, 1..width
        state: Current register contents, never zero
    """

    width: int = Field(default=8, ge=2, le=32)
    taps: tuple[int, ...] = (8, 6, 5, 4)
    state: int = 0x5A

    model_config = {"frozen": True}

    @field_validator("taps", mode="before")
    @classmethod
    def normalize_taps(cls, v):
        """Sort taps descending and drop duplicates."""
        return tuple(sorted({int(t) for t in v}, reverse=True))

    @model_validator(mode="after")
    def validate_register(self):
        """Taps must lie inside the register and the state must be nonzero."""
        if not self.taps:
            raise ValueError("LFSR needs at least one tap")
        if self.width not in self.taps:
            raise ValueError(f"tap {self.width} (the output bit) is required")
        if any(t < 1 or t > self.width for t in self.taps):
            raise ValueError(f"taps {self.taps} outside 1..{self.width}")
        if not 0 < self.state < 1 << self.width:
            raise ValueError(f"LFSR state must be in 1..2^{self.width}-1, got {self.state}")
        return self

    @property
    def tap_mask(self) -> int:
        """Bit mask of the tapped state bits."""
        mask = 0
        for t in self.taps:
            mask |= 1 << (self.width - t)
        return mask


def _lfsr_step(state: int, width: int, tap_mask: int) -> int:
    feedback = (state & tap_mask).bit_count() & 1
    return (state >> 1) | (feedback << (width - 1))


def lfsr_next(state: LfsrState) -> tuple[int, LfsrState]:
    """
    Advance the LFSR by one step.

    The output bit is the lowest state bit; the XOR of the tapped bits is
    shifted in at the top.

    Args:
        state: Current LFSR state

    Returns:
        (output bit, successor state)
    """
    bit = state.state & 1
    successor = _lfsr_step(state.state, state.width, state.tap_mask)
    return bit, state.model_copy(update={"state": successor})


def lfsr_states(state: LfsrState, steps: int) -> np.ndarray:
    """States after each of `steps` successive steps (the seed itself excluded)."""
    out = np.empty(steps, dtype=np.int64)
    s, width, mask = state.state, state.width, state.tap_mask
    for i in range(steps):
        s = _lfsr_step(s, width, mask)
        out[i] = s
    return out


def lfsr_period(state: LfsrState, limit: Optional[int] = None) -> int:
    """Number of steps until the register returns to its starting state."""
    limit = limit if limit is not None else 1 << state.width
    s, width, mask = state.state, state.width, state.tap_mask
    for i in range(1, limit + 1):
        s = _lfsr_step(s, width, mask)
        if s == state.state:
            return i
    raise ConfigurationError(f"LFSR did not return to its seed within {limit} steps")


def check_pair(a: FixedPoint, b: FixedPoint) -> None:
    """Raise ConfigurationError unless both operands share width and polarity."""
    if a.bits != b.bits or a.polarity != b.polarity:
        raise ConfigurationError(
            f"operands disagree: {a.bits}-bit {a.polarity.value} vs {b.bits}-bit {b.polarity.value}",
        )


@lru_cache(maxsize=None)
def rb_digit_schedule(bits: int) -> np.ndarray:
    """
    Digit index emitted by the RB generator at cycles t = 1..2^N.

    With k trailing zeros in t, the digit is X_(N-1-k); the final cycle
    (k = N) emits 0 and is marked -1.
    """
    t = np.arange(1, (1 << bits) + 1, dtype=np.int64)
    lowest = t & -t
    k = np.log2(lowest).astype(np.int64)
    digits = np.where(k < bits, bits - 1 - k, -1)
    digits.setflags(write=False)
    return digits


def _rb_bits(code: int, bits: int) -> np.ndarray:
    digits = rb_digit_schedule(bits)
    out = (code >> np.maximum(digits, 0)) & 1
    out[digits < 0] = 0
    return out.astype(np.uint8)


def encode_tb(x: FixedPoint) -> Bitstream:
    """n ones followed by 2^N - n zeros."""
    bits = (np.arange(x.n_max) < x.code).astype(np.uint8)
    return Bitstream(bits=bits, format=BitstreamFormat.TB, polarity=x.polarity)


def encode_rb(x: FixedPoint) -> Bitstream:
    """
    Regulated bitstream of x.

    For cycle t = 1..2^N with k trailing zeros, emit X_(N-1-k) (0 when k = N).
    Digit X_i therefore appears exactly 2^i times, evenly spaced.

    Example:
        >>> encode_rb(FixedPoint(bits=3, code=0b011)).to_string()
        '01010100'
    """
    return Bitstream(bits=_rb_bits(x.code, x.bits), format=BitstreamFormat.RB, polarity=x.polarity)


def signed_to_offset(s: int, bits: int) -> FixedPoint:
    """
    Map a signed two's-complement code to the bipolar offset code n = s + 2^(N-1).

    This flips the sign bit and realizes p = (X + 1) / 2.

    Raises:
        RangeError: If s lies outside [-2^(N-1), 2^(N-1))
    """
    half = 1 << (bits - 1)
    if not -half <= s < half:
        raise RangeError(f"signed code {s} outside [{-half}, {half}) for {bits} bits")
    return FixedPoint(bits=bits, code=s + half, polarity=Polarity.BIPOLAR)


def decode(bs: Bitstream) -> Fraction:
    """popcount / 2^N (unipolar) or 2 * popcount / 2^N - 1 (bipolar)."""
    p = Fraction(bs.popcount, bs.epoch)
    return p if bs.polarity == Polarity.UNIPOLAR else 2 * p - 1


def gb_to_tb(bs: Bitstream) -> Bitstream:
    """Compact the ones of any stream into a TB window (shift-register conversion)."""
    bits = (np.arange(bs.epoch) < bs.popcount).astype(np.uint8)
    return Bitstream(bits=bits, format=BitstreamFormat.TB, polarity=bs.polarity)


def _check_table_bits(bits: int) -> None:
    if not 1 <= bits <= MAX_TABLE_BITS:
        raise ConfigurationError(f"lookup tables support 1..{MAX_TABLE_BITS} bits, got {bits}")


@lru_cache(maxsize=None)
def rb_table(bits: int) -> np.ndarray:
    """
    RB streams of every code, shape (2^N + 1, 2^N).

    Row 2^N is the all-ones stream (value exactly 1.0), used by counting
    designs whose magnitudes can reach full scale.
    """
    _check_table_bits(bits)
    epoch = 1 << bits
    digits = rb_digit_schedule(bits)
    codes = np.arange(epoch, dtype=np.int64)[:, None]
    table = ((codes >> np.maximum(digits, 0)[None, :]) & 1).astype(np.uint8)
    table[:, digits < 0] = 0
    table = np.vstack([table, np.ones((1, epoch), dtype=np.uint8)])
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def rb_prefix_counts(bits: int) -> np.ndarray:
    """
    Ones of RB(code) inside the first w cycles, shape (2^N + 1, 2^N + 1).

    Entry [code, w] is the CBSC down-counter result for window w.
    """
    table = rb_table(bits)
    counts = np.zeros((table.shape[0], table.shape[1] + 1), dtype=np.int64)
    np.cumsum(table, axis=1, out=counts[:, 1:])
    counts.setflags(write=False)
    return counts
