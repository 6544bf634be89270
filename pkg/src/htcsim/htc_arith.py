"""
HTC multiplication, scaled addition, accumulation and the K-input MAC.

One HTC multiplier is a single gate: AND for unipolar operands, XNOR for
bipolar ones. The coefficient enters as a regulated bitstream (RB), the data
as a temporal bitstream (TB). K multiplier outputs are averaged by a K:1 MUX
whose select lines come from an LFSR; the MUX output is counted by an
incrementer and shifted left by log2(K) to recover the binary sum.

Every generator in a MAC is driven by one shared cycle index, so the scalar
path (htc_mac, with per-wire traces) and the vectorized path (mac_popcounts,
used by benches and image pipelines) produce the same counts.
"""

from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from htcsim.encodings import (
    Bitstream,
    BitstreamFormat,
    FixedPoint,
    LfsrState,
    Polarity,
    check_pair,
    encode_rb,
    encode_tb,
    gb_to_tb,
    lfsr_states,
    rb_prefix_counts,
    rb_table,
)
from htcsim.errors import ConfigurationError
from htcsim.logging_config import get_logger

logger = get_logger(__name__)


class SelectorKind(str, Enum):
    """Source of the MUX select lines."""

    LFSR = "lfsr"  # low bits of an LFSR stepped once per cycle
    ROUND_ROBIN = "round_robin"  # (t - 1) mod K
    COUNTER = "counter"  # shared up-counter bits above the lowest set bit


class WireKind(str, Enum):
    """Signal class of a traced wire, used to group switching activity."""

    TB = "tb"
    RB = "rb"
    GB = "gb"
    SELECTOR = "selector"


class MacConfig(BaseModel):
    """
    Parameters that fully determine an HTC MAC instance.

    Attributes:
        bits: Operand width N; the epoch is 2^N cycles
        fan_in: Number of multipliers K (power of two, 2..16)
        polarity: Unipolar (AND) or bipolar (XNOR) multiplication
        selector: Where the MUX select lines come from
        lfsr: LFSR configuration and seed (used when selector is LFSR)
    """

    bits: int = Field(default=8, ge=1, le=16)
    fan_in: int = Field(default=4, ge=2, le=16)
    polarity: Polarity = Polarity.UNIPOLAR
    selector: SelectorKind = SelectorKind.LFSR
    lfsr: LfsrState = LfsrState()

    model_config = {"frozen": True}

    @field_validator("fan_in")
    @classmethod
    def validate_power_of_two(cls, v):
        if v & (v - 1):
            raise ValueError(f"fan_in must be a power of two, got {v}")
        return v

    @model_validator(mode="after")
    def validate_selector_width(self):
        """The LFSR must provide log2(K) select bits per cycle."""
        if self.selector == SelectorKind.LFSR and self.select_bits > self.lfsr.width:
            raise ValueError(f"LFSR width {self.lfsr.width} cannot drive {self.select_bits} select lines")
        return self

    @property
    def epoch(self) -> int:
        return 1 << self.bits

    @property
    def select_bits(self) -> int:
        """MUX select width, also the accumulator's left shift."""
        return self.fan_in.bit_length() - 1

    def with_seed(self, seed: int) -> "MacConfig":
        """Same MAC with a different LFSR seed."""
        return self.model_copy(update={"lfsr": self.lfsr.model_copy(update={"state": seed})})


class WireTrace(BaseModel):
    """Cycle-indexed bit sequence of one named wire."""

    name: str
    kind: WireKind
    bits: np.ndarray

    model_config = {"frozen": True, "arbitrary_types_allowed": True}

    @field_validator("bits", mode="before")
    @classmethod
    def freeze_bits(cls, v):
        arr = np.array(v, dtype=np.uint8).reshape(-1)
        arr.setflags(write=False)
        return arr


class MacResult(BaseModel):
    """
    Output of one MAC evaluation.

    Attributes:
        binary_sum: Accumulator result (exact rational, units of 1/2^N)
        mux_out: Scaled-sum stream in GB format
        out_tb: Scaled sum re-encoded as TB for the next stage
        trace: Every multiplier output, selector line and the MUX/TB outputs
    """

    binary_sum: Fraction
    mux_out: Bitstream
    out_tb: Bitstream
    trace: tuple[WireTrace, ...] = ()

    model_config = {"frozen": True, "arbitrary_types_allowed": True}


@lru_cache(maxsize=4096)
def _selector_sequence(kind: SelectorKind, bits: int, fan_in: int, width: int, taps: tuple, seed: int) -> np.ndarray:
    epoch = 1 << bits
    if kind == SelectorKind.LFSR:
        states = lfsr_states(LfsrState(width=width, taps=taps, state=seed), epoch)
        seq = states & (fan_in - 1)
    elif kind == SelectorKind.ROUND_ROBIN:
        seq = np.arange(epoch, dtype=np.int64) % fan_in
    else:
        t = np.arange(1, epoch + 1, dtype=np.int64)
        lowest = t & -t
        seq = (t // (2 * lowest)) % fan_in
    seq = seq.astype(np.int64)
    seq.setflags(write=False)
    return seq


def selector_sequence(cfg: MacConfig) -> np.ndarray:
    """
    Input index picked by the MUX at each cycle of the epoch.

    LFSR: the register is stepped once per cycle and its low log2(K) bits
    select. The sequence restarts from cfg.lfsr.state for every MAC epoch.
    """
    return _selector_sequence(
        cfg.selector,
        cfg.bits,
        cfg.fan_in,
        cfg.lfsr.width,
        cfg.lfsr.taps,
        cfg.lfsr.state,
    )


def htc_multiply(a: FixedPoint, b: FixedPoint, polarity: Polarity) -> Bitstream:
    """
    Multiply a (as RB) by b (as TB) with one gate per cycle.

    Bipolar operands already carry the offset code n = s + 2^(N-1), so both
    generators use it directly and the XNOR output decodes as 2p - 1.

    Raises:
        ConfigurationError: If widths or polarities disagree
    """
    check_pair(a, b)
    if a.polarity != polarity:
        raise ConfigurationError(f"operands are {a.polarity.value}, multiplier is {polarity.value}")
    rb = encode_rb(a).bits
    tb = encode_tb(b).bits
    out = rb & tb if polarity == Polarity.UNIPOLAR else 1 - (rb ^ tb)
    return Bitstream(bits=out, format=BitstreamFormat.GB, polarity=polarity)


def scaled_add(inputs: Sequence[Bitstream], cfg: MacConfig) -> Bitstream:
    """
    K:1 MUX: at cycle t output inputs[sel(t)][t].

    The output density approximates the mean of the input densities.

    Raises:
        ConfigurationError: If the number or length of inputs does not match cfg
    """
    if len(inputs) != cfg.fan_in:
        raise ConfigurationError(f"scaled_add expects {cfg.fan_in} inputs, got {len(inputs)}")
    for i, bs in enumerate(inputs):
        if bs.epoch != cfg.epoch:
            raise ConfigurationError(f"input {i} has {bs.epoch} cycles, epoch is {cfg.epoch}")
    stack = np.stack([bs.bits for bs in inputs])
    sel = selector_sequence(cfg)
    out = stack[sel, np.arange(cfg.epoch)]
    return Bitstream(bits=out, format=BitstreamFormat.GB, polarity=cfg.polarity)


def accumulate_numerators(popcount, fan_in: int, bits: int, polarity: Polarity):
    """
    Accumulator result as a numerator over 2^N (scalar or array).

    Unipolar: popcount << log2(K). Bipolar: K * (2 * popcount - 2^N).
    """
    if polarity == Polarity.UNIPOLAR:
        return popcount * fan_in
    return fan_in * (2 * popcount - (1 << bits))


def accumulate(bs: Bitstream, cfg: MacConfig) -> Fraction:
    """Recover the binary sum from the MUX output stream."""
    return Fraction(accumulate_numerators(bs.popcount, cfg.fan_in, cfg.bits, cfg.polarity), cfg.epoch)


def _check_vectors(b: Sequence[FixedPoint], c: Sequence[FixedPoint], cfg: MacConfig, expected: Optional[int]) -> None:
    if len(b) != len(c):
        raise ConfigurationError(f"coefficient and data vectors differ in length: {len(b)} vs {len(c)}")
    if expected is not None and len(b) != expected:
        raise ConfigurationError(f"MAC expects {expected} operand pairs, got {len(b)}")
    for x in (*b, *c):
        if x.bits != cfg.bits or x.polarity != cfg.polarity:
            raise ConfigurationError(
                f"operand {x.bits}-bit {x.polarity.value} does not match MAC {cfg.bits}-bit {cfg.polarity.value}",
            )


def htc_mac(b: Sequence[FixedPoint], c: Sequence[FixedPoint], cfg: MacConfig) -> MacResult:
    """
    Evaluate a = sum_i b_i * c_i on one K-input HTC MAC.

    Args:
        b: K coefficients, generated as RB
        c: K data values, generated as TB
        cfg: MAC configuration

    Returns:
        MacResult with the binary sum, the GB and TB outputs and a full trace

    Raises:
        ConfigurationError: On dimension, width or polarity mismatch
    """
    _check_vectors(b, c, cfg, cfg.fan_in)

    trace: list[WireTrace] = []
    products = []
    for i, (bi, ci) in enumerate(zip(b, c)):
        rb = encode_rb(bi)
        tb = encode_tb(ci)
        product = htc_multiply(bi, ci, cfg.polarity)
        products.append(product)
        trace.append(WireTrace(name=f"rb_{i}", kind=WireKind.RB, bits=rb.bits))
        trace.append(WireTrace(name=f"tb_{i}", kind=WireKind.TB, bits=tb.bits))
        trace.append(WireTrace(name=f"mul_{i}", kind=WireKind.GB, bits=product.bits))

    sel = selector_sequence(cfg)
    for j in range(cfg.select_bits):
        trace.append(WireTrace(name=f"sel_{j}", kind=WireKind.SELECTOR, bits=(sel >> j) & 1))

    mux = scaled_add(products, cfg)
    out_tb = gb_to_tb(mux)
    trace.append(WireTrace(name="mux", kind=WireKind.GB, bits=mux.bits))
    trace.append(WireTrace(name="out_tb", kind=WireKind.TB, bits=out_tb.bits))

    return MacResult(binary_sum=accumulate(mux, cfg), mux_out=mux, out_tb=out_tb, trace=tuple(trace))


def pad_to_fan_in(b: Sequence[FixedPoint], c: Sequence[FixedPoint], cfg: MacConfig):
    """Zero-pad both vectors up to a multiple of K."""
    missing = -len(b) % cfg.fan_in
    zero = FixedPoint.zero(cfg.bits, cfg.polarity)
    return list(b) + [zero] * missing, list(c) + [zero] * missing


def htc_dot(b: Sequence[FixedPoint], c: Sequence[FixedPoint], cfg: MacConfig) -> Fraction:
    """
    Dot product of any length M >= 1 on ceil(M / K) chained MACs.

    The MAC results are combined by exact binary addition.
    """
    if not b:
        raise ConfigurationError("htc_dot needs at least one operand pair")
    _check_vectors(b, c, cfg, None)
    b, c = pad_to_fan_in(b, c, cfg)
    k = cfg.fan_in
    total = Fraction(0)
    for start in range(0, len(b), k):
        total += htc_mac(b[start : start + k], c[start : start + k], cfg).binary_sum
    return total


def multiply_popcounts(a_codes: np.ndarray, b_codes: np.ndarray, bits: int, polarity: Polarity) -> np.ndarray:
    """Vectorized popcount of htc_multiply(a, b) for arrays of codes."""
    a_codes = np.asarray(a_codes, dtype=np.int64)
    b_codes = np.asarray(b_codes, dtype=np.int64)
    epoch = 1 << bits
    inside = rb_prefix_counts(bits)[a_codes, b_codes]
    if polarity == Polarity.UNIPOLAR:
        return inside
    # XNOR ones: both high inside the window plus both low outside it
    return 2 * inside + epoch - b_codes - a_codes


def mac_popcounts(
    b_codes: np.ndarray,
    c_codes: np.ndarray,
    bits: int,
    polarity: Polarity,
    selectors: np.ndarray,
) -> np.ndarray:
    """
    MUX-output popcounts for many K-input MACs at once.

    Args:
        b_codes: Coefficient codes, shape (S, K)
        c_codes: Data codes, shape (S, K)
        bits: Operand width N
        polarity: Multiplier polarity
        selectors: Select sequence, shape (2^N,) shared by all MACs or (S, 2^N)

    Returns:
        Popcounts of the MUX outputs, shape (S,)
    """
    b_codes = np.asarray(b_codes, dtype=np.int64)
    c_codes = np.asarray(c_codes, dtype=np.int64)
    epoch = 1 << bits
    cycles = np.arange(epoch, dtype=np.int64)
    table = rb_table(bits)
    if selectors.ndim == 1:
        b_sel = b_codes[:, selectors]
        c_sel = c_codes[:, selectors]
    else:
        b_sel = np.take_along_axis(b_codes, selectors, axis=1)
        c_sel = np.take_along_axis(c_codes, selectors, axis=1)
    rb_bits = table[b_sel, cycles[None, :]].astype(bool)
    tb_bits = cycles[None, :] < c_sel
    if polarity == Polarity.UNIPOLAR:
        product = rb_bits & tb_bits
    else:
        product = rb_bits == tb_bits
    return product.sum(axis=1, dtype=np.int64)



def derive_seed(base: int, *coords: int, width: int = 8) -> int:
    """
    Deterministic nonzero LFSR seed for a pipeline position.

    Mixes the base seed with coordinates such as (pass, row) or
    (stage, block_row, block_col) through a NumPy SeedSequence.
    """
    mixed = int(np.random.SeedSequence([int(base), *(int(c) for c in coords)]).generate_state(1)[0])
    return mixed % ((1 << width) - 1) + 1
