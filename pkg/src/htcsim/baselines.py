"""
Reference models of the two comparison paradigms.

CBSC (counting-based SC) multiplies by counting the ones of a regulated
stream of x inside a down-counter window of w cycles and adds the counts
exactly in binary. The Unary design multiplies exactly by repeating one PWM
stream for every bit of the other (length n_A * n_B) and adds by OR-ing
cyclically delayed products, which loses whatever overlaps.
"""

import math
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, field_validator

from htcsim.encodings import (
    FixedPoint,
    Polarity,
    check_pair,
    encode_rb,
    rb_digit_schedule,
    rb_prefix_counts,
)
from htcsim.errors import ConfigurationError
from htcsim.logging_config import get_logger

logger = get_logger(__name__)


class UnaryStream(BaseModel):
    """
    A unary (PWM-style) bit stream of arbitrary length n >= 1.

    Operand streams built by UnaryStream.pwm hold their ones as a contiguous
    prefix. Products and OR sums are general streams; their value is still
    popcount / n.
    """

    bits: np.ndarray

    model_config = {"frozen": True, "arbitrary_types_allowed": True}

    @field_validator("bits", mode="before")
    @classmethod
    def convert_bits(cls, v):
        arr = np.array(v, dtype=np.uint8).reshape(-1)
        if arr.size == 0:
            raise ValueError("unary stream must have at least one bit")
        if np.any(arr > 1):
            raise ValueError("unary stream values must be 0 or 1")
        arr.setflags(write=False)
        return arr

    @classmethod
    def pwm(cls, ones: int, length: int) -> "UnaryStream":
        """Duty-cycle stream: `ones` ones followed by zeros."""
        if not 0 <= ones <= length:
            raise ConfigurationError(f"{ones} ones do not fit a stream of length {length}")
        return cls(bits=np.arange(length) < ones)

    @classmethod
    def from_string(cls, text: str) -> "UnaryStream":
        return cls(bits=[int(ch) for ch in text.strip()])

    @property
    def length(self) -> int:
        return int(self.bits.size)

    @property
    def popcount(self) -> int:
        return int(self.bits.sum(dtype=np.int64))

    @property
    def value(self) -> Fraction:
        return Fraction(self.popcount, self.length)

    @property
    def is_pwm(self) -> bool:
        """True when the ones form a single prefix run."""
        return not np.any(np.diff(self.bits.astype(np.int8)) > 0)

    def to_string(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)


class UnaryMacResult(BaseModel):
    """Unary MAC output together with its cycle count."""

    value: Fraction
    latency_cycles: int
    out: UnaryStream

    model_config = {"frozen": True, "arbitrary_types_allowed": True}


# --- CBSC -------------------------------------------------------------------


def _cbsc_count(x_code: int, w_code: int, bits: int) -> int:
    """Ones of RB(x) in the first w cycles; x = 2^N is the all-ones stream."""
    if x_code == 1 << bits:
        return w_code
    rb = encode_rb(FixedPoint(bits=bits, code=x_code)).bits
    return int(rb[:w_code].sum(dtype=np.int64))


def cbsc_multiply(w: FixedPoint, x: FixedPoint) -> FixedPoint:
    """
    Counting-based multiply: count the ones of RB(x) while a down counter
    loaded with w runs to zero.

    Returns:
        FixedPoint whose code is the count (value count / 2^N)

    Raises:
        ConfigurationError: For bipolar operands or mismatched widths

    Example:
        >>> cbsc_multiply(FixedPoint(bits=3, code=5), FixedPoint(bits=3, code=6)).code
        4
    """
    check_pair(w, x)
    if w.polarity != Polarity.UNIPOLAR:
        raise ConfigurationError("cbsc_multiply works on unipolar operands; use cbsc_mac for bipolar")
    return FixedPoint(bits=w.bits, code=_cbsc_count(x.code, w.code, w.bits))


def _sign_magnitude(code: int, bits: int) -> tuple[int, int]:
    """Bipolar offset code to (sign, magnitude), magnitude in units of 2^-N."""
    doubled = 2 * code - (1 << bits)
    return (1 if doubled >= 0 else -1), abs(doubled)


def cbsc_mac(b: Sequence[FixedPoint], c: Sequence[FixedPoint], polarity: Polarity) -> Fraction:
    """
    Sum of CBSC products b_i * c_i with exact binary addition.

    Coefficients b take the regulated-stream role, data c set the counting
    window. Bipolar operands go through sign-magnitude: the magnitudes are
    multiplied on the unipolar counting core and the sign is applied to the
    binary count.

    Raises:
        ConfigurationError: On dimension, width or polarity mismatch
    """
    if len(b) != len(c):
        raise ConfigurationError(f"coefficient and data vectors differ in length: {len(b)} vs {len(c)}")
    total = Fraction(0)
    for bi, ci in zip(b, c):
        check_pair(bi, ci)
        if bi.polarity != polarity:
            raise ConfigurationError(f"operand is {bi.polarity.value}, MAC is {polarity.value}")
        if polarity == Polarity.UNIPOLAR:
            total += cbsc_multiply(ci, bi).value
            continue
        sign_b, mag_b = _sign_magnitude(bi.code, bi.bits)
        sign_c, mag_c = _sign_magnitude(ci.code, ci.bits)
        total += Fraction(sign_b * sign_c * _cbsc_count(mag_b, mag_c, bi.bits), 1 << bi.bits)
    return total


def cbsc_product_counts(b_codes: np.ndarray, c_codes: np.ndarray, bits: int, polarity: Polarity) -> np.ndarray:
    """
    Vectorized signed CBSC products as numerators over 2^N.

    Args:
        b_codes: Coefficient codes (RB role), any shape
        c_codes: Data codes (window role), same shape
    """
    b_codes = np.asarray(b_codes, dtype=np.int64)
    c_codes = np.asarray(c_codes, dtype=np.int64)
    counts = rb_prefix_counts(bits)
    if polarity == Polarity.UNIPOLAR:
        return counts[b_codes, c_codes]
    full = 1 << bits
    db = 2 * b_codes - full
    dc = 2 * c_codes - full
    sign = np.where((db < 0) ^ (dc < 0), -1, 1)
    return sign * counts[np.abs(db), np.abs(dc)]


# --- Unary ------------------------------------------------------------------


def unary_multiply(a: UnaryStream, b: UnaryStream) -> UnaryStream:
    """
    Exact unary product by clock division.

    Bit t of the n_A * n_B output is a[t mod n_A] AND b[t div n_A]: stream a
    repeats once for every bit of b.
    """
    return UnaryStream(bits=np.tile(a.bits, b.length) & np.repeat(b.bits, a.length))


def unary_add_or(streams: Sequence[UnaryStream], delays: Sequence[int]) -> UnaryStream:
    """
    OR of cyclically delayed streams.

    Exact while the delayed one-runs stay disjoint; overlapping ones are lost.

    Raises:
        ConfigurationError: On duplicate delays or unequal stream lengths
    """
    if not streams:
        raise ConfigurationError("unary_add_or needs at least one stream")
    if len(streams) != len(delays):
        raise ConfigurationError(f"{len(streams)} streams but {len(delays)} delays")
    length = streams[0].length
    if any(s.length != length for s in streams):
        raise ConfigurationError("unary_add_or streams must share one length")
    wrapped = [int(d) % length for d in delays]
    if len(set(wrapped)) != len(wrapped):
        raise ConfigurationError(f"unary delays must be pairwise distinct, got {list(delays)}")
    out = np.zeros(length, dtype=np.uint8)
    for stream, delay in zip(streams, wrapped):
        out |= np.roll(stream.bits, delay)
    return UnaryStream(bits=out)


def unary_accuracy_bound(n: int, summands: int) -> int:
    """
    Largest number of ones per input stream that keeps a delayed-OR sum of
    `summands` terms exact: floor(n / (ceil((sqrt(4N + 1) - 1) / 2) + 1)).
    """
    if n < 1 or summands < 1:
        raise ConfigurationError(f"stream length and summand count must be >= 1, got n={n}, N={summands}")
    # ceil((sqrt(4N+1) - 1) / 2) is the smallest k with k(k+1) >= N
    k = (math.isqrt(4 * summands + 1) - 1) // 2
    while k * (k + 1) < summands:
        k += 1
    return n // (k + 1)


def default_delays(summands: int, length: int) -> list[int]:
    """Delay of summand i is i * floor(L / M)."""
    step = length // summands
    if step == 0:
        raise ConfigurationError(f"{summands} summands cannot get distinct delays in {length} cycles")
    return [i * step for i in range(summands)]


def _unary_ones(x: FixedPoint, n: int) -> int:
    """Ones of a length-n PWM stream carrying x (rounded when n != 2^N)."""
    if n == x.n_max:
        return x.code
    return int(round(x.value * n))


def unary_mac(
    b: Sequence[FixedPoint],
    c: Sequence[FixedPoint],
    n: Optional[int] = None,
    delays: Optional[Sequence[int]] = None,
) -> UnaryMacResult:
    """
    Unary multiply-accumulate with explicit bit streams.

    Each data value c_i becomes a PWM stream of length n that is repeated
    once per bit of the coefficient stream b_i; the M products (length n^2)
    are delay-OR'ed.

    Args:
        b: Coefficients (unipolar)
        c: Data values (unipolar)
        n: Base stream length (defaults to 2^N)
        delays: Per-summand delays (defaults to i * floor(n^2 / M))

    Returns:
        UnaryMacResult with the decoded sum and the cycle count M * n^2
    """
    if not b or len(b) != len(c):
        raise ConfigurationError(f"unary_mac needs equal non-empty vectors, got {len(b)} and {len(c)}")
    for bi, ci in zip(b, c):
        check_pair(bi, ci)
        if bi.polarity != Polarity.UNIPOLAR:
            raise ConfigurationError("the unary design supports unipolar operands only")
    n = n if n is not None else b[0].n_max
    summands = len(b)
    length = n * n
    delays = list(delays) if delays is not None else default_delays(summands, length)

    products = [
        unary_multiply(UnaryStream.pwm(_unary_ones(ci, n), n), UnaryStream.pwm(_unary_ones(bi, n), n))
        for bi, ci in zip(b, c)
    ]
    out = unary_add_or(products, delays)
    logger.debug(f"unary MAC: {summands} products of {length} cycles, popcount {out.popcount}")
    return UnaryMacResult(value=out.value, latency_cycles=summands * length, out=out)


def unary_dot_popcounts(
    coef_ones: np.ndarray,
    data_ones: np.ndarray,
    n: int,
    delays: Sequence[int],
) -> np.ndarray:
    """
    Vectorized OR-sum popcounts for many unary MACs.

    Every product is made of n blocks of length n: coefficient i covers its
    first coef_ones[i] blocks, each holding data_ones[i] leading ones. When
    all delays are whole blocks, the OR of a block is its highest covering
    summand, so the popcount is the sum over blocks of that maximum.
    Other schedules are simulated bit by bit.

    Args:
        coef_ones: Coefficient ones counts, shape (S, M)
        data_ones: Data ones counts, shape (S, M)
        n: Base stream length
        delays: M delays in cycles of the n^2 product

    Returns:
        Popcounts of the OR outputs, shape (S,)
    """
    coef_ones = np.asarray(coef_ones, dtype=np.int64)
    data_ones = np.asarray(data_ones, dtype=np.int64)
    length = n * n
    wrapped = np.asarray([int(d) % length for d in delays], dtype=np.int64)
    if len(set(wrapped.tolist())) != wrapped.size:
        raise ConfigurationError(f"unary delays must be pairwise distinct, got {list(delays)}")

    if np.all(wrapped % n == 0):
        shift = wrapped // n
        blocks = np.arange(n, dtype=np.int64)
        source = (blocks[None, :] - shift[:, None]) % n  # (M, n)
        covered = source[None, :, :] < coef_ones[:, :, None]  # (S, M, n)
        heights = np.where(covered, data_ones[:, :, None], 0)
        return heights.max(axis=1).sum(axis=1)

    logger.debug("unary delays not block aligned, simulating streams")
    out = np.empty(coef_ones.shape[0], dtype=np.int64)
    for s in range(coef_ones.shape[0]):
        products = [
            unary_multiply(UnaryStream.pwm(int(d), n), UnaryStream.pwm(int(k), n))
            for k, d in zip(coef_ones[s], data_ones[s])
        ]
        out[s] = unary_add_or(products, wrapped.tolist()).popcount
    return out


def rb_window_trace(x_code: int, w_code: int, bits: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Per-cycle wires of one CBSC multiplier: RB stream, window enable and the
    counter's count-enable (their AND).
    """
    epoch = 1 << bits
    digits = rb_digit_schedule(bits)
    if x_code == epoch:
        rb = np.ones(epoch, dtype=np.uint8)
    else:
        rb = ((x_code >> np.maximum(digits, 0)) & 1).astype(np.uint8)
        rb[digits < 0] = 0
    window = (np.arange(epoch) < w_code).astype(np.uint8)
    return rb, window, rb & window
