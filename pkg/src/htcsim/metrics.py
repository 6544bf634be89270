"""
Accuracy benches, exhaustive multiplier sweeps, image quality and switching activity.

Every design reports results as integer numerators over D = 2^(2N), so bench
errors are exact integers. Trials are drawn in fixed-size chunks from spawned
SeedSequences; per-chunk sums are exact, so the statistics do not depend on
how many threads evaluate the chunks.
"""

import math
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from htcsim.design import DesignOptions, MacDesign, exact_products
from htcsim.encodings import FixedPoint, Polarity
from htcsim.errors import ConfigurationError, ImageError
from htcsim.htc_arith import WireKind, WireTrace
from htcsim.logging_config import get_logger
from htcsim.parallel import chunk_bounds, ordered_map
from htcsim.pgm import GrayImage
from htcsim.registry import design_registry

logger = get_logger(__name__)

# Trials per random-number chunk. Fixed so results never depend on thread count.
BENCH_CHUNK = 10_000

MAX_SWEEP_BITS = 10


class Normalization(str, Enum):
    """Scale used to express bench errors as a percentage."""

    UNIT = "unit"  # % of one product's full scale
    FANIN = "fanin"  # % of the K-term dot product's full scale


class VectorDistribution(str, Enum):
    """Operand distribution for benches."""

    UNIFORM = "uniform"  # uniform over representable codes
    ZERO = "zero"  # every operand is exactly zero


class ErrorStats(BaseModel):
    """
    Error statistics of a bench or sweep.

    Attributes:
        rmse_pct: Root mean squared error in percent
        sde_pct: Standard deviation of the signed error in percent
        max_abs_err: Largest absolute error, value units
        mean_err: Mean signed error (bias), value units
        trials: Number of evaluated samples
    """

    rmse_pct: float = Field(ge=0.0)
    sde_pct: float = Field(ge=0.0)
    max_abs_err: float = Field(ge=0.0)
    mean_err: float = 0.0
    trials: int = Field(ge=1)

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def validate_decomposition(self):
        """RMSE^2 = bias^2 + SDE^2, so SDE never exceeds RMSE."""
        if self.sde_pct > self.rmse_pct * (1 + 1e-12) + 1e-12:
            raise ValueError(f"SDE {self.sde_pct} exceeds RMSE {self.rmse_pct}")
        return self


class ActivityReport(BaseModel):
    """
    Transition counts per wire.

    Attributes:
        wires: Wire name to transition count
        kinds: Wire name to signal class
        evaluations: Number of evaluations folded into the counts
    """

    wires: dict[str, int] = Field(default_factory=dict)
    kinds: dict[str, WireKind] = Field(default_factory=dict)
    evaluations: int = 1

    def total(self, kind: Optional[WireKind] = None) -> int:
        """Total transitions, optionally restricted to one signal class."""
        return sum(n for name, n in self.wires.items() if kind is None or self.kinds[name] == kind)

    @property
    def totals(self) -> dict[WireKind, int]:
        out = {kind: 0 for kind in WireKind}
        for name, n in self.wires.items():
            out[self.kinds[name]] += n
        return out

    def merge(self, other: "ActivityReport") -> "ActivityReport":
        """Sum the counts of two reports wire by wire."""
        wires = dict(self.wires)
        for name, n in other.wires.items():
            wires[name] = wires.get(name, 0) + n
        return ActivityReport(
            wires=wires,
            kinds={**self.kinds, **other.kinds},
            evaluations=self.evaluations + other.evaluations,
        )


class MulSweepRow(BaseModel):
    """One (a, b) pair of an exhaustive multiplier sweep."""

    a: int
    b: int
    product: Fraction
    exact: Fraction

    model_config = {"frozen": True}

    @property
    def error(self) -> Fraction:
        return self.product - self.exact


def resolve_design(design: Union[str, MacDesign], options: Optional[DesignOptions] = None) -> MacDesign:
    """Look up a design by name unless an instance is given."""
    if isinstance(design, MacDesign):
        return design
    return design_registry.get_design(design, options)


def _stats(
    sum_err: int,
    sum_sq: int,
    max_abs: int,
    trials: int,
    denominator: int,
    scale: float,
) -> ErrorStats:
    mean = Fraction(sum_err, trials * denominator)
    mse = Fraction(sum_sq, trials * denominator * denominator)
    var = mse - mean * mean
    return ErrorStats(
        rmse_pct=math.sqrt(mse) * scale,
        sde_pct=math.sqrt(var) * scale,
        max_abs_err=max_abs / denominator,
        mean_err=float(mean),
        trials=trials,
    )


def mac_error_bench(
    design: Union[str, MacDesign],
    bits: int = 8,
    fan_in: int = 4,
    trials: int = 100_000,
    seed: int = 42,
    polarity: Polarity = Polarity.UNIPOLAR,
    options: Optional[DesignOptions] = None,
    normalization: Normalization = Normalization.UNIT,
    distribution: VectorDistribution = VectorDistribution.UNIFORM,
    workers: Optional[int] = None,
) -> ErrorStats:
    """
    Accuracy of K-term dot products on random vectors.

    Each trial draws K coefficient and K data codes uniformly and compares the
    design's output with the exact dot product of the quantized values.

    Args:
        design: Design name or instance
        bits: Operand width N
        fan_in: Vector length K (also the HTC fan-in unless options say otherwise)
        trials: Number of random vector pairs
        seed: Seed of the NumPy SeedSequence
        polarity: Operand polarity
        options: Design options (defaults to fan_in K)
        normalization: UNIT reports % of 1.0, FANIN % of K
        distribution: Operand distribution
        workers: Thread count (HTC_SIM_THREADS when None)

    Returns:
        ErrorStats of the signed errors

    Raises:
        ConfigurationError: If trials < 1 or the design lacks the polarity
    """
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")
    options = options if options is not None else DesignOptions(fan_in=fan_in)
    mac = resolve_design(design, options)
    if not mac.supports(polarity):
        raise ConfigurationError(f"design '{mac.name}' does not support {polarity.value} operands")

    denominator = 1 << (2 * bits)
    chunks = chunk_bounds(trials, BENCH_CHUNK)
    seeds = np.random.SeedSequence(seed).spawn(len(chunks))
    zero = FixedPoint.zero(bits, polarity).code
    logger.info(f"{mac.name} bench: {trials} trials, N={bits}, K={fan_in}, {polarity.value}")

    def run_chunk(job):
        (start, stop), seq = job
        rows = stop - start
        if distribution == VectorDistribution.ZERO:
            b = np.full((rows, fan_in), zero, dtype=np.int64)
            c = b.copy()
        else:
            rng = np.random.default_rng(seq)
            b = rng.integers(0, 1 << bits, size=(rows, fan_in), dtype=np.int64)
            c = rng.integers(0, 1 << bits, size=(rows, fan_in), dtype=np.int64)
        err = mac.dot_numerators(b, c, bits, polarity) - exact_products(b, c, bits, polarity).sum(axis=1)
        return int(err.sum()), int((err * err).sum()), int(np.abs(err).max())

    parts = ordered_map(run_chunk, list(zip(chunks, seeds)), workers)
    sum_err = sum(p[0] for p in parts)
    sum_sq = sum(p[1] for p in parts)
    max_abs = max(p[2] for p in parts)

    scale = 100.0 if normalization == Normalization.UNIT else 100.0 / fan_in
    stats = _stats(sum_err, sum_sq, max_abs, trials, denominator, scale)
    logger.info(f"{mac.name}: RMSE {stats.rmse_pct:.3f}%  SDE {stats.sde_pct:.3f}%")
    return stats


def _sweep_grid(bits: int) -> tuple[np.ndarray, np.ndarray]:
    if not 1 <= bits <= MAX_SWEEP_BITS:
        raise ConfigurationError(f"exhaustive sweeps support 1..{MAX_SWEEP_BITS} bits, got {bits}")
    codes = np.arange(1 << bits, dtype=np.int64)
    a, b = np.meshgrid(codes, codes, indexing="ij")
    return a.reshape(-1), b.reshape(-1)


def exhaustive_mul_error(
    design: Union[str, MacDesign],
    bits: int,
    polarity: Polarity = Polarity.UNIPOLAR,
) -> ErrorStats:
    """
    Error of the design's multiplier over every (a, b) code pair.

    a is the coefficient (regulated stream), b the data (window). RMSE and
    SDE are percentages of 1.0.
    """
    mac = resolve_design(design)
    if not mac.supports(polarity):
        raise ConfigurationError(f"design '{mac.name}' does not support {polarity.value} operands")
    a, b = _sweep_grid(bits)
    err = mac.multiply_codes(a, b, bits, polarity) - exact_products(a, b, bits, polarity)
    return _stats(int(err.sum()), int((err * err).sum()), int(np.abs(err).max()), err.size, 1 << (2 * bits), 100.0)


def mul_sweep_table(
    design: Union[str, MacDesign],
    bits: int,
    polarity: Polarity = Polarity.UNIPOLAR,
) -> list[MulSweepRow]:
    """Every (a, b) pair with the design's product and the exact product."""
    mac = resolve_design(design)
    if not mac.supports(polarity):
        raise ConfigurationError(f"design '{mac.name}' does not support {polarity.value} operands")
    a, b = _sweep_grid(bits)
    product = mac.multiply_codes(a, b, bits, polarity)
    exact = exact_products(a, b, bits, polarity)
    denominator = 1 << (2 * bits)
    return [
        MulSweepRow(a=int(x), b=int(y), product=Fraction(int(p), denominator), exact=Fraction(int(e), denominator))
        for x, y, p, e in zip(a, b, product, exact)
    ]


def transitions(bits: np.ndarray) -> int:
    """Level changes of one wire over an epoch that starts at 0 and resets to 0."""
    levels = np.concatenate([[0], np.asarray(bits, dtype=np.int8), [0]])
    return int(np.count_nonzero(np.diff(levels)))


def switching_activity(traces: Sequence[WireTrace]) -> ActivityReport:
    """
    Count transitions on every traced wire.

    Raises:
        ConfigurationError: If no traces are given
    """
    if not traces:
        raise ConfigurationError("switching_activity needs at least one wire trace")
    return ActivityReport(
        wires={t.name: transitions(t.bits) for t in traces},
        kinds={t.name: t.kind for t in traces},
    )


def activity_bench(
    design: Union[str, MacDesign],
    bits: int = 8,
    fan_in: int = 4,
    evaluations: int = 1000,
    seed: int = 42,
    polarity: Polarity = Polarity.UNIPOLAR,
    options: Optional[DesignOptions] = None,
) -> ActivityReport:
    """Switching activity accumulated over random MAC evaluations."""
    if evaluations < 1:
        raise ConfigurationError(f"evaluations must be >= 1, got {evaluations}")
    options = options if options is not None else DesignOptions(fan_in=fan_in)
    mac = resolve_design(design, options)
    if not mac.supports(polarity):
        raise ConfigurationError(f"design '{mac.name}' does not support {polarity.value} operands")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    b = rng.integers(0, 1 << bits, size=(evaluations, fan_in), dtype=np.int64)
    c = rng.integers(0, 1 << bits, size=(evaluations, fan_in), dtype=np.int64)
    report: Optional[ActivityReport] = None
    for i in range(evaluations):
        one = switching_activity(mac.activity_traces(b[i], c[i], bits, polarity))
        report = one if report is None else report.merge(one)
    logger.info(f"{mac.name} activity over {evaluations} evaluations: {report.total()} transitions")
    return report


def image_metrics(a: GrayImage, b: GrayImage) -> tuple[float, float]:
    """
    PSNR (dB) and RMSE of two images with pixels normalized to [0, 1].

    Identical images give (inf, 0.0).

    Raises:
        ImageError: If the dimensions differ or the images are empty
    """
    if a.pixels.shape != b.pixels.shape:
        raise ImageError(f"image sizes differ: {a.width}x{a.height} vs {b.width}x{b.height}")
    if a.pixels.size == 0:
        raise ImageError("cannot compare empty images")
    diff = a.normalized() - b.normalized()
    rmse = float(np.sqrt(np.mean(diff * diff)))
    if rmse == 0.0:
        return math.inf, 0.0
    return 20.0 * math.log10(1.0 / rmse), rmse
