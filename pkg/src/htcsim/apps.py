"""
Image pipelines built on the MAC designs: a 6-tap Gaussian FIR blur and an
8x8 block DCT/IDCT round trip.

Both pipelines reduce every output sample to one dot product of quantized
coefficient and data codes and hand whole batches to the selected design.
Besides the registry designs, the name "oracle" runs the same pipeline in
double precision with no intermediate quantization.

HTC selector seeds depend only on the output position (FIR pass and
row/column, DCT stage and block coordinates), so results are identical for
every chunking and thread count.
"""

import math
from enum import Enum
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from pydantic import BaseModel, Field, field_validator, model_validator

from htcsim.design import DesignOptions, MacDesign
from htcsim.encodings import FixedPoint, LfsrState, Polarity, quantize_codes
from htcsim.errors import ConfigurationError, ImageError
from htcsim.htc_arith import derive_seed
from htcsim.logging_config import get_logger
from htcsim.metrics import image_metrics, resolve_design
from htcsim.parallel import chunk_bounds, ordered_map
from htcsim.pgm import GrayImage

logger = get_logger(__name__)

ORACLE = "oracle"

# Rows (FIR) or blocks (DCT) handed to one worker.
FIR_CHUNK_ROWS = 32
DCT_CHUNK_BLOCKS = 256

BLOCK = 8

# Output index aligned to tap 2 of the even-length kernel (the last tap for shorter kernels).
FIR_ALIGN = 2

# Binary shift of each DCT stage result. Stored scales are 1/4, 1/8, 1/4 and 1;
# the inverse stages use doubled coefficients.
DCT_STAGE_SHIFTS = (-2, -1, 0, 1)


class FirMode(str, Enum):
    SEPARABLE = "separable"  # rows, then columns
    ROWS = "rows"


class PsnrReference(str, Enum):
    ORIGINAL = "original"  # compare against the input image
    FILTERED = "filtered"  # compare against a double-precision filtered image


class AppResult(BaseModel):
    """
    Output image of a pipeline and its quality metrics.

    Attributes:
        image: Pipeline output
        psnr_db: PSNR against the reference (inf when identical)
        rmse: Normalized RMSE against the reference
        saturated: Intermediate samples clipped to the representable range
        latency_cycles: Cycles of one dot product on the chosen design
    """

    image: GrayImage
    psnr_db: float
    rmse: float
    saturated: int = 0
    latency_cycles: int = 0

    model_config = {"frozen": True}


def gaussian6_taps() -> list[float]:
    """Binomial 6-tap Gaussian approximation [1, 5, 10, 10, 5, 1] / 32."""
    return [w / 32.0 for w in (1, 5, 10, 10, 5, 1)]


def quantize_taps(taps, bits: int = 8) -> tuple[FixedPoint, ...]:
    """Round real taps to unipolar N-bit fractions."""
    return tuple(FixedPoint.from_real(float(t), bits, Polarity.UNIPOLAR) for t in taps)


class FirSpec(BaseModel):
    """
    FIR filter configuration.

    Attributes:
        taps: Real-valued taps (the quantized codes derive from them)
        bits: Coefficient and pixel width N
        design: Registry design name or "oracle"
        mode: Separable 2-D or rows-only filtering
    """

    taps: tuple[float, ...] = Field(default_factory=lambda: tuple(gaussian6_taps()))
    bits: int = Field(default=8, ge=1, le=12)
    design: str = "htc"
    mode: FirMode = FirMode.SEPARABLE

    model_config = {"frozen": True}

    @field_validator("taps")
    @classmethod
    def validate_taps(cls, v):
        if not v:
            raise ValueError("FIR needs at least one tap")
        if any(t < 0 or t >= 1 for t in v):
            raise ValueError("taps must lie in [0, 1)")
        return v

    @model_validator(mode="after")
    def validate_sub_stochastic(self):
        """The quantized kernel must not amplify."""
        total = sum(t.value for t in self.tap_codes)
        if total > 1:
            raise ValueError(f"quantized taps sum to {float(total):.4f} > 1")
        return self

    @property
    def tap_codes(self) -> tuple[FixedPoint, ...]:
        return quantize_taps(self.taps, self.bits)


class DctSpec(BaseModel):
    """
    DCT round-trip configuration.

    Attributes:
        bits: Width of coefficients and stored intermediates
        design: Registry design name or "oracle"
    """

    bits: int = Field(default=8, ge=2, le=12)
    design: str = "htc"

    model_config = {"frozen": True}

    @property
    def coeff_matrix(self) -> np.ndarray:
        """Bipolar codes of the forward DCT matrix."""
        return quantize_codes(dct8_matrix(), self.bits, Polarity.BIPOLAR)


def dct8_matrix() -> np.ndarray:
    """
    Orthonormal 8-point DCT-II matrix.

    C[k][m] = a_k * sqrt(2/8) * cos((2m + 1) k pi / 16), a_0 = 1/sqrt(2).
    """
    k = np.arange(BLOCK)[:, None]
    m = np.arange(BLOCK)[None, :]
    c = math.sqrt(2.0 / BLOCK) * np.cos((2 * m + 1) * k * math.pi / (2 * BLOCK))
    c[0, :] /= math.sqrt(2.0)
    return c


def _pixel_codes(pixels: np.ndarray, bits: int) -> np.ndarray:
    """Unipolar codes of 8-bit pixels (the pixel itself at N = 8)."""
    return quantize_codes(pixels.astype(np.float64) / 256.0, bits, Polarity.UNIPOLAR)


def _to_pixels(values: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(values), 0, 255).astype(np.uint8)


def _check_image(img: GrayImage) -> None:
    if img.pixels.size == 0:
        raise ImageError("image is empty")


def _fir_windows(values: np.ndarray, ntaps: int) -> np.ndarray:
    """Edge-padded (rows, cols, taps) windows along axis 1."""
    align = min(FIR_ALIGN, ntaps - 1)
    padded = np.pad(values, ((0, 0), (align, ntaps - 1 - align)), mode="edge")
    return sliding_window_view(padded, ntaps, axis=1)


def _fir_pass(
    pixels: np.ndarray,
    spec: FirSpec,
    mac: Optional[MacDesign],
    lfsr: LfsrState,
    pass_index: int,
    workers: Optional[int],
) -> np.ndarray:
    """Filter along axis 1 of a uint8 array; returns float pixel values."""
    ntaps = len(spec.taps)
    windows = _fir_windows(pixels, ntaps)
    rows, cols = pixels.shape

    if mac is None:
        taps = np.asarray(spec.taps, dtype=np.float64)
        return windows.astype(np.float64) @ taps

    # dot products run on whole MACs, pad to the next power of two terms
    terms = 1 << (ntaps - 1).bit_length()
    coef = np.zeros(terms, dtype=np.int64)
    coef[:ntaps] = [t.code for t in spec.tap_codes]

    def run(bounds):
        start, stop = bounds
        data = np.zeros((stop - start, cols, terms), dtype=np.int64)
        data[:, :, :ntaps] = _pixel_codes(windows[start:stop], spec.bits)
        data = data.reshape(-1, terms)
        coeffs = np.broadcast_to(coef, data.shape)
        row_seeds = [derive_seed(lfsr.state, pass_index, r, width=lfsr.width) for r in range(start, stop)]
        seeds = np.repeat(row_seeds, cols)
        values = mac.dot_batch(coeffs, data, spec.bits, Polarity.UNIPOLAR, seeds)
        return values.reshape(stop - start, cols) * 256.0

    parts = ordered_map(run, chunk_bounds(rows, FIR_CHUNK_ROWS), workers)
    return np.vstack(parts)


def fir_apply(
    img: GrayImage,
    spec: FirSpec,
    options: Optional[DesignOptions] = None,
    workers: Optional[int] = None,
) -> GrayImage:
    """
    Apply the FIR kernel with the configured design.

    Rows are filtered first, then (separable mode) columns. Borders are edge
    replicated and each pass rounds and clamps to 0..255.

    Raises:
        ImageError: If the image is empty
        ConfigurationError: If the design does not exist
    """
    _check_image(img)
    mac = None if spec.design == ORACLE else resolve_design(spec.design, options)
    lfsr = (options or DesignOptions()).lfsr
    logger.info(f"FIR {spec.mode.value} on {img.width}x{img.height} with {spec.design}")

    out = _to_pixels(_fir_pass(img.pixels, spec, mac, lfsr, 0, workers))
    if spec.mode == FirMode.SEPARABLE:
        out = _to_pixels(_fir_pass(out.T, spec, mac, lfsr, 1, workers)).T
    return GrayImage(pixels=out)


def fir_reference(img: GrayImage, spec: FirSpec) -> GrayImage:
    """Double-precision filtered image with real taps, rounded once at the end."""
    _check_image(img)
    oracle = spec.model_copy(update={"design": ORACLE})
    values = _fir_pass(img.pixels, oracle, None, LfsrState(), 0, 1)
    if spec.mode == FirMode.SEPARABLE:
        # the oracle pass is linear, so filter the unrounded rows
        values = (_fir_windows(values.T, len(spec.taps)) @ np.asarray(spec.taps)).T
    return GrayImage(pixels=_to_pixels(values))


def fir_run(
    img: GrayImage,
    spec: FirSpec,
    reference: PsnrReference = PsnrReference.ORIGINAL,
    options: Optional[DesignOptions] = None,
    workers: Optional[int] = None,
) -> AppResult:
    """Filter an image and score it against the chosen reference."""
    out = fir_apply(img, spec, options, workers)
    ref = img if reference == PsnrReference.ORIGINAL else fir_reference(img, spec)
    psnr, rmse = image_metrics(out, ref)
    latency = 0
    if spec.design != ORACLE:
        terms = 1 << (len(spec.taps) - 1).bit_length()
        latency = resolve_design(spec.design, options).latency_cycles(spec.bits, terms)
    logger.info(f"FIR {spec.design}: PSNR {psnr:.2f} dB, RMSE {rmse:.4f}")
    return AppResult(image=out, psnr_db=psnr, rmse=rmse, latency_cycles=latency)


def _blocks(pixels: np.ndarray) -> tuple[np.ndarray, tuple[int, int]]:
    """Edge-pad to multiples of 8 and split into (by, bx, 8, 8) blocks."""
    h, w = pixels.shape
    padded = np.pad(pixels, ((0, -h % BLOCK), (0, -w % BLOCK)), mode="edge")
    by, bx = padded.shape[0] // BLOCK, padded.shape[1] // BLOCK
    blocks = padded.reshape(by, BLOCK, bx, BLOCK).swapaxes(1, 2)
    return blocks, (by, bx)


def _unblock(blocks: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    by, bx = blocks.shape[:2]
    full = blocks.swapaxes(1, 2).reshape(by * BLOCK, bx * BLOCK)
    return full[: shape[0], : shape[1]]


def _transform_rows(
    mac: MacDesign,
    blocks: np.ndarray,
    coeff_codes: np.ndarray,
    bits: int,
    seeds: np.ndarray,
) -> np.ndarray:
    """
    out[b, r, k] = sum_m coeff[k, m] * blocks[b, r, m] on the design.

    Args:
        blocks: Bipolar data codes, shape (B, 8, 8)
        coeff_codes: Bipolar coefficient codes, shape (8, 8)
        seeds: One LFSR seed per block, shape (B,)

    Returns:
        Float values, shape (B, 8, 8)
    """
    nblocks = blocks.shape[0]
    data = np.broadcast_to(blocks[:, :, None, :], (nblocks, BLOCK, BLOCK, BLOCK)).reshape(-1, BLOCK)
    coeffs = np.broadcast_to(coeff_codes[None, None, :, :], (nblocks, BLOCK, BLOCK, BLOCK)).reshape(-1, BLOCK)
    row_seeds = np.repeat(seeds, BLOCK * BLOCK)
    return mac.dot_batch(coeffs, data, bits, Polarity.BIPOLAR, row_seeds).reshape(nblocks, BLOCK, BLOCK)


def _requantize(values: np.ndarray, bits: int) -> tuple[np.ndarray, int]:
    """Saturating bipolar codes of stage outputs, with the number of clipped samples."""
    half = 1 << (bits - 1)
    raw = np.rint(values * half)
    saturated = int(np.count_nonzero((raw < -half) | (raw > half - 1)))
    return quantize_codes(values, bits, Polarity.BIPOLAR), saturated


def _dct_fixed_point(
    blocks: np.ndarray,
    coords: np.ndarray,
    spec: DctSpec,
    mac: MacDesign,
    lfsr: LfsrState,
) -> tuple[np.ndarray, int]:
    """Round trip of (B, 8, 8) pixel blocks on a design; returns pixel values."""
    bits = spec.bits
    forward = spec.coeff_matrix
    inverse = quantize_codes(2.0 * dct8_matrix().T, bits, Polarity.BIPOLAR)
    stage_coeffs = (forward, forward, inverse, inverse)

    codes = quantize_codes((blocks.astype(np.float64) - 128.0) / 128.0, bits, Polarity.BIPOLAR)
    saturated = 0
    values = None
    for stage, (coeff, shift) in enumerate(zip(stage_coeffs, DCT_STAGE_SHIFTS)):
        seeds = np.array(
            [derive_seed(lfsr.state, stage, by, bx, width=lfsr.width) for by, bx in coords],
            dtype=np.int64,
        )
        # stages 1 and 4 run along rows, 2 and 3 along columns
        along_columns = stage in (1, 2)
        operand = codes.swapaxes(1, 2) if along_columns else codes
        values = _transform_rows(mac, operand, coeff, bits, seeds) * (2.0**shift)
        if along_columns:
            values = values.swapaxes(1, 2)
        if stage < 3:
            codes, clipped = _requantize(values, bits)
            saturated += clipped
    return values * 128.0 + 128.0, saturated


def _dct_oracle(blocks: np.ndarray) -> np.ndarray:
    c = dct8_matrix()
    x = (blocks.astype(np.float64) - 128.0) / 128.0
    coeffs = c @ x @ c.T
    return (c.T @ coeffs @ c) * 128.0 + 128.0


def dct_forward_oracle(block: np.ndarray) -> np.ndarray:
    """Real-arithmetic 2-D DCT of one 8x8 block of level-shifted values."""
    c = dct8_matrix()
    return c @ np.asarray(block, dtype=np.float64) @ c.T


def dct_roundtrip(
    img: GrayImage,
    spec: DctSpec,
    options: Optional[DesignOptions] = None,
    workers: Optional[int] = None,
) -> AppResult:
    """
    Forward and inverse 8x8 block DCT of an image on the chosen design.

    Pixels map to bipolar values (p - 128) / 128. Each block goes through
    rows, columns, inverse columns and inverse rows; every 8-point output is
    one 8-term dot product. Intermediates are stored as saturating bipolar
    codes at scales 1/4, 1/8 and 1/4; the pixel scale is restored last.

    Raises:
        ImageError: If the image is empty
        ConfigurationError: If the design lacks bipolar support
    """
    _check_image(img)
    blocks, grid = _blocks(img.pixels)
    by, bx = grid
    flat = blocks.reshape(-1, BLOCK, BLOCK)
    coords = np.array([(i, j) for i in range(by) for j in range(bx)], dtype=np.int64).reshape(-1, 2)
    logger.info(f"DCT round trip of {by * bx} blocks with {spec.design}")

    latency = 0
    if spec.design == ORACLE:
        values = _dct_oracle(flat)
        saturated = 0
    else:
        mac = resolve_design(spec.design, options)
        if not mac.supports(Polarity.BIPOLAR):
            raise ConfigurationError(f"design '{mac.name}' cannot run the bipolar DCT")
        lfsr = (options or DesignOptions()).lfsr

        def run(bounds):
            start, stop = bounds
            return _dct_fixed_point(flat[start:stop], coords[start:stop], spec, mac, lfsr)

        parts = ordered_map(run, chunk_bounds(flat.shape[0], DCT_CHUNK_BLOCKS), workers)
        values = np.concatenate([p[0] for p in parts])
        saturated = sum(p[1] for p in parts)
        latency = mac.latency_cycles(spec.bits, BLOCK)
        if saturated:
            logger.warning(f"{saturated} intermediate DCT samples saturated")

    out = _unblock(_to_pixels(values).reshape(by, bx, BLOCK, BLOCK), img.pixels.shape)
    result_image = GrayImage(pixels=out)
    psnr, rmse = image_metrics(result_image, img)
    logger.info(f"DCT {spec.design}: PSNR {psnr:.2f} dB, RMSE {rmse:.4f}")
    return AppResult(image=result_image, psnr_db=psnr, rmse=rmse, saturated=saturated, latency_cycles=latency)

