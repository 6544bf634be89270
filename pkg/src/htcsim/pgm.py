"""
8-bit grayscale images and PGM (P2/P5) file I/O.

Reading accepts ASCII (P2) and binary (P5) files with maxval <= 255 and
'#' comments anywhere in the header. Samples are rescaled to 0..255 when
maxval is below 255. Writing always produces binary P5 with maxval 255.
"""

from pathlib import Path
from typing import Union

import numpy as np
from pydantic import BaseModel, field_validator

from htcsim.errors import PgmHeaderError, PgmMaxvalError, PgmTruncatedError
from htcsim.logging_config import get_logger

logger = get_logger(__name__)

_WHITESPACE = b" \t\r\n\v\f"


class GrayImage(BaseModel):
    """
    A grayscale image with 8-bit intensities.

    Attributes:
        pixels: Read-only uint8 array of shape (height, width), row-major
    """

    pixels: np.ndarray

    model_config = {"frozen": True, "arbitrary_types_allowed": True}

    @field_validator("pixels", mode="before")
    @classmethod
    def convert_pixels(cls, v):
        arr = np.asarray(v)
        if arr.ndim != 2:
            raise ValueError(f"image must be 2-D, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ValueError("pixel values must lie in 0..255")
            arr = arr.astype(np.uint8)
        arr = np.array(arr, dtype=np.uint8)
        arr.setflags(write=False)
        return arr

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def data(self) -> bytes:
        """Row-major intensities."""
        return self.pixels.tobytes()

    def normalized(self) -> np.ndarray:
        """Pixels as float64 in [0, 1]."""
        return self.pixels.astype(np.float64) / 255.0

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        return hash((self.pixels.shape, self.pixels.tobytes()))


class _HeaderReader:
    """Whitespace-separated token reader that skips '#' comments."""

    def __init__(self, raw: bytes):
        self.raw = raw
        self.pos = 0

    def token(self, what: str) -> bytes:
        raw = self.raw
        while self.pos < len(raw):
            ch = raw[self.pos : self.pos + 1]
            if ch == b"#":
                end = raw.find(b"\n", self.pos)
                self.pos = len(raw) if end < 0 else end + 1
            elif ch in _WHITESPACE:
                self.pos += 1
            else:
                break
        start = self.pos
        while self.pos < len(raw) and raw[self.pos : self.pos + 1] not in _WHITESPACE + b"#":
            self.pos += 1
        if start == self.pos:
            raise PgmHeaderError(f"unexpected end of header while reading {what}")
        return raw[start : self.pos]

    def integer(self, what: str) -> int:
        tok = self.token(what)
        if not tok.isdigit():
            raise PgmHeaderError(f"invalid {what}: {tok!r}")
        return int(tok)


def pgm_parse(raw: bytes) -> GrayImage:
    """
    Parse PGM bytes.

    Raises:
        PgmHeaderError: Unknown magic number or malformed dimensions
        PgmMaxvalError: maxval outside 1..255
        PgmTruncatedError: Fewer samples than width * height
    """
    reader = _HeaderReader(raw)
    magic = reader.token("magic number")
    if magic not in (b"P2", b"P5"):
        raise PgmHeaderError(f"unsupported magic number {magic!r} (expected P2 or P5)")
    width = reader.integer("width")
    height = reader.integer("height")
    if width == 0 or height == 0:
        raise PgmHeaderError(f"image dimensions must be positive, got {width}x{height}")
    maxval = reader.integer("maxval")
    if not 1 <= maxval <= 255:
        raise PgmMaxvalError(f"maxval {maxval} outside 1..255")
    count = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        start = reader.pos + 1
        payload = raw[start : start + count]
        if len(payload) < count:
            raise PgmTruncatedError(f"expected {count} samples, found {len(payload)}")
        samples = np.frombuffer(payload, dtype=np.uint8).astype(np.int64)
    else:
        values = raw[reader.pos :].split()
        if len(values) < count:
            raise PgmTruncatedError(f"expected {count} samples, found {len(values)}")
        try:
            samples = np.array([int(v) for v in values[:count]], dtype=np.int64)
        except ValueError:
            raise PgmHeaderError("non-numeric sample in P2 raster") from None

    if samples.max(initial=0) > maxval:
        raise PgmMaxvalError(f"sample value {samples.max()} exceeds maxval {maxval}")
    if maxval != 255:
        samples = (samples * 255 + maxval // 2) // maxval
    return GrayImage(pixels=samples.reshape(height, width))


def pgm_read(path: Union[str, Path]) -> GrayImage:
    """Read a P2 or P5 PGM file."""
    path = Path(path)
    image = pgm_parse(path.read_bytes())
    logger.debug(f"read {path}: {image.width}x{image.height}")
    return image


def pgm_encode(image: GrayImage) -> bytes:
    """Binary P5 encoding with maxval 255."""
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + image.data


def pgm_write(image: GrayImage, path: Union[str, Path]) -> None:
    """Write an image as binary P5 PGM."""
    path = Path(path)
    path.write_bytes(pgm_encode(image))
    logger.debug(f"wrote {path}: {image.width}x{image.height}")
