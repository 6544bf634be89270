"""Tests for GrayImage and PGM reading/writing."""

import numpy as np
import pytest
from pydantic import ValidationError

from htcsim.errors import PgmHeaderError, PgmMaxvalError, PgmTruncatedError
from htcsim.pgm import GrayImage, pgm_encode, pgm_parse, pgm_read, pgm_write


class TestParse:
    def test_ascii(self):
        img = pgm_parse(b"P2 2 2 255 0 128 255 64")
        assert img.pixels.tolist() == [[0, 128], [255, 64]]
        assert (img.width, img.height) == (2, 2)

    def test_binary_with_comments(self):
        raw = b"P5\n# made by hand\n3 1 # width height\n255\n" + bytes([10, 20, 35])
        assert pgm_parse(raw).pixels.tolist() == [[10, 20, 35]]

    def test_small_maxval_is_rescaled(self):
        img = pgm_parse(b"P2\n3 1\n15\n0 15 7\n")
        assert img.pixels.tolist() == [[0, 255, 119]]

    def test_bad_magic(self):
        with pytest.raises(PgmHeaderError):
            pgm_parse(b"P6\n1 1\n255\n\x00")

    def test_zero_width(self):
        with pytest.raises(PgmHeaderError):
            pgm_parse(b"P2 0 1 255")

    def test_maxval_too_large(self):
        with pytest.raises(PgmMaxvalError):
            pgm_parse(b"P2 1 1 65535 7")

    def test_sample_above_maxval(self):
        with pytest.raises(PgmMaxvalError):
            pgm_parse(b"P2 2 1 100 5 101")

    def test_truncated_binary(self):
        with pytest.raises(PgmTruncatedError):
            pgm_parse(b"P5\n4 4\n255\n" + bytes(10))

    def test_truncated_ascii(self):
        with pytest.raises(PgmTruncatedError):
            pgm_parse(b"P2 2 2 255 1 2 3")

    def test_missing_header_field(self):
        with pytest.raises(PgmHeaderError):
            pgm_parse(b"P5\n4")


class TestWrite:
    def test_encode_is_binary_p5(self):
        img = GrayImage(pixels=np.array([[1, 2], [3, 4]], dtype=np.uint8))
        assert pgm_encode(img) == b"P5\n2 2\n255\n\x01\x02\x03\x04"

    def test_file_round_trip(self, tmp_path, random_image):
        path = tmp_path / "out.pgm"
        pgm_write(random_image, path)
        assert pgm_read(path) == random_image


class TestGrayImage:
    def test_read_only(self):
        img = GrayImage(pixels=np.zeros((2, 2), dtype=np.uint8))
        with pytest.raises(ValueError):
            img.pixels[0, 0] = 1

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            GrayImage(pixels=np.array([[0, 300]]))

    def test_rejects_1d(self):
        with pytest.raises(ValidationError):
            GrayImage(pixels=np.zeros(4, dtype=np.uint8))

    def test_normalized(self):
        img = GrayImage(pixels=np.array([[0, 255]], dtype=np.uint8))
        assert img.normalized().tolist() == [[0.0, 1.0]]
