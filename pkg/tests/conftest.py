"""Shared fixtures for the htcsim test suite."""

import numpy as np
import pytest

from htcsim.encodings import FixedPoint, Polarity
from htcsim.htc_arith import MacConfig, SelectorKind
from htcsim.pgm import GrayImage


def fp(code: int, bits: int = 3, polarity: Polarity = Polarity.UNIPOLAR) -> FixedPoint:
    """Shorthand FixedPoint constructor used across the tests."""
    return FixedPoint(bits=bits, code=code, polarity=polarity)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_cfg():
    """K = 4, N = 3 MAC with the default LFSR selector."""
    return MacConfig(bits=3, fan_in=4)


@pytest.fixture
def round_robin_cfg():
    return MacConfig(bits=3, fan_in=4, selector=SelectorKind.ROUND_ROBIN)


@pytest.fixture
def smooth_image():
    """64x64 natural-like image: gradients plus a low-frequency ripple."""
    y, x = np.mgrid[0:64, 0:64].astype(np.float64)
    values = 60 + 1.5 * x + 0.8 * y + 20 * np.sin(x / 9.0) * np.cos(y / 13.0)
    return GrayImage(pixels=np.clip(np.rint(values), 0, 255).astype(np.uint8))


@pytest.fixture
def bright_image():
    """Bright textured 48x48 image."""
    y, x = np.mgrid[0:48, 0:48].astype(np.float64)
    values = 200 + 30 * np.sin(x / 5.0) * np.sin(y / 7.0)
    return GrayImage(pixels=np.clip(np.rint(values), 0, 255).astype(np.uint8))


@pytest.fixture
def random_image(rng):
    return GrayImage(pixels=rng.integers(0, 256, size=(20, 28), dtype=np.uint8))
