"""
Pluggable MAC designs.

A design turns integer operand codes into dot products. Benches, sweeps and
the image pipelines only talk to this interface, so HTC, CBSC, Unary and the
exact reference are interchangeable wherever a design name is accepted.

All results are exact integer numerators over 2^(2N) (one product of two
N-bit fractions); dot_batch converts them to float values.
"""

from abc import ABC, abstractmethod
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field

from htcsim.encodings import LfsrState, Polarity
from htcsim.errors import ConfigurationError
from htcsim.htc_arith import SelectorKind, WireTrace


class DesignOptions(BaseModel):
    """
    Knobs shared by the design constructors.

    Attributes:
        fan_in: Multipliers per HTC MAC (K)
        selector: MUX select source for HTC
        lfsr: LFSR configuration and default seed for HTC
        unary_delays: Explicit unary delay schedule (default i * floor(L / M))
    """

    fan_in: int = Field(default=4, ge=2, le=16)
    selector: SelectorKind = SelectorKind.LFSR
    lfsr: LfsrState = LfsrState()
    unary_delays: Optional[tuple[int, ...]] = None

    model_config = {"frozen": True}


class MacDesign(ABC):
    """
    Abstract base class for MAC designs.

    Designs define:
    - Which polarities they accept
    - Vectorized multiplication and dot products on code arrays
    - Their latency in clock cycles
    - Optionally, per-wire traces of one evaluation for activity reports
    """

    def __init__(self, options: Optional[DesignOptions] = None):
        self.options = options if options is not None else DesignOptions()

    @property
    @abstractmethod
    def name(self) -> str:
        """Registry name (e.g. "htc")."""
        pass

    def supports(self, polarity: Polarity) -> bool:
        """Whether the design can compute with this polarity."""
        return True

    @abstractmethod
    def multiply_codes(self, a_codes: np.ndarray, b_codes: np.ndarray, bits: int, polarity: Polarity) -> np.ndarray:
        """
        Products of coefficient codes a and data codes b.

        Returns:
            int64 numerators over 2^(2N), same shape as the inputs
        """
        pass

    @abstractmethod
    def dot_numerators(
        self,
        coeffs: np.ndarray,
        data: np.ndarray,
        bits: int,
        polarity: Polarity,
        seeds: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """
        Dot products of S coefficient/data code vectors.

        Args:
            coeffs: Coefficient codes, shape (S, M)
            data: Data codes, shape (S, M)
            bits: Operand width N
            polarity: Operand polarity
            seeds: Optional per-row LFSR seeds, shape (S,)

        Returns:
            int64 numerators over 2^(2N), shape (S,)
        """
        pass

    @abstractmethod
    def latency_cycles(self, bits: int, terms: int) -> int:
        """Clock cycles to produce one dot product of `terms` products."""
        pass

    def dot_batch(
        self,
        coeffs: np.ndarray,
        data: np.ndarray,
        bits: int,
        polarity: Polarity,
        seeds: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """Dot products as float64 values."""
        num = self.dot_numerators(coeffs, data, bits, polarity, seeds)
        return num.astype(np.float64) / float(1 << (2 * bits))

    def activity_traces(
        self,
        coeffs: np.ndarray,
        data: np.ndarray,
        bits: int,
        polarity: Polarity,
        seed: Optional[int] = None,
    ) -> list[WireTrace]:
        """
        Wire traces of a single dot product.

        Override in designs that model their wires.

        Raises:
            NotImplementedError: If the design has no wire-level model
        """
        raise NotImplementedError(f"design '{self.name}' has no wire-level model")


def exact_products(a_codes: np.ndarray, b_codes: np.ndarray, bits: int, polarity: Polarity) -> np.ndarray:
    """Exact products of the represented values, as numerators over 2^(2N)."""
    a = np.asarray(a_codes, dtype=np.int64)
    b = np.asarray(b_codes, dtype=np.int64)
    if polarity == Polarity.UNIPOLAR:
        return a * b
    full = 1 << bits
    return (2 * a - full) * (2 * b - full)


def check_batch(coeffs: np.ndarray, data: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Coerce to (S, M) int64 arrays of equal shape."""
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=np.int64))
    data = np.atleast_2d(np.asarray(data, dtype=np.int64))
    if coeffs.shape != data.shape:
        raise ConfigurationError(f"coefficient shape {coeffs.shape} does not match data shape {data.shape}")
    if coeffs.shape[1] == 0:
        raise ConfigurationError("dot products need at least one term")
    return coeffs, data
