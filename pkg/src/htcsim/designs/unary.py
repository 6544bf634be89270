"""Deterministic unary (PWM) design: exact repeated-stream products, delayed-OR sums."""

import numpy as np

from htcsim.baselines import (
    UnaryStream,
    default_delays,
    unary_add_or,
    unary_dot_popcounts,
    unary_multiply,
)
from htcsim.design import MacDesign, check_batch
from htcsim.encodings import Polarity
from htcsim.errors import ConfigurationError
from htcsim.htc_arith import WireKind, WireTrace
from htcsim.logging_config import get_logger

logger = get_logger(__name__)

# (rows, M, n) coverage arrays are built per block of rows
CHUNK_ROWS = 1024


class UnaryDesign(MacDesign):
    """
    Unary MAC with base length n = 2^N, so each product spans 2^(2N) cycles
    and the OR popcount is already a numerator over 2^(2N).
    """

    @property
    def name(self) -> str:
        return "unary"

    def supports(self, polarity: Polarity) -> bool:
        return polarity == Polarity.UNIPOLAR

    def _check(self, polarity: Polarity) -> None:
        if not self.supports(polarity):
            raise ConfigurationError("the unary design supports unipolar operands only")

    def delays(self, bits: int, terms: int) -> list[int]:
        """Configured delay schedule, or i * floor(L / M)."""
        if self.options.unary_delays is not None:
            if len(self.options.unary_delays) != terms:
                raise ConfigurationError(f"{len(self.options.unary_delays)} unary delays for {terms} summands")
            return list(self.options.unary_delays)
        return default_delays(terms, 1 << (2 * bits))

    def multiply_codes(self, a_codes, b_codes, bits, polarity):
        self._check(polarity)
        return np.asarray(a_codes, dtype=np.int64) * np.asarray(b_codes, dtype=np.int64)

    def dot_numerators(self, coeffs, data, bits, polarity, seeds=None):
        self._check(polarity)
        coeffs, data = check_batch(coeffs, data)
        rows, terms = coeffs.shape
        delays = self.delays(bits, terms)
        n = 1 << bits
        out = np.empty(rows, dtype=np.int64)
        for start in range(0, rows, CHUNK_ROWS):
            stop = min(start + CHUNK_ROWS, rows)
            out[start:stop] = unary_dot_popcounts(coeffs[start:stop], data[start:stop], n, delays)
        return out

    def latency_cycles(self, bits: int, terms: int) -> int:
        # every product stream is n * n cycles long and is generated in turn
        return terms * (1 << (2 * bits))

    def activity_traces(self, coeffs, data, bits, polarity, seed=None) -> list[WireTrace]:
        self._check(polarity)
        n = 1 << bits
        coeffs = np.asarray(coeffs).tolist()
        data = np.asarray(data).tolist()
        traces: list[WireTrace] = []
        products = []
        for i, (b, c) in enumerate(zip(coeffs, data)):
            a_stream = UnaryStream.pwm(c, n)
            b_stream = UnaryStream.pwm(b, n)
            product = unary_multiply(a_stream, b_stream)
            products.append(product)
            # data repeats once per coefficient bit; the stretched coefficient is one window
            traces.append(WireTrace(name=f"data_{i}", kind=WireKind.GB, bits=np.tile(a_stream.bits, n)))
            traces.append(WireTrace(name=f"coef_{i}", kind=WireKind.TB, bits=np.repeat(b_stream.bits, n)))
            traces.append(WireTrace(name=f"mul_{i}", kind=WireKind.GB, bits=product.bits))
        out = unary_add_or(products, self.delays(bits, len(coeffs)))
        traces.append(WireTrace(name="or_out", kind=WireKind.GB, bits=out.bits))
        return traces
