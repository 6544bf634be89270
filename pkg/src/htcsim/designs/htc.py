"""HTC MAC design: RB x TB gate multipliers, MUX scaled adder, counting accumulator."""

from typing import Optional

import numpy as np

from htcsim.design import MacDesign, check_batch
from htcsim.encodings import FixedPoint, Polarity
from htcsim.errors import ConfigurationError
from htcsim.htc_arith import (
    MacConfig,
    WireTrace,
    accumulate_numerators,
    htc_mac,
    mac_popcounts,
    multiply_popcounts,
    pad_to_fan_in,
    selector_sequence,
)
from htcsim.logging_config import get_logger

logger = get_logger(__name__)

# Rows per vectorized block; keeps the (rows, 2^N) index arrays small.
CHUNK_ROWS = 4096


class HtcDesign(MacDesign):
    """
    Hybrid temporal computing MAC.

    Dot products longer than K run on ceil(M / K) MACs that share one
    selector seed per output; their binary sums are added exactly.
    """

    @property
    def name(self) -> str:
        return "htc"

    def mac_config(self, bits: int, polarity: Polarity, seed: Optional[int] = None) -> MacConfig:
        """MacConfig for this design, optionally with another LFSR seed."""
        cfg = MacConfig(
            bits=bits,
            fan_in=self.options.fan_in,
            polarity=polarity,
            selector=self.options.selector,
            lfsr=self.options.lfsr,
        )
        return cfg if seed is None else cfg.with_seed(int(seed))

    def multiply_codes(self, a_codes, b_codes, bits, polarity):
        pop = multiply_popcounts(a_codes, b_codes, bits, polarity)
        if polarity == Polarity.UNIPOLAR:
            return pop << bits
        return (2 * pop - (1 << bits)) << bits

    def _selectors(self, bits: int, polarity: Polarity, seeds: Optional[np.ndarray]) -> np.ndarray:
        if seeds is None:
            return selector_sequence(self.mac_config(bits, polarity))
        unique, inverse = np.unique(seeds, return_inverse=True)
        table = np.stack([selector_sequence(self.mac_config(bits, polarity, s)) for s in unique])
        return table[inverse.reshape(-1)]

    def dot_numerators(self, coeffs, data, bits, polarity, seeds=None):
        coeffs, data = check_batch(coeffs, data)
        k = self.options.fan_in
        rows, terms = coeffs.shape
        if seeds is not None:
            seeds = np.asarray(seeds, dtype=np.int64)
            if seeds.shape != (rows,):
                raise ConfigurationError(f"expected {rows} seeds, got shape {seeds.shape}")
        missing = -terms % k
        if missing:
            zero = FixedPoint.zero(bits, polarity).code
            pad = np.full((rows, missing), zero, dtype=np.int64)
            coeffs = np.hstack([coeffs, pad])
            data = np.hstack([data, pad])
            logger.debug(f"padded {terms} terms to {terms + missing} for fan-in {k}")

        out = np.zeros(rows, dtype=np.int64)
        for start in range(0, rows, CHUNK_ROWS):
            stop = min(start + CHUNK_ROWS, rows)
            sel = self._selectors(bits, polarity, None if seeds is None else seeds[start:stop])
            for g in range(0, coeffs.shape[1], k):
                pop = mac_popcounts(coeffs[start:stop, g : g + k], data[start:stop, g : g + k], bits, polarity, sel)
                out[start:stop] += accumulate_numerators(pop, k, bits, polarity) << bits
        return out

    def latency_cycles(self, bits: int, terms: int) -> int:
        # all ceil(M / K) MACs run concurrently over one epoch
        return 1 << bits

    def activity_traces(self, coeffs, data, bits, polarity, seed=None) -> list[WireTrace]:
        cfg = self.mac_config(bits, polarity, seed)
        b = [FixedPoint(bits=bits, code=int(x), polarity=polarity) for x in coeffs]
        c = [FixedPoint(bits=bits, code=int(x), polarity=polarity) for x in data]
        b, c = pad_to_fan_in(b, c, cfg)
        traces: list[WireTrace] = []
        groups = len(b) // cfg.fan_in
        for g in range(groups):
            lo = g * cfg.fan_in
            result = htc_mac(b[lo : lo + cfg.fan_in], c[lo : lo + cfg.fan_in], cfg)
            for trace in result.trace:
                name = trace.name if groups == 1 else f"mac{g}.{trace.name}"
                traces.append(trace.model_copy(update={"name": name}))
        return traces
