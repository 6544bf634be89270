"""Counting-based SC design: RB counted inside a down-counter window, exact binary sums."""

import numpy as np

from htcsim.baselines import cbsc_product_counts, rb_window_trace
from htcsim.design import MacDesign, check_batch
from htcsim.encodings import Polarity
from htcsim.htc_arith import WireKind, WireTrace


class CbscDesign(MacDesign):
    @property
    def name(self) -> str:
        return "cbsc"

    def multiply_codes(self, a_codes, b_codes, bits, polarity):
        return cbsc_product_counts(a_codes, b_codes, bits, polarity) << bits

    def dot_numerators(self, coeffs, data, bits, polarity, seeds=None):
        coeffs, data = check_batch(coeffs, data)
        return cbsc_product_counts(coeffs, data, bits, polarity).sum(axis=1) << bits

    def latency_cycles(self, bits: int, terms: int) -> int:
        # the longest down-counter window
        return 1 << bits

    def activity_traces(self, coeffs, data, bits, polarity, seed=None) -> list[WireTrace]:
        full = 1 << bits
        traces: list[WireTrace] = []
        for i, (b, c) in enumerate(zip(np.asarray(coeffs).tolist(), np.asarray(data).tolist())):
            if polarity == Polarity.BIPOLAR:
                b, c = abs(2 * b - full), abs(2 * c - full)
            rb, window, count_enable = rb_window_trace(b, c, bits)
            traces.append(WireTrace(name=f"rb_{i}", kind=WireKind.RB, bits=rb))
            traces.append(WireTrace(name=f"win_{i}", kind=WireKind.TB, bits=window))
            traces.append(WireTrace(name=f"cnt_en_{i}", kind=WireKind.GB, bits=count_enable))
        return traces
