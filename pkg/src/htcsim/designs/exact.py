"""Exact reference design: quantized operands, error-free products and sums."""

import numpy as np

from htcsim.design import MacDesign, check_batch, exact_products


class ExactDesign(MacDesign):
    """
    Binary multiply-accumulate without approximation.

    Its only error is operand quantization, which makes it the oracle for
    benches and the baseline for the image pipelines.
    """

    @property
    def name(self) -> str:
        return "exact"

    def multiply_codes(self, a_codes, b_codes, bits, polarity):
        return exact_products(a_codes, b_codes, bits, polarity)

    def dot_numerators(self, coeffs, data, bits, polarity, seeds=None):
        coeffs, data = check_batch(coeffs, data)
        return exact_products(coeffs, data, bits, polarity).sum(axis=1)

    def latency_cycles(self, bits: int, terms: int) -> int:
        return 1

    @staticmethod
    def dot_real(coeffs: np.ndarray, data: np.ndarray) -> np.ndarray:
        """Real-arithmetic dot products of (S, M) float arrays, no quantization."""
        return np.einsum("sm,sm->s", np.asarray(coeffs, dtype=np.float64), np.asarray(data, dtype=np.float64))
