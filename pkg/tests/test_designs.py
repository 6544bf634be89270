"""Tests for the design registry and the vectorized design interface."""

import numpy as np
import pytest

from conftest import fp
from htcsim.baselines import cbsc_mac, unary_mac
from htcsim.design import DesignOptions, MacDesign, exact_products
from htcsim.designs import CbscDesign, ExactDesign, HtcDesign, UnaryDesign
from htcsim.encodings import Polarity
from htcsim.errors import ConfigurationError
from htcsim.htc_arith import MacConfig, SelectorKind, WireKind, htc_dot
from htcsim.registry import DesignRegistry, design_registry

BIPOLAR = Polarity.BIPOLAR


class TestRegistry:
    def test_builtins_registered(self):
        assert set(design_registry.list_designs()) >= {"htc", "cbsc", "unary", "exact"}

    def test_lookup_is_case_insensitive(self):
        assert isinstance(design_registry.get_design("HTC"), HtcDesign)

    def test_unknown_design(self):
        with pytest.raises(ConfigurationError, match="unknown design"):
            design_registry.get_design("nope")

    def test_options_reach_the_design(self):
        options = DesignOptions(fan_in=8, selector=SelectorKind.ROUND_ROBIN)
        design = design_registry.get_design("htc", options)
        assert design.options.fan_in == 8
        assert design.mac_config(8, Polarity.UNIPOLAR).selector == SelectorKind.ROUND_ROBIN

    def test_register_and_unregister(self):
        class NullDesign(ExactDesign):
            @property
            def name(self) -> str:
                return "null"

            def dot_numerators(self, coeffs, data, bits, polarity, seeds=None):
                return np.zeros(np.atleast_2d(coeffs).shape[0], dtype=np.int64)

        registry = DesignRegistry()
        registry.register(NullDesign)
        assert registry.list_designs() == ["null"]
        assert registry.get_design("null").dot_batch([[1]], [[1]], 3, Polarity.UNIPOLAR).tolist() == [0.0]
        registry.unregister("null")
        assert registry.list_designs() == []

    def test_abstract_base(self):
        with pytest.raises(TypeError):
            MacDesign()


class TestExact:
    def test_unipolar_products(self):
        design = ExactDesign()
        assert design.multiply_codes(np.array([6]), np.array([5]), 3, Polarity.UNIPOLAR).tolist() == [30]

    def test_bipolar_products(self):
        # -1/2 * 3/4 = -3/8 = -24/64
        assert exact_products(np.array([2]), np.array([7]), 3, BIPOLAR).tolist() == [-24]

    def test_dot_real(self):
        out = ExactDesign.dot_real([[0.5, 0.25]], [[0.5, 1.0]])
        assert out.tolist() == [0.5]


class TestHtcDesign:
    def test_matches_scalar_dot(self, rng):
        design = HtcDesign(DesignOptions(fan_in=4))
        cfg = MacConfig(bits=4, fan_in=4)
        b = rng.integers(0, 16, size=(10, 6))
        c = rng.integers(0, 16, size=(10, 6))
        num = design.dot_numerators(b, c, 4, Polarity.UNIPOLAR)
        for s in range(10):
            value = htc_dot([fp(int(x), bits=4) for x in b[s]], [fp(int(x), bits=4) for x in c[s]], cfg)
            assert num[s] == value * 256

    def test_per_row_seeds(self, rng):
        design = HtcDesign()
        b = rng.integers(0, 256, size=(3, 4))
        c = rng.integers(0, 256, size=(3, 4))
        seeded = design.dot_numerators(b, c, 8, Polarity.UNIPOLAR, np.array([0x5A, 0x5A, 0x5A]))
        np.testing.assert_array_equal(seeded, design.dot_numerators(b, c, 8, Polarity.UNIPOLAR))

    def test_seed_shape_checked(self):
        with pytest.raises(ConfigurationError):
            HtcDesign().dot_numerators([[1, 2, 3, 4]], [[1, 2, 3, 4]], 3, Polarity.UNIPOLAR, np.array([1, 2]))

    def test_bipolar_zero_vectors_are_exact(self):
        zero = np.full((5, 8), 128)
        assert HtcDesign().dot_numerators(zero, zero, 8, BIPOLAR).tolist() == [0] * 5

    def test_latency(self):
        assert HtcDesign().latency_cycles(8, 4) == 256

    def test_traces_cover_every_mac(self):
        traces = HtcDesign().activity_traces(np.arange(6), np.arange(6), 3, Polarity.UNIPOLAR)
        names = {t.name for t in traces}
        assert "mac0.mux" in names and "mac1.mux" in names

    def test_shape_mismatch(self):
        with pytest.raises(ConfigurationError):
            HtcDesign().dot_numerators(np.zeros((2, 4)), np.zeros((2, 3)), 3, Polarity.UNIPOLAR)


class TestCbscDesign:
    def test_matches_scalar_mac(self, rng):
        for polarity in Polarity:
            b = rng.integers(0, 8, size=(8, 4))
            c = rng.integers(0, 8, size=(8, 4))
            num = CbscDesign().dot_numerators(b, c, 3, polarity)
            for s in range(8):
                value = cbsc_mac(
                    [fp(int(x), polarity=polarity) for x in b[s]],
                    [fp(int(x), polarity=polarity) for x in c[s]],
                    polarity,
                )
                assert num[s] == value * 64

    def test_traces(self):
        traces = CbscDesign().activity_traces(np.array([6]), np.array([5]), 3, Polarity.UNIPOLAR)
        assert [t.kind for t in traces] == [WireKind.RB, WireKind.TB, WireKind.GB]


class TestUnaryDesign:
    def test_unipolar_only(self):
        design = UnaryDesign()
        assert not design.supports(BIPOLAR)
        with pytest.raises(ConfigurationError):
            design.dot_numerators([[1]], [[1]], 3, BIPOLAR)

    def test_matches_scalar_mac(self, rng):
        b = rng.integers(0, 8, size=(6, 4))
        c = rng.integers(0, 8, size=(6, 4))
        num = UnaryDesign().dot_numerators(b, c, 3, Polarity.UNIPOLAR)
        for s in range(6):
            result = unary_mac([fp(int(x)) for x in b[s]], [fp(int(x)) for x in c[s]])
            assert num[s] == result.value * 64

    def test_latency_dwarfs_htc(self):
        assert UnaryDesign().latency_cycles(8, 4) == 262144
        assert UnaryDesign().latency_cycles(8, 4) / HtcDesign().latency_cycles(8, 4) >= 100

    def test_configured_delays(self):
        design = UnaryDesign(DesignOptions(unary_delays=(0, 8)))
        assert design.delays(3, 2) == [0, 8]
        with pytest.raises(ConfigurationError):
            design.delays(3, 3)

    def test_coefficient_wires_are_single_windows(self):
        traces = UnaryDesign().activity_traces(np.array([3, 5]), np.array([2, 7]), 3, Polarity.UNIPOLAR)
        for trace in traces:
            if trace.kind == WireKind.TB:
                assert np.count_nonzero(np.diff(np.concatenate([[0], trace.bits, [0]]).astype(np.int8))) <= 2


class TestDesignAgreement:
    def test_unipolar_multipliers_agree(self):
        # HTC and CBSC count the same RB ones inside the same window
        codes = np.arange(256)
        a, b = np.meshgrid(codes, codes, indexing="ij")
        np.testing.assert_array_equal(
            HtcDesign().multiply_codes(a, b, 8, Polarity.UNIPOLAR),
            CbscDesign().multiply_codes(a, b, 8, Polarity.UNIPOLAR),
        )

    def test_dot_batch_scale(self):
        out = ExactDesign().dot_batch([[4, 4]], [[4, 2]], 3, Polarity.UNIPOLAR)
        assert out.tolist() == [24 / 64]
