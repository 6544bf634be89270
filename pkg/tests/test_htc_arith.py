"""Tests for HTC multiplication, MUX scaled addition and the MAC."""

from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from conftest import fp
from htcsim.encodings import Bitstream, BitstreamFormat, LfsrState, Polarity, encode_tb
from htcsim.errors import ConfigurationError
from htcsim.htc_arith import (
    MacConfig,
    SelectorKind,
    WireKind,
    accumulate,
    derive_seed,
    htc_dot,
    htc_mac,
    htc_multiply,
    mac_popcounts,
    multiply_popcounts,
    scaled_add,
    selector_sequence,
)

BIPOLAR = Polarity.BIPOLAR


class TestMultiply:
    def test_unipolar_and(self):
        out = htc_multiply(fp(6), fp(5), Polarity.UNIPOLAR)
        assert out.to_string() == "11101000"
        assert out.format == BitstreamFormat.GB
        assert accumulate_value(out) == Fraction(1, 2)

    def test_bipolar_xnor(self):
        a = fp(2, polarity=BIPOLAR)  # -1/2
        b = fp(7, polarity=BIPOLAR)  # 3/4
        out = htc_multiply(a, b, BIPOLAR)
        assert out.to_string() == "01000101"
        assert Fraction(2 * out.popcount, 8) - 1 == Fraction(-1, 4)

    def test_zero_operand(self):
        assert htc_multiply(fp(0), fp(7), Polarity.UNIPOLAR).popcount == 0
        assert htc_multiply(fp(7), fp(0), Polarity.UNIPOLAR).popcount == 0

    def test_mismatched_width(self):
        with pytest.raises(ConfigurationError):
            htc_multiply(fp(1, bits=3), fp(1, bits=4), Polarity.UNIPOLAR)

    def test_mismatched_polarity(self):
        with pytest.raises(ConfigurationError):
            htc_multiply(fp(1), fp(1), BIPOLAR)

    def test_error_bound_exhaustive(self):
        # |popcount - a * b / 2^N| stays below N / 2 for every code pair
        bits = 6
        codes = np.arange(1 << bits)
        a, b = np.meshgrid(codes, codes, indexing="ij")
        pop = multiply_popcounts(a, b, bits, Polarity.UNIPOLAR)
        assert np.abs(pop * (1 << bits) - a * b).max() <= (bits / 2) * (1 << bits)

    def test_vectorized_matches_streams(self):
        for polarity in Polarity:
            for a in range(8):
                for b in range(8):
                    stream = htc_multiply(fp(a, polarity=polarity), fp(b, polarity=polarity), polarity)
                    assert multiply_popcounts(np.array(a), np.array(b), 3, polarity) == stream.popcount


def accumulate_value(bs: Bitstream) -> Fraction:
    return Fraction(bs.popcount, bs.epoch)


class TestSelector:
    def test_lfsr_sequence(self, small_cfg):
        assert selector_sequence(small_cfg).tolist() == [1, 2, 3, 1, 2, 1, 0, 2]

    def test_round_robin(self, round_robin_cfg):
        assert selector_sequence(round_robin_cfg).tolist() == [0, 1, 2, 3, 0, 1, 2, 3]

    def test_counter(self):
        cfg = MacConfig(bits=3, fan_in=4, selector=SelectorKind.COUNTER)
        assert selector_sequence(cfg).tolist() == [0, 0, 1, 0, 2, 1, 3, 0]

    def test_counter_balanced_per_digit_slot(self):
        cfg = MacConfig(bits=8, fan_in=4, selector=SelectorKind.COUNTER)
        sel = selector_sequence(cfg)
        odd_cycles = sel[0::2]
        assert np.bincount(odd_cycles, minlength=4).tolist() == [32, 32, 32, 32]

    def test_restarts_each_epoch(self, small_cfg):
        np.testing.assert_array_equal(selector_sequence(small_cfg), selector_sequence(small_cfg.with_seed(0x5A)))

    def test_seed_changes_sequence(self, small_cfg):
        assert selector_sequence(small_cfg).tolist() != selector_sequence(small_cfg.with_seed(0x33)).tolist()


class TestScaledAdd:
    def test_identical_inputs(self, small_cfg):
        x = encode_tb(fp(5))
        out = scaled_add([x] * 4, small_cfg)
        assert out.to_string() == x.to_string()

    def test_round_robin_window(self, round_robin_cfg):
        out = scaled_add([encode_tb(fp(4))] * 4, round_robin_cfg)
        assert out.to_string() == "11110000"
        assert accumulate(out, round_robin_cfg) == 2

    def test_lfsr_mixture(self, small_cfg):
        inputs = [encode_tb(fp(c)) for c in (2, 4, 6, 0)]
        out = scaled_add(inputs, small_cfg)
        assert out.to_string() == "11011000"
        assert abs(Fraction(out.popcount, 8) - Fraction(3, 8)) <= Fraction(2, 8)

    def test_wrong_input_count(self, small_cfg):
        with pytest.raises(ConfigurationError):
            scaled_add([encode_tb(fp(1))] * 3, small_cfg)

    def test_wrong_input_length(self, small_cfg):
        with pytest.raises(ConfigurationError):
            scaled_add([encode_tb(fp(1, bits=4))] * 4, small_cfg)


class TestAccumulate:
    def test_unipolar_shift(self, small_cfg):
        assert accumulate(Bitstream.from_string("11000000"), small_cfg) == 1

    def test_bipolar_midpoint_is_zero(self):
        cfg = MacConfig(bits=3, fan_in=4, polarity=BIPOLAR)
        assert accumulate(Bitstream.from_string("10101010", polarity=BIPOLAR), cfg) == 0


class TestMacConfig:
    def test_fan_in_power_of_two(self):
        with pytest.raises(ValidationError):
            MacConfig(fan_in=3)

    def test_fan_in_range(self):
        with pytest.raises(ValidationError):
            MacConfig(fan_in=32)

    def test_lfsr_too_narrow(self):
        with pytest.raises(ValidationError):
            MacConfig(bits=3, fan_in=16, lfsr=LfsrState(width=3, taps=(3, 2), state=1))


class TestMac:
    def test_zero_data_gives_zero(self, small_cfg):
        result = htc_mac([fp(7), fp(3), fp(5), fp(1)], [fp(0)] * 4, small_cfg)
        assert result.binary_sum == 0
        assert result.out_tb.popcount == 0

    def test_bipolar_zero_vector(self):
        cfg = MacConfig(bits=4, fan_in=4, polarity=BIPOLAR)
        zero = fp(8, bits=4, polarity=BIPOLAR)
        result = htc_mac([zero] * 4, [zero] * 4, cfg)
        assert result.binary_sum == 0
        assert result.mux_out.popcount == 8

    def test_out_tb_matches_mux(self, small_cfg):
        result = htc_mac([fp(7), fp(3), fp(5), fp(1)], [fp(6), fp(2), fp(7), fp(4)], small_cfg)
        assert result.out_tb.format == BitstreamFormat.TB
        assert result.out_tb.popcount == result.mux_out.popcount
        assert result.binary_sum == Fraction(result.mux_out.popcount * 4, 8)

    def test_trace_wires(self, small_cfg):
        result = htc_mac([fp(1)] * 4, [fp(2)] * 4, small_cfg)
        names = [t.name for t in result.trace]
        assert names[:3] == ["rb_0", "tb_0", "mul_0"]
        assert {"sel_0", "sel_1", "mux", "out_tb"} <= set(names)
        kinds = {t.name: t.kind for t in result.trace}
        assert kinds["sel_1"] == WireKind.SELECTOR
        assert kinds["rb_3"] == WireKind.RB

    def test_dimension_mismatch(self, small_cfg):
        with pytest.raises(ConfigurationError):
            htc_mac([fp(1)] * 4, [fp(1)] * 3, small_cfg)
        with pytest.raises(ConfigurationError):
            htc_mac([fp(1)] * 2, [fp(1)] * 2, small_cfg)

    def test_vectorized_matches_scalar(self, rng):
        for polarity in Polarity:
            cfg = MacConfig(bits=5, fan_in=4, polarity=polarity)
            b = rng.integers(0, 32, size=(20, 4))
            c = rng.integers(0, 32, size=(20, 4))
            pops = mac_popcounts(b, c, 5, polarity, selector_sequence(cfg))
            for s in range(20):
                result = htc_mac(
                    [fp(int(x), bits=5, polarity=polarity) for x in b[s]],
                    [fp(int(x), bits=5, polarity=polarity) for x in c[s]],
                    cfg,
                )
                assert result.mux_out.popcount == pops[s]


class TestDot:
    def test_padding_matches_explicit_zeros(self, small_cfg):
        b = [fp(c) for c in (7, 3, 5, 1, 6, 2)]
        c = [fp(c) for c in (6, 2, 7, 4, 5, 3)]
        padded = htc_dot(b + [fp(0)] * 2, c + [fp(0)] * 2, small_cfg)
        assert htc_dot(b, c, small_cfg) == padded

    def test_single_mac(self, small_cfg):
        b = [fp(c) for c in (7, 3, 5, 1)]
        c = [fp(c) for c in (6, 2, 7, 4)]
        assert htc_dot(b, c, small_cfg) == htc_mac(b, c, small_cfg).binary_sum

    def test_empty(self, small_cfg):
        with pytest.raises(ConfigurationError):
            htc_dot([], [], small_cfg)


class TestDeriveSeed:
    def test_deterministic_and_nonzero(self):
        seeds = [derive_seed(0x5A, p, r) for p in range(2) for r in range(200)]
        assert seeds == [derive_seed(0x5A, p, r) for p in range(2) for r in range(200)]
        assert all(1 <= s <= 255 for s in seeds)
        assert len(set(seeds)) > 100

    @pytest.mark.parametrize("width", [2, 4, 5])
    def test_fits_narrow_register(self, width):
        seeds = {derive_seed(0x5A, p, r, width=width) for p in range(2) for r in range(100)}
        assert seeds <= set(range(1, 1 << width))
