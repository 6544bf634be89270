"""Tests for accuracy benches, multiplier sweeps, switching activity and image metrics."""

import math
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from htcsim.design import DesignOptions
from htcsim.encodings import FixedPoint, Polarity, encode_rb
from htcsim.errors import ConfigurationError, ImageError
from htcsim.htc_arith import SelectorKind, WireKind, WireTrace
from htcsim.metrics import (
    ActivityReport,
    ErrorStats,
    Normalization,
    VectorDistribution,
    activity_bench,
    exhaustive_mul_error,
    image_metrics,
    mac_error_bench,
    mul_sweep_table,
    switching_activity,
    transitions,
)
from htcsim.pgm import GrayImage
from htcsim.registry import design_registry

BIPOLAR = Polarity.BIPOLAR


@pytest.fixture(scope="module")
def unit_benches():
    """Default N = 8, K = 4 benches shared by the ordering checks."""
    return {name: mac_error_bench(name, trials=100_000) for name in ("htc", "cbsc", "unary", "exact")}


class TestMacBench:
    def test_exact_has_no_error(self, unit_benches):
        stats = unit_benches["exact"]
        assert stats.rmse_pct == 0.0
        assert stats.sde_pct == 0.0
        assert stats.trials == 100_000

    def test_cbsc_is_near_exact(self, unit_benches):
        assert unit_benches["cbsc"].rmse_pct <= 1.0

    def test_htc_band(self, unit_benches):
        assert 4.0 <= unit_benches["htc"].rmse_pct <= 10.0
        assert 2.5 <= unit_benches["htc"].sde_pct <= 7.0

    def test_design_ordering(self, unit_benches):
        assert unit_benches["cbsc"].rmse_pct < unit_benches["htc"].rmse_pct < unit_benches["unary"].rmse_pct

    def test_unary_underestimates(self, unit_benches):
        # OR addition only ever loses ones
        assert unit_benches["unary"].mean_err < 0

    def test_sde_never_exceeds_rmse(self, unit_benches):
        for stats in unit_benches.values():
            assert stats.sde_pct <= stats.rmse_pct + 1e-12

    @pytest.mark.parametrize("design", ["htc", "cbsc", "unary", "exact"])
    def test_zero_vectors(self, design):
        stats = mac_error_bench(design, trials=50, distribution=VectorDistribution.ZERO)
        assert stats.rmse_pct == 0.0
        assert stats.sde_pct == 0.0

    @pytest.mark.parametrize("design", ["htc", "cbsc", "exact"])
    def test_bipolar_zero_vectors(self, design):
        stats = mac_error_bench(design, trials=50, polarity=BIPOLAR, distribution=VectorDistribution.ZERO)
        assert stats.rmse_pct == 0.0

    def test_unary_rejects_bipolar(self):
        with pytest.raises(ConfigurationError):
            mac_error_bench("unary", trials=10, polarity=BIPOLAR)

    def test_fanin_normalization(self):
        unit = mac_error_bench("cbsc", trials=5000)
        fanin = mac_error_bench("cbsc", trials=5000, normalization=Normalization.FANIN)
        assert fanin.rmse_pct == pytest.approx(unit.rmse_pct / 4)

    def test_reproducible(self):
        first = mac_error_bench("htc", trials=12_000, seed=7)
        assert mac_error_bench("htc", trials=12_000, seed=7) == first
        assert mac_error_bench("htc", trials=12_000, seed=8) != first

    def test_thread_count_does_not_matter(self):
        serial = mac_error_bench("htc", trials=25_000, workers=1)
        threaded = mac_error_bench("htc", trials=25_000, workers=4)
        assert serial == threaded

    def test_single_trial(self):
        assert mac_error_bench("cbsc", trials=1).trials == 1

    def test_invalid_trials(self):
        with pytest.raises(ConfigurationError):
            mac_error_bench("htc", trials=0)

    def test_counter_selector_runs(self):
        options = DesignOptions(fan_in=4, selector=SelectorKind.COUNTER)
        stats = mac_error_bench("htc", trials=5000, options=options)
        assert stats.rmse_pct > 0


class TestErrorStats:
    def test_sde_above_rmse_rejected(self):
        with pytest.raises(ValidationError):
            ErrorStats(rmse_pct=1.0, sde_pct=2.0, max_abs_err=0.1, trials=1)


class TestMultiplierSweep:
    def test_htc_and_cbsc_tables_identical(self):
        assert exhaustive_mul_error("htc", 8) == exhaustive_mul_error("cbsc", 8)
        htc_rows = mul_sweep_table("htc", 4)
        cbsc_rows = mul_sweep_table("cbsc", 4)
        assert [r.product for r in htc_rows] == [r.product for r in cbsc_rows]

    def test_matches_bit_level_model(self):
        # RB(a) AND TB(b) cycle by cycle for all 65,536 pairs at N = 8
        bits = 8
        size = 1 << bits
        rb = np.stack([encode_rb(FixedPoint(bits=bits, code=a)).bits for a in range(size)]).astype(np.int64)
        window = (np.arange(size)[None, :] < np.arange(size)[:, None]).astype(np.int64)  # window[b, t]
        pop = rb @ window.T
        a, b = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
        np.testing.assert_array_equal(
            design_registry.get_design("htc").multiply_codes(a.reshape(-1), b.reshape(-1), bits, Polarity.UNIPOLAR),
            (pop << bits).reshape(-1),
        )
        worst = int(np.abs(pop * size - a * b).max()) / size**2
        assert worst <= bits / (2 * size)
        for design in ("htc", "cbsc"):
            assert exhaustive_mul_error(design, bits).max_abs_err == worst

    def test_unipolar_error_bound(self):
        stats = exhaustive_mul_error("htc", 8)
        assert 0 < stats.max_abs_err <= 8 / 256

    def test_bipolar_error_bound(self):
        assert exhaustive_mul_error("htc", 8, BIPOLAR).max_abs_err <= 16 / 256
        assert exhaustive_mul_error("cbsc", 8, BIPOLAR).max_abs_err <= 8 / 256

    def test_unary_multiplier_is_exact(self):
        assert exhaustive_mul_error("unary", 6).max_abs_err == 0.0

    def test_one_bit_table(self):
        rows = mul_sweep_table("htc", 1)
        assert [(r.a, r.b) for r in rows] == [(0, 0), (0, 1), (1, 0), (1, 1)]

    def test_worked_example_row(self):
        row = next(r for r in mul_sweep_table("htc", 3) if (r.a, r.b) == (6, 5))
        assert row.product == Fraction(4, 8)
        assert row.exact == Fraction(30, 64)
        assert float(row.error) == pytest.approx(0.03125)

    def test_zero_coefficient_rows_exact(self):
        assert all(r.error == 0 for r in mul_sweep_table("htc", 4) if r.a == 0)

    def test_too_many_bits(self):
        with pytest.raises(ConfigurationError):
            exhaustive_mul_error("htc", 11)


class TestSwitching:
    @pytest.mark.parametrize("stream,expected", [("11111000", 2), ("01010101", 8), ("00000000", 0)])
    def test_transitions(self, stream, expected):
        assert transitions(np.array([int(ch) for ch in stream])) == expected

    def test_report_totals(self):
        report = switching_activity(
            [
                WireTrace(name="a", kind=WireKind.TB, bits=[1, 1, 0, 0]),
                WireTrace(name="b", kind=WireKind.GB, bits=[1, 0, 1, 0]),
            ],
        )
        assert report.wires == {"a": 2, "b": 4}
        assert report.total() == 6
        assert report.total(WireKind.TB) == 2
        assert report.totals[WireKind.GB] == 4

    def test_empty_traces(self):
        with pytest.raises(ConfigurationError):
            switching_activity([])

    def test_merge(self):
        one = ActivityReport(wires={"a": 2}, kinds={"a": WireKind.TB})
        merged = one.merge(one)
        assert merged.wires == {"a": 4}
        assert merged.evaluations == 2

    def test_htc_tb_wires_switch_at_most_twice(self):
        report = activity_bench("htc", evaluations=1000)
        assert report.evaluations == 1000
        tb_wires = [w for w, k in report.kinds.items() if k == WireKind.TB]
        assert tb_wires
        assert all(report.wires[w] <= 2 * 1000 for w in tb_wires)
        assert report.wires["out_tb"] < report.wires["mux"]
        assert report.total(WireKind.TB) < report.total(WireKind.GB)

    def test_htc_switches_less_than_unary(self):
        htc = activity_bench("htc", bits=4, evaluations=20)
        unary = activity_bench("unary", bits=4, evaluations=20)
        assert htc.total() < unary.total()

    def test_cbsc_report(self):
        report = activity_bench("cbsc", bits=4, evaluations=10)
        assert set(report.totals) == set(WireKind)
        assert report.total(WireKind.RB) > 0

    def test_exact_has_no_wire_model(self):
        with pytest.raises(NotImplementedError):
            activity_bench("exact", evaluations=1)


class TestImageMetrics:
    def test_identical(self):
        img = GrayImage(pixels=np.full((4, 4), 77, dtype=np.uint8))
        psnr, rmse = image_metrics(img, img)
        assert math.isinf(psnr)
        assert rmse == 0.0

    def test_full_scale_difference(self):
        black = GrayImage(pixels=np.zeros((3, 3), dtype=np.uint8))
        white = GrayImage(pixels=np.full((3, 3), 255, dtype=np.uint8))
        psnr, rmse = image_metrics(black, white)
        assert rmse == pytest.approx(1.0)
        assert psnr == pytest.approx(0.0)

    def test_psnr_from_rmse(self):
        a = GrayImage(pixels=np.zeros((2, 2), dtype=np.uint8))
        b = GrayImage(pixels=np.full((2, 2), 51, dtype=np.uint8))
        psnr, rmse = image_metrics(a, b)
        assert rmse == pytest.approx(0.2)
        assert psnr == pytest.approx(20 * math.log10(5))

    def test_half_pixels_off_by_a_fifth(self):
        # rmse = sqrt(0.5 * 0.2^2) ~ 0.1414, about 17 dB
        a = GrayImage(pixels=np.zeros((2, 2), dtype=np.uint8))
        b = GrayImage(pixels=np.array([[51, 51], [0, 0]], dtype=np.uint8))
        psnr, _ = image_metrics(a, b)
        assert psnr == pytest.approx(20 * math.log10(1 / math.sqrt(0.02)))

    def test_shape_mismatch(self):
        with pytest.raises(ImageError):
            image_metrics(
                GrayImage(pixels=np.zeros((2, 2), dtype=np.uint8)),
                GrayImage(pixels=np.zeros((2, 3), dtype=np.uint8)),
            )
