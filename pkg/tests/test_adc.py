import numpy as np
import pytest

from adcprune.adc import (
    LevelMask,
    MaskError,
    PrunedAdc,
    digitize,
    quantize_batch,
    thermometer,
    thresholds,
)

PRUNED56 = LevelMask.full(3).prune([5, 6])  # 3-bit, levels 5 and 6 removed


class TestLevelMask:
    def test_valid_lengths_only(self):
        LevelMask((True,))  # N=1
        LevelMask((True,) * 7)  # N=3
        with pytest.raises(MaskError):
            LevelMask((True,) * 6)
        with pytest.raises(MaskError):
            LevelMask(())

    def test_survivors_and_popcount(self):
        assert PRUNED56.survivors == (1, 2, 3, 4, 7)
        assert PRUNED56.popcount == 5
        assert LevelMask.full(4).popcount == 15
        assert LevelMask.empty(4).survivors == ()

    def test_hex_round_trip(self):
        # levels 7..1 = 1001111 -> 0x4F
        assert PRUNED56.to_hex() == "4F"
        assert LevelMask.from_hex(3, "4F") == PRUNED56
        assert LevelMask.from_hex(3, "4f") == PRUNED56
        assert LevelMask.full(4).to_hex() == "7FFF"
        for bits in (1, 2, 3, 4):
            full = LevelMask.full(bits)
            assert LevelMask.from_hex(bits, full.to_hex()) == full

    def test_hex_errors(self):
        with pytest.raises(MaskError):
            LevelMask.from_hex(3, "not-hex")
        with pytest.raises(MaskError):
            LevelMask.from_hex(3, "80")  # needs 8 bits, mask has 7
        with pytest.raises(MaskError):
            LevelMask.from_hex(3, "-1")

    def test_from_levels_bounds(self):
        m = LevelMask.from_levels(3, [1, 7])
        assert m.survivors == (1, 7)
        with pytest.raises(MaskError):
            LevelMask.from_levels(3, [8])
        with pytest.raises(MaskError):
            LevelMask.from_levels(3, [0])

    def test_adc_rejects_mismatched_mask(self):
        with pytest.raises(MaskError):
            PrunedAdc(bitwidth=4, mask=LevelMask.full(3))


class TestThresholds:
    def test_full_3bit_ladder(self):
        got = thresholds(PrunedAdc(bitwidth=3))
        assert got == [(j, j / 8) for j in range(1, 8)]

    def test_pruned_56(self):
        got = thresholds(PrunedAdc(bitwidth=3, mask=PRUNED56))
        assert got == [(1, 0.125), (2, 0.25), (3, 0.375), (4, 0.5), (7, 0.875)]

    def test_single_comparator(self):
        assert thresholds(PrunedAdc(bitwidth=1)) == [(1, 0.5)]

    def test_vref_scales_ladder(self):
        got = thresholds(PrunedAdc(bitwidth=2, vref=2.0))
        assert got == [(1, 0.5), (2, 1.0), (3, 1.5)]


class TestThermometer:
    def test_full_3bit_at_0p8(self):
        bits = thermometer(PrunedAdc(bitwidth=3), 0.8)
        assert bits.tolist() == [True] * 6 + [False]

    def test_pruned_56_at_0p8(self):
        bits = thermometer(PrunedAdc(bitwidth=3, mask=PRUNED56), 0.8)
        assert bits.tolist() == [True, True, True, True, False]

    def test_below_range_is_all_zero(self):
        assert not thermometer(PrunedAdc(bitwidth=4), -1.0).any()

    def test_above_range_is_all_one(self):
        assert thermometer(PrunedAdc(bitwidth=4), 2.0).all()

    def test_prefix_of_ones_for_random_inputs(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            bits = rng.random(15) < rng.uniform(0.2, 1.0)
            adc = PrunedAdc(bitwidth=4, mask=LevelMask(tuple(bits)))
            t = thermometer(adc, float(rng.uniform(-0.2, 1.2)))
            assert not (np.diff(t.astype(int)) > 0).any()


class TestDigitize:
    def test_full_3bit_at_0p8(self):
        assert digitize(PrunedAdc(bitwidth=3), 0.8) == 6

    def test_pruned_56_at_0p8(self):
        assert digitize(PrunedAdc(bitwidth=3, mask=PRUNED56), 0.8) == 4

    def test_all_pruned_gives_zero(self):
        adc = PrunedAdc(bitwidth=3, mask=LevelMask.empty(3))
        for vin in (-1.0, 0.0, 0.5, 2.0):
            assert digitize(adc, vin) == 0

    def test_full_4bit_bin_midpoints_cover_all_codes(self):
        adc = PrunedAdc(bitwidth=4)
        codes = [digitize(adc, (j + 0.5) / 16) for j in range(16)]
        assert codes == list(range(16))

    def test_threshold_equality_resolves_low(self):
        # comparator is strict: vin == V_j keeps the lower code
        adc = PrunedAdc(bitwidth=3)
        assert digitize(adc, 0.5) == 3
        assert digitize(adc, 0.125) == 0

    def test_monotone_in_vin_for_any_mask(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            bits = rng.random(15) < rng.uniform(0.0, 1.0)
            adc = PrunedAdc(bitwidth=4, mask=LevelMask(tuple(bits)))
            vins = np.sort(rng.uniform(-0.1, 1.1, 20))
            out = [digitize(adc, float(v)) for v in vins]
            assert out == sorted(out)

    def test_closure_in_surviving_set(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            bits = rng.random(7) < rng.uniform(0.0, 1.0)
            mask = LevelMask(tuple(bits))
            adc = PrunedAdc(bitwidth=3, mask=mask)
            allowed = {0} | set(mask.survivors)
            for v in rng.uniform(-0.2, 1.2, 10):
                assert digitize(adc, float(v)) in allowed

    def test_pruning_dominance(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            sub_bits = rng.random(15) < 0.5
            extra = rng.random(15) < 0.3
            super_bits = sub_bits | extra
            sub = PrunedAdc(bitwidth=4, mask=LevelMask(tuple(sub_bits)))
            sup = PrunedAdc(bitwidth=4, mask=LevelMask(tuple(super_bits)))
            v = float(rng.uniform(-0.1, 1.1))
            assert digitize(sub, v) <= digitize(sup, v)

    def test_full_mask_equals_uniform_quantizer(self):
        adc = PrunedAdc(bitwidth=4)
        rng = np.random.default_rng(8)
        for v in rng.uniform(0.0, 1.0, 500):
            scaled = v * 16
            if scaled == int(scaled):  # exactly on a threshold: strict -> lower code
                expected = max(int(scaled) - 1, 0)
            else:
                expected = min(int(np.floor(scaled)), 15)
            assert digitize(adc, float(v)) == expected


class TestQuantizeBatch:
    def test_top_level_full_4bit(self):
        adc = PrunedAdc(bitwidth=4)
        assert quantize_batch(adc, [1.0]).tolist() == [15 / 16]

    def test_pruned_56(self):
        adc = PrunedAdc(bitwidth=3, mask=PRUNED56)
        assert quantize_batch(adc, [0.8]).tolist() == [0.5]

    def test_empty_mask_maps_to_zero(self):
        adc = PrunedAdc(bitwidth=3, mask=LevelMask.empty(3))
        assert quantize_batch(adc, [0.0, 0.4, 1.0]).tolist() == [0.0, 0.0, 0.0]

    def test_matches_scalar_digitize(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            bits = rng.random(15) < rng.uniform(0.1, 1.0)
            adc = PrunedAdc(bitwidth=4, mask=LevelMask(tuple(bits)))
            samples = rng.uniform(0.0, 1.0, 40)
            got = quantize_batch(adc, samples)
            want = [digitize(adc, float(s)) / 16 for s in samples]
            assert got.tolist() == want
