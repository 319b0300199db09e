import numpy as np
import pytest

from adcprune.adc import LevelMask, PrunedAdc
from adcprune.area import (
    GateCostTable,
    conventional_frontend_area,
    encoder_or_sets,
    estimate_area,
    or_tree_gate_count,
    total_frontend_area,
)

PRUNED56 = LevelMask.full(3).prune([5, 6])


class TestEncoderOrSets:
    def test_full_3bit_sets(self):
        sets = encoder_or_sets(3, LevelMask.full(3))
        assert sets[2] == {4, 5, 6, 7}
        assert sets[1] == {2, 3, 6, 7}
        assert sets[0] == {1, 3, 5, 7}
        assert all(len(s) == 4 for s in sets)  # 2^3 / 2 each

    def test_pruned_56_sets(self):
        sets = encoder_or_sets(3, PRUNED56)
        assert sets[2] == {4, 7}
        assert sets[1] == {2, 3, 7}
        assert sets[0] == {1, 3, 7}

    def test_empty_mask(self):
        assert encoder_or_sets(3, LevelMask.empty(3)) == [set(), set(), set()]

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            encoder_or_sets(4, LevelMask.full(3))


class TestOrTreeGateCount:
    def test_known_fanins(self):
        assert or_tree_gate_count(4) == 3
        assert or_tree_gate_count(1) == 0  # single line is a wire
        assert or_tree_gate_count(0) == 0  # constant output

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            or_tree_gate_count(-1)


class TestEstimateArea:
    def test_full_3bit(self):
        est = estimate_area(PrunedAdc(bitwidth=3))
        assert (est.comparators, est.or2_gates, est.total) == (7, 9, 16.0)

    def test_pruned_56(self):
        est = estimate_area(PrunedAdc(bitwidth=3, mask=PRUNED56))
        assert (est.comparators, est.or2_gates, est.total) == (5, 5, 10.0)

    def test_empty_mask(self):
        est = estimate_area(PrunedAdc(bitwidth=3, mask=LevelMask.empty(3)))
        assert (est.comparators, est.or2_gates, est.total) == (0, 0, 0.0)

    def test_costed_total(self):
        costs = GateCostTable(comparator_cost=3.0, or2_cost=0.5)
        est = estimate_area(PrunedAdc(bitwidth=3), costs)
        assert est.total == 7 * 3.0 + 9 * 0.5

    def test_negative_costs_rejected(self):
        with pytest.raises(ValueError):
            GateCostTable(comparator_cost=-1.0)

    def test_full_mask_formula_for_small_bitwidths(self):
        for n in range(1, 7):
            est = estimate_area(PrunedAdc(bitwidth=n))
            assert est.comparators == 2**n - 1
            assert est.or2_gates == n * (2 ** (n - 1) - 1)

    def test_monotone_under_mask_growth(self):
        rng = np.random.default_rng(4)
        for _ in range(300):
            sub_bits = rng.random(15) < 0.5
            super_bits = sub_bits | (rng.random(15) < 0.3)
            sub = estimate_area(PrunedAdc(bitwidth=4, mask=LevelMask(tuple(sub_bits))))
            sup = estimate_area(PrunedAdc(bitwidth=4, mask=LevelMask(tuple(super_bits))))
            assert sub.comparators <= sup.comparators
            assert sub.or2_gates <= sup.or2_gates
            assert sub.total <= sup.total


class TestTotalFrontendArea:
    def test_two_full_3bit(self):
        adcs = [PrunedAdc(bitwidth=3), PrunedAdc(bitwidth=3)]
        assert total_frontend_area(adcs) == 32.0

    def test_full_plus_empty(self):
        adcs = [PrunedAdc(bitwidth=3), PrunedAdc(bitwidth=3, mask=LevelMask.empty(3))]
        assert total_frontend_area(adcs) == 16.0

    def test_nine_full_4bit(self):
        adcs = [PrunedAdc(bitwidth=4) for _ in range(9)]
        assert total_frontend_area(adcs) == 9 * (15 + 28) == 387.0

    def test_conventional_reference(self):
        assert conventional_frontend_area(7, 4) == 7 * 43.0
        assert conventional_frontend_area(2, 3) == 32.0
