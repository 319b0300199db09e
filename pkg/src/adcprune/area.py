"""Proxy area model for a pruned flash ADC.

Counts the two structures pruning actually shrinks: the comparator bank
(one comparator per surviving level) and the encoder's per-output-bit OR
trees.  The resistance ladder keeps its uniform spacing and is costless
here; the encoder's one-hot stage is deliberately excluded so the proxy
stays a comparator + OR count (the netlist module accounts for the full
gate-level structure and serves as the oracle).
"""

from __future__ import annotations

from dataclasses import dataclass

from .adc import LevelMask, PrunedAdc


@dataclass(frozen=True)
class GateCostTable:
    """Area units per primitive; unit costs turn the model into gate counts."""

    comparator_cost: float = 1.0
    or2_cost: float = 1.0

    def __post_init__(self):
        if self.comparator_cost < 0 or self.or2_cost < 0:
            raise ValueError("gate costs must be non-negative")


@dataclass(frozen=True)
class AreaEstimate:
    comparators: int
    or2_gates: int
    total: float


def encoder_or_sets(bitwidth: int, mask: LevelMask) -> list[set[int]]:
    """Surviving levels feeding each binary output bit.

    Output bit i is the OR of the surviving levels whose binary code has
    bit i set; with a full mask every set holds exactly 2^N / 2 levels.
    Returned list is indexed by bit position (0 = LSB).
    """
    if len(mask.bits) != 2**bitwidth - 1:
        raise ValueError(
            f"mask has {len(mask.bits)} bits, expected {2**bitwidth - 1} for bitwidth {bitwidth}"
        )
    survivors = mask.survivors
    return [{lvl for lvl in survivors if lvl >> i & 1} for i in range(bitwidth)]


def or_tree_gate_count(fanin: int) -> int:
    """Two-input OR gates needed to merge `fanin` lines: max(fanin - 1, 0).

    A single line is a wire, an empty set is constant 0; neither costs a gate.
    """
    if fanin < 0:
        raise ValueError("fanin must be non-negative")
    return max(fanin - 1, 0)


def estimate_area(adc: PrunedAdc, costs: GateCostTable = GateCostTable()) -> AreaEstimate:
    comparators = adc.mask.popcount
    or2 = sum(or_tree_gate_count(len(s)) for s in encoder_or_sets(adc.bitwidth, adc.mask))
    total = comparators * costs.comparator_cost + or2 * costs.or2_cost
    return AreaEstimate(comparators=comparators, or2_gates=or2, total=total)


def total_frontend_area(adcs, costs: GateCostTable = GateCostTable()) -> float:
    """Summed proxy area of the per-input ADC bank (one ADC per feature)."""
    return sum(estimate_area(adc, costs).total for adc in adcs)


def conventional_frontend_area(
    n_inputs: int, bitwidth: int, costs: GateCostTable = GateCostTable()
) -> float:
    """Area of the unpruned baseline bank: the normalization reference."""
    full = PrunedAdc(bitwidth=bitwidth, mask=LevelMask.full(bitwidth))
    return n_inputs * estimate_area(full, costs).total
