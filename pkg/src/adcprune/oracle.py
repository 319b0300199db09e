"""Exhaustive cross-checks between the behavioral ADC, the proxy area model,
and the compiled gate-level netlist.

The function sweep simulates every mask's encoder on every valid thermometer
pattern and compares against behavioral digitization.  The area sweep checks
the proxy's comparator/OR counts against the compiled netlist exactly and
reports the Pearson correlation between the proxy total and the full gate
count including the one-hot stage the proxy deliberately ignores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adc import LevelMask, PrunedAdc, digitize
from .area import estimate_area
from .netlist import compile_encoder, count_gates, simulate


def all_masks(bitwidth: int):
    n = 2**bitwidth - 1
    for value in range(1 << n):
        yield LevelMask(tuple(bool(value >> j & 1) for j in range(n)))


@dataclass(frozen=True)
class FunctionSweep:
    bitwidth: int
    masks: int
    patterns: int
    mismatches: int

    @property
    def passed(self) -> bool:
        return self.mismatches == 0


def function_sweep(bitwidth: int = 3) -> FunctionSweep:
    """Netlist simulation vs behavioral digitize over every mask and pattern."""
    masks = patterns = mismatches = 0
    for mask in all_masks(bitwidth):
        adc = PrunedAdc(bitwidth=bitwidth, mask=mask)
        net = compile_encoder(bitwidth, mask)
        step = adc.vref / 2**bitwidth
        thresh = [j * step for j in mask.survivors]
        k = len(thresh)
        masks += 1
        for p in range(k + 1):
            pattern = [True] * p + [False] * (k - p)
            # representative input inside the bin this pattern encodes
            vin = thresh[p - 1] + step / 2 if p else (thresh[0] / 2 if k else 0.5)
            expected = digitize(adc, vin)
            got = simulate(net, pattern)
            patterns += 1
            if got != expected:
                mismatches += 1
    return FunctionSweep(bitwidth=bitwidth, masks=masks, patterns=patterns, mismatches=mismatches)


@dataclass(frozen=True)
class AreaSweep:
    bitwidth: int
    masks: int
    count_mismatches: int
    pearson_r: float

    @property
    def passed(self) -> bool:
        return self.count_mismatches == 0 and self.pearson_r >= 0.95


def area_sweep(bitwidth: int = 4) -> AreaSweep:
    """Proxy (comparators, OR2) vs netlist counts for every mask, plus the
    correlation of proxy totals against full gate counts (with AND2/INV)."""
    proxy_totals = []
    full_totals = []
    mismatches = 0
    n_masks = 0
    for mask in all_masks(bitwidth):
        n_masks += 1
        est = estimate_area(PrunedAdc(bitwidth=bitwidth, mask=mask))
        net = compile_encoder(bitwidth, mask)
        counts = count_gates(net)
        if est.comparators != len(net.inputs) or est.or2_gates != counts["OR2"]:
            mismatches += 1
        proxy_totals.append(est.total)
        full_totals.append(counts["OR2"] + counts["AND2"] + counts["INV"])
    r = float(np.corrcoef(proxy_totals, full_totals)[0, 1])
    return AreaSweep(bitwidth=bitwidth, masks=n_masks, count_mismatches=mismatches, pearson_r=r)
