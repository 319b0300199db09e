"""Behavioral model of conventional and level-pruned flash ADCs.

An N-bit flash ADC compares the input against 2^N - 1 ladder thresholds
V_j = j * vref / 2^N (j = 1 .. 2^N - 1) and emits a thermometer code.
Pruning removes selected levels: the comparator for level j disappears and
inputs that would have landed on a pruned level fall to the next lower
surviving level.  Level 0 has no comparator and always survives.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class MaskError(ValueError):
    """Raised for malformed level masks (wrong length, bad hex literal)."""


def _check_bitwidth(bitwidth: int) -> None:
    if not isinstance(bitwidth, int) or bitwidth < 1:
        raise MaskError(f"bitwidth must be a positive integer, got {bitwidth!r}")


@dataclass(frozen=True)
class LevelMask:
    """Which of the 2^N - 1 comparator levels survive pruning.

    ``bits[j - 1]`` is True iff level j (1-based) keeps its comparator.
    """

    bits: tuple[bool, ...]

    def __post_init__(self):
        n = len(self.bits)
        # valid lengths are 2^N - 1 for some N >= 1
        if n < 1 or (n + 1) & n != 0:
            raise MaskError(f"mask length {n} is not 2^N - 1 for any bitwidth N")
        object.__setattr__(self, "bits", tuple(bool(b) for b in self.bits))

    @property
    def bitwidth(self) -> int:
        return (len(self.bits) + 1).bit_length() - 1

    @property
    def popcount(self) -> int:
        return sum(self.bits)

    @property
    def survivors(self) -> tuple[int, ...]:
        """Surviving level indices, ascending (level 0 excluded: no comparator)."""
        return tuple(j for j, b in enumerate(self.bits, start=1) if b)

    @classmethod
    def full(cls, bitwidth: int) -> "LevelMask":
        _check_bitwidth(bitwidth)
        return cls((True,) * (2**bitwidth - 1))

    @classmethod
    def empty(cls, bitwidth: int) -> "LevelMask":
        _check_bitwidth(bitwidth)
        return cls((False,) * (2**bitwidth - 1))

    @classmethod
    def from_levels(cls, bitwidth: int, levels) -> "LevelMask":
        """Mask keeping exactly the given 1-based level indices."""
        _check_bitwidth(bitwidth)
        keep = set(levels)
        top = 2**bitwidth - 1
        for lvl in keep:
            if not 1 <= lvl <= top:
                raise MaskError(f"level {lvl} out of range 1..{top}")
        return cls(tuple(j in keep for j in range(1, top + 1)))

    def prune(self, levels) -> "LevelMask":
        """Copy of this mask with the given levels removed."""
        drop = set(levels)
        return LevelMask(tuple(b and (j not in drop) for j, b in enumerate(self.bits, start=1)))

    @classmethod
    def from_hex(cls, bitwidth: int, text: str) -> "LevelMask":
        """Parse the CLI/config literal: hex over 2^N - 1 bits, LSB = level 1."""
        _check_bitwidth(bitwidth)
        n = 2**bitwidth - 1
        try:
            value = int(text, 16)
        except (ValueError, TypeError):
            raise MaskError(f"invalid mask hex literal {text!r}") from None
        if value < 0 or value >= 1 << n:
            raise MaskError(f"mask hex {text!r} does not fit in {n} bits (bitwidth {bitwidth})")
        return cls(tuple(bool(value >> (j - 1) & 1) for j in range(1, n + 1)))

    def to_hex(self) -> str:
        value = 0
        for j, b in enumerate(self.bits, start=1):
            if b:
                value |= 1 << (j - 1)
        width = (len(self.bits) + 3) // 4
        return f"{value:0{width}X}"


@dataclass(frozen=True)
class PrunedAdc:
    """One flash ADC instance: bitwidth, reference voltage, surviving-level mask.

    Immutable; every operation below is a pure function of (adc, input).
    """

    bitwidth: int = 4
    vref: float = 1.0
    mask: LevelMask = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        _check_bitwidth(self.bitwidth)
        if self.vref <= 0:
            raise ValueError(f"vref must be positive, got {self.vref}")
        if self.mask is None:
            object.__setattr__(self, "mask", LevelMask.full(self.bitwidth))
        if len(self.mask.bits) != 2**self.bitwidth - 1:
            raise MaskError(
                f"mask has {len(self.mask.bits)} bits, expected "
                f"{2**self.bitwidth - 1} for bitwidth {self.bitwidth}"
            )

    @property
    def comparators(self) -> int:
        return self.mask.popcount


def thresholds(adc: PrunedAdc) -> list[tuple[int, float]]:
    """Surviving (level, voltage) pairs, ascending; V_j = j * vref / 2^N."""
    step = adc.vref / 2**adc.bitwidth
    return [(j, j * step) for j in adc.mask.survivors]


def thermometer(adc: PrunedAdc, vin: float) -> np.ndarray:
    """Comparator outputs over surviving levels: bit set iff vin > V_j.

    Strict comparison: an input exactly on a threshold reads 0 there, so the
    result is always a prefix of ones in ascending level order.
    """
    levels = np.asarray(adc.mask.survivors, dtype=np.float64)
    return vin > levels * (adc.vref / 2**adc.bitwidth)


def digitize(adc: PrunedAdc, vin: float) -> int:
    """Largest surviving level whose threshold lies strictly below vin, else 0.

    The returned code is the level's original N-bit binary value; out-of-range
    inputs saturate (all-below -> 0, all-above -> top surviving level).
    """
    step = adc.vref / 2**adc.bitwidth
    code = 0
    for j in adc.mask.survivors:
        if vin > j * step:
            code = j
        else:
            break
    return code


def quantize_batch(adc: PrunedAdc, samples) -> np.ndarray:
    """Digitize normalized samples and rescale codes to fractions code / 2^N.

    This is the fixed-point value the N-bit classifier input wire carries.
    """
    samples = np.asarray(samples, dtype=np.float64)
    survivors = adc.mask.survivors
    if not survivors:
        return np.zeros_like(samples)
    step = adc.vref / 2**adc.bitwidth
    thresh = np.asarray(survivors, dtype=np.float64) * step
    # count of thresholds strictly below each sample
    idx = np.searchsorted(thresh, samples, side="left")
    codes = np.asarray((0,) + survivors)[idx]
    return codes / 2**adc.bitwidth
