"""Deterministic pseudorandom numbers for tags and randomized audits.

The single generator used anywhere randomness appears is SplitMix64
(Steele, Lea & Flood's 64-bit mixer, the seeding generator of Java's
SplittableRandom). It was chosen because it is tiny, has a fixed published
algorithm, and is trivially reproducible in any language: given the same
seed, every port of this library must draw the same sequence.

Floats are produced as ``(next_u64() >> 11) * 2**-53``, uniform on [0, 1).
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


class SplitMix64:
    """SplitMix64 stream. State advances by the 64-bit golden-ratio constant."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _INV_2_53

    def next_in(self, lo: float, hi: float) -> float:
        return lo + self.next_float() * (hi - lo)

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection-free modular draw.

        Bias is below 2**-53 for any n this library uses (n << 2**32).
        """
        return self.next_u64() % n
