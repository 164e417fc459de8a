"""SplitMix64, the deterministic generator behind every seeded adversary.

The algorithm is Steele, Lea and Flood's SplitMix64 (the seeding generator of
xoshiro256**): a Weyl increment of 0x9E3779B97F4A7C15 followed by two
xor-shift-multiply mixing rounds.  Outputs are plain Python ints in
``[0, 2**64)``, so replays do not depend on platform floats.
"""

from __future__ import annotations

from fractions import Fraction

ALGORITHM = "splitmix64"

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self.seed = seed & _MASK
        self.state = self.seed

    @classmethod
    def at(cls, seed: int, index: int) -> "SplitMix64":
        """Generator positioned so that its next output is output ``index`` (0-based)."""
        g = cls(seed)
        g.state = (g.seed + index * _GOLDEN) & _MASK
        return g

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def dyadic(self) -> Fraction:
        """Next draw as the exact dyadic rational ``u64 / 2**64`` in ``[0, 1)``."""
        return Fraction(self.next_u64(), 1 << 64)

    def __repr__(self):
        return f"SplitMix64(seed={self.seed}, state={self.state:#x})"
