"""Portable deterministic randomness for curriculum plans.

Every shuffle in this package goes through SplitMix64, a tiny public-domain
generator with published reference outputs, so any implementation in any
language can reproduce the exact permutation from the seed recorded in a
plan manifest. The permutation procedure is fixed: sort the ids ascending,
then Fisher-Yates with unbiased bounded draws.
"""

from __future__ import annotations

from collections.abc import Sequence

PRNG_NAME = "splitmix64"

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64: 64-bit state, golden-ratio increment, two xor-multiply mixes."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_uint64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_below(self, bound: int) -> int:
        """Unbiased integer in [0, bound) via rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            x = self.next_uint64()
            if x < limit:
                return x % bound

    def next_float(self) -> float:
        """Uniform in [0, 1) with 53 random bits."""
        return (self.next_uint64() >> 11) * 2.0**-53


def subseed(seed: int, index: int) -> int:
    """Derive the per-tier stream seed from a plan seed (seed XOR tier index)."""
    return (seed ^ index) & _MASK64


def shuffled(ids: Sequence[str], seed: int) -> list[str]:
    """Deterministic permutation of `ids`, independent of their input order."""
    out = sorted(ids)
    rng = SplitMix64(seed)
    for i in range(len(out) - 1, 0, -1):
        j = rng.next_below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out
