"""Deterministic seeded randomness.

All stochastic decisions in the search are driven by SplitMix64, a small,
well-known 64-bit generator (Steele, Lea & Flood 2014).  Implementing it
here (rather than relying on the stdlib Mersenne Twister) pins the byte
stream forever: identical seeds produce identical searches on any platform
and any Python version.

Each distinct purpose (point selection, operator selection, ingredient
selection, ingredient transformation, crossover) gets its own stream
derived from the master seed, so enabling or disabling one strategy never
perturbs the draws of another.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


def _fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & _MASK64
    return h


class SplitMix64:
    """SplitMix64 generator with helpers for unbiased bounded draws."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), rejection-sampled to avoid modulo bias."""
        if n <= 0:
            raise ValueError("below() requires n >= 1")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def choice(self, seq):
        if not seq:
            raise ValueError("choice() on empty sequence")
        return seq[self.below(len(seq))]

    def weighted_index(self, weights) -> int:
        """Index drawn proportionally to the given non-negative weights."""
        total = float(sum(weights))
        if total <= 0.0:
            raise ValueError("weighted_index() requires a positive total weight")
        r = self.random() * total
        acc = 0.0
        for i, w in enumerate(weights):
            acc += w
            if r < acc:
                return i
        return len(weights) - 1

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


class RngStreams:
    """Per-purpose generators split from one master seed."""

    PURPOSES = ("points", "operators", "ingredients", "transform", "crossover")

    def __init__(self, seed: int):
        self.seed = seed
        for purpose in self.PURPOSES:
            setattr(self, purpose, SplitMix64((seed & _MASK64) ^ _fnv1a64(purpose)))
