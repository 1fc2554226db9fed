"""Deterministic 64-bit PRNG used everywhere randomness is needed.

Self-contained so that integer outputs (labels, shuffles, placements) are
bit-identical across platforms and library versions; float outputs are
deterministic per build.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """SplitMix64 stream: 64-bit counter state, one xorshift-multiply scramble per draw."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Double in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def randint(self, bound: int) -> int:
        """Integer in [0, bound). Bounds here are tiny relative to 2**64, so
        the modulo bias is negligible and the result stays platform-exact."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        return self.next_u64() % bound

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        """Box-Muller draw; two uniforms per call, cosine branch only."""
        u1 = self.uniform()
        u2 = self.uniform()
        # 1 - u1 keeps the log argument in (0, 1]
        radius = math.sqrt(-2.0 * math.log(1.0 - u1))
        return mu + sigma * radius * math.cos(2.0 * math.pi * u2)


def mix_seed(seed: int, *salts: int) -> int:
    """Derive a decorrelated child seed from a base seed and integer salts."""
    acc = seed & _MASK64
    for salt in salts:
        acc = SplitMix64(acc ^ (((salt + 1) * _GAMMA) & _MASK64)).next_u64()
    return acc


def shuffled_indices(n: int, rng: SplitMix64) -> list[int]:
    """Fisher-Yates permutation of range(n) driven by `rng`."""
    idx = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.randint(i + 1)
        idx[i], idx[j] = idx[j], idx[i]
    return idx
