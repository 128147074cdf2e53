"""Seeded 64-bit PRNG used for every random draw in the package.

A single splitmix64 stream per consumer keeps dataset generation, weight
initialization, triplet sampling, and layout initialization reproducible
from one integer seed. Determinism is promised within this implementation
only; the raw bit stream is not a cross-language contract.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """splitmix64 generator with uniform/normal helpers.

    State advances by a fixed odd constant; output is a bijective mix of
    the state, so short seeds like 0 and 1 still give well-spread streams.
    """

    def __init__(self, seed: int):
        self._state = seed & _MASK64
        self._spare_normal: float | None = None

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def fork(self, tag: int) -> "SplitMix64":
        """Derive an independent child stream without disturbing this one."""
        return SplitMix64(self.next_u64() ^ (tag & _MASK64))

    def uniform(self) -> float:
        # 53-bit mantissa, offset by half an ulp: never exactly 0 or 1
        return ((self.next_u64() >> 11) + 0.5) / 9007199254740992.0

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n), bias-free via rejection."""
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        limit = (_MASK64 + 1) - ((_MASK64 + 1) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        if self._spare_normal is not None:
            z = self._spare_normal
            self._spare_normal = None
        else:
            u1 = self.uniform()
            u2 = self.uniform()
            r = math.sqrt(-2.0 * math.log(u1))
            z = r * math.cos(2.0 * math.pi * u2)
            self._spare_normal = r * math.sin(2.0 * math.pi * u2)
        return mu + sigma * z

    def normals(self, shape, sigma: float = 1.0) -> np.ndarray:
        """Array of N(0, sigma^2) draws in row-major fill order."""
        n = int(np.prod(shape))
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            out[i] = self.normal(0.0, sigma)
        return out.reshape(shape)


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a hash, used for dataset fingerprints."""
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & _MASK64
    return h


def fnv1a_hex(data: bytes) -> str:
    return format(fnv1a_64(data), "016x")
