"""Seeded Bloom filter with double-hashed probes.

Probe i of an element x is (h1(x) + i*h2(x)) mod m, where h1 and h2 are
independent 64-bit mixes of the address keyed by the filter seed.  The
mix is a fixed splitmix64-style finalizer, so filters are deterministic
across runs and platforms for a given seed.
"""

from __future__ import annotations

import math
from typing import Iterator

import numpy as np

__all__ = ["BloomFilter", "theoretical_fpr", "probe_matrix"]

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(x: int) -> int:
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def theoretical_fpr(m: int, k: int, n: int) -> float:
    """Expected false-positive rate after n insertions: (1 - e^(-kn/m))^k."""
    return (1.0 - math.exp(-k * n / m)) ** k


class BloomFilter:
    """Fixed-size bit-array filter; no false negatives, seeded probes."""

    __slots__ = ("m", "k", "seed", "inserted", "_bits", "_key1", "_key2")

    def __init__(self, m: int, k: int, seed: int = 0):
        if m < 1:
            raise ValueError(f"filter needs at least 1 bit, got m={m}")
        if k < 1:
            raise ValueError(f"filter needs at least 1 probe, got k={k}")
        self.m = m
        self.k = k
        self.seed = seed
        self.inserted = 0
        self._bits = bytearray((m + 7) // 8)
        self._key1 = _mix64(seed)
        self._key2 = _mix64(seed ^ _GOLDEN)

    @classmethod
    def sized_for(cls, expected_items: int, fpr: float = 0.01, seed: int = 0) -> "BloomFilter":
        """Size m for a target false-positive rate at the expected load.

        Uses the standard m = -n ln p / (ln 2)^2 bits with k = (m/n) ln 2
        probes, rounded.
        """
        if expected_items < 1:
            raise ValueError("expected_items must be positive")
        if not 0 < fpr < 1:
            raise ValueError(f"fpr must be in (0, 1), got {fpr}")
        m = math.ceil(-expected_items * math.log(fpr) / math.log(2) ** 2)
        m = max(8, (m + 7) // 8 * 8)  # whole bytes
        k = max(1, round(m / expected_items * math.log(2)))
        return cls(m, k, seed)

    @property
    def nbytes(self) -> int:
        return len(self._bits)

    def _probes(self, x: int) -> Iterator[int]:
        h1 = _mix64(x ^ self._key1)
        h2 = _mix64(x ^ self._key2) | 1  # odd stride
        for i in range(self.k):
            # wrap at 64 bits to match the vectorized twin exactly
            yield ((h1 + i * h2) & _MASK64) % self.m

    def insert(self, x) -> None:
        for idx in self._probes(int(x)):
            self._bits[idx >> 3] |= 1 << (idx & 7)
        self.inserted += 1

    def contains(self, x) -> bool:
        bits = self._bits
        for idx in self._probes(int(x)):
            if not bits[idx >> 3] & (1 << (idx & 7)):
                return False
        return True

    __contains__ = contains

    def clear(self) -> None:
        for i in range(len(self._bits)):
            self._bits[i] = 0
        self.inserted = 0

    def bit_count(self) -> int:
        """Population count of the bit array."""
        return sum(bin(b).count("1") for b in self._bits)

    def bit_snapshot(self) -> bytes:
        return bytes(self._bits)


def probe_matrix(xs: np.ndarray, m: int, k: int, seed: int = 0) -> np.ndarray:
    """Vectorized probe indices: row j holds the k probes of xs[j].

    Bit-exact match with BloomFilter(m, k, seed) probe by probe; used by
    the simulator's compiled ingest kernels.
    """
    xs = np.asarray(xs, dtype=np.uint64)
    key1 = np.uint64(_mix64(seed))
    key2 = np.uint64(_mix64(seed ^ _GOLDEN))

    def mix(v: np.ndarray) -> np.ndarray:
        v = v.copy()
        v ^= v >> np.uint64(30)
        v *= np.uint64(0xBF58476D1CE4E5B9)
        v ^= v >> np.uint64(27)
        v *= np.uint64(0x94D049BB133111EB)
        v ^= v >> np.uint64(31)
        return v

    h1 = mix(xs ^ key1)
    h2 = mix(xs ^ key2) | np.uint64(1)
    i = np.arange(k, dtype=np.uint64)
    return ((h1[:, None] + i[None, :] * h2[:, None]) % np.uint64(m)).astype(np.int64)
