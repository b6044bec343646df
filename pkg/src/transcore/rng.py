"""Seeded, cross-platform random number generation.

Every distortion in this package draws from xoshiro256** seeded through
SplitMix64, with normal deviates produced by the Box-Muller transform.
The generators are specified at the bit level (64-bit integer arithmetic,
IEEE-754 doubles), so a (seed, draw-count) pair reproduces the same
sample sequence on any platform.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

# 2**-53; a 53-bit mantissa draw times this lands in [0, 1)
_U53 = 1.0 / (1 << 53)


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a SplitMix64 state once; returns (next_state, output)."""
    state = (state + _SPLITMIX_GAMMA) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash of a byte string."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


def derive_seed(master: int, pair_id: str, kind: str, degree_index: int) -> int:
    """Stable per-task seed for a sweep cell.

    The tuple is encoded as UTF-8 with 0x1F separators, hashed with
    FNV-1a, xor-folded with the master seed, and finalized with one
    SplitMix64 step. Identical tuples give identical seeds, so sweep
    results do not depend on scheduling order.
    """
    encoded = f"{pair_id}\x1f{kind}\x1f{degree_index}".encode("utf-8")
    _, out = splitmix64(fnv1a64(encoded) ^ (master & _MASK64))
    return out


class RngStream:
    """xoshiro256** stream with SplitMix64 state initialization.

    ``normals(n)`` consumes ceil(n/2) Box-Muller pairs and discards the
    unused spare at the end of the call, so the mapping from
    (seed, call pattern) to samples is exact and documented. All
    distortions draw their whole budget in a single call.
    """

    def __init__(self, seed: int):
        state = seed & _MASK64
        words = []
        for _ in range(4):
            state, word = splitmix64(state)
            words.append(word)
        self._s = words

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        x = (s1 * 5) & _MASK64
        result = ((((x << 7) | (x >> 57)) & _MASK64) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK64
        self._s = [s0, s1, s2, s3]
        return result

    def next_float(self) -> float:
        """One double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * _U53

    def _raw(self, n: int) -> np.ndarray:
        # Tight local-variable loop; the bulk transform below is vectorized.
        s0, s1, s2, s3 = self._s
        out = np.empty(n, dtype=np.uint64)
        for i in range(n):
            x = (s1 * 5) & _MASK64
            out[i] = ((((x << 7) | (x >> 57)) & _MASK64) * 9) & _MASK64
            t = (s1 << 17) & _MASK64
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= t
            s3 = ((s3 << 45) | (s3 >> 19)) & _MASK64
        self._s = [s0, s1, s2, s3]
        return out

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles in [0, 1)."""
        if n < 0:
            raise ValueError("sample count must be non-negative")
        return (self._raw(n) >> np.uint64(11)).astype(np.float64) * _U53

    def normals(self, n: int) -> np.ndarray:
        """n standard-normal doubles via Box-Muller.

        Pair k uses uniforms (u_{2k}, u_{2k+1}); u1 is shifted into
        (0, 1] so log() never sees zero. z0 uses cos, z1 uses sin.
        """
        if n < 0:
            raise ValueError("sample count must be non-negative")
        pairs = (n + 1) // 2
        raw = self._raw(2 * pairs) >> np.uint64(11)
        u1 = (raw[0::2].astype(np.float64) + 1.0) * _U53
        u2 = raw[1::2].astype(np.float64) * _U53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = (2.0 * math.pi) * u2
        out = np.empty(2 * pairs, dtype=np.float64)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:n]
