"""Pinned pseudorandom stream used to derive embedding matrices from a key.

seed = FNV-1a-64(key bytes); splitmix64(seed) yields four words that seed
xoshiro256**.  Bulk generation runs in numba; the scalar class is kept for
small draws and readability.
"""

from __future__ import annotations

import numpy as np
from numba import njit, uint64

MASK64 = 0xFFFFFFFFFFFFFFFF

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & MASK64
    return h


def splitmix64_words(seed: int, count: int = 4) -> list[int]:
    x = seed & MASK64
    out = []
    for _ in range(count):
        x = (x + 0x9E3779B97F4A7C15) & MASK64
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        out.append(z ^ (z >> 31))
    return out


class Xoshiro256:
    """xoshiro256** seeded through splitmix64."""

    def __init__(self, seed: int):
        self.state = np.array(splitmix64_words(seed), dtype=np.uint64)

    def next(self) -> int:
        out = np.empty(1, dtype=np.uint64)
        _fill(self.state, out)
        return int(out[0])

    def words(self, count: int) -> np.ndarray:
        """Return the next ``count`` outputs as a uint64 array."""
        out = np.empty(count, dtype=np.uint64)
        _fill(self.state, out)
        return out


@njit(cache=True)
def _rotl(x, k):
    return (x << uint64(k)) | (x >> uint64(64 - k))


@njit(cache=True)
def _fill(state, out):
    s0, s1, s2, s3 = state[0], state[1], state[2], state[3]
    for i in range(out.size):
        out[i] = _rotl(s1 * uint64(5), 7) * uint64(9)
        t = s1 << uint64(17)
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3


@njit(cache=True)
def _stream_to_rows(stream, rows, cols, out):
    # Bit b of the continuous stream is bit (63 - b % 64) of stream[b // 64];
    # matrix entry (r, c) takes stream bit r*cols + c.
    nw = out.shape[1]
    tail = cols & 63
    for r in range(rows):
        base = r * cols
        for w in range(nw):
            pos = base + (w << 6)
            q = pos >> 6
            o = pos & 63
            if o == 0:
                word = stream[q]
            else:
                word = stream[q] << uint64(o)
                if q + 1 < stream.size:
                    word |= stream[q + 1] >> uint64(64 - o)
            out[r, w] = word
        if tail:
            out[r, nw - 1] &= ~(~uint64(0) >> uint64(tail))


def random_rows(seed: int, rows: int, cols: int) -> np.ndarray:
    """Fill a rows x cols bit matrix row-major from the stream seeded by ``seed``.

    Returns packed uint64 words, most-significant bit first, one padded word
    row per matrix row.
    """
    nbits = rows * cols
    stream = Xoshiro256(seed).words((nbits + 63) // 64)
    out = np.empty((rows, (cols + 63) // 64), dtype=np.uint64)
    _stream_to_rows(stream, rows, cols, out)
    return out
