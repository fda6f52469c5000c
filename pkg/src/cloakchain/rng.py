"""Deterministic byte streams for seeded operations.

All randomized operations accept an optional 32-byte seed.  When present,
randomness comes from a counter-mode SHA-256 stream so results are exactly
reproducible; otherwise ``os.urandom`` is used.
"""

from __future__ import annotations

import hashlib
import os


class HashStream:
    """Counter-mode SHA-256 stream: block_i = SHA256(seed || i_be8)."""

    def __init__(self, seed: bytes):
        if len(seed) != 32:
            raise ValueError("seed must be exactly 32 bytes")
        self._seed = seed
        self._counter = 0
        self._buf = b""

    def read(self, n: int) -> bytes:
        while len(self._buf) < n:
            block = hashlib.sha256(
                self._seed + self._counter.to_bytes(8, "big")
            ).digest()
            self._counter += 1
            self._buf += block
        out, self._buf = self._buf[:n], self._buf[n:]
        return out


class SystemStream:
    """os.urandom with the same read() surface as HashStream."""

    def read(self, n: int) -> bytes:
        return os.urandom(n)


def byte_stream(seed: bytes | None):
    return HashStream(seed) if seed is not None else SystemStream()


def rand_scalar(stream, n: int) -> int:
    """Uniform scalar in [1, n) by rejection sampling on 32-byte draws."""
    nbytes = max(32, (n.bit_length() + 7) // 8)
    while True:
        k = int.from_bytes(stream.read(nbytes), "big")
        if 0 < k < n:
            return k
        # out of range: redraw (for small n, reduce instead of looping forever)
        if n.bit_length() < 128:
            k %= n
            if k:
                return k
