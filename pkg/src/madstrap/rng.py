"""Deterministic random streams.

Reproducibility contract (frozen; changing anything here changes every
persisted result):

* Seed derivation. ``hash64(w_0, ..., w_k)`` starts from
  ``h = 0x9E3779B97F4A7C15`` and for each word ``w`` (reduced mod 2**64)
  sets ``h = splitmix64_mix(h ^ w)`` then ``h = (h + 0x9E3779B97F4A7C15) mod 2**64``.
  ``splitmix64_mix`` is the SplitMix64 finalizer::

      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
      z = (z ^ (z >> 27)) * 0x94D049BB133111EB
      z =  z ^ (z >> 31)                      (all mod 2**64)

* Generator. Each stream is numpy's ``PCG64`` (PCG XSL-RR 128/64) constructed
  as ``PCG64(seed)``, i.e. initialised through ``SeedSequence(seed)``. Only raw
  64-bit outputs (``random_raw``) are consumed.

* Uniforms on the open interval: ``u = ((r >> 12) + 0.5) * 2**-52``, so
  ``2**-53 <= u <= 1 - 2**-53``. (With 53 bits, ``(2**53 - 1) + 0.5`` is not
  representable and rounds up to give ``u = 1``.)

* Bounded integers in ``[0, n)``: Lemire multiply-shift without rejection,
  ``floor(r * n / 2**64)``, evaluated exactly in 64-bit halves. The bias is
  below ``n / 2**64`` and is accepted in exchange for bit-exact portability.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64_mix(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def hash64(*words: int) -> int:
    """Mix integer words into a 64-bit seed."""
    h = GOLDEN
    for w in words:
        h = splitmix64_mix(h ^ (int(w) & MASK64))
        h = (h + GOLDEN) & MASK64
    return h


class Stream:
    """A PCG64 raw-output stream with the package's conversion rules."""

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self._bitgen = np.random.PCG64(self.seed)

    def raw(self, size: int) -> np.ndarray:
        return self._bitgen.random_raw(size).astype(np.uint64, copy=False)

    def uniforms(self, size: int) -> np.ndarray:
        return open_uniform(self.raw(size))

    def indices(self, n: int, size: int) -> np.ndarray:
        """``size`` integers uniform on ``[0, n)``."""
        if not 1 <= n < 2**32:
            raise ValueError("bound must lie in [1, 2**32)")
        return bounded(self.raw(size), n)

    def index_matrix(self, n: int, rows: int) -> np.ndarray:
        return self.indices(n, rows * n).reshape(rows, n)


def open_uniform(raw: np.ndarray) -> np.ndarray:
    """Map uint64 words to doubles strictly inside (0, 1)."""
    return ((raw >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0**-52


def bounded(raw: np.ndarray, n: int) -> np.ndarray:
    """Exact ``floor(raw * n / 2**64)`` for uint64 ``raw`` and ``n < 2**32``."""
    nn = np.uint64(n)
    lo32 = np.uint64(0xFFFFFFFF)
    s32 = np.uint64(32)
    hi = raw >> s32
    lo = raw & lo32
    return ((hi * nn + ((lo * nn) >> s32)) >> s32).astype(np.int64)
