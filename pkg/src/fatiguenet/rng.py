"""Deterministic random streams.

Every random draw in the package flows through `Rng`, a thin wrapper around
the Philox counter-based bit generator.  Reproducibility contract: the same
(seed, stream) pair yields the same draw sequence on every platform, because
we consume only the raw 64-bit Philox words and do the mapping to floats and
permutations ourselves (the raw word stream is a fixed property of the Philox algorithm,
unlike the higher-level numpy Generator methods, which are allowed to change
between releases).

Streams are derived hierarchically: `rng.derive(i)` returns an independent
source with the same seed and a stream id mixed from the parent's.  Distinct
ids always give distinct streams, so callers can hand out per-epoch or
per-sample sources without coordinating.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Stream domains, so different subsystems never share a stream even when
# their local counters overlap.  Values are arbitrary but frozen: changing
# them changes every seeded run.
STREAM_INIT = 0x01      # network parameter init, child id = layer index
STREAM_SPLIT = 0x02     # stratified split, child id = class label
STREAM_SHUFFLE = 0x03   # per-epoch batch shuffling, child id = epoch
STREAM_AUGMENT = 0x04   # per-sample warps, child id = epoch * n + index


def _mix(z: int) -> int:
    # splitmix64 finalizer; bijective on 64-bit ints
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class Rng:
    """Seeded random source. Cheap to construct; never share one across tasks,
    derive a child per task instead."""

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream = int(stream) & _MASK64
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        self._bits = np.random.Philox(key=key)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, stream={self.stream:#x})"

    def derive(self, stream_id: int) -> Rng:
        """Independent child source; injective in stream_id for a fixed parent."""
        return Rng(self.seed, _mix(self.stream ^ _mix(int(stream_id) & _MASK64)))

    def raw(self, n: int) -> np.ndarray:
        """Next n raw 64-bit words. Advances this source."""
        return np.asarray(self._bits.random_raw(n), dtype=np.uint64)

    def uniform(self, low: float, high: float, shape=None) -> np.ndarray | float:
        """Uniform draws in [low, high), float64. Scalar when shape is None."""
        n = 1 if shape is None else int(np.prod(shape))
        u = (self.raw(n) >> 11) * 2.0**-53  # 53-bit mantissa in [0, 1)
        out = low + u * (high - low)
        if shape is None:
            return float(out[0])
        return out.reshape(shape)

    def bernoulli(self, p: float) -> bool:
        return bool(self.uniform(0.0, 1.0) < p)

    def permutation(self, n: int) -> np.ndarray:
        """Uniform random permutation of range(n) as an int64 array."""
        keys = self.raw(n)
        return np.argsort(keys, kind="stable").astype(np.int64)
