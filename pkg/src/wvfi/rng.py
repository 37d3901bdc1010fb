"""SplitMix64 counter-based generator.

Output ``i`` of the stream seeded with ``s`` is ``mix(s + (i + 1) * GAMMA)``
(mod 2**64), the standard SplitMix64 recurrence written in closed form so a
whole block of draws can be produced with vectorised uint64 arithmetic.
"""

from __future__ import annotations

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    """Seeded stream of 64-bit words; ``offset`` counts words consumed."""

    def __init__(self, seed: int):
        self.seed = np.uint64(int(seed) & _MASK64)
        self.offset = 0

    def next_u64(self, n: int) -> np.ndarray:
        idx = np.arange(self.offset + 1, self.offset + n + 1, dtype=np.uint64)
        self.offset += n
        with np.errstate(over="ignore"):
            return _mix(self.seed + idx * GAMMA)

    def uniform(self, n: int) -> np.ndarray:
        """``n`` doubles strictly inside (0, 1): top 53 bits, shifted half a step."""
        bits = self.next_u64(n) >> np.uint64(11)
        return (bits.astype(np.float64) + 0.5) * (1.0 / (1 << 53))

    def uniform_range(self, n: int, low: float, high: float) -> np.ndarray:
        return low + (high - low) * self.uniform(n)
