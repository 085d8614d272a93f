"""
SplitMix64 random stream.

All randomness in the toolkit (projector signs, synthetic data, weight
initialization, shuffling) comes from this generator so that results are
bit-identical across platforms for a given seed. Words are generated in
vectorized blocks; the state after drawing n words equals the state after
n scalar calls.
"""
import math

import numpy as np

from src.core.errors import ConfigError

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_GAMMA = np.uint64(GOLDEN_GAMMA)

# 2**-53, the spacing of doubles in [0.5, 1)
_DOUBLE_UNIT = 1.0 / (1 << 53)


def _mix(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


class SplitMix64:
    """Seeded SplitMix64 generator with vectorized block draws."""

    def __init__(self, seed: int):
        if not 0 <= seed <= MASK64:
            raise ConfigError(f"seed must be an integer in [0, 2**64 - 1], got {seed}")
        self._state = int(seed)

    @property
    def state(self) -> int:
        return self._state

    def next_u64(self) -> int:
        """Return the next 64-bit word."""
        self._state = (self._state + GOLDEN_GAMMA) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def words(self, n: int) -> np.ndarray:
        """Return the next n words as a uint64 array."""
        if n <= 0:
            return np.zeros(0, dtype=np.uint64)
        steps = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self._state) + steps * _GAMMA
        self._state = (self._state + n * GOLDEN_GAMMA) & MASK64
        return _mix(z)

    def signs(self, n: int, chunk: int = 1 << 20) -> np.ndarray:
        """Rademacher draws as int8: +1 when the top bit of the word is 0, else -1."""
        out = np.empty(n, dtype=np.int8)
        for start in range(0, n, chunk):
            stop = min(n, start + chunk)
            top = (self.words(stop - start) >> np.uint64(63)).astype(np.int8)
            out[start:stop] = 1 - 2 * top
        return out

    def uniform(self, n: int) -> np.ndarray:
        """n doubles in [0, 1) built from the top 53 bits of each word."""
        return (self.words(n) >> np.uint64(11)).astype(np.float64) * _DOUBLE_UNIT

    def gaussian(self, n: int) -> np.ndarray:
        """
        n standard normal draws via Box-Muller.

        Each pair of words (u1, u2) yields the cosine and sine variates, in
        that order; an odd request discards the final sine variate.
        """
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs).reshape(pairs, 2)
        radius = np.sqrt(-2.0 * np.log(1.0 - u[:, 0]))
        angle = 2.0 * math.pi * u[:, 1]
        out = np.empty((pairs, 2), dtype=np.float64)
        out[:, 0] = radius * np.cos(angle)
        out[:, 1] = radius * np.sin(angle)
        return out.reshape(-1)[:n]

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of range(n); index j for step i is word % (i + 1)."""
        order = np.arange(n)
        if n < 2:
            return order
        draws = self.words(n - 1)
        for step, i in enumerate(range(n - 1, 0, -1)):
            j = int(draws[step] % np.uint64(i + 1))
            order[i], order[j] = order[j], order[i]
        return order


def derive_seed(seed: int, offset: int) -> int:
    """Derive a related seed deterministically (e.g. the temporal projector from the spatial one)."""
    return (seed + offset) & MASK64
