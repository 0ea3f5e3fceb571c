"""Counter-based random streams for reproducible Monte Carlo.

Every random quantity in the package is a pure function of (seed, stream ids,
counter).  A stream is identified by a 64-bit key folded from the master seed
and any number of integer ids (trial index, size index, ...); the n-th variate
of a stream is obtained by hashing ``key + n * GOLDEN`` through the splitmix64
finalizer.  Nothing is stateful at the algorithm level, so results are
bit-identical no matter how work is chunked across threads.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix(z: int) -> int:
    """splitmix64 finalizer on a Python int (mod 2**64)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def stream_key(seed: int, *ids: int) -> int:
    """Fold (seed, *ids) into a 64-bit stream key.

    Each id is mixed before folding so that adjacent ids do not produce
    correlated keys.  The empty fold ``stream_key(seed)`` is itself a valid
    stream (used for single-configuration sampling).
    """
    key = _mix(seed + _GOLDEN)
    for i in ids:
        key = _mix(key + _GOLDEN + _mix(i + _GOLDEN))
    return key


# ── vectorized streams ──────────────────────────────────────────────────────

_NP_GOLDEN = np.uint64(_GOLDEN)
_NP_MIX1 = np.uint64(_MIX1)
_NP_MIX2 = np.uint64(_MIX2)
_TO_UNIT = 2.0 ** -53  # top 53 bits of the hash -> float64 in [0, 1)


def _mix_np(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _NP_MIX1
        z = (z ^ (z >> np.uint64(27))) * _NP_MIX2
        return z ^ (z >> np.uint64(31))


def _fold_np(key: int | np.ndarray, ids: np.ndarray) -> np.ndarray:
    # same fold step as stream_key, applied elementwise
    with np.errstate(over="ignore"):
        return _mix_np(np.uint64(key) + _NP_GOLDEN + _mix_np(ids + _NP_GOLDEN))


def uniform_block(key: int, start: int, count: int) -> np.ndarray:
    """Variates ``start .. start+count-1`` of stream ``key`` as float64 in [0, 1)."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(key) + idx * _NP_GOLDEN
    return (_mix_np(z) >> np.uint64(11)).astype(np.float64) * _TO_UNIT


def uniform_matrix(base_key: int, id_lo: int, id_hi: int, count: int) -> np.ndarray:
    """Uniforms for substreams ``(base_key, i)`` with ``id_lo <= i < id_hi``.

    Row r holds the first ``count`` variates of the stream obtained by folding
    id ``id_lo + r`` into ``base_key``; row r equals
    ``uniform_block(stream_key-fold(base_key, id_lo + r), 0, count)`` bit for bit.
    """
    ids = np.arange(id_lo, id_hi, dtype=np.uint64)
    keys = _fold_np(base_key, ids)
    idx = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = keys[:, None] + idx[None, :] * _NP_GOLDEN
    return (_mix_np(z) >> np.uint64(11)).astype(np.float64) * _TO_UNIT


# ── sequential convenience wrapper ──────────────────────────────────────────


class CounterRng:
    """Sequential draws from one counter-based stream.

    Used where a generator is consumed in construction order (circuit
    generation); Monte Carlo code uses the vectorized block functions instead.
    """

    def __init__(self, seed: int, *ids: int) -> None:
        self._key = stream_key(seed, *ids)
        self._counter = 0

    def _next_word(self) -> int:
        self._counter += 1
        return _mix((self._key + self._counter * _GOLDEN) & _MASK)

    def random(self) -> float:
        return (self._next_word() >> 11) * _TO_UNIT

    def randrange(self, n: int) -> int:
        """Integer in [0, n); multiply-shift map of one 64-bit word."""
        if n <= 0:
            raise ValueError(f"randrange bound must be positive, got {n}")
        return (self._next_word() * n) >> 64

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]
