"""Counter-based random streams keyed by (seed, trial index).

The generator is Philox4x64-10 (numpy's ``Philox`` bit generator) with the
seed as its key. Trial ``i`` owns counter block ``i``, which yields four
64-bit words; a trial's randomness therefore never depends on which worker
computed it or on how many trials came before it in a chunk.

Word layout per trial:
    0  Alice's setting choice
    1  Bob's setting choice
    2  outcome cell (quantum) or instruction set (raffle)
    3  reserved
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, TypeVar

import numpy as np

WORDS_PER_TRIAL = 4
MAX_SEED = (1 << 64) - 1
_TO_UNIT = 2.0 ** -53

T = TypeVar("T")


@dataclass(frozen=True)
class RngStream:
    seed: int

    def __post_init__(self) -> None:
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= int(self.seed) <= MAX_SEED:
            raise ValueError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")

    def words(self, start: int, n: int) -> np.ndarray:
        """Raw uint64 words for trials ``start .. start + n - 1``, shape ``(n, 4)``."""
        if start < 0 or n < 0:
            raise ValueError("start and n must be nonnegative")
        bitgen = np.random.Philox(key=int(self.seed), counter=int(start))
        return bitgen.random_raw(WORDS_PER_TRIAL * n).reshape(n, WORDS_PER_TRIAL)

    def uniforms(self, start: int, n: int) -> np.ndarray:
        """Doubles in ``[0, 1)`` built from the top 53 bits of each word."""
        return (self.words(start, n) >> np.uint64(11)).astype(np.float64) * _TO_UNIT


def uniform_setting(u: np.ndarray) -> np.ndarray:
    """Map uniforms to device settings 1, 2, 3 with equal probability."""
    return (np.floor(u * 3.0).astype(np.int8) + 1).clip(1, 3)


def inverse_cdf(u: np.ndarray, cdf: np.ndarray) -> np.ndarray:
    """Index of the first cell whose cumulative probability exceeds ``u``.

    ``cdf`` has shape ``(..., k)`` broadcastable against ``u[..., None]``; its
    last column is treated as exactly 1.
    """
    cdf = np.array(cdf, dtype=float, copy=True)
    cdf[..., -1] = 1.0
    k = cdf.shape[-1]
    return np.minimum((u[..., None] >= cdf).sum(axis=-1), k - 1).astype(np.int8)


def chunk_bounds(n: int, chunk_size: int) -> list[tuple[int, int]]:
    return [(s, min(s + chunk_size, n)) for s in range(0, n, chunk_size)]


def map_chunks(fn: Callable[[int, int], T], n: int, workers: int = 1,
               chunk_size: int = 1 << 18) -> list[T]:
    """Run ``fn(start, stop)`` over contiguous chunks, returning results in index order."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    bounds = chunk_bounds(n, chunk_size)
    if workers == 1 or len(bounds) <= 1:
        return [fn(s, e) for s, e in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))
