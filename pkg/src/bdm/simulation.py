"""Monte Carlo trajectories of the battery discharge chain.

Runs are processed in fixed blocks of BLOCK_SIZE trajectories. Block j draws
from PCG64 seeded with the j-th child of ``SeedSequence(seed)``, so results
do not depend on how many worker threads process the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

BLOCK_SIZE = 4096
GENERATOR = "PCG64"
_CHUNK_COLUMNS = 256


@dataclass
class SimulationStats:
    q: int
    M: int
    n: int
    runs: int
    seed: int
    final_d: np.ndarray
    max_ratio: np.ndarray  # per run, max over 2 <= k <= n of d(k)/log k
    min_ratio: np.ndarray
    generator: str = GENERATOR
    block_size: int = BLOCK_SIZE
    histogram: dict[int, int] = field(init=False)

    def __post_init__(self):
        vals, counts = np.unique(self.final_d, return_counts=True)
        self.histogram = {int(v): int(c) for v, c in zip(vals, counts)}

    @property
    def final_slot(self) -> tuple[int, int]:
        return self.n % (self.M + 1), self.M + 1

    @property
    def log_law_constant(self) -> float:
        """1/((M+1) log q), the almost-sure limit of |d(k)|/log k."""
        return 1.0 / ((self.M + 1) * math.log(self.q))


def _simulate_block(q: int, M: int, n: int, size: int, seed_seq: np.random.SeedSequence):
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    b = np.zeros((M, size), dtype=np.int64)
    d = np.zeros(size, dtype=np.int64)
    hi = np.full(size, -np.inf)
    lo = np.full(size, np.inf)
    T = 0
    k = 0
    while k < n:
        cols = min(_CHUNK_COLUMNS, n - k)
        # draw 0 means the zero-discrepancy symbol: inhibition, probability 1/q
        draws = rng.integers(0, q, size=(cols, M, size), dtype=np.int16)
        for c in range(cols):
            # ministep M+1 of the previous column, then the M batteries of this one
            if T < M:
                d -= 1
                T += 1
            else:
                b += 1
                T = 0
            for m in range(M):
                bm = b[m]
                swap = (bm > d) & (draws[c, m] != 0)
                old = d.copy()
                d = np.where(swap, bm, d)
                b[m] = np.where(swap, old, bm)
            k += 1
            if k >= 2:
                r = d / math.log(k)
                np.maximum(hi, r, out=hi)
                np.minimum(lo, r, out=lo)
    return d, hi, lo


def simulate(q: int, M: int, n: int, runs: int, seed: int, threads: int = 1) -> SimulationStats:
    """Run independent trajectories for n columns and collect drain statistics.

    Column k ends after the battery ministeps of column k; the closing d-/b+
    ministep is applied at the start of the next column, which puts the final
    state at slot (n mod (M+1), M+1).
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    if q < 2 or M < 1 or n < 0:
        raise ValueError("need q >= 2, M >= 1, n >= 0")
    nblocks = -(-runs // BLOCK_SIZE)
    children = np.random.SeedSequence(seed).spawn(nblocks)
    sizes = [min(BLOCK_SIZE, runs - j * BLOCK_SIZE) for j in range(nblocks)]
    jobs = list(zip(sizes, children))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda job: _simulate_block(q, M, n, *job), jobs))
    else:
        parts = [_simulate_block(q, M, n, *job) for job in jobs]
    final_d = np.concatenate([p[0] for p in parts])
    hi = np.concatenate([p[1] for p in parts])
    lo = np.concatenate([p[2] for p in parts])
    return SimulationStats(q, M, n, runs, seed, final_d, hi, lo)
