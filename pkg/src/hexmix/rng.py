"""Deterministic event streams for the continuous-time dynamics.

One stream is a Poisson process of rate ``rate`` on ``[0, T)``; each event
carries a uniform site index in ``[0, nsites)`` and a uniform coin in
``(0, 1)``.  Streams are pure functions of ``(seed, epoch)``: the generator
is a counter-based Philox keyed per (seed, epoch, chunk), so every replica
coupled to the same stream sees bit-identical events and any chunk can be
regenerated without replaying the whole history.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_CHUNK = 1 << 20


def _chunk_rng(seed: int, epoch: int, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(epoch, chunk))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class EventStream:
    """Events of one epoch: (absolute time, site index, uniform coin)."""

    seed: int
    epoch: int
    rate: float
    nsites: int
    T: float

    @property
    def chunk_size(self) -> int:
        # size chunks to the expected event count so short streams stay cheap
        expected = self.rate * self.T
        return int(min(DEFAULT_CHUNK, max(64.0, 1.25 * expected + 64.0)))

    def chunks(self):
        """Yield (times, sites, coins) with strictly increasing times <= T.

        Draw order per chunk is fixed (gaps, sites, coins) so that every
        consumer of the stream sees the same events.
        """
        if self.T <= 0 or self.rate <= 0:
            return
        t0 = 0.0
        k = 0
        while True:
            rng = _chunk_rng(self.seed, self.epoch, k)
            gaps = rng.exponential(scale=1.0 / self.rate, size=self.chunk_size)
            sites = rng.integers(0, self.nsites, size=self.chunk_size)
            coins = rng.random(self.chunk_size)
            times = t0 + np.cumsum(gaps)
            if times[-1] >= self.T:
                keep = np.searchsorted(times, self.T, side="left")
                yield times[:keep], sites[:keep], coins[:keep]
                return
            yield times, sites, coins
            t0 = float(times[-1])
            k += 1

    def count(self) -> int:
        return sum(len(t) for t, _, _ in self.chunks())


def replica_seed(master_seed: int, replica_index: int) -> int:
    """Shared-nothing per-replica seed derivation."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(0x5EED, replica_index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
