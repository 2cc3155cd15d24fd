"""Deterministic random-stream derivation.

Every source of randomness in the package is a counter-based Philox
generator derived from a master seed plus an integer path (for example
``(run_index, walker_id)``).  Streams with distinct paths never overlap,
which keeps parallel Monte Carlo runs reproducible regardless of worker
count or scheduling order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RngStream"]


@dataclass(frozen=True)
class RngStream:
    """A master seed plus a derivation path identifying one stream."""

    seed: int
    path: tuple[int, ...] = ()

    def child(self, *indices: int) -> "RngStream":
        """Derive a sub-stream by extending the path."""
        return RngStream(self.seed, self.path + tuple(int(i) for i in indices))

    def generator(self) -> np.random.Generator:
        """Instantiate the numpy generator for this stream."""
        seq = np.random.SeedSequence(self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(seq))


def as_stream(seed_or_stream: "int | RngStream") -> RngStream:
    """Accept either a plain integer seed or an existing stream."""
    if isinstance(seed_or_stream, RngStream):
        return seed_or_stream
    return RngStream(int(seed_or_stream))
