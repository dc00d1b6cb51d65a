"""Deterministic stream derivation for reproducible (parallel) simulation.

Every random quantity in the package is drawn from a counter-based Philox
generator whose key is derived by hashing a root seed together with an
integer path (replication index, attempt number, ...).  Streams for
distinct paths are statistically independent, and results depend only on
(seed, path), never on thread or process layout.
"""
from __future__ import annotations

from numpy.random import Generator, Philox, SeedSequence

__all__ = ["stream"]


def stream(seed: int, *path: int) -> Generator:
    """Return the generator for the stream identified by (seed, *path).

    The same arguments always produce a generator in the same state, so a
    replication keyed by its index gives bitwise-identical draws no matter
    how replications are partitioned over workers.
    """
    return Generator(Philox(SeedSequence(entropy=(int(seed), *map(int, path)))))
