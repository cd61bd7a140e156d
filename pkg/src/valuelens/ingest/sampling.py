"""Seeded reservoir sampling for bounded-memory downsampling."""

from __future__ import annotations

import hashlib
import random
from typing import List, Sequence, TypeVar

T = TypeVar("T")

DEFAULT_CAP = 1000


def substream_seed(root_seed: int, *names: str) -> int:
    """Derive an independent, stable sub-seed from a root seed and a name
    path.  Adding a new named stream never perturbs existing ones."""
    key = "|".join([str(root_seed), *names]).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")


class ReservoirSampler:
    """Uniform sample of at most `cap` items from a stream (algorithm R).

    Results are reported in arrival order.  With a fixed seed the sample is
    a pure function of the input sequence.
    """

    def __init__(self, cap: int, seed: int):
        if cap < 1:
            raise ValueError("cap must be >= 1")
        self._cap = cap
        self._rng = random.Random(seed)
        self._seen = 0
        self._indices: List[int] = []
        self._items: List[T] = []

    @property
    def seen(self) -> int:
        return self._seen

    def add(self, item: T) -> None:
        i = self._seen
        self._seen += 1
        if len(self._items) < self._cap:
            self._indices.append(i)
            self._items.append(item)
            return
        j = self._rng.randrange(i + 1)
        if j < self._cap:
            self._indices[j] = i
            self._items[j] = item

    def result(self) -> List[T]:
        """Sampled items restored to arrival order."""
        order = sorted(range(len(self._items)), key=self._indices.__getitem__)
        return [self._items[k] for k in order]


def downsample(items: Sequence[T], cap: int = DEFAULT_CAP, seed: int = 0) -> List[T]:
    """Return `items` unchanged when at or under `cap`, else a seeded uniform
    subset of size `cap` in original order."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    items = list(items)
    if len(items) <= cap:
        return items
    sampler: ReservoirSampler = ReservoirSampler(cap, seed)
    for item in items:
        sampler.add(item)
    return sampler.result()
