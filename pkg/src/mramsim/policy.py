"""Replacement policies: LRU, FIFO, and thermal-aware least-recently-written.

All three share one contract: pick a victim way for a miss allocation,
update their own metadata on hits and fills, and decide where a writeback
hit actually writes. Only the thermal-aware policy ever redirects a
writeback away from the found block.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from typing import Sequence

from .cache import SetState
from .permutation import DEFAULT_ORDER_8WAY, WritePermutation, select_default


class ReplacementPolicy(ABC):
    name: str = "?"
    #: floor on |way delta| between consecutive writes, when guaranteed
    min_write_distance: int | None = None

    @abstractmethod
    def select_victim(self, s: SetState) -> int:
        """Way to allocate into on a read or writeback miss."""

    def on_read_hit(self, s: SetState, way: int) -> None:
        pass

    def on_fill(self, s: SetState, way: int) -> None:
        pass

    def writeback_target(self, s: SetState, found: int) -> tuple[int, int | None]:
        """(way to write, way to invalidate or None) for a writeback hit."""
        return found, None

    def on_writeback_write(self, s: SetState, way: int) -> None:
        pass

    @abstractmethod
    def metadata_bits_per_set(self, ways: int) -> int:
        """Bits of policy-owned state per cache set."""


class LruPolicy(ReplacementPolicy):
    """Evict the least recently read or written block.

    Recency ranks live in ``WayState.age`` and are maintained by the cache
    for every policy; LRU is the one that selects with them, which costs a
    rank field per block.
    """

    name = "lru"

    def select_victim(self, s: SetState) -> int:
        oldest = 0
        oldest_age = -1
        for i, ws in enumerate(s.ways):
            if not ws.valid:
                return i
            if ws.age > oldest_age:
                oldest = i
                oldest_age = ws.age
        return oldest

    def metadata_bits_per_set(self, ways: int) -> int:
        return ways * math.ceil(math.log2(ways))


class FifoPolicy(ReplacementPolicy):
    """Round-robin fill order; hits change nothing."""

    name = "fifo"

    def select_victim(self, s: SetState) -> int:
        return s.fill_pointer

    def on_fill(self, s: SetState, way: int) -> None:
        s.fill_pointer = (s.fill_pointer + 1) % len(s.ways)

    def metadata_bits_per_set(self, ways: int) -> int:
        return math.ceil(math.log2(ways))


class ThermalAwareLRW(ReplacementPolicy):
    """Cycle writes through a distance-constrained way permutation.

    Each set stores one index into the permutation; the indicated way is the
    least recently written one. Every window of ``ways`` consecutive writes
    touches each way exactly once, and consecutive writes land at least
    ``min_write_distance`` ways apart, writeback hits included: a hit away
    from the pointer is invalidated and the data is written at the pointer
    way instead of in place.
    """

    name = "talrw"

    def __init__(self, permutation: WritePermutation | Sequence[int]):
        if not isinstance(permutation, WritePermutation):
            permutation = WritePermutation.from_order(permutation)
        self.permutation = permutation
        self.min_write_distance = permutation.min_distance

    @classmethod
    def default(cls, ways: int) -> "ThermalAwareLRW":
        if ways == 8:
            return cls(WritePermutation.from_order(DEFAULT_ORDER_8WAY))
        return cls(select_default(ways))

    def pointer_way(self, s: SetState) -> int:
        return self.permutation.order[s.perm_index]

    def _advance(self, s: SetState) -> None:
        s.perm_index = (s.perm_index + 1) % self.permutation.ways

    def select_victim(self, s: SetState) -> int:
        # Invalid ways elsewhere do not short-circuit the pointer; the
        # distance guarantee must hold from the very first fills.
        return self.pointer_way(s)

    def on_fill(self, s: SetState, way: int) -> None:
        self._advance(s)

    def writeback_target(self, s: SetState, found: int) -> tuple[int, int | None]:
        target = self.pointer_way(s)
        if found == target:
            return target, None
        return target, found

    def on_writeback_write(self, s: SetState, way: int) -> None:
        self._advance(s)

    def metadata_bits_per_set(self, ways: int) -> int:
        return math.ceil(math.log2(ways))


POLICY_NAMES = ("lru", "fifo", "talrw")


def make_policy(name: str, ways: int) -> ReplacementPolicy:
    if name == "lru":
        return LruPolicy()
    if name == "fifo":
        return FifoPolicy()
    if name == "talrw":
        return ThermalAwareLRW.default(ways)
    raise ValueError(f"unknown policy {name!r} (expected one of {', '.join(POLICY_NAMES)})")
