"""Set-associative write-back cache model with pluggable replacement.

The cache reports, for every physical write, which way was written and how
far (in way indices) it landed from the set's previous write. Recency
ranks (``WayState.age``, 0 = most recent read/write) are maintained for
every policy; LRU selects victims with them, the others carry them purely
so evictions can be binned by how old the discarded block was.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from .trace import EventKind, TraceEvent

if TYPE_CHECKING:
    from .policy import ReplacementPolicy


class OutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class CacheGeometry:
    num_sets: int = 1024
    ways: int = 8
    block_bytes: int = 64

    def __post_init__(self):
        if self.num_sets < 1 or self.num_sets & (self.num_sets - 1):
            raise ValueError(f"num_sets must be a power of two >= 1, got {self.num_sets}")
        if self.ways < 2:
            raise ValueError(f"ways must be >= 2, got {self.ways}")
        if self.block_bytes < 8 or self.block_bytes & (self.block_bytes - 1):
            raise ValueError(f"block_bytes must be a power of two >= 8, got {self.block_bytes}")

    @property
    def offset_bits(self) -> int:
        return self.block_bytes.bit_length() - 1

    @property
    def set_bits(self) -> int:
        return self.num_sets.bit_length() - 1

    @property
    def total_blocks(self) -> int:
        return self.num_sets * self.ways


def decompose(address: int, geometry: CacheGeometry) -> tuple[int, int, int]:
    """Split an address into (tag, set_index, block_offset)."""
    offset = address & (geometry.block_bytes - 1)
    block = address >> geometry.offset_bits
    set_index = block & (geometry.num_sets - 1)
    tag = block >> geometry.set_bits
    return tag, set_index, offset


def reassemble(tag: int, set_index: int, offset: int, geometry: CacheGeometry) -> int:
    return ((tag << geometry.set_bits | set_index) << geometry.offset_bits) | offset


def write_distance(prev_way: int, cur_way: int, ways: int) -> int:
    """Linear physical distance between two way indices of one set."""
    if not 0 <= prev_way < ways:
        raise OutOfRange(f"prev_way {prev_way} outside [0, {ways})")
    if not 0 <= cur_way < ways:
        raise OutOfRange(f"cur_way {cur_way} outside [0, {ways})")
    return abs(cur_way - prev_way)


@dataclass(slots=True)
class WayState:
    valid: bool = False
    dirty: bool = False
    tag: int = 0
    age: int = 0
    last_write_time: int = 0


@dataclass(slots=True)
class SetState:
    ways: list[WayState]
    perm_index: int = 0  # position in the write permutation (talrw)
    fill_pointer: int = 0  # round-robin fill cursor (fifo)
    last_written_way: int | None = None


@dataclass(slots=True)
class AccessOutcome:
    """What one trace event did to the cache.

    ``way_written`` is present iff the event caused a physical write;
    ``write_distance`` additionally requires that the set had been written
    before. ``victim_age`` is the recency rank of the block discarded by a
    miss allocation (ways-1 = oldest; never-used ways report as oldest).
    """

    hit: bool
    set_index: int
    way_accessed: int
    way_written: int | None = None
    victim_age: int | None = None
    write_distance: int | None = None
    evicted_dirty: bool = False


def victim_age_rank(set_state: SetState, way: int, ways: int) -> int:
    """Recency rank of a way about to be discarded (ways-1 = oldest)."""
    ws = set_state.ways[way]
    return ws.age if ws.valid else ways - 1


class Cache:
    """One simulation instance; single-threaded, deterministic per trace."""

    def __init__(self, geometry: CacheGeometry, policy: "ReplacementPolicy"):
        self.geometry = geometry
        self.policy = policy
        self.sets = [
            SetState([WayState() for _ in range(geometry.ways)]) for _ in range(geometry.num_sets)
        ]
        self.reads = 0
        self.writebacks = 0
        self.read_hits = 0
        self.read_misses = 0
        self.wb_hits = 0
        self.wb_misses = 0
        self.dirty_evictions = 0

    # recency-rank bookkeeping ------------------------------------------------

    def _touch(self, s: SetState, way: int) -> None:
        ws = s.ways[way]
        old = ws.age
        for other in s.ways:
            if other.valid and other.age < old:
                other.age += 1
        ws.age = 0

    def _unrank(self, s: SetState, way: int) -> None:
        ws = s.ways[way]
        old = ws.age
        ws.valid = False
        ws.dirty = False
        for other in s.ways:
            if other.valid and other.age > old:
                other.age -= 1

    def _install(self, s: SetState, way: int, tag: int, dirty: bool, now: int) -> None:
        ws = s.ways[way]
        if ws.valid:
            self._unrank(s, way)
        for other in s.ways:
            if other.valid:
                other.age += 1
        ws.valid = True
        ws.dirty = dirty
        ws.tag = tag
        ws.age = 0
        ws.last_write_time = now

    # access paths ------------------------------------------------------------

    def _find(self, s: SetState, tag: int) -> int | None:
        for i, ws in enumerate(s.ways):
            if ws.valid and ws.tag == tag:
                return i
        return None

    def _note_write(self, s: SetState, way: int) -> int | None:
        prev = s.last_written_way
        s.last_written_way = way
        if prev is None:
            return None
        return write_distance(prev, way, self.geometry.ways)

    def access(self, event: TraceEvent) -> AccessOutcome:
        tag, set_index, _ = decompose(event.address, self.geometry)
        s = self.sets[set_index]
        found = self._find(s, tag)
        if event.kind is EventKind.READ:
            return self._access_read(event, s, set_index, tag, found)
        if event.kind is EventKind.WRITEBACK:
            return self._access_writeback(event, s, set_index, tag, found)
        raise ValueError(f"traces cannot carry {event.kind} events")

    def _access_read(
        self, event: TraceEvent, s: SetState, set_index: int, tag: int, found: int | None
    ) -> AccessOutcome:
        self.reads += 1
        if found is not None:
            self.read_hits += 1
            self.policy.on_read_hit(s, found)
            self._touch(s, found)
            return AccessOutcome(hit=True, set_index=set_index, way_accessed=found)
        self.read_misses += 1
        victim = self.policy.select_victim(s)
        rank = victim_age_rank(s, victim, self.geometry.ways)
        evicted_dirty = s.ways[victim].valid and s.ways[victim].dirty
        if evicted_dirty:
            self.dirty_evictions += 1
        self._install(s, victim, tag, dirty=False, now=event.timestamp)
        self.policy.on_fill(s, victim)
        dist = self._note_write(s, victim)
        return AccessOutcome(
            hit=False,
            set_index=set_index,
            way_accessed=victim,
            way_written=victim,
            victim_age=rank,
            write_distance=dist,
            evicted_dirty=evicted_dirty,
        )

    def _access_writeback(
        self, event: TraceEvent, s: SetState, set_index: int, tag: int, found: int | None
    ) -> AccessOutcome:
        self.writebacks += 1
        if found is None:
            # Write-allocate: the policy picks where the incoming block lands.
            self.wb_misses += 1
            victim = self.policy.select_victim(s)
            rank = victim_age_rank(s, victim, self.geometry.ways)
            evicted_dirty = s.ways[victim].valid and s.ways[victim].dirty
            if evicted_dirty:
                self.dirty_evictions += 1
            self._install(s, victim, tag, dirty=True, now=event.timestamp)
            self.policy.on_fill(s, victim)
            dist = self._note_write(s, victim)
            return AccessOutcome(
                hit=False,
                set_index=set_index,
                way_accessed=victim,
                way_written=victim,
                victim_age=rank,
                write_distance=dist,
                evicted_dirty=evicted_dirty,
            )
        self.wb_hits += 1
        write_way, invalidated = self.policy.writeback_target(s, found)
        evicted_dirty = False
        if invalidated is not None:
            # The stale copy is dropped from its way; its dirty data counts
            # as one more writeback worth of downstream traffic.
            if s.ways[invalidated].dirty:
                self.dirty_evictions += 1
            self._unrank(s, invalidated)
        if write_way != found and s.ways[write_way].valid:
            evicted_dirty = s.ways[write_way].dirty
            if evicted_dirty:
                self.dirty_evictions += 1
        self._install(s, write_way, tag, dirty=True, now=event.timestamp)
        self.policy.on_writeback_write(s, write_way)
        dist = self._note_write(s, write_way)
        return AccessOutcome(
            hit=True,
            set_index=set_index,
            way_accessed=write_way,
            way_written=write_way,
            write_distance=dist,
            evicted_dirty=evicted_dirty,
        )

    # aggregate views ----------------------------------------------------------

    @property
    def hits(self) -> int:
        return self.read_hits + self.wb_hits

    @property
    def misses(self) -> int:
        return self.read_misses + self.wb_misses

    @property
    def fills(self) -> int:
        return self.read_misses

    @property
    def physical_writes(self) -> int:
        return self.read_misses + self.writebacks
