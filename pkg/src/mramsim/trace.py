"""Memory access traces: text-format parsing and synthetic generation.

Traces carry only reads and writebacks; the fill writes caused by read
misses are synthesized inside the cache model, so a trace never has to
know cache state.

Text format, one event per line::

    <timestamp-ns> <R|W> <address>

where the address is hex with a mandatory ``0x`` prefix and lines starting
with ``#`` are comments. Timestamps must be non-decreasing.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

# Synthetic traces space events by a fixed stride; with a cooling time
# constant of a few hundred ns this keeps consecutive writes thermally
# coupled the way back-to-back cache traffic is.
EVENT_STRIDE_NS = 10

# Synthetic addresses are generated at this granularity. The cache truncates
# to its own block size, so this only fixes the meaning of working_set_blocks.
GENERATOR_BLOCK_BYTES = 64


class EventKind(Enum):
    READ = "R"
    WRITE_FILL = "F"  # cache-internal: allocation caused by a read miss
    WRITEBACK = "W"


class TraceError(ValueError):
    """Base class for trace stream rejections; line 0 means the whole file."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}" if line_no else message)
        self.line_no = line_no


class MalformedLine(TraceError):
    pass


class UnknownKind(TraceError):
    pass


class NonMonotoneTimestamp(TraceError):
    pass


class InvalidSpec(ValueError):
    """A synthetic trace spec violates its invariants."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True, slots=True)
class TraceEvent:
    timestamp: int
    kind: EventKind
    address: int
    origin: str = ""


@dataclass(frozen=True)
class SyntheticTraceSpec:
    """Knobs for a generated workload with controllable write locality.

    ``reuse_locality`` is the probability that the next address is drawn
    from a window of the most recent ``window_size`` addresses instead of
    uniformly from the working set.

    The optional stationary hot region (``hot_fraction`` of events hit one
    of ``hot_blocks`` blocks below the working set) models long-lived reuse
    that a recency window cannot: blocks that stay popular for the whole
    run, which is what separates recency-aware from insertion-order
    replacement. Defaults leave it off.
    """

    event_count: int
    read_fraction: float = 0.7
    working_set_blocks: int = 4096
    reuse_locality: float = 0.0
    window_size: int = 64
    seed: int = 0
    hot_fraction: float = 0.0
    hot_blocks: int = 0

    def validate(self) -> None:
        if self.event_count < 1:
            raise InvalidSpec("event_count", "must be >= 1")
        if not 0.0 <= self.read_fraction <= 1.0:
            raise InvalidSpec("read_fraction", "must be in [0, 1]")
        if self.working_set_blocks < 1:
            raise InvalidSpec("working_set_blocks", "must be >= 1")
        if not 0.0 <= self.reuse_locality <= 1.0:
            raise InvalidSpec("reuse_locality", "must be in [0, 1]")
        if self.window_size < 1:
            raise InvalidSpec("window_size", "must be >= 1")
        if not 0.0 <= self.hot_fraction <= 1.0:
            raise InvalidSpec("hot_fraction", "must be in [0, 1]")
        if self.hot_blocks < 0:
            raise InvalidSpec("hot_blocks", "must be >= 0")
        if self.hot_fraction > 0.0 and self.hot_blocks < 1:
            raise InvalidSpec("hot_blocks", "must be >= 1 when hot_fraction > 0")


_KIND_BY_LETTER = {"R": EventKind.READ, "W": EventKind.WRITEBACK}
_LETTER_BY_KIND = {v: k for k, v in _KIND_BY_LETTER.items()}


def parse_trace(source: Iterable[str], origin: str = "") -> list[TraceEvent]:
    """Parse a text trace, rejecting the whole stream on the first bad line.

    ``source`` is any iterable of lines (an open file works). Comment and
    blank lines are skipped but still counted for error positions.
    """
    events: list[TraceEvent] = []
    prev_ts = None
    for line_no, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise MalformedLine(line_no, f"expected 3 fields, got {len(parts)}")
        ts_text, kind_text, addr_text = parts
        try:
            ts = int(ts_text)
        except ValueError:
            raise MalformedLine(line_no, f"bad timestamp {ts_text!r}") from None
        if ts < 0:
            raise MalformedLine(line_no, f"negative timestamp {ts}")
        kind = _KIND_BY_LETTER.get(kind_text)
        if kind is None:
            raise UnknownKind(line_no, f"unknown event kind {kind_text!r}")
        if not addr_text.lower().startswith("0x"):
            raise MalformedLine(line_no, f"address must be 0x-prefixed hex, got {addr_text!r}")
        try:
            addr = int(addr_text, 16)
        except ValueError:
            raise MalformedLine(line_no, f"bad address {addr_text!r}") from None
        if prev_ts is not None and ts < prev_ts:
            raise NonMonotoneTimestamp(line_no, f"timestamp {ts} after {prev_ts}")
        prev_ts = ts
        events.append(TraceEvent(ts, kind, addr, origin or f"line:{line_no}"))
    return events


def serialize_trace(events: Iterable[TraceEvent]) -> str:
    """Render events in the canonical text form (LF endings, lowercase hex)."""
    lines = []
    for ev in events:
        letter = _LETTER_BY_KIND.get(ev.kind)
        if letter is None:
            raise ValueError(f"{ev.kind} events are cache-internal and have no text form")
        lines.append(f"{ev.timestamp} {letter} 0x{ev.address:x}")
    return "\n".join(lines) + ("\n" if lines else "")


def generate_trace(spec: SyntheticTraceSpec) -> list[TraceEvent]:
    """Generate a synthetic trace; a pure function of the spec."""
    spec.validate()
    rng = random.Random(spec.seed)
    window: deque[int] = deque(maxlen=spec.window_size)
    origin = f"synthetic:{spec.seed}"
    events: list[TraceEvent] = []
    for i in range(spec.event_count):
        kind = EventKind.READ if rng.random() < spec.read_fraction else EventKind.WRITEBACK
        if spec.hot_fraction > 0.0 and rng.random() < spec.hot_fraction:
            block = rng.randrange(spec.hot_blocks)
        elif window and rng.random() < spec.reuse_locality:
            block = window[rng.randrange(len(window))]
        else:
            block = spec.hot_blocks + rng.randrange(spec.working_set_blocks)
        # Hot blocks re-enter the window too, so recent popularity compounds
        # regardless of which stream produced the address.
        window.append(block)
        events.append(
            TraceEvent(i * EVENT_STRIDE_NS, kind, block * GENERATOR_BLOCK_BYTES, origin)
        )
    return events


def iter_trace_file(path: str) -> Iterator[TraceEvent]:
    """Convenience wrapper: parse a trace file eagerly, yield its events."""
    with open(path, "r", encoding="utf-8") as fh:
        yield from parse_trace(fh, origin=path)
