"""Shared helpers: deterministic random traces and the acceptance summary."""

from __future__ import annotations

import random
import re

import pytest

from mramsim.cache import CacheGeometry
from mramsim.trace import EVENT_STRIDE_NS, EventKind, SyntheticTraceSpec, TraceEvent


def random_events(
    n: int,
    blocks: int,
    seed: int,
    read_fraction: float = 0.6,
    block_bytes: int = 64,
) -> list[TraceEvent]:
    """Uniform random trace, independent of the package generator."""
    rng = random.Random(seed)
    out = []
    for i in range(n):
        kind = EventKind.READ if rng.random() < read_fraction else EventKind.WRITEBACK
        out.append(TraceEvent(i * EVENT_STRIDE_NS, kind, rng.randrange(blocks) * block_bytes, "t"))
    return out


def suite_spec(seed: int, event_count: int = 14000) -> SyntheticTraceSpec:
    """One member of the high-locality suite used by the directional checks.

    A stationary hot region plus a short reuse window over a scan stream:
    recency-aware replacement retains the hot blocks, insertion-order
    replacement cycles them out, and the short window produces the bursts
    of same-block writebacks that concentrate heat under LRU.
    """
    return SyntheticTraceSpec(
        event_count=event_count,
        read_fraction=0.45,
        working_set_blocks=8192,
        reuse_locality=0.50,
        window_size=8,
        seed=seed,
        hot_fraction=0.55,
        hot_blocks=32,
    )


SUITE_GEOMETRY = CacheGeometry(num_sets=32, ways=8, block_bytes=64)


@pytest.fixture
def small_geometry() -> CacheGeometry:
    return CacheGeometry(num_sets=16, ways=8, block_bytes=64)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    results: dict[int, bool] = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = re.search(r"test_criterion_(\d+)", getattr(rep, "nodeid", ""))
            if m:
                n = int(m.group(1))
                results[n] = results.get(n, True) and outcome == "passed"
    if results:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for n in sorted(results):
            terminalreporter.write_line(
                f"  criterion {n:02d}: {'PASS' if results[n] else 'FAIL'}"
            )
