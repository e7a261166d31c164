"""Replay engine: one trace, one or more policies, full reports.

Every policy replays the identical event sequence so runs are paired. The
first ``warmup_fraction`` of events mutates cache and thermal state without
being recorded; statistics and the reliability window open at the first
counted event's timestamp.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cache import Cache, CacheGeometry
from .metrics import EmptyRun, RunReport, StatsCollector, TimingParams, cpi
from .policy import POLICY_NAMES, make_policy
from .reliability import DeviceParams, ErrorAccumulator
from .thermal import (
    DEFAULT_BASE_TEMP_K,
    DEFAULT_COOL_TAU_NS,
    DEFAULT_CUTOFF_K,
    DEFAULT_WRITE_HEAT_K,
    HeatKernel,
    ThermalField,
)
from .trace import EventKind, SyntheticTraceSpec, TraceEvent, generate_trace, iter_trace_file


@dataclass(frozen=True)
class ThermalConfig:
    enabled: bool = True
    base_temp_k: float = DEFAULT_BASE_TEMP_K
    write_heat_k: float = DEFAULT_WRITE_HEAT_K
    cool_tau_ns: float = DEFAULT_COOL_TAU_NS
    kernel_cutoff_k: float = DEFAULT_CUTOFF_K
    kernel_table: tuple[tuple[int, float], ...] | None = None

    def make_kernel(self) -> HeatKernel:
        table = dict(self.kernel_table) if self.kernel_table is not None else None
        return HeatKernel(self.write_heat_k, table)


@dataclass(frozen=True)
class RunConfig:
    geometry: CacheGeometry = CacheGeometry()
    policies: tuple[str, ...] = ("lru", "fifo", "talrw")
    trace_path: str | None = None
    synthetic: SyntheticTraceSpec | None = None
    thermal: ThermalConfig = ThermalConfig()
    device: DeviceParams = DeviceParams()
    timing: TimingParams = TimingParams()
    warmup_fraction: float = 0.5
    distance_window: int = 1000
    temp_samples_per_set: int = 200
    keep_raw_temps: bool = False
    out_dir: str = "runs/out"

    def validate(self) -> None:
        if not self.policies:
            raise ValueError("at least one policy is required")
        for p in self.policies:
            if p not in POLICY_NAMES:
                raise ValueError(f"unknown policy {p!r}")
        if len(set(self.policies)) != len(self.policies):
            raise ValueError("duplicate policy in run")
        if (self.trace_path is None) == (self.synthetic is None):
            raise ValueError("exactly one trace source (file or synthetic) is required")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ValueError("warmup_fraction must be in [0, 1)")
        if self.synthetic is not None:
            self.synthetic.validate()
        self.device.validate()
        self.timing.validate()


def load_events(config: RunConfig) -> list[TraceEvent]:
    if config.trace_path is not None:
        return list(iter_trace_file(config.trace_path))
    assert config.synthetic is not None
    return generate_trace(config.synthetic)


def replay(
    events: list[TraceEvent],
    policy_name: str,
    geometry: CacheGeometry,
    thermal: ThermalConfig = ThermalConfig(),
    device: DeviceParams = DeviceParams(),
    timing: TimingParams | None = TimingParams(),
    warmup_fraction: float = 0.0,
    distance_window: int = 1000,
    temp_samples_per_set: int = 200,
    keep_raw_temps: bool = False,
) -> RunReport:
    """Replay one trace under one policy; returns the finished report."""
    if not events:
        raise EmptyRun("trace contains no events")
    policy = make_policy(policy_name, geometry.ways)
    cache = Cache(geometry, policy)
    warm_idx = int(len(events) * warmup_fraction)
    stats_start = events[warm_idx].timestamp
    end_ts = events[-1].timestamp
    collector = StatsCollector(
        policy_name,
        geometry.num_sets,
        geometry.ways,
        min_write_distance=policy.min_write_distance,
        distance_window=distance_window,
        temp_samples_per_set=temp_samples_per_set,
        keep_raw_temps=keep_raw_temps,
    )
    field_ = None
    acc = None
    if thermal.enabled:
        field_ = ThermalField(
            geometry.num_sets,
            geometry.ways,
            kernel=thermal.make_kernel(),
            base_temp_k=thermal.base_temp_k,
            cool_tau_ns=thermal.cool_tau_ns,
            cutoff_k=thermal.kernel_cutoff_k,
        )
        acc = ErrorAccumulator(
            device,
            thermal.base_temp_k,
            geometry.total_blocks,
            trace_start_ns=events[0].timestamp,
            stats_start_ns=stats_start,
        )
    for i, event in enumerate(events):
        counted = i >= warm_idx
        outcome = cache.access(event)
        written_elevation = None
        if field_ is not None and acc is not None:
            now = event.timestamp
            si = outcome.set_index
            if outcome.way_written is not None:
                # The write pulse sees the block's pre-write temperature;
                # its own heat lands after.
                pre = field_.temperature_at(si, outcome.way_written, now)
                acc.on_physical_write(now, pre)
                field_.inject_write_heat(si, outcome.way_written, now, on_touch=acc.on_touch)
                written_elevation = field_.elevation_at(si, outcome.way_written, now)
            if event.kind is EventKind.READ:
                acc.on_read(now, field_.temperature_at(si, outcome.way_accessed, now))
        collector.record(event, outcome, counted, written_elevation)
    report = collector.build()
    if acc is not None:
        report.error = acc.finalize(end_ts)
    if timing is not None:
        report.cpi = cpi(report, timing)
    return report


def run(config: RunConfig) -> dict[str, RunReport]:
    """Replay the configured trace under every configured policy."""
    config.validate()
    events = load_events(config)
    reports: dict[str, RunReport] = {}
    for name in config.policies:
        reports[name] = replay(
            events,
            name,
            config.geometry,
            thermal=config.thermal,
            device=config.device,
            timing=config.timing,
            warmup_fraction=config.warmup_fraction,
            distance_window=config.distance_window,
            temp_samples_per_set=config.temp_samples_per_set,
            keep_raw_temps=config.keep_raw_temps,
        )
    return reports
