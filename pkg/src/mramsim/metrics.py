"""Per-run statistics and their CSV/JSON serialization.

One :class:`RunReport` per (policy, trace) pair. Emission is deterministic:
fixed column orders, floats at 9 significant digits, LF endings, sorted
JSON keys, so identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .cache import AccessOutcome
from .reliability import ErrorRateReport
from .trace import EventKind, TraceEvent


class EmptyRun(ValueError):
    pass


class MissingBaselineRun(ValueError):
    pass


class IoFailure(OSError):
    pass


@dataclass(frozen=True)
class TimingParams:
    """Analytic (not cycle-accurate) performance model inputs."""

    base_cpi: float = 1.0
    mem_refs_per_instr: float = 0.02
    hit_cycles: int = 12
    miss_penalty_cycles: int = 150

    def validate(self) -> None:
        if (
            self.base_cpi <= 0
            or self.mem_refs_per_instr <= 0
            or self.hit_cycles <= 0
            or self.miss_penalty_cycles <= 0
        ):
            raise ValueError("timing parameters must all be positive")


@dataclass
class RunReport:
    policy: str
    reads: int = 0
    writebacks: int = 0
    fills: int = 0
    hits: int = 0
    misses: int = 0
    dirty_evictions: int = 0
    write_distance_hist: list[int] = field(default_factory=list)
    distance_window_series: list[list[float]] = field(default_factory=list)
    victim_age_hist: list[int] = field(default_factory=list)
    temp_series: dict[int, list[float]] = field(default_factory=dict)
    error: ErrorRateReport | None = None
    cpi: float | None = None

    @property
    def accesses(self) -> int:
        return self.reads + self.writebacks

    @property
    def recorded_distances(self) -> int:
        return sum(self.write_distance_hist)


def miss_rate(report: RunReport) -> float:
    if report.accesses == 0:
        raise EmptyRun("no accesses recorded")
    return report.misses / report.accesses


def distance_distribution(report: RunReport) -> list[float]:
    total = report.recorded_distances
    if total == 0:
        raise EmptyRun("no write distances recorded")
    return [c / total for c in report.write_distance_hist]


def cpi(report: RunReport, timing: TimingParams) -> float:
    timing.validate()
    m = miss_rate(report)
    per_ref = (1.0 - m) * timing.hit_cycles + m * timing.miss_penalty_cycles
    return timing.base_cpi + timing.mem_refs_per_instr * per_ref


def normalized_cpi(report: RunReport, baseline: RunReport | None) -> float:
    if baseline is None or baseline.cpi is None:
        raise MissingBaselineRun("normalization requested but no lru run is available")
    if report.cpi is None:
        raise EmptyRun(f"{report.policy} run has no cpi")
    return report.cpi / baseline.cpi


class StatsCollector:
    """Accumulates one policy's statistics while the trace replays.

    Events inside the warmup prefix mutate cache and thermal state but are
    not recorded here; the runner passes ``counted=False`` for them. When
    the policy guarantees a minimum write distance the collector enforces
    it on every outcome, warmup included.
    """

    def __init__(
        self,
        policy_name: str,
        num_sets: int,
        ways: int,
        min_write_distance: int | None = None,
        distance_window: int = 1000,
        temp_samples_per_set: int = 200,
        keep_raw_temps: bool = False,
    ):
        self.policy_name = policy_name
        self.num_sets = num_sets
        self.ways = ways
        self.min_write_distance = min_write_distance
        self.distance_window = distance_window
        self.temp_samples_per_set = temp_samples_per_set
        self.keep_raw_temps = keep_raw_temps
        self._dist_hist = [0] * ways
        self._age_hist = [0] * ways
        self._window_buf: list[int] = []
        self._windows: list[list[float]] = []
        self._temps: dict[int, list[float]] = {}
        self.reads = 0
        self.writebacks = 0
        self.fills = 0
        self.hits = 0
        self.misses = 0
        self.dirty_evictions = 0

    def record(
        self,
        event: TraceEvent,
        outcome: AccessOutcome,
        counted: bool,
        written_elevation_k: float | None = None,
    ) -> None:
        d = outcome.write_distance
        if d is not None and self.min_write_distance is not None and d < self.min_write_distance:
            raise AssertionError(
                f"{self.policy_name}: write distance {d} below guaranteed "
                f"minimum {self.min_write_distance} in set {outcome.set_index}"
            )
        if not counted:
            return
        if event.kind is EventKind.READ:
            self.reads += 1
        else:
            self.writebacks += 1
        if outcome.hit:
            self.hits += 1
        else:
            self.misses += 1
        if outcome.way_written is not None and not outcome.hit and event.kind is EventKind.READ:
            self.fills += 1
        if outcome.evicted_dirty:
            self.dirty_evictions += 1
        if d is not None:
            self._dist_hist[d] += 1
            self._window_buf.append(d)
            if len(self._window_buf) >= self.distance_window:
                self._flush_window()
        if outcome.victim_age is not None:
            self._age_hist[outcome.victim_age] += 1
        if written_elevation_k is not None and outcome.way_written is not None:
            self._temps.setdefault(outcome.set_index, []).append(written_elevation_k)

    def _flush_window(self) -> None:
        n = len(self._window_buf)
        shares = [0] * self.ways
        for d in self._window_buf:
            shares[d] += 1
        self._windows.append([c / n for c in shares])
        self._window_buf = []

    def _downsample(self, samples: list[float]) -> list[float]:
        limit = self.temp_samples_per_set
        if self.keep_raw_temps or len(samples) <= limit:
            return samples
        stride = len(samples) / limit
        return [samples[int(i * stride)] for i in range(limit)]

    def build(self) -> RunReport:
        if self._window_buf:
            self._flush_window()
        return RunReport(
            policy=self.policy_name,
            reads=self.reads,
            writebacks=self.writebacks,
            fills=self.fills,
            hits=self.hits,
            misses=self.misses,
            dirty_evictions=self.dirty_evictions,
            write_distance_hist=list(self._dist_hist),
            distance_window_series=self._windows,
            victim_age_hist=list(self._age_hist),
            temp_series={s: self._downsample(v) for s, v in sorted(self._temps.items())},
        )


# serialization ----------------------------------------------------------------


def fmt(x) -> str:
    """Numbers as CSV text: ints verbatim, floats at 9 significant digits."""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".9g")


def distances_rows(report: RunReport) -> list[list[str]]:
    total = report.recorded_distances
    rows = []
    for d, count in enumerate(report.write_distance_hist):
        share = count / total if total else 0.0
        rows.append([report.policy, str(d), str(count), fmt(share)])
    return rows


def temps_rows(report: RunReport) -> list[list[str]]:
    rows = []
    for set_index in sorted(report.temp_series):
        for i, dt in enumerate(report.temp_series[set_index]):
            rows.append([report.policy, str(set_index), str(i), fmt(dt)])
    return rows


def errors_rows(report: RunReport) -> list[list[str]]:
    err = report.error
    if err is None:
        return []
    rows = []
    induced = err.induced
    for kind in err.TYPES:
        intr = err.intrinsic[kind]
        ratio = induced[kind] / intr if intr > 0 else 0.0
        rows.append(
            [report.policy, kind, fmt(err.intrinsic[kind]), fmt(err.total[kind]), fmt(induced[kind]), fmt(ratio)]
        )
    rows.append(
        [
            report.policy,
            "all",
            fmt(err.intrinsic_errors),
            fmt(err.total_errors),
            fmt(err.induced_errors),
            fmt(err.induced_over_intrinsic),
        ]
    )
    return rows


def summary_rows(reports: Sequence[RunReport]) -> list[list[str]]:
    baseline = next((r for r in reports if r.policy == "lru"), None)
    rows = []
    for r in reports:
        norm = ""
        if baseline is not None and baseline.cpi and r.cpi is not None:
            norm = fmt(r.cpi / baseline.cpi)
        rows.append(
            [
                r.policy,
                fmt(miss_rate(r)),
                fmt(r.cpi) if r.cpi is not None else "",
                norm,
            ]
        )
    return rows


CSV_SCHEMAS = {
    "distances.csv": (["policy", "distance", "count", "share"], distances_rows),
    "temps.csv": (["policy", "set", "sample_idx", "delta_t_k"], temps_rows),
    "errors.csv": (["policy", "type", "intrinsic", "total", "induced", "induced_over_intrinsic"], errors_rows),
}


def report_to_dict(report: RunReport) -> dict:
    return {
        "policy": report.policy,
        "events": {
            "reads": report.reads,
            "writebacks": report.writebacks,
            "fills": report.fills,
            "hits": report.hits,
            "misses": report.misses,
        },
        "dirty_evictions": report.dirty_evictions,
        "miss_rate": miss_rate(report) if report.accesses else None,
        "cpi": report.cpi,
        "write_distance_hist": list(report.write_distance_hist),
        "distance_window_series": [list(w) for w in report.distance_window_series],
        "victim_age_hist": list(report.victim_age_hist),
        "temp_series": {str(k): list(v) for k, v in report.temp_series.items()},
        "error": report.error.as_dict() if report.error is not None else None,
    }


def render_csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_run_outputs(
    reports: Mapping[str, RunReport], out_dir: Path | str, formats: Sequence[str] = ("csv", "json")
) -> list[Path]:
    """Emit all reports of one run into ``out_dir``; returns written paths."""
    out_dir = Path(out_dir)
    ordered = [reports[name] for name in reports]
    written: list[Path] = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if "csv" in formats:
            for filename, (header, row_fn) in CSV_SCHEMAS.items():
                rows: list[list[str]] = []
                for r in ordered:
                    rows.extend(row_fn(r))
                path = out_dir / filename
                path.write_text(render_csv(header, rows), encoding="utf-8")
                written.append(path)
            path = out_dir / "summary.csv"
            path.write_text(
                render_csv(["policy", "miss_rate", "cpi", "cpi_norm_lru"], summary_rows(ordered)),
                encoding="utf-8",
            )
            written.append(path)
        if "json" in formats:
            for r in ordered:
                path = out_dir / f"report_{r.policy}.json"
                path.write_text(
                    json.dumps(report_to_dict(r), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8",
                )
                written.append(path)
    except OSError as exc:
        raise IoFailure(f"cannot write run outputs under {out_dir}: {exc}") from exc
    return written
