"""TOML run configuration: sections [cache], [trace], [thermal], [device],
[timing], [run]. Unknown sections or keys are rejected so typos cannot
silently fall back to defaults. CLI flags override file values.
"""

from __future__ import annotations

import csv
import dataclasses
import sys
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .cache import CacheGeometry
from .metrics import TimingParams
from .policy import POLICY_NAMES
from .reliability import DeviceParams
from .runner import RunConfig, ThermalConfig
from .trace import SyntheticTraceSpec


class ConfigError(ValueError):
    pass


_CACHE_KEYS = {"sets", "ways", "block_bytes", "policy"}
_TRACE_KEYS = {
    "file",
    "events",
    "read_fraction",
    "working_set_blocks",
    "reuse_locality",
    "window_size",
    "seed",
    "hot_fraction",
    "hot_blocks",
}
_THERMAL_KEYS = {
    "enabled",
    "base_temp_k",
    "write_heat_k",
    "cool_tau_ns",
    "kernel_cutoff_k",
    "kernel_table",
}
_DEVICE_KEYS = {f.name for f in dataclasses.fields(DeviceParams)}
_TIMING_KEYS = {f.name for f in dataclasses.fields(TimingParams)}
_RUN_KEYS = {"out_dir", "warmup_fraction", "distance_window", "temp_samples_per_set", "keep_raw_temps"}

_SECTIONS = {
    "cache": _CACHE_KEYS,
    "trace": _TRACE_KEYS,
    "thermal": _THERMAL_KEYS,
    "device": _DEVICE_KEYS,
    "timing": _TIMING_KEYS,
    "run": _RUN_KEYS,
}


def _check_keys(section: str, table: Mapping[str, Any]) -> None:
    allowed = _SECTIONS[section]
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")


def load_kernel_table(path: str | Path) -> tuple[tuple[int, float], ...]:
    """Read a ``dist,increment_k`` CSV into kernel way-table entries."""
    entries = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["dist", "increment_k"]:
                raise ConfigError(f"kernel table {path} must start with header 'dist,increment_k'")
            for row in reader:
                if not row:
                    continue
                try:
                    entries.append((int(row[0]), float(row[1])))
                except (ValueError, IndexError):
                    raise ConfigError(f"kernel table {path}: bad row {row!r}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read kernel table {path}: {exc}") from exc
    if not entries:
        raise ConfigError(f"kernel table {path} has no entries")
    return tuple(entries)


def _parse_toml(path: str | Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config {path} is not valid TOML: {exc}") from exc


def _build_dataclass(cls, table: Mapping[str, Any], section: str):
    try:
        return cls(**table)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad [{section}] values: {exc}") from exc


def load_device_params(path: str | Path) -> DeviceParams:
    """Device parameters from a config file's [device] section only."""
    raw = _parse_toml(path)
    table = raw.get("device", {})
    unknown = set(table) - _DEVICE_KEYS
    if unknown:
        raise ConfigError(f"unknown key(s) in [device]: {', '.join(sorted(unknown))}")
    device = _build_dataclass(DeviceParams, table, "device")
    try:
        device.validate()
    except ValueError as exc:
        raise ConfigError(f"bad [device] values: {exc}") from exc
    return device


def load_run_config(path: str | Path | None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """Build a validated RunConfig from an optional file and CLI overrides.

    Recognized override keys: policies, trace_path, trace_stdin, out_dir,
    seed, warmup_fraction, sets, ways, block_bytes.
    """
    raw = _parse_toml(path) if path is not None else {}
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a table")
    unknown = set(raw) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config section(s): {', '.join(sorted(unknown))}")
    for name, table in raw.items():
        if not isinstance(table, dict):
            raise ConfigError(f"[{name}] must be a section")
        _check_keys(name, table)
    ov = dict(overrides or {})

    cache_tbl = dict(raw.get("cache", {}))
    policy_val = cache_tbl.pop("policy", list(POLICY_NAMES))
    if isinstance(policy_val, str):
        policy_val = [policy_val]
    if ov.get("policies"):
        policy_val = list(ov["policies"])
    geometry = _build_dataclass(
        CacheGeometry,
        {
            "num_sets": int(ov.get("sets", cache_tbl.get("sets", 1024))),
            "ways": int(ov.get("ways", cache_tbl.get("ways", 8))),
            "block_bytes": int(ov.get("block_bytes", cache_tbl.get("block_bytes", 64))),
        },
        "cache",
    )

    trace_tbl = dict(raw.get("trace", {}))
    trace_file = trace_tbl.pop("file", None)
    if ov.get("trace_path") is not None:
        trace_file = ov["trace_path"]
        trace_tbl = {}
    if ov.get("seed") is not None:
        trace_tbl["seed"] = int(ov["seed"])
    synthetic = None
    if trace_file is None:
        if "events" not in trace_tbl:
            raise ConfigError("[trace] needs either file= or a synthetic spec with events=")
        synthetic = _build_dataclass(
            SyntheticTraceSpec,
            {
                "event_count": int(trace_tbl.pop("events")),
                **{k: trace_tbl[k] for k in trace_tbl},
            },
            "trace",
        )
    elif trace_tbl and set(trace_tbl) - {"seed"}:
        raise ConfigError("[trace] cannot combine file= with synthetic spec keys")

    thermal_tbl = dict(raw.get("thermal", {}))
    table_path = thermal_tbl.pop("kernel_table", None)
    kernel_table = load_kernel_table(table_path) if table_path is not None else None
    thermal = _build_dataclass(
        ThermalConfig, {**thermal_tbl, "kernel_table": kernel_table}, "thermal"
    )

    device = _build_dataclass(DeviceParams, raw.get("device", {}), "device")
    timing = _build_dataclass(TimingParams, raw.get("timing", {}), "timing")

    run_tbl = dict(raw.get("run", {}))
    out_dir = ov.get("out_dir") or run_tbl.get("out_dir", "runs/out")
    warmup = ov.get("warmup_fraction")
    if warmup is None:
        warmup = run_tbl.get("warmup_fraction", 0.5)

    config = RunConfig(
        geometry=geometry,
        policies=tuple(policy_val),
        trace_path=None if trace_file is None else str(trace_file),
        synthetic=synthetic,
        thermal=thermal,
        device=device,
        timing=timing,
        warmup_fraction=float(warmup),
        distance_window=int(run_tbl.get("distance_window", 1000)),
        temp_samples_per_set=int(run_tbl.get("temp_samples_per_set", 200)),
        keep_raw_temps=bool(run_tbl.get("keep_raw_temps", False)),
        out_dir=str(out_dir),
    )
    try:
        config.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return config
