"""Command-line entry point.

Subcommands: ``simulate`` (full run over one trace, all configured
policies), ``perm search`` (distance-constrained write orders),
``reliability curve`` (temperature sweeps of the failure models),
``trace gen`` (synthetic trace to file or stdout), and ``compare``
(tabulate summaries from several run directories).

Exit codes: 0 success, 2 configuration error (including argument misuse),
3 trace error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, load_device_params, load_run_config
from .metrics import EmptyRun, fmt, render_csv, summary_rows, write_run_outputs
from .permutation import InvalidArgs, enumerate_valid, heat_score
from .reliability import (
    DeviceParams,
    delta_at,
    mttf_ns,
    read_disturbance_prob,
    retention_failure_prob,
    write_failure_prob,
)
from .runner import load_events, replay
from .thermal import HeatKernel
from .trace import InvalidSpec, SyntheticTraceSpec, TraceError, generate_trace, parse_trace, serialize_trace

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TRACE = 3
EXIT_IO = 4

OUT_DIR_ENV = "MRAMSIM_OUT_DIR"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mramsim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"mramsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="replay a trace under the configured policies")
    sim.add_argument("--config", help="TOML run configuration")
    sim.add_argument("--trace", help="trace file ('-' for stdin); overrides the config")
    sim.add_argument("--out", help="output directory (beats MRAMSIM_OUT_DIR and the config)")
    sim.add_argument("--policy", action="append", choices=["lru", "fifo", "talrw"],
                     help="repeatable; overrides the configured policy list")
    sim.add_argument("--seed", type=int, help="synthetic trace seed override")
    sim.add_argument("--warmup-fraction", type=float, dest="warmup_fraction")
    sim.add_argument("--sets", type=int)
    sim.add_argument("--ways", type=int)
    sim.add_argument("--block-bytes", type=int, dest="block_bytes")
    sim.set_defaults(func=_cmd_simulate)

    perm = sub.add_parser("perm", help="write-order permutation tools")
    perm_sub = perm.add_subparsers(dest="perm_command", required=True)
    search = perm_sub.add_parser("search", help="enumerate distance-constrained write orders")
    search.add_argument("--ways", type=int, required=True)
    search.add_argument("--min-dist", type=int, required=True, dest="min_dist")
    search.add_argument("--score", action="store_true",
                        help="append the default-kernel heat score to each line")
    search.set_defaults(func=_cmd_perm_search)

    rel = sub.add_parser("reliability", help="failure-model sweeps")
    rel_sub = rel.add_subparsers(dest="rel_command", required=True)
    curve = rel_sub.add_parser("curve", help="CSV of a failure metric over a temperature sweep")
    curve.add_argument("--metric", required=True, choices=["mttf", "retention", "read", "write"])
    curve.add_argument("--sweep", required=True, help="temp=START:STOP:STEP in kelvin")
    curve.add_argument("--dwell-ns", type=float, default=1e6, dest="dwell_ns",
                       help="idle window for the retention metric")
    curve.add_argument("--config", help="TOML file whose [device] section supplies parameters")
    curve.set_defaults(func=_cmd_reliability_curve)

    gen = sub.add_parser("trace", help="trace tools")
    gen_sub = gen.add_subparsers(dest="trace_command", required=True)
    tg = gen_sub.add_parser("gen", help="generate a synthetic trace")
    tg.add_argument("--events", type=int, required=True)
    tg.add_argument("--read-fraction", type=float, default=0.7, dest="read_fraction")
    tg.add_argument("--working-set", type=int, default=4096, dest="working_set")
    tg.add_argument("--reuse", type=float, default=0.0)
    tg.add_argument("--window", type=int, default=64)
    tg.add_argument("--hot-fraction", type=float, default=0.0, dest="hot_fraction")
    tg.add_argument("--hot-blocks", type=int, default=0, dest="hot_blocks")
    tg.add_argument("--seed", type=int, default=0)
    tg.add_argument("--out", help="output file (default stdout)")
    tg.set_defaults(func=_cmd_trace_gen)

    cmp_ = sub.add_parser("compare", help="merge summary.csv files from run directories")
    cmp_.add_argument("run_dirs", nargs="+")
    cmp_.set_defaults(func=_cmd_compare)
    return parser


def _cmd_simulate(args: argparse.Namespace) -> int:
    overrides = {
        "policies": args.policy,
        "out_dir": args.out or os.environ.get(OUT_DIR_ENV),
        "seed": args.seed,
        "warmup_fraction": args.warmup_fraction,
    }
    for key in ("sets", "ways", "block_bytes"):
        if getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    use_stdin = args.trace == "-"
    if args.trace is not None:
        overrides["trace_path"] = args.trace
    config = load_run_config(args.config, overrides)
    if use_stdin:
        events = parse_trace(sys.stdin, origin="<stdin>")
    else:
        try:
            events = load_events(config)
        except OSError as exc:
            raise TraceError(0, f"cannot read trace {config.trace_path}: {exc}") from exc
    if not events:
        raise EmptyRun("trace contains no events")
    reports = {}
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
    write_run_outputs(reports, config.out_dir)
    sys.stdout.write(
        render_csv(["policy", "miss_rate", "cpi", "cpi_norm_lru"], summary_rows(list(reports.values())))
    )
    return EXIT_OK


def _cmd_perm_search(args: argparse.Namespace) -> int:
    perms = enumerate_valid(args.ways, args.min_dist)
    kernel = HeatKernel() if args.score else None
    out = sys.stdout
    for p in perms:
        line = " ".join(str(w) for w in p.order)
        if kernel is not None:
            line += f" {fmt(heat_score(p, kernel))}"
        out.write(line + "\n")
    total = math.factorial(args.ways)
    sys.stderr.write(
        f"{len(perms)} of {total} permutations keep every cyclic adjacent "
        f"distance >= {args.min_dist} for {args.ways} ways\n"
    )
    return EXIT_OK


def _parse_sweep(text: str) -> list[float]:
    try:
        name, _, rng = text.partition("=")
        if name.strip() != "temp":
            raise ValueError("sweep variable must be 'temp'")
        start_s, stop_s, step_s = rng.split(":")
        start, stop, step = float(start_s), float(stop_s), float(step_s)
        if step <= 0 or stop < start:
            raise ValueError("need START <= STOP and STEP > 0")
    except ValueError as exc:
        raise ConfigError(f"bad sweep {text!r}: {exc}") from exc
    n = int((stop - start) / step + 1e-9)
    return [start + i * step for i in range(n + 1)]


def _cmd_reliability_curve(args: argparse.Namespace) -> int:
    if args.config is not None:
        device = load_device_params(args.config)
    else:
        device = DeviceParams()
    temps = _parse_sweep(args.sweep)
    rows = []
    for t in temps:
        if args.metric == "mttf":
            value = mttf_ns(delta_at(t, device), device)
        elif args.metric == "retention":
            value = retention_failure_prob(args.dwell_ns, delta_at(t, device), device)
        elif args.metric == "read":
            value = read_disturbance_prob(t, device)
        else:
            value = write_failure_prob(t, device)
        rows.append([fmt(t), fmt(value)])
    sys.stdout.write(render_csv(["T", "value"], rows))
    return EXIT_OK


def _cmd_trace_gen(args: argparse.Namespace) -> int:
    spec = SyntheticTraceSpec(
        event_count=args.events,
        read_fraction=args.read_fraction,
        working_set_blocks=args.working_set,
        reuse_locality=args.reuse,
        window_size=args.window,
        seed=args.seed,
        hot_fraction=args.hot_fraction,
        hot_blocks=args.hot_blocks,
    )
    text = serialize_trace(generate_trace(spec))
    if args.out is None or args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    rows = []
    for run_dir in args.run_dirs:
        summary = Path(run_dir) / "summary.csv"
        with open(summary, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["policy", "miss_rate", "cpi", "cpi_norm_lru"]:
                raise ConfigError(f"{summary} is not a run summary")
            for row in reader:
                rows.append([str(Path(run_dir).name)] + row)
    sys.stdout.write(render_csv(["run", "policy", "miss_rate", "cpi", "cpi_norm_lru"], rows))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidArgs, ValueError) as exc:
        if isinstance(exc, (TraceError, InvalidSpec, EmptyRun)):
            sys.stderr.write(f"trace error: {exc}\n")
            return EXIT_TRACE
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
