"""Trace-driven simulator for an STT-MRAM last-level cache.

Models a set-associative write-back cache under LRU, FIFO, and a
thermal-aware least-recently-written (talrw) replacement policy, tracks
write-induced heat accumulation per block, and derives retention,
read-disturbance, and write-failure rates from block temperatures.
"""

__version__ = "0.1.0"

from .cache import AccessOutcome, Cache, CacheGeometry
from .permutation import WritePermutation, enumerate_valid, select_default
from .policy import FifoPolicy, LruPolicy, ThermalAwareLRW, make_policy
from .reliability import DeviceParams, ErrorRateReport
from .thermal import HeatKernel, ThermalField
from .trace import SyntheticTraceSpec, TraceEvent, generate_trace, parse_trace

__all__ = [
    "AccessOutcome",
    "Cache",
    "CacheGeometry",
    "DeviceParams",
    "ErrorRateReport",
    "FifoPolicy",
    "HeatKernel",
    "LruPolicy",
    "SyntheticTraceSpec",
    "ThermalAwareLRW",
    "ThermalField",
    "TraceEvent",
    "WritePermutation",
    "enumerate_valid",
    "generate_trace",
    "make_policy",
    "parse_trace",
    "select_default",
]
