"""Per-block temperature elevation driven by write heat.

Every physical write deposits heat at the written block and, attenuated by
distance, at its neighbors; between events each block's elevation decays
exponentially toward a uniform base temperature (Newtonian cooling). The
field is lazy: a block's stored elevation is only brought up to date when
the block is touched or queried, which is observationally equivalent to
updating every block on every event.
"""

from __future__ import annotations

import math
from typing import Callable, Mapping

DEFAULT_BASE_TEMP_K = 318.5
DEFAULT_WRITE_HEAT_K = 9.0
DEFAULT_COOL_TAU_NS = 200.0
DEFAULT_CUTOFF_K = 0.05


class TimeReversal(ValueError):
    pass


class HeatKernel:
    """Spatial falloff of the heat a single write deposits.

    The written block gains ``write_self_increment_k``; a block ``d`` ways
    away in the same set gains ``way_increment(d)``; a block in a set ``s``
    rows away gains ``way_increment(d) * set_attenuation(s)``. The analytic
    default is an inverse-square falloff in both directions. A measured
    per-way-distance table can replace the analytic way falloff; it must
    start at the self increment and be non-negative and non-increasing.
    """

    def __init__(
        self,
        write_self_increment_k: float = DEFAULT_WRITE_HEAT_K,
        way_table: Mapping[int, float] | None = None,
    ):
        if write_self_increment_k < 0.0:
            raise ValueError("write_self_increment_k must be >= 0")
        self.write_self_increment_k = float(write_self_increment_k)
        self._way_table: dict[int, float] | None = None
        if way_table is not None:
            table = {int(d): float(k) for d, k in way_table.items()}
            if table.get(0) != self.write_self_increment_k:
                raise ValueError("way table entry for distance 0 must equal the self increment")
            prev = None
            for d in sorted(table):
                if d < 0 or table[d] < 0.0:
                    raise ValueError("way table distances and increments must be >= 0")
                if prev is not None and table[d] > prev:
                    raise ValueError("way table increments must be non-increasing in distance")
                prev = table[d]
            self._way_table = table

    def way_increment(self, distance: int) -> float:
        if self._way_table is not None:
            return self._way_table.get(distance, 0.0)
        return self.write_self_increment_k / (1.0 + distance * distance)

    def set_attenuation(self, set_distance: int) -> float:
        return 1.0 / (1.0 + set_distance * set_distance)

    def increment(self, set_distance: int, way_distance: int) -> float:
        return self.way_increment(way_distance) * self.set_attenuation(set_distance)


OnTouch = Callable[[int, int, int, float], None]


class ThermalField:
    """Lazy (set, way) -> elevation-above-base map with exponential cooling."""

    def __init__(
        self,
        num_sets: int,
        ways: int,
        kernel: HeatKernel | None = None,
        base_temp_k: float = DEFAULT_BASE_TEMP_K,
        cool_tau_ns: float = DEFAULT_COOL_TAU_NS,
        cutoff_k: float = DEFAULT_CUTOFF_K,
    ):
        if num_sets < 1 or ways < 1:
            raise ValueError("field needs at least one set and one way")
        if cool_tau_ns <= 0.0:
            raise ValueError("cool_tau_ns must be > 0")
        self.num_sets = num_sets
        self.ways = ways
        self.kernel = kernel if kernel is not None else HeatKernel()
        self.base_temp_k = float(base_temp_k)
        self.cool_tau_ns = float(cool_tau_ns)
        self.cutoff_k = float(cutoff_k)
        self._inv_tau = 1.0 / self.cool_tau_ns
        self._elev = [0.0] * (num_sets * ways)
        self._last = [0] * (num_sets * ways)
        self._offsets = self._build_offsets()

    def _build_offsets(self) -> list[list[tuple[int, int, float]]]:
        """Per origin way: (set offset, target way, increment) above cutoff."""
        kern = self.kernel
        cut = self.cutoff_k
        # Largest set distance at which even the strongest way increment survives.
        max_ds = 0
        peak = max(kern.way_increment(d) for d in range(self.ways))
        while max_ds + 1 < self.num_sets and peak * kern.set_attenuation(max_ds + 1) >= cut > 0.0:
            max_ds += 1
        if cut <= 0.0:
            max_ds = self.num_sets - 1
        tables = []
        for w in range(self.ways):
            entries = []
            for ds in range(-max_ds, max_ds + 1):
                att = kern.set_attenuation(abs(ds))
                for w2 in range(self.ways):
                    inc = kern.way_increment(abs(w2 - w)) * att
                    if inc >= cut and inc > 0.0:
                        entries.append((ds, w2, inc))
            tables.append(entries)
        return tables

    def _decay_index(self, idx: int, now: int) -> float:
        dt = now - self._last[idx]
        if dt < 0:
            raise TimeReversal(f"location updated at {self._last[idx]}, queried at {now}")
        cur = self._elev[idx]
        if dt > 0:
            if cur != 0.0:
                cur *= math.exp(-dt * self._inv_tau)
                self._elev[idx] = cur
            self._last[idx] = now
        return cur

    def decay(self, set_index: int, way: int, now: int) -> float:
        """Bring one location up to ``now``; returns its decayed elevation."""
        return self._decay_index(set_index * self.ways + way, now)

    def inject_write_heat(self, set_index: int, way: int, now: int, on_touch: OnTouch | None = None) -> None:
        """Deposit one write's heat at ``(set_index, way)`` and its neighbors.

        Each affected location is decayed to ``now`` before its increment is
        added. ``on_touch(set, way, now, temp_after_k)`` fires per location.
        """
        num_sets = self.num_sets
        ways = self.ways
        elev = self._elev
        last = self._last
        inv_tau = self._inv_tau
        base = self.base_temp_k
        exp = math.exp
        for ds, w2, inc in self._offsets[way]:
            s2 = set_index + ds
            if 0 <= s2 < num_sets:
                idx = s2 * ways + w2
                dt = now - last[idx]
                if dt < 0:
                    raise TimeReversal(f"location updated at {last[idx]}, written at {now}")
                cur = elev[idx]
                if dt > 0 and cur != 0.0:
                    cur *= exp(-dt * inv_tau)
                cur += inc
                elev[idx] = cur
                last[idx] = now
                if on_touch is not None:
                    on_touch(s2, w2, now, base + cur)

    def elevation_at(self, set_index: int, way: int, now: int) -> float:
        return self._decay_index(set_index * self.ways + way, now)

    def temperature_at(self, set_index: int, way: int, now: int) -> float:
        """Absolute temperature: base plus decayed elevation."""
        return self.base_temp_k + self._decay_index(set_index * self.ways + way, now)

    def snapshot_elevations(self, now: int) -> list[list[float]]:
        """Decay everything to ``now`` and return elevations as [set][way]."""
        return [
            [self._decay_index(s * self.ways + w, now) for w in range(self.ways)]
            for s in range(self.num_sets)
        ]
