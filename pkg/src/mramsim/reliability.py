"""STT-MRAM failure physics: retention, read disturbance, write failure.

All three failure modes hinge on the thermal stability factor
``delta = E_b / (K * T)``: idle cells flip as a Poisson process with rate
``exp(-delta) / tau``, the read current lowers the effective barrier by its
fraction of the critical current, and the write pulse races an exponential
switching time whose scale carries a ``ln(pi^2 * delta / 4)`` correction.
Higher temperature shrinks delta, which raises retention and read-disturb
probabilities directly; write failure rises with temperature through the
drivability derating of the write current, which outweighs the barrier
effect.

Exponentials are evaluated in log space where ``e**delta`` would overflow
(delta of 40 is routine, 60+ must not crash).
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

BOLTZMANN_J_PER_K = 1.380649e-23
ELECTRON_CHARGE_C = 1.602177e-19
EULER_CONSTANT = 0.5772157
BOHR_MAGNETON_J_PER_T = 9.274010e-24

_LOG_FLOAT_MAX = math.log(sys.float_info.max)


class NonpositiveTemperature(ValueError):
    pass


class InvalidCurrents(ValueError):
    pass


class SubcriticalWriteCurrent(ValueError):
    pass


class NonpositiveDenominator(ValueError):
    pass


@dataclass(frozen=True)
class DeviceParams:
    """Cell parameters for the three failure-probability models.

    ``delta_nominal`` is the thermal stability factor at
    ``reference_temp_k``; the barrier energy is derived from it. Currents
    are in amperes and pulse widths in nanoseconds. The write-failure
    denominator scale ``magnetic_moment_j_per_t`` (free-layer moment, about
    Ms times volume) and the linear ``write_current_derating_a_per_k`` are
    calibration stand-ins: defaults give resolvable, temperature-sensitive
    probabilities, not a characterized device. Override them (and the
    currents and pulse widths) before reading anything quantitative off the
    results.
    """

    delta_nominal: float = 40.0
    reference_temp_k: float = 300.0
    tau_attempt_ns: float = 1.0
    t_read_ns: float = 1.0
    t_write_ns: float = 50.0
    i_read_a: float = 40e-6
    i_c0_a: float = 100e-6
    i_write_nominal_a: float = 180e-6
    write_current_derating_a_per_k: float = -0.5e-6
    polarization: float = 0.6
    magnetic_moment_j_per_t: float = 2.4e-18
    boltzmann_j_per_k: float = BOLTZMANN_J_PER_K
    electron_charge_c: float = ELECTRON_CHARGE_C
    euler_c: float = EULER_CONSTANT
    bohr_magneton_j_per_t: float = BOHR_MAGNETON_J_PER_T

    @property
    def barrier_energy_j(self) -> float:
        return self.delta_nominal * self.boltzmann_j_per_k * self.reference_temp_k

    def validate(self) -> None:
        positive = [
            "delta_nominal",
            "reference_temp_k",
            "tau_attempt_ns",
            "t_read_ns",
            "t_write_ns",
            "i_read_a",
            "i_c0_a",
            "i_write_nominal_a",
            "magnetic_moment_j_per_t",
            "boltzmann_j_per_k",
            "electron_charge_c",
            "euler_c",
            "bohr_magneton_j_per_t",
        ]
        for name in positive:
            if getattr(self, name) <= 0.0:
                raise ValueError(f"device parameter {name} must be > 0")
        if not 0.0 < self.polarization < 1.0:
            raise ValueError("polarization must be in (0, 1)")
        if self.write_current_derating_a_per_k > 0.0:
            raise ValueError("write_current_derating_a_per_k must be <= 0")
        if not self.i_write_nominal_a > self.i_c0_a > self.i_read_a:
            raise ValueError("currents must satisfy i_write_nominal > i_c0 > i_read")


def delta_at(temp_k: float, params: DeviceParams) -> float:
    """Thermal stability factor at ``temp_k``; inversely proportional to T."""
    if temp_k <= 0.0:
        raise NonpositiveTemperature(f"temperature must be > 0 K, got {temp_k}")
    return params.delta_nominal * params.reference_temp_k / temp_k


def flip_rate_per_ns(delta: float, params: DeviceParams) -> float:
    """Poisson rate of thermally driven bit flips for an idle cell."""
    return math.exp(-delta) / params.tau_attempt_ns


def bit_flip_pmf(n: int, t_ns: float, delta: float, params: DeviceParams) -> float:
    """Probability of exactly ``n`` flips within ``t_ns``."""
    if n < 0:
        raise ValueError("flip count must be >= 0")
    if t_ns < 0.0:
        raise ValueError("time must be >= 0")
    lam = t_ns * flip_rate_per_ns(delta, params)
    if lam == 0.0:
        return 1.0 if n == 0 else 0.0
    log_pmf = n * math.log(lam) - lam - math.lgamma(n + 1)
    return math.exp(log_pmf)


def retention_failure_prob(t_ns: float, delta: float, params: DeviceParams) -> float:
    """Probability an idle cell has failed retention after ``t_ns``."""
    if t_ns < 0.0:
        raise ValueError("time must be >= 0")
    lam = t_ns * flip_rate_per_ns(delta, params)
    return -math.expm1(-lam)


def mttf_ns(delta: float, params: DeviceParams) -> float:
    """Mean time to the first thermally driven flip; inf if unrepresentable."""
    if delta < 0.0:
        raise ValueError("delta must be >= 0")
    log_mttf = delta + math.log(params.tau_attempt_ns)
    if log_mttf >= _LOG_FLOAT_MAX:
        return math.inf
    return math.exp(log_mttf)


def log_mttf_ns(delta: float, params: DeviceParams) -> float:
    """Natural log of the mean time to first flip; overflow-safe companion."""
    return delta + math.log(params.tau_attempt_ns)


def read_disturbance_prob(temp_k: float, params: DeviceParams) -> float:
    """Probability one read pulse flips the cell.

    The read current lowers the activation barrier to
    ``delta * (1 - i_read / i_c0)``, so the disturb rate grows as delta
    shrinks with temperature. Needs ``i_read <= i_c0``; at the boundary the
    barrier vanishes and the pulse flips with rate ``1 / tau``.
    """
    if params.i_read_a > params.i_c0_a:
        raise InvalidCurrents(
            f"i_read {params.i_read_a} must not exceed i_c0 {params.i_c0_a}"
        )
    delta = delta_at(temp_k, params)
    barrier = delta * (params.i_read_a - params.i_c0_a) / params.i_c0_a
    rate = (params.t_read_ns / params.tau_attempt_ns) * math.exp(barrier)
    return -math.expm1(-rate)


def effective_write_current_a(temp_k: float, params: DeviceParams) -> float:
    """Write current after transistor drivability derating at ``temp_k``."""
    return params.i_write_nominal_a + params.write_current_derating_a_per_k * (
        temp_k - params.reference_temp_k
    )


def write_failure_prob(temp_k: float, params: DeviceParams) -> float:
    """Probability the cell fails to switch within the write pulse.

    The pulse races an exponentially distributed switching time with mean
    ``e * m * (1 + p^2) * (c + ln(pi^2 * delta / 4)) / (2 * mu_B * p *
    (i_write - i_c0))`` seconds; the whole second factor multiplies the
    denominator (that grouping keeps the expression a time and the
    probabilities resolvable). At the critical current the exponent is zero
    and the write never completes; longer pulses always help.
    """
    delta = delta_at(temp_k, params)
    i_write = effective_write_current_a(temp_k, params)
    if i_write <= params.i_c0_a:
        raise SubcriticalWriteCurrent(
            f"effective write current {i_write} A at {temp_k} K is not above i_c0"
        )
    numerator = 2.0 * params.bohr_magneton_j_per_t * params.polarization * (
        i_write - params.i_c0_a
    )
    denominator = (
        params.electron_charge_c
        * params.magnetic_moment_j_per_t
        * (1.0 + params.polarization**2)
        * (params.euler_c + math.log(math.pi**2 * delta / 4.0))
    )
    if denominator <= 0.0:
        raise NonpositiveDenominator(
            f"switching-time denominator {denominator} <= 0 at delta {delta}"
        )
    t_write_s = params.t_write_ns * 1e-9
    return math.exp(-t_write_s * numerator / denominator)


@dataclass
class ErrorRateReport:
    """Expected-error accounting for one run, split by failure type.

    ``total`` uses the temperatures the blocks actually saw; ``intrinsic``
    replays the identical intervals and events at the base temperature. The
    temperature-induced part is their difference, so the decomposition
    identity holds exactly by construction.
    """

    window_ns: int
    block_count: int
    base_temp_k: float
    total: dict[str, float] = field(default_factory=dict)
    intrinsic: dict[str, float] = field(default_factory=dict)
    reads_counted: int = 0
    writes_counted: int = 0

    TYPES = ("retention", "read_disturb", "write_fail")

    @property
    def induced(self) -> dict[str, float]:
        return {k: self.total[k] - self.intrinsic[k] for k in self.TYPES}

    @property
    def total_errors(self) -> float:
        return sum(self.total[k] for k in self.TYPES)

    @property
    def intrinsic_errors(self) -> float:
        return sum(self.intrinsic[k] for k in self.TYPES)

    @property
    def induced_errors(self) -> float:
        return self.total_errors - self.intrinsic_errors

    def _rate(self, count: float) -> float:
        denom = self.window_ns * self.block_count
        return count / denom if denom > 0 else 0.0

    @property
    def total_rate(self) -> float:
        return self._rate(self.total_errors)

    @property
    def intrinsic_rate(self) -> float:
        return self._rate(self.intrinsic_errors)

    @property
    def temperature_induced_rate(self) -> float:
        return self._rate(self.induced_errors)

    @property
    def induced_over_intrinsic(self) -> float:
        """Temperature-induced errors as a fraction of the intrinsic ones."""
        intr = self.intrinsic_errors
        return self.induced_errors / intr if intr > 0.0 else 0.0

    def as_dict(self) -> dict:
        return {
            "window_ns": self.window_ns,
            "block_count": self.block_count,
            "base_temp_k": self.base_temp_k,
            "reads_counted": self.reads_counted,
            "writes_counted": self.writes_counted,
            "total": dict(self.total),
            "intrinsic": dict(self.intrinsic),
            "induced": self.induced,
            "total_rate": self.total_rate,
            "intrinsic_rate": self.intrinsic_rate,
            "temperature_induced_rate": self.temperature_induced_rate,
            "induced_over_intrinsic": self.induced_over_intrinsic,
        }


class ErrorAccumulator:
    """Folds per-event block temperatures into an :class:`ErrorRateReport`.

    Retention uses sample-and-hold integration: each block's hazard is held
    at the temperature sampled when the block was last touched (written,
    heated by a neighbor write, or read) until its next touch. Read and
    write failures are summed per event at the event-time temperature. The
    intrinsic counterparts accumulate in step over the same intervals and
    events at the base temperature, so a run with zero heat injected yields
    a temperature-induced part of exactly zero.
    """

    def __init__(
        self,
        params: DeviceParams,
        base_temp_k: float,
        block_count: int,
        trace_start_ns: int,
        stats_start_ns: int,
    ):
        self.params = params
        self.base_temp_k = base_temp_k
        self.block_count = block_count
        self._trace_start = trace_start_ns
        self._stats_start = stats_start_ns
        self._hold: dict[tuple[int, int], tuple[float, int]] = {}
        self._base_hazard = self._hazard(base_temp_k)
        self._read_prob_base = read_disturbance_prob(base_temp_k, params)
        self._write_prob_base = write_failure_prob(base_temp_k, params)
        self._total_retention = 0.0
        self._intr_retention = 0.0
        self._total_read = 0.0
        self._intr_read = 0.0
        self._total_write = 0.0
        self._intr_write = 0.0
        self.reads_counted = 0
        self.writes_counted = 0

    def _hazard(self, temp_k: float) -> float:
        return flip_rate_per_ns(delta_at(temp_k, self.params), self.params)

    def _accrue(self, held_temp: float, since_ns: int, now_ns: int) -> None:
        start = since_ns if since_ns > self._stats_start else self._stats_start
        dt = now_ns - start
        if dt > 0:
            self._total_retention += self._hazard(held_temp) * dt
            self._intr_retention += self._base_hazard * dt

    def on_touch(self, set_index: int, way: int, now_ns: int, temp_k: float) -> None:
        """A block's temperature was re-sampled (write heat or a read)."""
        key = (set_index, way)
        held = self._hold.get(key)
        if held is None:
            self._accrue(self.base_temp_k, self._trace_start, now_ns)
        else:
            self._accrue(held[0], held[1], now_ns)
        self._hold[key] = (temp_k, now_ns)

    def on_read(self, now_ns: int, temp_k: float) -> None:
        if now_ns < self._stats_start:
            return
        self.reads_counted += 1
        self._total_read += read_disturbance_prob(temp_k, self.params)
        self._intr_read += self._read_prob_base

    def on_physical_write(self, now_ns: int, temp_k: float) -> None:
        if now_ns < self._stats_start:
            return
        self.writes_counted += 1
        self._total_write += write_failure_prob(temp_k, self.params)
        self._intr_write += self._write_prob_base

    def finalize(self, end_ns: int) -> ErrorRateReport:
        for temp_k, since in self._hold.values():
            self._accrue(temp_k, since, end_ns)
        window = end_ns - self._stats_start
        untouched = self.block_count - len(self._hold)
        if window > 0 and untouched > 0:
            tail = self._base_hazard * window * untouched
            self._total_retention += tail
            self._intr_retention += tail
        return ErrorRateReport(
            window_ns=max(window, 0),
            block_count=self.block_count,
            base_temp_k=self.base_temp_k,
            total={
                "retention": self._total_retention,
                "read_disturb": self._total_read,
                "write_fail": self._total_write,
            },
            intrinsic={
                "retention": self._intr_retention,
                "read_disturb": self._intr_read,
                "write_fail": self._intr_write,
            },
            reads_counted=self.reads_counted,
            writes_counted=self.writes_counted,
        )
