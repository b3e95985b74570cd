"""Power signal synthesis and the board-style power sampler model.

The simulated rail power is piecewise constant: a static floor, a per-tile
contribution (computing, polling on a blocked access, or idle) and a bus
term while a transfer occupies the bus.  The sampler quantizes that signal
like a shunt-and-ADC chain: a fixed sample rate, an n-bit code over a full
scale, a few LSB of noise, and trigger edges that land up to
trigger_delay_cycles after the true block boundary.  Blocks shorter than
min_block_cycles are reported as not measurable rather than sampled.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import InvalidWindowError, NonPositiveShuntError, SchemaError
from .simulator import Trace


@dataclass(frozen=True)
class SamplerSpec:
    sample_rate_hz: int = 84_000
    adc_bits: int = 12
    adc_full_scale_watts: float = 2.0
    adc_noise_lsb: int = 5
    trigger_delay_cycles: int = 25
    trigger_delay_mode: str = "uniform"  # "uniform" | "fixed"
    min_block_cycles: int = 1200
    rng_seed: int = 0


@dataclass(frozen=True)
class PowerModel:
    static_watts: float = 0.35
    active_watts_per_tile: float = 0.06
    polling_watts_per_tile: float = 0.03
    bus_watts: float = 0.05
    idle_watts_per_tile: float = 0.01


@dataclass(frozen=True)
class PowerStats:
    best: float | None
    avg: float | None
    worst: float | None
    sample_count: int
    window_start: int | None = None
    window_stop: int | None = None

    @property
    def measurable(self) -> bool:
        return self.sample_count > 0 and self.best is not None

    @staticmethod
    def not_measurable() -> "PowerStats":
        return PowerStats(None, None, None, 0)


@dataclass(frozen=True)
class PowerSignal:
    """Piecewise-constant watts over cycles: watts[i] holds on
    [breaks[i], breaks[i+1]) and the last value holds to end_cycle."""

    breaks: np.ndarray
    watts: np.ndarray
    end_cycle: int

    def value_at(self, cycles) -> np.ndarray:
        inst = np.atleast_1d(np.asarray(cycles, np.int64))
        return K.sample_signal(self.breaks, self.watts, inst)

    def mean_over(self, start: int, stop: int) -> float:
        if stop <= start:
            raise InvalidWindowError("empty window")
        edges = np.clip(self.breaks, start, stop)
        widths = np.diff(np.append(edges, stop))
        return float(np.sum(widths * self.watts) / (stop - start))


def shunt_power(v_drop: float, r_shunt: float, v_rail: float) -> float:
    """Rail power from the voltage drop over a shunt resistor."""
    if r_shunt <= 0 or v_rail <= 0:
        raise NonPositiveShuntError("shunt resistance and rail voltage must be positive")
    if v_drop < 0:
        raise ValueError("voltage drop must be >= 0")
    return v_drop / r_shunt * v_rail


def synthesize_power_signal(trace: Trace, model: PowerModel) -> PowerSignal:
    end = trace.end_cycle
    n_tiles = len(trace.tile_ids)
    base = model.static_watts + n_tiles * model.idle_watts_per_tile

    rec = trace.rec_raw
    starts = []
    ends = []
    deltas = []
    if rec is not None and len(rec):
        s = np.clip(rec[:, 3], 0, end)
        e = np.clip(rec[:, 4], 0, end)
        op = rec[:, 1]
        polling = (op == K.OP_READ) | (op == K.OP_WRITE)
        level = np.where(
            polling, model.polling_watts_per_tile, model.active_watts_per_tile
        ) - model.idle_watts_per_tile
        keep = e > s
        starts.append(s[keep])
        ends.append(e[keep])
        deltas.append(level[keep])
    if len(trace.bus_busy):
        bs = np.clip(trace.bus_busy[:, 0], 0, end)
        be = np.clip(trace.bus_busy[:, 1], 0, end)
        keep = be > bs
        starts.append(bs[keep])
        ends.append(be[keep])
        deltas.append(np.full(int(keep.sum()), model.bus_watts))

    if not starts:
        return PowerSignal(np.zeros(1, np.int64), np.full(1, base), end)

    cyc = np.concatenate([np.concatenate(starts), np.concatenate(ends)])
    dw = np.concatenate([np.concatenate(deltas), -np.concatenate(deltas)])
    order = np.argsort(cyc, kind="stable")
    cyc = cyc[order]
    dw = dw[order]
    uniq, first = np.unique(cyc, return_index=True)
    sums = np.add.reduceat(dw, first)
    watts = base + np.cumsum(sums)
    if uniq[0] != 0:
        breaks = np.concatenate([[0], uniq]).astype(np.int64)
        watts = np.concatenate([[base], watts])
    else:
        breaks = uniq.astype(np.int64)
    return PowerSignal(breaks, watts, end)


def _quantize(values: np.ndarray, sampler: SamplerSpec, rng: np.random.Generator):
    lsb = sampler.adc_full_scale_watts / (1 << sampler.adc_bits)
    codes = np.rint(values / lsb)
    noise = rng.integers(
        -sampler.adc_noise_lsb, sampler.adc_noise_lsb + 1, size=values.shape[0]
    )
    codes = np.clip(codes + noise, 0, (1 << sampler.adc_bits) - 1)
    return codes * lsb


def _instants(s0: int, e0: int, sampler: SamplerSpec, clock_hz: int) -> np.ndarray:
    period = clock_hz / sampler.sample_rate_hz  # cycles per sample, fractional
    n = int(np.floor((e0 - s0) / period)) + 1
    return (s0 + np.floor(np.arange(n) * period)).astype(np.int64)


def measure_block(
    signal: PowerSignal,
    start_cycle: int,
    stop_cycle: int,
    sampler: SamplerSpec,
    clock_hz: int = 100_000_000,
    rng: np.random.Generator | None = None,
) -> PowerStats:
    """Sample one triggered window.

    Measurability is decided on the nominal block length; the realized
    sampling window shifts each edge by the modeled trigger delay.
    """
    if stop_cycle < start_cycle:
        raise InvalidWindowError("stop_cycle before start_cycle")
    if start_cycle < 0 or start_cycle > signal.end_cycle:
        raise InvalidWindowError("window start outside the signal domain")
    if stop_cycle - start_cycle < sampler.min_block_cycles:
        return PowerStats.not_measurable()
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(sampler.rng_seed))
    if sampler.trigger_delay_mode == "fixed":
        d1 = d2 = sampler.trigger_delay_cycles
    else:
        d1 = int(rng.integers(0, sampler.trigger_delay_cycles + 1))
        d2 = int(rng.integers(0, sampler.trigger_delay_cycles + 1))
    e0 = min(stop_cycle + d2, signal.end_cycle)
    s0 = min(start_cycle + d1, e0)
    instants = _instants(s0, e0, sampler, clock_hz)
    values = np.asarray(K.sample_signal(signal.breaks, signal.watts, instants))
    sampled = _quantize(values, sampler, rng)
    return PowerStats(
        best=float(np.min(sampled)),
        avg=float(np.mean(sampled)),
        worst=float(np.max(sampled)),
        sample_count=int(sampled.shape[0]),
        window_start=int(s0),
        window_stop=int(e0),
    )


def measure_continuous(
    signal: PowerSignal,
    duration_cycles: int,
    sampler: SamplerSpec,
    clock_hz: int = 100_000_000,
    rng: np.random.Generator | None = None,
) -> tuple[PowerStats, np.ndarray, np.ndarray]:
    """Free-running sampling from cycle 0: no triggers, no length floor.

    Returns the stats plus the raw (instants, watts) sample stream.
    """
    if duration_cycles <= 0:
        raise InvalidWindowError("duration must be positive")
    duration_cycles = min(duration_cycles, signal.end_cycle)
    if duration_cycles <= 0:
        raise InvalidWindowError("signal is empty")
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(sampler.rng_seed))
    instants = _instants(0, duration_cycles - 1, sampler, clock_hz)
    values = np.asarray(K.sample_signal(signal.breaks, signal.watts, instants))
    sampled = _quantize(values, sampler, rng)
    stats = PowerStats(
        best=float(np.min(sampled)),
        avg=float(np.mean(sampled)),
        worst=float(np.max(sampled)),
        sample_count=int(sampled.shape[0]),
        window_start=0,
        window_stop=int(duration_cycles),
    )
    return stats, instants, sampled


_SAMPLE_COLUMNS = ["cycle", "rail", "watts"]


def write_sample_csv(path, instants: np.ndarray, watts: np.ndarray, rail: str = "core") -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_SAMPLE_COLUMNS)
        for c, w in zip(instants, watts):
            writer.writerow([int(c), rail, repr(float(w))])


def read_sample_csv(path) -> tuple[np.ndarray, list[str], np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _SAMPLE_COLUMNS:
            raise SchemaError(f"{path}: expected columns {_SAMPLE_COLUMNS}, got {header}")
        cycles: list[int] = []
        rails: list[str] = []
        watts: list[float] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise SchemaError(f"{path}:{lineno}: expected 3 fields")
            try:
                cycles.append(int(row[0]))
                watts.append(float(row[2]))
            except ValueError as exc:
                raise SchemaError(f"{path}:{lineno}: malformed sample row") from exc
            rails.append(row[1])
    return np.asarray(cycles, np.int64), rails, np.asarray(watts, np.float64)
