"""Measurement controller: a cycle-accurate stopwatch fed by trigger events.

The controller sits outside the platform.  A start trigger while idle arms
the stopwatch; any further starts are ignored until the measurement ends.
It ends once the configured number of stop signals has arrived, one from
every processor that fires sink actors.  Completed records land in a
bounded buffer; overflow drops the newest record and counts it.  A stop
while idle is recorded as an anomaly and otherwise ignored.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

from .errors import ControllerBusyError, SchemaError
from .instrument import ControllerConfig
from .simulator import TriggerEvent

IDLE = "idle"
MEASURING = "measuring"
DONE = "done"


@dataclass(frozen=True)
class TimingRecord:
    block_id: str
    start_cycle: int
    stop_cycle: int

    @property
    def duration(self) -> int:
        return self.stop_cycle - self.start_cycle


@dataclass
class ControllerState:
    mode: str = IDLE
    block_id: str | None = None
    start_cycle: int = 0
    stops_seen: int = 0
    completed: int = 0
    anomalies: int = 0
    dropped: int = 0


class MeasurementController:
    def __init__(self, config: ControllerConfig | None = None):
        self.config = config or ControllerConfig()
        self.state = ControllerState()
        self._buffer: list[TimingRecord] = []

    def configure(self, config: ControllerConfig) -> None:
        if self.state.mode == MEASURING:
            raise ControllerBusyError("cannot reconfigure while a measurement is running")
        if config.required_stop_count < 1:
            raise ValueError("required_stop_count must be >= 1")
        if config.num_measurements < 1:
            raise ValueError("num_measurements must be >= 1")
        if config.buffer_capacity < 1:
            raise ValueError("buffer_capacity must be >= 1")
        self.config = config
        self.state = ControllerState()
        self._buffer = []

    def on_start(self, block_id: str, cycle: int) -> None:
        st = self.state
        if st.mode != IDLE:
            return  # extra starts are ignored, as is anything after done
        st.mode = MEASURING
        st.block_id = block_id
        st.start_cycle = cycle
        st.stops_seen = 0

    def on_stop(self, block_id: str, cycle: int) -> None:
        st = self.state
        if st.mode == DONE:
            return
        if st.mode == IDLE:
            st.anomalies += 1
            return
        st.stops_seen += 1
        if st.stops_seen < self.config.required_stop_count:
            return
        record = TimingRecord(st.block_id or block_id, st.start_cycle, cycle)
        if len(self._buffer) >= self.config.buffer_capacity:
            st.dropped += 1
        else:
            self._buffer.append(record)
        st.completed += 1
        st.block_id = None
        st.stops_seen = 0
        if st.completed >= self.config.num_measurements or not self.config.auto_restart:
            st.mode = DONE
        else:
            st.mode = IDLE

    def feed(self, events: list[TriggerEvent]) -> None:
        last = None
        for ev in events:
            if last is not None and ev.cycle < last:
                raise ValueError("trigger events must be in cycle order")
            last = ev.cycle
            if ev.kind == "start":
                self.on_start(ev.block_id, ev.cycle)
            else:
                self.on_stop(ev.block_id, ev.cycle)

    def drain_buffer(self) -> list[TimingRecord]:
        out = self._buffer
        self._buffer = []
        return out


def run_controller(
    config: ControllerConfig, events: list[TriggerEvent]
) -> tuple[list[TimingRecord], ControllerState]:
    ctrl = MeasurementController()
    ctrl.configure(config)
    ctrl.feed(events)
    return ctrl.drain_buffer(), ctrl.state


_TIMING_COLUMNS = ["block_id", "start_cycle", "stop_cycle", "duration_cycles"]


def write_timing_csv(path, records: list[TimingRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_TIMING_COLUMNS)
        for r in records:
            writer.writerow([r.block_id, r.start_cycle, r.stop_cycle, r.duration])


def read_timing_csv(path) -> list[TimingRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _TIMING_COLUMNS:
            raise SchemaError(f"{path}: expected columns {_TIMING_COLUMNS}, got {header}")
        records = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise SchemaError(f"{path}:{lineno}: expected 4 fields")
            try:
                start, stop, dur = int(row[1]), int(row[2]), int(row[3])
            except ValueError as exc:
                raise SchemaError(f"{path}:{lineno}: non-integer cycle count") from exc
            if dur != stop - start:
                raise SchemaError(f"{path}:{lineno}: duration does not match cycles")
            records.append(TimingRecord(row[0], start, stop))
    return records
