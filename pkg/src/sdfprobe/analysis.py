"""Aggregation of repeated measurements into reports.

Timing spreads come straight from the records; power spreads combine the
per-repetition sampler statistics (best of bests, mean of means, worst of
worsts).  Blocks the sampler could not measure stay n/a instead of being
silently filled.  Reports render as CSV (the canonical machine output), a
fixed-width table, or an SVG scatter of the latency/power plane with the
Pareto-optimal points highlighted.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import EmptyInputError, SchemaError
from .measctrl import TimingRecord
from .power import PowerStats


@dataclass(frozen=True)
class MeasurementSummary:
    block_id: str
    repetitions: int
    cycles_best: int
    cycles_avg: float
    cycles_worst: int
    power: PowerStats


@dataclass(frozen=True)
class ParetoPoint:
    mapping_id: str
    graph_id: str
    latency_cycles: float
    power_watts: float


def aggregate(
    block_id: str,
    records: list[TimingRecord],
    power: list[PowerStats] | None = None,
) -> MeasurementSummary:
    if not records:
        raise EmptyInputError(f"block {block_id!r}: no timing records to aggregate")
    durations = [r.duration for r in records]
    power = power or []
    measurable = [p for p in power if p.measurable]
    if measurable:
        pstats = PowerStats(
            best=min(p.best for p in measurable),
            avg=float(np.mean([p.avg for p in measurable])),
            worst=max(p.worst for p in measurable),
            sample_count=sum(p.sample_count for p in measurable),
        )
    else:
        pstats = PowerStats.not_measurable()
    return MeasurementSummary(
        block_id=block_id,
        repetitions=len(records),
        cycles_best=min(durations),
        cycles_avg=float(np.mean(durations)),
        cycles_worst=max(durations),
        power=pstats,
    )


def pareto_front(points: list[ParetoPoint]) -> list[ParetoPoint]:
    """Points not weakly dominated by a strictly better point, both axes
    minimized.  Duplicates never dominate each other, so both survive."""
    if not points:
        return []
    lat = np.asarray([p.latency_cycles for p in points], np.float64)
    pw = np.asarray([p.power_watts for p in points], np.float64)
    keep = np.asarray(K.pareto_mask(lat, pw))
    return [p for p, k in zip(points, keep) if k]


def _fmt(x: float | None) -> str:
    return "n/a" if x is None else repr(float(x))


def render_table(summaries: list[MeasurementSummary]) -> str:
    header = (
        f"{'block':<18} {'reps':>4} {'cyc best':>10} {'cyc avg':>12} "
        f"{'cyc worst':>10} {'W best':>8} {'W avg':>8} {'W worst':>8} {'samples':>8}"
    )
    lines = [header, "-" * len(header)]
    for s in summaries:
        p = s.power

        def w(x: float | None) -> str:
            return "n/a" if x is None else f"{x:.4f}"

        lines.append(
            f"{s.block_id:<18} {s.repetitions:>4} {s.cycles_best:>10} "
            f"{s.cycles_avg:>12.1f} {s.cycles_worst:>10} {w(p.best):>8} "
            f"{w(p.avg):>8} {w(p.worst):>8} {p.sample_count:>8}"
        )
    return "\n".join(lines) + "\n"


_SUMMARY_COLUMNS = [
    "block_id",
    "repetitions",
    "cycles_best",
    "cycles_avg",
    "cycles_worst",
    "power_best_watts",
    "power_avg_watts",
    "power_worst_watts",
    "power_samples",
]


def write_summary_csv(path, summaries: list[MeasurementSummary]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_SUMMARY_COLUMNS)
        for s in summaries:
            writer.writerow(
                [
                    s.block_id,
                    s.repetitions,
                    s.cycles_best,
                    repr(s.cycles_avg),
                    s.cycles_worst,
                    _fmt(s.power.best),
                    _fmt(s.power.avg),
                    _fmt(s.power.worst),
                    s.power.sample_count,
                ]
            )


def read_summary_csv(path) -> list[MeasurementSummary]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _SUMMARY_COLUMNS:
            raise SchemaError(f"{path}: expected columns {_SUMMARY_COLUMNS}, got {header}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(_SUMMARY_COLUMNS):
                raise SchemaError(f"{path}:{lineno}: wrong field count")

            def opt(s: str) -> float | None:
                return None if s == "n/a" else float(s)

            try:
                out.append(
                    MeasurementSummary(
                        block_id=row[0],
                        repetitions=int(row[1]),
                        cycles_best=int(row[2]),
                        cycles_avg=float(row[3]),
                        cycles_worst=int(row[4]),
                        power=PowerStats(
                            best=opt(row[5]),
                            avg=opt(row[6]),
                            worst=opt(row[7]),
                            sample_count=int(row[8]),
                        ),
                    )
                )
            except ValueError as exc:
                raise SchemaError(f"{path}:{lineno}: malformed row") from exc
    return out


_PARETO_COLUMNS = ["mapping_id", "graph_id", "latency_cycles", "power_watts", "on_front"]


def write_pareto_csv(path, points: list[ParetoPoint], front: list[ParetoPoint]) -> None:
    on_front = set(id(p) for p in front)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_PARETO_COLUMNS)
        for p in points:
            writer.writerow(
                [
                    p.mapping_id,
                    p.graph_id,
                    repr(p.latency_cycles),
                    repr(p.power_watts),
                    1 if id(p) in on_front else 0,
                ]
            )


def read_pareto_csv(path) -> tuple[list[ParetoPoint], list[ParetoPoint]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _PARETO_COLUMNS:
            raise SchemaError(f"{path}: expected columns {_PARETO_COLUMNS}, got {header}")
        points, front = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise SchemaError(f"{path}:{lineno}: wrong field count")
            try:
                p = ParetoPoint(row[0], row[1], float(row[2]), float(row[3]))
                flag = int(row[4])
            except ValueError as exc:
                raise SchemaError(f"{path}:{lineno}: malformed row") from exc
            points.append(p)
            if flag:
                front.append(p)
    return points, front


def render_pareto_svg(
    points: list[ParetoPoint],
    front: list[ParetoPoint],
    title: str = "latency / power",
) -> str:
    """Self-contained scatter plot; front points are filled and joined."""
    width, height, margin = 640, 440, 56
    if points:
        lats = [p.latency_cycles for p in points]
        pows = [p.power_watts for p in points]
        lat_lo, lat_hi = min(lats), max(lats)
        pow_lo, pow_hi = min(pows), max(pows)
    else:
        lat_lo, lat_hi, pow_lo, pow_hi = 0.0, 1.0, 0.0, 1.0
    if lat_hi <= lat_lo:
        lat_hi = lat_lo + 1.0
    if pow_hi <= pow_lo:
        pow_hi = pow_lo + 1.0

    def sx(v: float) -> float:
        return margin + (v - lat_lo) / (lat_hi - lat_lo) * (width - 2 * margin)

    def sy(v: float) -> float:
        return height - margin - (v - pow_lo) / (pow_hi - pow_lo) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        f'stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" '
        f'font-size="13">latency [cycles]</text>',
        f'<text x="16" y="{height / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {height / 2:.1f})">power [W]</text>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" font-size="14">'
        f"{title}</text>",
    ]
    front_sorted = sorted(front, key=lambda p: (p.latency_cycles, p.power_watts))
    if len(front_sorted) > 1:
        path = " ".join(
            f"{sx(p.latency_cycles):.1f},{sy(p.power_watts):.1f}" for p in front_sorted
        )
        parts.append(
            f'<polyline points="{path}" fill="none" stroke="#c0392b" '
            f'stroke-dasharray="4 3"/>'
        )
    front_ids = set(id(p) for p in front)
    for p in points:
        x, y = sx(p.latency_cycles), sy(p.power_watts)
        if id(p) in front_ids:
            parts.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="5" fill="#c0392b"/>')
        else:
            parts.append(
                f'<circle cx="{x:.1f}" cy="{y:.1f}" r="4" fill="none" stroke="#2c3e50"/>'
            )
        parts.append(
            f'<text x="{x + 7:.1f}" y="{y - 6:.1f}" font-size="10">{p.mapping_id}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_reports(
    out_dir,
    summaries: list[MeasurementSummary] | None = None,
    points: list[ParetoPoint] | None = None,
    fronts: dict[str, list[ParetoPoint]] | None = None,
    fmt: str = "csv",
) -> list[str]:
    """Write the chosen artifacts into out_dir; CSV is always produced."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    if summaries is not None:
        path = out / "summary.csv"
        write_summary_csv(path, summaries)
        written.append(str(path))
        if fmt == "table":
            tpath = out / "summary.txt"
            tpath.write_text(render_table(summaries))
            written.append(str(tpath))
    if points is not None:
        fronts = fronts or {}
        all_front = [p for front in fronts.values() for p in front]
        path = out / "pareto.csv"
        write_pareto_csv(path, points, all_front)
        written.append(str(path))
        if fmt == "svg":
            for graph_id, front in fronts.items():
                gpoints = [p for p in points if p.graph_id == graph_id]
                spath = out / f"pareto_{graph_id}.svg"
                spath.write_text(render_pareto_svg(gpoints, front, title=graph_id))
                written.append(str(spath))
    return written
