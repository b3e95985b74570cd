"""Aggregation, Pareto fronts, rendering, and report persistence."""
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sdfprobe import (
    MeasurementSummary,
    ParetoPoint,
    PowerStats,
    aggregate,
    emit_reports,
    pareto_front,
    render_pareto_svg,
    render_table,
)
from sdfprobe.analysis import (
    read_pareto_csv,
    read_summary_csv,
    write_pareto_csv,
    write_summary_csv,
)
from sdfprobe.errors import EmptyInputError, SchemaError
from sdfprobe.measctrl import TimingRecord


def rec(start: int, stop: int) -> TimingRecord:
    return TimingRecord("blk", start, stop)


def stats(avg: float, n: int = 10) -> PowerStats:
    return PowerStats(best=avg - 0.01, avg=avg, worst=avg + 0.01, sample_count=n)


class TestAggregate:
    def test_timing_extremes_and_mean(self):
        s = aggregate("blk", [rec(0, 10), rec(20, 26), rec(40, 54)])
        assert s.cycles_best == 6
        assert s.cycles_worst == 14
        assert s.cycles_avg == pytest.approx(10.0)
        assert s.repetitions == 3
        assert not s.power.measurable

    def test_power_pools_measurable_windows(self):
        s = aggregate(
            "blk",
            [rec(0, 10), rec(20, 30)],
            [stats(0.5, n=4), stats(0.6, n=6)],
        )
        assert s.power.measurable
        assert s.power.avg == pytest.approx(0.55)
        assert s.power.best == pytest.approx(0.49)
        assert s.power.worst == pytest.approx(0.61)
        assert s.power.sample_count == 10

    def test_unmeasurable_windows_are_skipped(self):
        s = aggregate(
            "blk",
            [rec(0, 10), rec(20, 30)],
            [PowerStats.not_measurable(), stats(0.7)],
        )
        assert s.power.measurable
        assert s.power.avg == pytest.approx(0.7)

    def test_all_unmeasurable_collapses_to_na(self):
        s = aggregate("blk", [rec(0, 10)], [PowerStats.not_measurable()])
        assert not s.power.measurable

    def test_empty_records_raise(self):
        with pytest.raises(EmptyInputError):
            aggregate("blk", [])


def brute_force_front(points: list[ParetoPoint]) -> list[ParetoPoint]:
    """All-pairs reference: p survives unless someone is at least as good on
    both axes and strictly better on one."""
    out = []
    for p in points:
        dominated = any(
            q.latency_cycles <= p.latency_cycles
            and q.power_watts <= p.power_watts
            and (q.latency_cycles < p.latency_cycles or q.power_watts < p.power_watts)
            for q in points
        )
        if not dominated:
            out.append(p)
    return out


class TestParetoFront:
    def test_simple_staircase(self):
        pts = [
            ParetoPoint("m1", "g", 100, 0.9),
            ParetoPoint("m2", "g", 200, 0.5),
            ParetoPoint("m3", "g", 150, 0.7),
            ParetoPoint("m4", "g", 300, 0.95),
        ]
        front = pareto_front(pts)
        assert [p.mapping_id for p in front] == ["m1", "m2", "m3"]

    def test_duplicates_both_survive(self):
        pts = [ParetoPoint("m1", "g", 100, 0.5), ParetoPoint("m2", "g", 100, 0.5)]
        assert len(pareto_front(pts)) == 2

    def test_single_point(self):
        pts = [ParetoPoint("m1", "g", 1, 1.0)]
        assert pareto_front(pts) == pts

    def test_empty(self):
        assert pareto_front([]) == []

    def test_dominated_duplicate_coordinates(self):
        pts = [
            ParetoPoint("m1", "g", 100, 0.5),
            ParetoPoint("m2", "g", 100, 0.5),
            ParetoPoint("m3", "g", 100, 0.6),
        ]
        front = pareto_front(pts)
        assert [p.mapping_id for p in front] == ["m1", "m2"]


@given(
    st.lists(
        st.tuples(
            st.integers(min_value=0, max_value=50),
            st.integers(min_value=0, max_value=50),
        ),
        max_size=60,
    )
)
def test_pareto_matches_brute_force(coords):
    pts = [
        ParetoPoint(f"m{i}", "g", float(lat), pw / 10.0)
        for i, (lat, pw) in enumerate(coords)
    ]
    assert pareto_front(pts) == brute_force_front(pts)


class TestRendering:
    def _summaries(self):
        return [
            MeasurementSummary("a.compute", 5, 100, 110.0, 120, stats(0.5)),
            MeasurementSummary("a.write", 5, 62, 62.0, 62, PowerStats.not_measurable()),
        ]

    def test_table_contains_rows_and_na(self):
        text = render_table(self._summaries())
        assert "a.compute" in text
        assert "a.write" in text
        assert "n/a" in text
        assert "0.5" in text

    def test_svg_is_wellformed_and_labeled(self):
        pts = [
            ParetoPoint("m1", "g", 100, 0.9),
            ParetoPoint("m2", "g", 200, 0.5),
            ParetoPoint("m3", "g", 250, 0.8),
        ]
        front = pareto_front(pts)
        svg = render_pareto_svg(pts, front, title="g")
        root = ET.fromstring(svg)
        assert root.tag.endswith("svg")
        assert "m1" in svg and "m2" in svg and "m3" in svg
        assert "polyline" in svg

    def test_svg_single_point_does_not_crash(self):
        pts = [ParetoPoint("m1", "g", 100, 0.9)]
        svg = render_pareto_svg(pts, pts, title="g")
        ET.fromstring(svg)


class TestPersistence:
    def test_summary_round_trip(self, tmp_path):
        path = tmp_path / "summary.csv"
        summaries = [
            MeasurementSummary("a.compute", 5, 100, 110.5, 120, stats(0.5)),
            MeasurementSummary("a.write", 3, 62, 62.0, 62, PowerStats.not_measurable()),
        ]
        write_summary_csv(path, summaries)
        back = read_summary_csv(path)
        assert back == summaries

    def test_summary_schema_checked(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("bogus,columns\n1,2\n")
        with pytest.raises(SchemaError):
            read_summary_csv(path)

    def test_pareto_round_trip(self, tmp_path):
        pts = [
            ParetoPoint("m1", "g1", 100.0, 0.9),
            ParetoPoint("m2", "g1", 200.0, 0.5),
            ParetoPoint("m1", "g2", 300.0, 0.7),
        ]
        front = pareto_front([p for p in pts if p.graph_id == "g1"])
        path = tmp_path / "pareto.csv"
        write_pareto_csv(path, pts, front)
        back_pts, back_front = read_pareto_csv(path)
        assert back_pts == pts
        assert back_front == front

    def test_emit_reports_csv_only(self, tmp_path):
        out = emit_reports(tmp_path, summaries=self._one_summary(), fmt="csv")
        assert [p.endswith("summary.csv") for p in out] == [True]

    def test_emit_reports_table_adds_text(self, tmp_path):
        out = emit_reports(tmp_path, summaries=self._one_summary(), fmt="table")
        assert any(p.endswith("summary.txt") for p in out)

    def test_emit_reports_svg_per_graph(self, tmp_path):
        pts = [
            ParetoPoint("m1", "g1", 100.0, 0.9),
            ParetoPoint("m2", "g2", 120.0, 0.4),
        ]
        fronts = {"g1": [pts[0]], "g2": [pts[1]]}
        out = emit_reports(tmp_path, points=pts, fronts=fronts, fmt="svg")
        assert any(p.endswith("pareto_g1.svg") for p in out)
        assert any(p.endswith("pareto_g2.svg") for p in out)
        assert any(p.endswith("pareto.csv") for p in out)

    @staticmethod
    def _one_summary():
        return [MeasurementSummary("blk", 2, 10, 10.0, 10, PowerStats.not_measurable())]
