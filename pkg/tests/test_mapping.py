"""Mapping structure, validation, and the built-in candidate set."""
from sdfprobe import builtin_mappings, validate_mapping

from conftest import chain_graph, make_mapping, make_platform


def _sobel_jpeg_actor_ids():
    return {"getPixel", "GX", "GY", "ABS", "getMB", "CC", "DCT", "VLC"}


class TestBuiltinMappings:
    def test_seven_candidates(self):
        maps = builtin_mappings()
        assert [m.mapping_id for m in maps] == [f"map{i}" for i in range(1, 8)]

    def test_each_actor_mapped_exactly_once(self):
        for m in builtin_mappings():
            assert set(m.actor_to_tile) == _sobel_jpeg_actor_ids()
            scheduled = [a for s in m.schedules for a in s.order]
            assert sorted(scheduled) == sorted(_sobel_jpeg_actor_ids())

    def test_map1_splits_each_graph_over_two_tiles(self):
        m = builtin_mappings()[0]
        assert m.actor_to_tile["getPixel"] == "t1"
        assert m.actor_to_tile["GX"] == "t1"
        assert m.actor_to_tile["GY"] == "t2"
        assert m.actor_to_tile["ABS"] == "t2"
        assert m.actor_to_tile["getMB"] == "t3"
        assert m.actor_to_tile["DCT"] == "t4"

    def test_map7_consolidates_on_two_tiles(self):
        m = builtin_mappings()[6]
        assert set(m.tiles_used()) == {"t1", "t2"}
        assert m.actor_to_tile["getPixel"] == "t2"
        assert m.actor_to_tile["VLC"] == "t1"

    def test_map5_interleaves_applications(self):
        m = builtin_mappings()[4]
        assert m.actor_to_tile["getPixel"] == "t1"
        assert m.actor_to_tile["CC"] == "t1"
        assert m.actor_to_tile["getMB"] == "t2"
        assert m.actor_to_tile["GX"] == "t2"


class TestValidateMapping:
    def test_clean_mapping(self):
        g = chain_graph()
        m = make_mapping({"t1": ["a0", "a1"], "t2": ["a2"]})
        assert validate_mapping(m, make_platform(2), [g]).ok

    def test_unmapped_actor_flagged(self):
        g = chain_graph()
        m = make_mapping({"t1": ["a0", "a1"]})
        m = type(m)(
            mapping_id="m",
            actor_to_tile=m.actor_to_tile,
            schedules=m.schedules,
        )
        report = validate_mapping(m, make_platform(2), [g])
        assert any("not mapped" in v for v in report.violations)

    def test_unknown_tile_flagged(self):
        g = chain_graph(costs=(1.0, 1.0))
        m = make_mapping({"t9": ["a0", "a1"]})
        assert not validate_mapping(m, make_platform(2), [g]).ok

    def test_schedule_mismatch_flagged(self):
        g = chain_graph(costs=(1.0, 1.0))
        m = make_mapping({"t1": ["a0", "a1"]})
        bad = type(m)(
            mapping_id="m",
            actor_to_tile={"a0": "t1", "a1": "t2"},
            schedules=m.schedules,
        )
        report = validate_mapping(bad, make_platform(2), [g])
        assert any("schedule" in v for v in report.violations)

    def test_private_region_cannot_cross_tiles(self):
        g = chain_graph(costs=(1.0, 1.0))
        m = make_mapping({"t1": ["a0"], "t2": ["a1"]})
        crossing = type(m)(
            mapping_id="m",
            actor_to_tile=m.actor_to_tile,
            schedules=m.schedules,
            channel_region={"c0": "private"},
        )
        report = validate_mapping(crossing, make_platform(2), [g])
        assert any("private" in v for v in report.violations)

    def test_private_region_ok_on_same_tile(self):
        g = chain_graph(costs=(1.0, 1.0))
        m = make_mapping({"t1": ["a0", "a1"]})
        local = type(m)(
            mapping_id="m",
            actor_to_tile=m.actor_to_tile,
            schedules=m.schedules,
            channel_region={"c0": "private"},
        )
        assert validate_mapping(local, make_platform(2), [g]).ok

    def test_region_lookup_helpers(self):
        m = make_mapping({"t1": ["a0", "a1"]})
        assert m.region_of("c0") == "shared0"
        assert m.schedule_for("t1").order == ("a0", "a1")
