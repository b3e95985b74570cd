"""Actor-to-tile mappings and per-tile static-order schedules.

A mapping binds every actor of every graph to exactly one tile, gives each
tile a static firing order that it cycles through forever, and places each
channel into a memory region.  Channels in a shared region are transferred
over the bus; channels whose endpoints share a tile may instead live in
that tile's private memory.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationReport
from .graphs import SdfGraph
from .soc import Platform


@dataclass(frozen=True)
class StaticOrderSchedule:
    tile_id: str
    order: tuple[str, ...]  # actor ids, fired round-robin in this order


@dataclass(frozen=True)
class Mapping:
    mapping_id: str
    actor_to_tile: dict[str, str]
    schedules: tuple[StaticOrderSchedule, ...]
    channel_region: dict[str, str] = field(default_factory=dict)
    default_region: str = "shared0"

    def schedule_for(self, tile_id: str) -> StaticOrderSchedule | None:
        for s in self.schedules:
            if s.tile_id == tile_id:
                return s
        return None

    def region_of(self, channel_id: str) -> str:
        return self.channel_region.get(channel_id, self.default_region)

    def tiles_used(self) -> tuple[str, ...]:
        seen: list[str] = []
        for tile in self.actor_to_tile.values():
            if tile not in seen:
                seen.append(tile)
        return tuple(seen)


def validate_mapping(
    mapping: Mapping, platform: Platform, graphs: list[SdfGraph]
) -> ValidationReport:
    report = ValidationReport()
    known_actors: set[str] = set()
    for g in graphs:
        for a in g.actors:
            if a.actor_id in known_actors:
                report.add(f"actor id {a.actor_id!r} appears in more than one graph")
            known_actors.add(a.actor_id)
    tile_ids = {t.tile_id for t in platform.tiles}
    region_ids = {r.region_id for r in platform.regions}

    for actor_id in known_actors:
        if actor_id not in mapping.actor_to_tile:
            report.add(f"actor {actor_id!r} is not mapped to any tile")
    for actor_id, tile_id in mapping.actor_to_tile.items():
        if actor_id not in known_actors:
            report.add(f"mapping {mapping.mapping_id!r} maps unknown actor {actor_id!r}")
        if tile_id not in tile_ids:
            report.add(f"actor {actor_id!r} mapped to unknown tile {tile_id!r}")

    scheduled_tiles: set[str] = set()
    for sched in mapping.schedules:
        if sched.tile_id in scheduled_tiles:
            report.add(f"tile {sched.tile_id!r} has more than one schedule")
        scheduled_tiles.add(sched.tile_id)
        if sched.tile_id not in tile_ids:
            report.add(f"schedule references unknown tile {sched.tile_id!r}")
        expected = {a for a, t in mapping.actor_to_tile.items() if t == sched.tile_id}
        listed = set(sched.order)
        if not sched.order:
            report.add(f"tile {sched.tile_id!r}: schedule is empty")
        if listed != expected:
            report.add(
                f"tile {sched.tile_id!r}: schedule lists {sorted(listed)} but the"
                f" mapping assigns {sorted(expected)}"
            )
    for tile_id in {t for t in mapping.actor_to_tile.values() if t in tile_ids}:
        if tile_id not in scheduled_tiles:
            report.add(f"tile {tile_id!r} has mapped actors but no schedule")

    shared_regions = {r.region_id for r in platform.regions if r.shared}
    channel_owner: dict[str, SdfGraph] = {}
    for g in graphs:
        for ch in g.channels:
            channel_owner[ch.channel_id] = g
    for channel_id, region_id in mapping.channel_region.items():
        if channel_id not in channel_owner:
            report.add(f"mapping places unknown channel {channel_id!r}")
            continue
        if region_id not in region_ids:
            report.add(f"channel {channel_id!r} placed in unknown region {region_id!r}")
            continue
        if region_id not in shared_regions:
            ch = channel_owner[channel_id].channel(channel_id)
            src_tile = mapping.actor_to_tile.get(ch.src)
            dst_tile = mapping.actor_to_tile.get(ch.dst)
            if src_tile != dst_tile:
                report.add(
                    f"channel {channel_id!r} crosses tiles but sits in private"
                    f" region {region_id!r}"
                )
    if mapping.default_region not in region_ids:
        report.add(f"unknown default region {mapping.default_region!r}")
    return report


def builtin_mappings() -> tuple[Mapping, ...]:
    """The seven evaluated mappings of the Sobel + JPEG workload.

    Tiles t1..t4; every channel is placed in the shared region so all
    transfers go over the bus.  Mapping 7 packs each application onto a
    single core and leaves two tiles empty.
    """
    tables: list[list[tuple[str, ...]]] = [
        [("getPixel", "GX"), ("GY", "ABS"), ("getMB", "CC"), ("DCT", "VLC")],
        [("getPixel", "getMB"), ("GX", "CC"), ("GY", "DCT"), ("ABS", "VLC")],
        [("getPixel", "ABS"), ("GX", "GY"), ("getMB", "VLC"), ("CC", "DCT")],
        [("getPixel", "GY"), ("GX", "ABS"), ("getMB", "DCT"), ("CC", "VLC")],
        [("getPixel", "CC"), ("getMB", "GX"), ("GY", "VLC"), ("DCT", "ABS")],
        [("getPixel", "DCT"), ("getMB", "GY"), ("GX", "VLC"), ("CC", "ABS")],
        [("getMB", "CC", "DCT", "VLC"), ("getPixel", "GX", "GY", "ABS"), (), ()],
    ]
    mappings = []
    for idx, rows in enumerate(tables, start=1):
        actor_to_tile: dict[str, str] = {}
        schedules = []
        for tile_no, order in enumerate(rows, start=1):
            tile_id = f"t{tile_no}"
            for actor in order:
                actor_to_tile[actor] = tile_id
            if order:
                schedules.append(StaticOrderSchedule(tile_id, order))
        mappings.append(
            Mapping(
                mapping_id=f"map{idx}",
                actor_to_tile=actor_to_tile,
                schedules=tuple(schedules),
            )
        )
    return tuple(mappings)
