"""Shared-memory multiprocessor platform model.

Tiles are processor cores with private memory; channels placed in a shared
region are reached over a single shared bus.  The bus moves words in grants
of at most `words_per_grant`, charging `grant_overhead` cycles per grant
plus `cycles_per_word` per word, and arbitrates pending requests either
round-robin or by fixed tile priority.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationReport

ROUND_ROBIN = "round_robin"
FIXED_PRIORITY = "fixed_priority"


@dataclass(frozen=True)
class BusSpec:
    arbitration: str = ROUND_ROBIN
    grant_overhead_cycles: int = 0
    cycles_per_word: int = 1
    words_per_grant: int = 8


@dataclass(frozen=True)
class MemoryRegion:
    region_id: str
    shared: bool


@dataclass(frozen=True)
class Tile:
    tile_id: str
    clock_hz: int = 100_000_000
    private_region: str = "private"


@dataclass(frozen=True)
class Platform:
    platform_id: str
    tiles: tuple[Tile, ...]
    bus: BusSpec = field(default_factory=BusSpec)
    regions: tuple[MemoryRegion, ...] = (
        MemoryRegion("private", shared=False),
        MemoryRegion("shared0", shared=True),
    )
    trigger_link_worst_delay_cycles: int = 25

    def tile(self, tile_id: str) -> Tile:
        for t in self.tiles:
            if t.tile_id == tile_id:
                return t
        raise KeyError(f"platform {self.platform_id!r} has no tile {tile_id!r}")

    def tile_index(self, tile_id: str) -> int:
        for i, t in enumerate(self.tiles):
            if t.tile_id == tile_id:
                return i
        raise KeyError(f"platform {self.platform_id!r} has no tile {tile_id!r}")

    def region(self, region_id: str) -> MemoryRegion:
        for r in self.regions:
            if r.region_id == region_id:
                return r
        raise KeyError(f"platform {self.platform_id!r} has no region {region_id!r}")


def validate_platform(platform: Platform) -> ValidationReport:
    report = ValidationReport()
    if not platform.tiles:
        report.add("platform has no tiles")
    seen: set[str] = set()
    for t in platform.tiles:
        if t.tile_id in seen:
            report.add(f"duplicate tile id {t.tile_id!r}")
        seen.add(t.tile_id)
        if t.clock_hz <= 0:
            report.add(f"tile {t.tile_id!r}: clock_hz must be positive")
        region_ids = {r.region_id for r in platform.regions}
        if t.private_region not in region_ids:
            report.add(f"tile {t.tile_id!r}: unknown private region {t.private_region!r}")
        elif platform.region(t.private_region).shared:
            report.add(f"tile {t.tile_id!r}: private region {t.private_region!r} is shared")
    seen_regions: set[str] = set()
    for r in platform.regions:
        if r.region_id in seen_regions:
            report.add(f"duplicate region id {r.region_id!r}")
        seen_regions.add(r.region_id)
    bus = platform.bus
    if bus.arbitration not in (ROUND_ROBIN, FIXED_PRIORITY):
        report.add(f"unknown arbitration policy {bus.arbitration!r}")
    if bus.grant_overhead_cycles < 0:
        report.add("grant_overhead_cycles must be >= 0")
    if bus.cycles_per_word < 1:
        report.add("cycles_per_word must be >= 1")
    if bus.words_per_grant < 1:
        report.add("words_per_grant must be >= 1")
    if platform.trigger_link_worst_delay_cycles < 0:
        report.add("trigger_link_worst_delay_cycles must be >= 0")
    return report


def arbitrate(
    platform: Platform,
    requests: list[tuple[str, int, int]],
    last_grant: str | None = None,
    bus_free_at: int = 0,
) -> list[tuple[str, int, int]]:
    """Serialize bus requests into grants.

    `requests` holds (tile_id, request_cycle, words) triples.  Returns
    (tile_id, grant_cycle, completion_cycle) in grant order.  Round-robin
    rotation starts just after `last_grant`; fixed priority always prefers
    the lowest tile index.  Each request here is a single grant, so callers
    pass chunks of at most words_per_grant words.
    """
    bus = platform.bus
    order = [t.tile_id for t in platform.tiles]
    pending = [(platform.tile_index(tile), cycle, words) for tile, cycle, words in requests]
    for tile, _, words in requests:
        if words < 0:
            raise ValueError(f"negative word count in request from {tile!r}")
    last = platform.tile_index(last_grant) if last_grant is not None else len(order) - 1
    free = bus_free_at
    grants: list[tuple[str, int, int]] = []
    while pending:
        earliest = min(cycle for _, cycle, _ in pending)
        now = max(free, earliest)
        eligible = [p for p in pending if p[1] <= now]
        if bus.arbitration == FIXED_PRIORITY:
            winner = min(eligible, key=lambda p: p[0])
        else:
            def rotation(p: tuple[int, int, int]) -> int:
                return (p[0] - last - 1) % len(order)

            winner = min(eligible, key=rotation)
        pending.remove(winner)
        duration = bus.grant_overhead_cycles + winner[2] * bus.cycles_per_word
        grants.append((order[winner[0]], now, now + duration))
        free = now + duration
        last = winner[0]
    return grants
