"""Design-under-test descriptions: load and save XML or JSON files.

A DUT file bundles everything one experiment needs: the graphs, the
platform, one or more candidate mappings, cost and power models, the
sampler, and the experiment defaults.  Both formats carry the same
structure; the loader picks the parser from the file extension.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from xml.etree import ElementTree

from .errors import ParseError, ValidationReport
from .graphs import Actor, Channel, CostSpec, SdfGraph, validate_graph
from .instrument import DEFAULT_CONTROL_COST, GranularityLevel
from .mapping import Mapping, StaticOrderSchedule, validate_mapping
from .power import PowerModel, SamplerSpec
from .simulator import CostModel
from .soc import BusSpec, MemoryRegion, Platform, Tile, validate_platform


@dataclass
class DutDescription:
    graphs: list[SdfGraph]
    platform: Platform
    mappings: list[Mapping]
    cost_model: CostModel = field(default_factory=CostModel)
    power_model: PowerModel = field(default_factory=PowerModel)
    sampler: SamplerSpec = field(default_factory=SamplerSpec)
    granularity: GranularityLevel = GranularityLevel.PHASE
    repetitions: int = 10
    seed: int = 1
    control_cost: int = DEFAULT_CONTROL_COST

    @property
    def clock_hz(self) -> int:
        return self.platform.tiles[0].clock_hz


def validate_dut(dut: DutDescription) -> ValidationReport:
    report = ValidationReport()
    report.extend(validate_platform(dut.platform))
    for g in dut.graphs:
        report.extend(validate_graph(g))
    for m in dut.mappings:
        report.extend(validate_mapping(m, dut.platform, dut.graphs))
    if dut.repetitions < 1:
        report.add("repetitions must be >= 1")
    if dut.control_cost < 0:
        report.add("control_cost must be >= 0")
    if not dut.mappings:
        report.add("DUT carries no mapping")
    return report


def bundled_path(name: str) -> Path:
    """Path of a DUT file shipped with the package (sobel_quad.xml,
    sobel_quad.json or sobel_jpeg.xml)."""
    return Path(str(resources.files("sdfprobe").joinpath("data", name)))


def _attr(elem, name: str, conv, default=None, where: str = ""):
    raw = elem.get(name)
    if raw is None:
        if default is not None:
            return default
        raise ParseError(f"{where}: element <{elem.tag}> is missing attribute {name!r}")
    try:
        return conv(raw)
    except ValueError as exc:
        raise ParseError(
            f"{where}: attribute {name!r} of <{elem.tag}> is not a valid value: {raw!r}"
        ) from exc


def _bool(raw: str) -> bool:
    if raw in ("true", "1", "yes"):
        return True
    if raw in ("false", "0", "no"):
        return False
    raise ValueError(raw)


def load_dut(path) -> DutDescription:
    """Parse a DUT description; a bare bundled file name also resolves."""
    p = Path(path)
    if not p.exists():
        for name in (p.name, p.name + ".xml", p.name + ".json"):
            candidate = bundled_path(name)
            if candidate.exists():
                p = candidate
                break
    if not p.exists():
        raise FileNotFoundError(f"no such DUT file: {path}")
    if p.suffix.lower() == ".json":
        return _load_json(p)
    if p.suffix.lower() == ".xml":
        return _load_xml(p)
    raise ParseError(f"{p}: unknown DUT format {p.suffix!r} (expected .xml or .json)")


def _load_xml(path: Path) -> DutDescription:
    where = str(path)
    try:
        root = ElementTree.parse(path).getroot()
    except ElementTree.ParseError as exc:
        raise ParseError(f"{where}: {exc}") from exc
    if root.tag != "dut":
        raise ParseError(f"{where}: root element must be <dut>, got <{root.tag}>")

    plat_elem = root.find("platform")
    if plat_elem is None:
        raise ParseError(f"{where}: missing <platform>")
    bus_elem = plat_elem.find("bus")
    bus = BusSpec() if bus_elem is None else BusSpec(
        arbitration=bus_elem.get("arbitration", "round_robin"),
        grant_overhead_cycles=_attr(bus_elem, "grant-overhead", int, 0, where),
        cycles_per_word=_attr(bus_elem, "cycles-per-word", int, 1, where),
        words_per_grant=_attr(bus_elem, "words-per-grant", int, 8, where),
    )
    regions = tuple(
        MemoryRegion(
            _attr(r, "id", str, where=where), _attr(r, "shared", _bool, where=where)
        )
        for r in plat_elem.findall("region")
    ) or Platform("x", ()).regions
    tiles = tuple(
        Tile(
            _attr(t, "id", str, where=where),
            clock_hz=_attr(t, "clock-hz", int, 100_000_000, where),
            private_region=t.get("private-region", "private"),
        )
        for t in plat_elem.findall("tile")
    )
    platform = Platform(
        platform_id=_attr(plat_elem, "id", str, where=where),
        tiles=tiles,
        bus=bus,
        regions=regions,
        trigger_link_worst_delay_cycles=_attr(plat_elem, "trigger-delay", int, 25, where),
    )

    graphs = []
    for g_elem in root.findall("graph"):
        actors = tuple(
            Actor(
                _attr(a, "id", str, where=where),
                CostSpec(
                    best=_attr(a, "best", float, where=where),
                    avg=_attr(a, "avg", float, where=where),
                    worst=_attr(a, "worst", float, where=where),
                    mode=a.get("mode", "fixed"),
                    seed=_attr(a, "seed", int, 0, where),
                ),
            )
            for a in g_elem.findall("actor")
        )
        channels = tuple(
            Channel(
                channel_id=_attr(c, "id", str, where=where),
                src=_attr(c, "src", str, where=where),
                dst=_attr(c, "dst", str, where=where),
                produce_rate=_attr(c, "produce", int, where=where),
                consume_rate=_attr(c, "consume", int, where=where),
                initial_tokens=_attr(c, "initial", int, 0, where),
                capacity=(int(c.get("capacity")) if c.get("capacity") else None),
                token_size_words=_attr(c, "token-words", int, 1, where),
            )
            for c in g_elem.findall("channel")
        )
        graphs.append(SdfGraph(_attr(g_elem, "id", str, where=where), actors, channels))

    mappings = []
    for m_elem in root.findall("mapping"):
        schedules = []
        actor_to_tile: dict[str, str] = {}
        for s_elem in m_elem.findall("schedule"):
            tile_id = _attr(s_elem, "tile", str, where=where)
            order = tuple(_attr(s_elem, "order", str, where=where).split())
            schedules.append(StaticOrderSchedule(tile_id, order))
            for actor_id in order:
                actor_to_tile[actor_id] = tile_id
        places = {
            _attr(pl, "channel", str, where=where): _attr(pl, "region", str, where=where)
            for pl in m_elem.findall("place")
        }
        mappings.append(
            Mapping(
                mapping_id=_attr(m_elem, "id", str, where=where),
                actor_to_tile=actor_to_tile,
                schedules=tuple(schedules),
                channel_region=places,
                default_region=m_elem.get("default-region", "shared0"),
            )
        )

    cost_elem = root.find("cost")
    cost = CostModel() if cost_elem is None else CostModel(
        poll_interval_cycles=_attr(cost_elem, "poll-interval", int, 10, where),
        poll_bus_words=_attr(cost_elem, "poll-words", int, 1, where),
        read_extra_cycles_per_token=_attr(cost_elem, "read-extra", int, 0, where),
        write_extra_cycles_per_token=_attr(cost_elem, "write-extra", int, 0, where),
    )
    power_elem = root.find("power")
    power = PowerModel() if power_elem is None else PowerModel(
        static_watts=_attr(power_elem, "static", float, 0.35, where),
        active_watts_per_tile=_attr(power_elem, "active", float, 0.06, where),
        polling_watts_per_tile=_attr(power_elem, "polling", float, 0.03, where),
        bus_watts=_attr(power_elem, "bus", float, 0.05, where),
        idle_watts_per_tile=_attr(power_elem, "idle", float, 0.01, where),
    )
    s_elem = root.find("sampler")
    sampler = SamplerSpec() if s_elem is None else SamplerSpec(
        sample_rate_hz=_attr(s_elem, "rate-hz", int, 84_000, where),
        adc_bits=_attr(s_elem, "bits", int, 12, where),
        adc_full_scale_watts=_attr(s_elem, "full-scale", float, 2.0, where),
        adc_noise_lsb=_attr(s_elem, "noise-lsb", int, 5, where),
        trigger_delay_cycles=_attr(s_elem, "trigger-delay", int, 25, where),
        trigger_delay_mode=s_elem.get("mode", "uniform"),
        min_block_cycles=_attr(s_elem, "min-block", int, 1200, where),
        rng_seed=_attr(s_elem, "seed", int, 0, where),
    )

    gran_raw = root.get("granularity", "phase")
    try:
        granularity = GranularityLevel(gran_raw)
    except ValueError as exc:
        raise ParseError(f"{where}: unknown granularity {gran_raw!r}") from exc
    return DutDescription(
        graphs=graphs,
        platform=platform,
        mappings=mappings,
        cost_model=cost,
        power_model=power,
        sampler=sampler,
        granularity=granularity,
        repetitions=_attr(root, "repetitions", int, 10, where),
        seed=_attr(root, "seed", int, 1, where),
        control_cost=_attr(root, "control-cost", int, DEFAULT_CONTROL_COST, where),
    )


def _load_json(path: Path) -> DutDescription:
    where = str(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{where}:{exc.lineno}: {exc.msg}") from exc
    try:
        plat = doc["platform"]
        platform = Platform(
            platform_id=plat["id"],
            tiles=tuple(
                Tile(
                    t["id"],
                    clock_hz=t.get("clock_hz", 100_000_000),
                    private_region=t.get("private_region", "private"),
                )
                for t in plat["tiles"]
            ),
            bus=BusSpec(**plat.get("bus", {})),
            regions=tuple(
                MemoryRegion(r["id"], r["shared"]) for r in plat["regions"]
            )
            if plat.get("regions")
            else Platform("x", ()).regions,
            trigger_link_worst_delay_cycles=plat.get("trigger_delay", 25),
        )
        graphs = [
            SdfGraph(
                g["id"],
                actors=tuple(
                    Actor(
                        a["id"],
                        CostSpec(
                            best=a["best"],
                            avg=a["avg"],
                            worst=a["worst"],
                            mode=a.get("mode", "fixed"),
                            seed=a.get("seed", 0),
                        ),
                    )
                    for a in g["actors"]
                ),
                channels=tuple(
                    Channel(
                        channel_id=c["id"],
                        src=c["src"],
                        dst=c["dst"],
                        produce_rate=c["produce"],
                        consume_rate=c["consume"],
                        initial_tokens=c.get("initial", 0),
                        capacity=c.get("capacity"),
                        token_size_words=c.get("token_words", 1),
                    )
                    for c in g["channels"]
                ),
            )
            for g in doc["graphs"]
        ]
        mappings = []
        for m in doc["mappings"]:
            schedules = tuple(
                StaticOrderSchedule(s["tile"], tuple(s["order"])) for s in m["schedules"]
            )
            actor_to_tile = {a: s.tile_id for s in schedules for a in s.order}
            mappings.append(
                Mapping(
                    mapping_id=m["id"],
                    actor_to_tile=actor_to_tile,
                    schedules=schedules,
                    channel_region=m.get("places", {}),
                    default_region=m.get("default_region", "shared0"),
                )
            )
        return DutDescription(
            graphs=graphs,
            platform=platform,
            mappings=mappings,
            cost_model=CostModel(**doc.get("cost_model", {})),
            power_model=PowerModel(**doc.get("power_model", {})),
            sampler=SamplerSpec(**doc.get("sampler", {})),
            granularity=GranularityLevel(doc.get("granularity", "phase")),
            repetitions=doc.get("repetitions", 10),
            seed=doc.get("seed", 1),
            control_cost=doc.get("control_cost", DEFAULT_CONTROL_COST),
        )
    except KeyError as exc:
        raise ParseError(f"{where}: missing required field {exc}") from exc
    except TypeError as exc:
        raise ParseError(f"{where}: malformed field ({exc})") from exc


def save_dut(dut: DutDescription, path) -> None:
    p = Path(path)
    if p.suffix.lower() == ".json":
        p.write_text(json.dumps(_to_dict(dut), indent=2) + "\n")
    elif p.suffix.lower() == ".xml":
        p.write_text(_to_xml(dut))
    else:
        raise ParseError(f"{p}: unknown DUT format {p.suffix!r} (expected .xml or .json)")


def _to_dict(dut: DutDescription) -> dict:
    return {
        "granularity": dut.granularity.value,
        "repetitions": dut.repetitions,
        "seed": dut.seed,
        "control_cost": dut.control_cost,
        "platform": {
            "id": dut.platform.platform_id,
            "trigger_delay": dut.platform.trigger_link_worst_delay_cycles,
            "bus": {
                "arbitration": dut.platform.bus.arbitration,
                "grant_overhead_cycles": dut.platform.bus.grant_overhead_cycles,
                "cycles_per_word": dut.platform.bus.cycles_per_word,
                "words_per_grant": dut.platform.bus.words_per_grant,
            },
            "regions": [
                {"id": r.region_id, "shared": r.shared} for r in dut.platform.regions
            ],
            "tiles": [
                {
                    "id": t.tile_id,
                    "clock_hz": t.clock_hz,
                    "private_region": t.private_region,
                }
                for t in dut.platform.tiles
            ],
        },
        "graphs": [
            {
                "id": g.graph_id,
                "actors": [
                    {
                        "id": a.actor_id,
                        "best": a.cost.best,
                        "avg": a.cost.avg,
                        "worst": a.cost.worst,
                        "mode": a.cost.mode,
                        "seed": a.cost.seed,
                    }
                    for a in g.actors
                ],
                "channels": [
                    {
                        "id": c.channel_id,
                        "src": c.src,
                        "dst": c.dst,
                        "produce": c.produce_rate,
                        "consume": c.consume_rate,
                        "initial": c.initial_tokens,
                        "capacity": c.capacity,
                        "token_words": c.token_size_words,
                    }
                    for c in g.channels
                ],
            }
            for g in dut.graphs
        ],
        "mappings": [
            {
                "id": m.mapping_id,
                "default_region": m.default_region,
                "schedules": [
                    {"tile": s.tile_id, "order": list(s.order)} for s in m.schedules
                ],
                "places": m.channel_region,
            }
            for m in dut.mappings
        ],
        "cost_model": {
            "poll_interval_cycles": dut.cost_model.poll_interval_cycles,
            "poll_bus_words": dut.cost_model.poll_bus_words,
            "read_extra_cycles_per_token": dut.cost_model.read_extra_cycles_per_token,
            "write_extra_cycles_per_token": dut.cost_model.write_extra_cycles_per_token,
        },
        "power_model": {
            "static_watts": dut.power_model.static_watts,
            "active_watts_per_tile": dut.power_model.active_watts_per_tile,
            "polling_watts_per_tile": dut.power_model.polling_watts_per_tile,
            "bus_watts": dut.power_model.bus_watts,
            "idle_watts_per_tile": dut.power_model.idle_watts_per_tile,
        },
        "sampler": {
            "sample_rate_hz": dut.sampler.sample_rate_hz,
            "adc_bits": dut.sampler.adc_bits,
            "adc_full_scale_watts": dut.sampler.adc_full_scale_watts,
            "adc_noise_lsb": dut.sampler.adc_noise_lsb,
            "trigger_delay_cycles": dut.sampler.trigger_delay_cycles,
            "trigger_delay_mode": dut.sampler.trigger_delay_mode,
            "min_block_cycles": dut.sampler.min_block_cycles,
            "rng_seed": dut.sampler.rng_seed,
        },
    }


def _to_xml(dut: DutDescription) -> str:
    lines = [
        '<?xml version="1.0" encoding="utf-8"?>',
        f'<dut granularity="{dut.granularity.value}" repetitions="{dut.repetitions}"'
        f' seed="{dut.seed}" control-cost="{dut.control_cost}">',
        f'  <platform id="{dut.platform.platform_id}"'
        f' trigger-delay="{dut.platform.trigger_link_worst_delay_cycles}">',
        f'    <bus arbitration="{dut.platform.bus.arbitration}"'
        f' grant-overhead="{dut.platform.bus.grant_overhead_cycles}"'
        f' cycles-per-word="{dut.platform.bus.cycles_per_word}"'
        f' words-per-grant="{dut.platform.bus.words_per_grant}"/>',
    ]
    for r in dut.platform.regions:
        lines.append(
            f'    <region id="{r.region_id}" shared="{"true" if r.shared else "false"}"/>'
        )
    for t in dut.platform.tiles:
        lines.append(
            f'    <tile id="{t.tile_id}" clock-hz="{t.clock_hz}"'
            f' private-region="{t.private_region}"/>'
        )
    lines.append("  </platform>")
    for g in dut.graphs:
        lines.append(f'  <graph id="{g.graph_id}">')
        for a in g.actors:
            c = a.cost
            lines.append(
                f'    <actor id="{a.actor_id}" best="{c.best!r}" avg="{c.avg!r}"'
                f' worst="{c.worst!r}" mode="{c.mode}" seed="{c.seed}"/>'
            )
        for ch in g.channels:
            cap = f' capacity="{ch.capacity}"' if ch.capacity is not None else ""
            lines.append(
                f'    <channel id="{ch.channel_id}" src="{ch.src}" dst="{ch.dst}"'
                f' produce="{ch.produce_rate}" consume="{ch.consume_rate}"'
                f' initial="{ch.initial_tokens}"{cap}'
                f' token-words="{ch.token_size_words}"/>'
            )
        lines.append("  </graph>")
    for m in dut.mappings:
        lines.append(f'  <mapping id="{m.mapping_id}" default-region="{m.default_region}">')
        for s in m.schedules:
            lines.append(f'    <schedule tile="{s.tile_id}" order="{" ".join(s.order)}"/>')
        for ch_id, region in m.channel_region.items():
            lines.append(f'    <place channel="{ch_id}" region="{region}"/>')
        lines.append("  </mapping>")
    cm = dut.cost_model
    lines.append(
        f'  <cost poll-interval="{cm.poll_interval_cycles}" poll-words="{cm.poll_bus_words}"'
        f' read-extra="{cm.read_extra_cycles_per_token}"'
        f' write-extra="{cm.write_extra_cycles_per_token}"/>'
    )
    pm = dut.power_model
    lines.append(
        f'  <power static="{pm.static_watts!r}" active="{pm.active_watts_per_tile!r}"'
        f' polling="{pm.polling_watts_per_tile!r}" bus="{pm.bus_watts!r}"'
        f' idle="{pm.idle_watts_per_tile!r}"/>'
    )
    sp = dut.sampler
    lines.append(
        f'  <sampler rate-hz="{sp.sample_rate_hz}" bits="{sp.adc_bits}"'
        f' full-scale="{sp.adc_full_scale_watts!r}" noise-lsb="{sp.adc_noise_lsb}"'
        f' trigger-delay="{sp.trigger_delay_cycles}" mode="{sp.trigger_delay_mode}"'
        f' min-block="{sp.min_block_cycles}" seed="{sp.rng_seed}"/>'
    )
    lines.append("</dut>")
    return "\n".join(lines) + "\n"
