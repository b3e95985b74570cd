"""Program generation and measurement instrumentation.

Each tile's static-order schedule expands into a cyclic statement program:
per actor occurrence a Read per input channel, one Compute, and a Write per
output channel.  Annotation inserts Delay fenceposts around the blocks the
chosen granularity can observe; a measurement scenario rewrites one block's
leading Delay into Start and trailing Delay into Stop.  Delay, Nop, Start
and Stop all cost the same control_cost cycles, so swapping them never
shifts the timing of the surrounding code.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from .graphs import SdfGraph
from .mapping import Mapping

READ = "read"
COMPUTE = "compute"
WRITE = "write"
DELAY = "delay"
START = "start"
STOP = "stop"
NOP = "nop"

DEFAULT_CONTROL_COST = 2  # cycles per Delay/Nop/Start/Stop statement


class GranularityLevel(enum.Enum):
    SYSTEM = "system"
    SDFG = "sdfg"
    ACTOR = "actor"
    PHASE = "phase"


@dataclass(frozen=True)
class Statement:
    kind: str
    target: str | None = None  # channel for read/write, actor for compute, block for start/stop
    cycles: int = 0  # duration of delay/nop statements

    @staticmethod
    def read(channel_id: str) -> "Statement":
        return Statement(READ, channel_id)

    @staticmethod
    def write(channel_id: str) -> "Statement":
        return Statement(WRITE, channel_id)

    @staticmethod
    def compute(actor_id: str) -> "Statement":
        return Statement(COMPUTE, actor_id)

    @staticmethod
    def delay(cycles: int) -> "Statement":
        return Statement(DELAY, None, cycles)

    @staticmethod
    def nop(cycles: int) -> "Statement":
        return Statement(NOP, None, cycles)

    @staticmethod
    def start(block_id: str, cycles: int) -> "Statement":
        return Statement(START, block_id, cycles)

    @staticmethod
    def stop(block_id: str, cycles: int) -> "Statement":
        return Statement(STOP, block_id, cycles)


@dataclass(frozen=True)
class BlockInfo:
    """One measurable block: where its start and stop fenceposts sit.

    starts/stops are (tile_id, statement_index) pairs into the annotated
    programs.  Phase and actor blocks repeat once per schedule occurrence;
    graph-level blocks start at every source occurrence and stop after the
    last sink occurrence of each tile that fires sinks.
    """

    block_id: str
    kind: GranularityLevel
    subject: str  # actor id, "actor.phase", or graph id
    starts: tuple[tuple[str, int], ...]
    stops: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class InstrumentedProgram:
    programs: dict[str, tuple[Statement, ...]]  # tile id -> cyclic statement list
    granularity: GranularityLevel
    control_cost: int
    blocks: tuple[BlockInfo, ...] = ()


@dataclass(frozen=True)
class ControllerConfig:
    required_stop_count: int = 1
    num_measurements: int = 1
    auto_restart: bool = True
    buffer_capacity: int = 4096


@dataclass(frozen=True)
class MeasurementScenario:
    scenario_id: str
    block: BlockInfo
    program: InstrumentedProgram
    controller: ControllerConfig


def _occurrence_statements(graph: SdfGraph, actor_id: str) -> tuple[list, list, list]:
    reads = [Statement.read(c.channel_id) for c in graph.inputs_of(actor_id)]
    writes = [Statement.write(c.channel_id) for c in graph.outputs_of(actor_id)]
    return reads, [Statement.compute(actor_id)], writes


def annotate(
    mapping: Mapping,
    graphs: list[SdfGraph],
    granularity: GranularityLevel,
    control_cost: int = DEFAULT_CONTROL_COST,
) -> InstrumentedProgram:
    """Expand schedules into statement programs with measurement fenceposts."""
    owner: dict[str, SdfGraph] = {}
    for g in graphs:
        for a in g.actors:
            owner[a.actor_id] = g

    programs: dict[str, tuple[Statement, ...]] = {}
    # block bookkeeping, keyed by block id
    starts: dict[str, list[tuple[str, int]]] = {}
    stops: dict[str, list[tuple[str, int]]] = {}
    kinds: dict[str, tuple[GranularityLevel, str]] = {}
    # graph-level stops: remember the last sink fencepost per (graph, tile)
    last_sink_stop: dict[tuple[str, str], tuple[str, int]] = {}

    def mark(block_id: str, kind: GranularityLevel, subject: str) -> None:
        kinds.setdefault(block_id, (kind, subject))
        starts.setdefault(block_id, [])
        stops.setdefault(block_id, [])

    for sched in mapping.schedules:
        stmts: list[Statement] = []
        for actor_id in sched.order:
            graph = owner[actor_id]
            reads, computes, writes = _occurrence_statements(graph, actor_id)
            is_source = actor_id in graph.sources()
            is_sink = actor_id in graph.sinks()

            if granularity is GranularityLevel.SYSTEM:
                stmts.extend(reads + computes + writes)
                continue

            if granularity is GranularityLevel.SDFG:
                block_id = graph.graph_id
                mark(block_id, granularity, graph.graph_id)
                if is_source:
                    starts[block_id].append((sched.tile_id, len(stmts)))
                    stmts.append(Statement.delay(control_cost))
                stmts.extend(reads + computes + writes)
                if is_sink:
                    last_sink_stop[(graph.graph_id, sched.tile_id)] = (
                        sched.tile_id,
                        len(stmts),
                    )
                    stmts.append(Statement.delay(control_cost))
                continue

            if granularity is GranularityLevel.ACTOR:
                block_id = actor_id
                mark(block_id, granularity, actor_id)
                starts[block_id].append((sched.tile_id, len(stmts)))
                stmts.append(Statement.delay(control_cost))
                stmts.extend(reads + computes + writes)
                stops[block_id].append((sched.tile_id, len(stmts)))
                stmts.append(Statement.delay(control_cost))
                continue

            # phase level: fenceposts between phases are shared, so an
            # occurrence with all three phases carries four delays
            phase_blocks = []
            if reads:
                phase_blocks.append((f"{actor_id}.read", reads))
            phase_blocks.append((f"{actor_id}.compute", computes))
            if writes:
                phase_blocks.append((f"{actor_id}.write", writes))
            stmts.append(Statement.delay(control_cost))
            for block_id, body in phase_blocks:
                mark(block_id, granularity, block_id)
                starts[block_id].append((sched.tile_id, len(stmts) - 1))
                stmts.extend(body)
                stops[block_id].append((sched.tile_id, len(stmts)))
                stmts.append(Statement.delay(control_cost))
        programs[sched.tile_id] = tuple(stmts)

    for (graph_id, _tile), pos in last_sink_stop.items():
        stops[graph_id].append(pos)

    blocks = tuple(
        BlockInfo(
            block_id=block_id,
            kind=kinds[block_id][0],
            subject=kinds[block_id][1],
            starts=tuple(starts[block_id]),
            stops=tuple(stops[block_id]),
        )
        for block_id in kinds
    )
    return InstrumentedProgram(
        programs=programs,
        granularity=granularity,
        control_cost=control_cost,
        blocks=blocks,
    )


def enumerate_scenarios(
    program: InstrumentedProgram,
    num_measurements: int = 1,
) -> list[MeasurementScenario]:
    """One scenario per measurable block: its fenceposts become Start/Stop."""
    scenarios = []
    for block in program.blocks:
        rewritten = {tile: list(stmts) for tile, stmts in program.programs.items()}
        for tile, idx in block.starts:
            rewritten[tile][idx] = Statement.start(block.block_id, program.control_cost)
        for tile, idx in block.stops:
            rewritten[tile][idx] = Statement.stop(block.block_id, program.control_cost)
        stop_tiles = {tile for tile, _ in block.stops}
        scenarios.append(
            MeasurementScenario(
                scenario_id=f"{program.granularity.value}:{block.block_id}",
                block=block,
                program=replace(
                    program,
                    programs={t: tuple(s) for t, s in rewritten.items()},
                    blocks=(block,),
                ),
                controller=ControllerConfig(
                    required_stop_count=len(stop_tiles),
                    num_measurements=num_measurements,
                ),
            )
        )
    scenarios.sort(key=lambda s: s.scenario_id)
    return scenarios


def neutralize(scenario: MeasurementScenario) -> InstrumentedProgram:
    """Replace the scenario's Start/Stop with Nops of identical cost.

    The result is the deployment build: cycle-for-cycle identical timing
    with no trigger traffic.
    """
    programs = {}
    for tile, stmts in scenario.program.programs.items():
        out = []
        for st in stmts:
            if st.kind in (START, STOP):
                out.append(Statement.nop(scenario.program.control_cost))
            else:
                out.append(st)
        programs[tile] = tuple(out)
    return replace(scenario.program, programs=programs, blocks=())


def invasiveness(
    actor_cycles: float,
    granularity: GranularityLevel,
    control_cost: int = DEFAULT_CONTROL_COST,
) -> float:
    """Added annotation cycles per actor firing, as percent of actor_cycles.

    A three-phase occurrence carries four fenceposts at phase level and two
    at actor level; graph level charges its two fenceposts to the one
    source and one sink occurrence, and system level adds nothing.
    """
    if actor_cycles <= 0:
        raise ValueError("actor_cycles must be positive")
    added = {
        GranularityLevel.SYSTEM: 0,
        GranularityLevel.SDFG: 2 * control_cost,
        GranularityLevel.ACTOR: 2 * control_cost,
        GranularityLevel.PHASE: 4 * control_cost,
    }[granularity]
    return added / actor_cycles * 100.0
