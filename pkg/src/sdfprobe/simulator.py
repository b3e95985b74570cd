"""Cycle-level execution of instrumented programs on a platform model.

Each tile cyclically executes its statement program.  Reads and writes on
shared channels poll channel state over the bus and then move
rate x token_size words in grants of at most words_per_grant words; blocked
statements re-poll every poll_interval cycles, and all that traffic
competes under the bus arbiter.  Private channels are checked locally and
transfer in zero cycles.  Token counts commit when the final chunk of a
transfer completes, so channel bounds hold at every instant.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import (
    CycleBudgetExceededError,
    DeadlockError,
    NonPositiveCyclesError,
)
from .graphs import SdfGraph
from .instrument import (
    COMPUTE,
    DELAY,
    NOP,
    READ,
    START,
    STOP,
    WRITE,
    InstrumentedProgram,
)
from .mapping import Mapping
from .soc import FIXED_PRIORITY, Platform

_KIND_TO_OP = {
    READ: K.OP_READ,
    COMPUTE: K.OP_COMPUTE,
    WRITE: K.OP_WRITE,
    DELAY: K.OP_DELAY,
    START: K.OP_START,
    STOP: K.OP_STOP,
    NOP: K.OP_NOP,
}
_OP_TO_KIND = {v: k for k, v in _KIND_TO_OP.items()}


@dataclass(frozen=True)
class CostModel:
    poll_interval_cycles: int = 10
    poll_bus_words: int = 1
    read_extra_cycles_per_token: int = 0
    write_extra_cycles_per_token: int = 0


@dataclass(frozen=True)
class StopCondition:
    """When simulate() halts: after N iterations of one graph, after N
    completed measurements, at a fixed cycle, or after every graph has
    finished N iterations."""

    kind: str
    count: int
    graph_id: str | None = None
    required_stop_count: int = 1

    @staticmethod
    def iterations(graph_id: str, count: int) -> "StopCondition":
        return StopCondition("iterations", count, graph_id=graph_id)

    @staticmethod
    def measured(count: int, required_stop_count: int = 1) -> "StopCondition":
        return StopCondition("measured", count, required_stop_count=required_stop_count)

    @staticmethod
    def cycles(count: int) -> "StopCondition":
        return StopCondition("cycles", count)

    @staticmethod
    def all_iterations(count: int) -> "StopCondition":
        return StopCondition("all_iterations", count)


@dataclass(frozen=True)
class TraceRecord:
    tile_id: str
    kind: str
    subject: str | None
    start: int
    end: int

    @property
    def duration(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class TriggerEvent:
    kind: str  # "start" | "stop"
    block_id: str
    tile_id: str
    cycle: int


@dataclass
class Trace:
    records: list[TraceRecord]
    trigger_events: list[TriggerEvent]
    bus_busy: np.ndarray  # (n, 2) busy intervals, disjoint and ordered
    tokens: dict[str, int]
    firings: dict[str, int]
    iterations: dict[str, int]
    end_cycle: int
    tile_ids: tuple[str, ...]
    # raw (tile, op, subject, start, end) rows kept for fast power synthesis
    rec_raw: np.ndarray = field(repr=False, default=None)


def _attach_firings(stmts, graphs_by_actor):
    """Index of the statement whose completion ends each firing.

    A firing completes at the last write of its occurrence, or at the
    compute itself for sink actors.  Control statements between phases are
    skipped while scanning; a malformed occurrence falls back to the
    compute statement.
    """
    fire = [-1] * len(stmts)
    for i, st in enumerate(stmts):
        if st.kind != COMPUTE:
            continue
        actor_id = st.target
        graph = graphs_by_actor[actor_id]
        outs = {c.channel_id for c in graph.outputs_of(actor_id)}
        if not outs:
            fire[i] = i
            continue
        remaining = set(outs)
        j = i + 1
        last_write = -1
        while j < len(stmts) and remaining:
            kind = stmts[j].kind
            if kind in (DELAY, NOP, START, STOP):
                j += 1
                continue
            if kind == WRITE and stmts[j].target in remaining:
                remaining.discard(stmts[j].target)
                last_write = j
                j += 1
                continue
            break
        fire[last_write if not remaining else i] = i
    return fire


def simulate(
    platform: Platform,
    mapping: Mapping,
    program: InstrumentedProgram,
    graphs: list[SdfGraph],
    cost_model: CostModel | None = None,
    stop: StopCondition | None = None,
    seed: int = 0,
    budget: int = 100_000_000,
    max_steps: int = 200_000_000,
) -> Trace:
    cost_model = cost_model or CostModel()
    if stop is None:
        raise ValueError("simulate() needs a StopCondition")
    if cost_model.poll_interval_cycles < 1:
        raise NonPositiveCyclesError("poll_interval_cycles must be >= 1")
    if stop.kind != "cycles" and stop.count < 1:
        raise NonPositiveCyclesError("stop condition count must be >= 1")

    tile_ids = tuple(t.tile_id for t in platform.tiles)
    actor_ids: list[str] = []
    channel_ids: list[str] = []
    graph_ids = [g.graph_id for g in graphs]
    graphs_by_actor: dict[str, SdfGraph] = {}
    for g in graphs:
        for a in g.actors:
            actor_ids.append(a.actor_id)
            graphs_by_actor[a.actor_id] = g
        for c in g.channels:
            channel_ids.append(c.channel_id)
    act_index = {a: i for i, a in enumerate(actor_ids)}
    ch_index = {c: i for i, c in enumerate(channel_ids)}
    g_index = {g: i for i, g in enumerate(graph_ids)}

    # channel tables
    C = len(channel_ids)
    ch_init = np.zeros(C, np.int64)
    ch_cap = np.zeros(C, np.int64)
    ch_prod = np.zeros(C, np.int64)
    ch_cons = np.zeros(C, np.int64)
    ch_rwords = np.zeros(C, np.int64)
    ch_wwords = np.zeros(C, np.int64)
    ch_rextra = np.zeros(C, np.int64)
    ch_wextra = np.zeros(C, np.int64)
    ch_shared = np.zeros(C, np.int64)
    ch_graph = np.zeros(C, np.int64)
    for g in graphs:
        for c in g.channels:
            i = ch_index[c.channel_id]
            ch_init[i] = c.initial_tokens
            ch_cap[i] = c.capacity if c.capacity is not None else K._UNBOUNDED_CAP
            ch_prod[i] = c.produce_rate
            ch_cons[i] = c.consume_rate
            ch_rwords[i] = c.consume_rate * c.token_size_words
            ch_wwords[i] = c.produce_rate * c.token_size_words
            ch_rextra[i] = c.consume_rate * cost_model.read_extra_cycles_per_token
            ch_wextra[i] = c.produce_rate * cost_model.write_extra_cycles_per_token
            region = mapping.region_of(c.channel_id)
            ch_shared[i] = 1 if platform.region(region).shared else 0
            ch_graph[i] = g_index[g.graph_id]

    # actor tables
    A = len(actor_ids)
    act_best = np.zeros(A, np.float64)
    act_avg = np.zeros(A, np.float64)
    act_worst = np.zeros(A, np.float64)
    act_mode = np.zeros(A, np.int64)
    act_seed = np.zeros(A, np.int64)
    act_graph = np.zeros(A, np.int64)
    act_q = np.ones(A, np.int64)
    from .graphs import repetition_vector

    for g in graphs:
        q = repetition_vector(g)
        for a in g.actors:
            i = act_index[a.actor_id]
            act_best[i] = a.cost.best
            act_avg[i] = a.cost.avg
            act_worst[i] = a.cost.worst
            act_mode[i] = 1 if a.cost.mode == "triangular" else 0
            act_seed[i] = abs(a.cost.seed) % K._MINSTD_MOD
            act_graph[i] = g_index[g.graph_id]
            act_q[i] = q[a.actor_id]

    # encode per-tile programs in platform tile order
    block_ids: list[str] = []
    block_index: dict[str, int] = {}
    prog_op: list[int] = []
    prog_arg: list[int] = []
    prog_cyc: list[int] = []
    prog_fire: list[int] = []
    tile_base = np.zeros(len(tile_ids), np.int64)
    tile_len = np.zeros(len(tile_ids), np.int64)
    for ti, tile_id in enumerate(tile_ids):
        stmts = list(program.programs.get(tile_id, ()))
        tile_base[ti] = len(prog_op)
        tile_len[ti] = len(stmts)
        fire = _attach_firings(stmts, graphs_by_actor)
        for si, st in enumerate(stmts):
            prog_op.append(_KIND_TO_OP[st.kind])
            if st.kind in (READ, WRITE):
                prog_arg.append(ch_index[st.target])
                prog_cyc.append(0)
            elif st.kind == COMPUTE:
                prog_arg.append(act_index[st.target])
                prog_cyc.append(0)
            elif st.kind in (START, STOP):
                if st.target not in block_index:
                    block_index[st.target] = len(block_ids)
                    block_ids.append(st.target)
                prog_arg.append(block_index[st.target])
                if st.cycles < 0:
                    raise NonPositiveCyclesError("control statement cycles must be >= 0")
                prog_cyc.append(st.cycles)
            else:
                prog_arg.append(-1)
                if st.cycles < 0:
                    raise NonPositiveCyclesError("delay cycles must be >= 0")
                prog_cyc.append(st.cycles)
            prog_fire.append(-1)
        base = int(tile_base[ti])
        for pos, comp_idx in enumerate(fire):
            if comp_idx >= 0:
                prog_fire[base + pos] = act_index[stmts[comp_idx].target]

    stop_kind = {
        "iterations": K.STOP_ITERATIONS,
        "measured": K.STOP_MEASURED,
        "cycles": K.STOP_CYCLES,
        "all_iterations": K.STOP_ALL_ITERATIONS,
    }[stop.kind]
    stop_graph = g_index[stop.graph_id] if stop.graph_id is not None else 0

    result = K.sim_kernel(
        np.asarray(prog_op, np.int64),
        np.asarray(prog_arg, np.int64),
        np.asarray(prog_cyc, np.int64),
        np.asarray(prog_fire, np.int64),
        tile_base,
        tile_len,
        ch_init,
        ch_cap,
        ch_prod,
        ch_cons,
        ch_rwords,
        ch_wwords,
        ch_rextra,
        ch_wextra,
        ch_shared,
        ch_graph,
        act_best,
        act_avg,
        act_worst,
        act_mode,
        act_seed,
        act_graph,
        act_q,
        len(graph_ids),
        1 if platform.bus.arbitration == FIXED_PRIORITY else 0,
        platform.bus.grant_overhead_cycles,
        platform.bus.cycles_per_word,
        platform.bus.words_per_grant,
        cost_model.poll_interval_cycles,
        cost_model.poll_bus_words,
        stop_kind,
        stop_graph,
        stop.count,
        stop.required_stop_count,
        abs(int(seed)) % K._MINSTD_MOD,
        budget,
        max_steps,
    )
    (
        status,
        end_cycle,
        rec,
        trig,
        bus,
        tokens,
        firings,
        iters,
        blocked_kind,
        blocked_ch,
    ) = result

    if status == K.ST_DEADLOCK:
        blocked = {}
        for ti, tile_id in enumerate(tile_ids):
            if blocked_kind[ti] > 0:
                blocked[tile_id] = (
                    "read" if blocked_kind[ti] == 1 else "write",
                    channel_ids[int(blocked_ch[ti])],
                )
        raise DeadlockError(
            f"deadlock at cycle {int(end_cycle)}: every tile blocked", blocked
        )
    if status in (K.ST_BUDGET, K.ST_STEPS):
        raise CycleBudgetExceededError(
            f"no stop condition after {int(end_cycle)} cycles"
        )
    if status != K.ST_OK:
        raise RuntimeError(f"simulation invariant violated (status {int(status)})")

    records = []
    for row in rec:
        op = int(row[1])
        kind = _OP_TO_KIND[op]
        subj: str | None
        if op in (K.OP_READ, K.OP_WRITE):
            subj = channel_ids[int(row[2])]
        elif op == K.OP_COMPUTE:
            subj = actor_ids[int(row[2])]
        elif op in (K.OP_START, K.OP_STOP):
            subj = block_ids[int(row[2])]
        else:
            subj = None
        records.append(
            TraceRecord(tile_ids[int(row[0])], kind, subj, int(row[3]), int(row[4]))
        )
    triggers = [
        TriggerEvent(
            "start" if int(row[0]) == 0 else "stop",
            block_ids[int(row[1])],
            tile_ids[int(row[2])],
            int(row[3]),
        )
        for row in trig
    ]
    return Trace(
        records=records,
        trigger_events=triggers,
        bus_busy=bus,
        tokens={c: int(tokens[ch_index[c]]) for c in channel_ids},
        firings={a: int(firings[act_index[a]]) for a in actor_ids},
        iterations={g: int(iters[g_index[g]]) for g in graph_ids},
        end_cycle=int(end_cycle),
        tile_ids=tile_ids,
        rec_raw=rec,
    )


def detect_deadlock(
    graphs: list[SdfGraph],
    tokens: dict[str, int],
    waiting: dict[str, tuple[str, str] | None],
) -> bool:
    """True iff every listed tile is blocked at a read or write whose guard
    cannot hold now; with all tiles stuck, no token count will ever change,
    so the guards can never become true."""
    channels = {}
    for g in graphs:
        for c in g.channels:
            channels[c.channel_id] = c
    if not waiting:
        return False
    for entry in waiting.values():
        if entry is None:
            return False
        kind, channel_id = entry
        ch = channels[channel_id]
        have = tokens[channel_id]
        if kind == "read":
            if have >= ch.consume_rate:
                return False
        else:
            cap = ch.capacity if ch.capacity is not None else None
            if cap is None or cap - have >= ch.produce_rate:
                return False
    return True
