"""Synchronous dataflow graphs: structure, token semantics, repetition vectors.

An SdfGraph is a set of actors connected by FIFO channels with fixed
produce/consume rates.  Firing an actor consumes `consume_rate` tokens from
every input channel and produces `produce_rate` tokens on every output
channel.  The repetition vector gives the minimal positive firing counts
that return the token distribution to its initial state; one such round is
an iteration.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd, lcm

from .errors import (
    FiringNotEnabledError,
    InconsistentGraphError,
    UnknownActorError,
    ValidationReport,
)


@dataclass(frozen=True)
class CostSpec:
    """Compute cost of one firing, in cycles.

    mode "fixed" always charges round(avg); mode "triangular" draws from a
    triangular distribution over [best, worst] with mode avg, seeded per
    actor so runs are reproducible.
    """

    best: float
    avg: float
    worst: float
    mode: str = "fixed"  # "fixed" | "triangular"
    seed: int = 0


@dataclass(frozen=True)
class Actor:
    actor_id: str
    cost: CostSpec


@dataclass(frozen=True)
class Channel:
    channel_id: str
    src: str
    dst: str
    produce_rate: int
    consume_rate: int
    initial_tokens: int = 0
    capacity: int | None = None  # None means unbounded
    token_size_words: int = 1


@dataclass(frozen=True)
class SdfGraph:
    graph_id: str
    actors: tuple[Actor, ...]
    channels: tuple[Channel, ...]

    def actor(self, actor_id: str) -> Actor:
        for a in self.actors:
            if a.actor_id == actor_id:
                return a
        raise UnknownActorError(f"graph {self.graph_id!r} has no actor {actor_id!r}")

    def channel(self, channel_id: str) -> Channel:
        for c in self.channels:
            if c.channel_id == channel_id:
                return c
        raise UnknownActorError(f"graph {self.graph_id!r} has no channel {channel_id!r}")

    def inputs_of(self, actor_id: str) -> tuple[Channel, ...]:
        return tuple(c for c in self.channels if c.dst == actor_id)

    def outputs_of(self, actor_id: str) -> tuple[Channel, ...]:
        return tuple(c for c in self.channels if c.src == actor_id)

    def sources(self) -> tuple[str, ...]:
        """Actors with no input channels."""
        return tuple(a.actor_id for a in self.actors if not self.inputs_of(a.actor_id))

    def sinks(self) -> tuple[str, ...]:
        """Actors with no output channels."""
        return tuple(a.actor_id for a in self.actors if not self.outputs_of(a.actor_id))


@dataclass(frozen=True)
class TokenState:
    """Immutable snapshot of channel occupancy and per-actor firing counts."""

    tokens: dict[str, int]
    firings: dict[str, int] = field(default_factory=dict)


def initial_state(graph: SdfGraph) -> TokenState:
    return TokenState(
        tokens={c.channel_id: c.initial_tokens for c in graph.channels},
        firings={a.actor_id: 0 for a in graph.actors},
    )


def validate_graph(graph: SdfGraph) -> ValidationReport:
    report = ValidationReport()
    seen_actors: set[str] = set()
    for a in graph.actors:
        if a.actor_id in seen_actors:
            report.add(f"duplicate actor id {a.actor_id!r}")
        seen_actors.add(a.actor_id)
        c = a.cost
        if not (0 <= c.best <= c.avg <= c.worst):
            report.add(f"actor {a.actor_id!r}: cost must satisfy 0 <= best <= avg <= worst")
    seen_channels: set[str] = set()
    for ch in graph.channels:
        if ch.channel_id in seen_channels:
            report.add(f"duplicate channel id {ch.channel_id!r}")
        seen_channels.add(ch.channel_id)
        for end in (ch.src, ch.dst):
            if end not in seen_actors:
                report.add(f"channel {ch.channel_id!r} references unknown actor {end!r}")
        if ch.produce_rate < 1 or ch.consume_rate < 1:
            report.add(f"channel {ch.channel_id!r}: rates must be >= 1")
        if ch.initial_tokens < 0:
            report.add(f"channel {ch.channel_id!r}: initial_tokens must be >= 0")
        if ch.token_size_words < 1:
            report.add(f"channel {ch.channel_id!r}: token_size_words must be >= 1")
        if ch.capacity is not None:
            if ch.capacity < ch.initial_tokens:
                report.add(f"channel {ch.channel_id!r}: capacity below initial_tokens")
            # a full round of the producer must fit, or the channel can never move
            if ch.capacity < max(ch.produce_rate, ch.consume_rate):
                report.add(
                    f"channel {ch.channel_id!r}: capacity below max(produce, consume) rate"
                )
    if report.ok:
        try:
            repetition_vector(graph)
        except InconsistentGraphError as exc:
            report.add(str(exc))
    return report


def repetition_vector(graph: SdfGraph) -> dict[str, int]:
    """Minimal positive integer firing counts balancing every channel.

    Solved per connected component by propagating rational ratios along
    channels, then scaling each component to the smallest integer vector.
    Raises InconsistentGraphError when the balance equations conflict.
    """
    if not graph.actors:
        return {}
    ratio: dict[str, Fraction] = {}
    adjacency: dict[str, list[tuple[str, Fraction]]] = {a.actor_id: [] for a in graph.actors}
    for ch in graph.channels:
        if ch.src not in adjacency or ch.dst not in adjacency:
            raise UnknownActorError(f"channel {ch.channel_id!r} references unknown actor")
        # balance: q[src] * produce == q[dst] * consume
        adjacency[ch.src].append((ch.dst, Fraction(ch.produce_rate, ch.consume_rate)))
        adjacency[ch.dst].append((ch.src, Fraction(ch.consume_rate, ch.produce_rate)))

    result: dict[str, int] = {}
    for root in adjacency:
        if root in ratio:
            continue
        ratio[root] = Fraction(1)
        component = [root]
        stack = [root]
        while stack:
            cur = stack.pop()
            for nxt, factor in adjacency[cur]:
                want = ratio[cur] * factor
                if nxt in ratio:
                    if ratio[nxt] != want:
                        raise InconsistentGraphError(
                            f"graph {graph.graph_id!r}: no consistent firing ratio at"
                            f" actor {nxt!r}"
                        )
                else:
                    ratio[nxt] = want
                    component.append(nxt)
                    stack.append(nxt)
        scale = lcm(*(ratio[a].denominator for a in component))
        counts = [int(ratio[a] * scale) for a in component]
        shrink = gcd(*counts)
        for a, n in zip(component, counts):
            result[a] = n // shrink
    return {a.actor_id: result[a.actor_id] for a in graph.actors}


def can_fire(graph: SdfGraph, state: TokenState, actor_id: str) -> bool:
    """True iff every input holds enough tokens and every bounded output has room."""
    graph.actor(actor_id)
    for ch in graph.inputs_of(actor_id):
        if state.tokens[ch.channel_id] < ch.consume_rate:
            return False
    for ch in graph.outputs_of(actor_id):
        if ch.capacity is not None and state.tokens[ch.channel_id] + ch.produce_rate > ch.capacity:
            return False
    return True


def fire(graph: SdfGraph, state: TokenState, actor_id: str) -> TokenState:
    if not can_fire(graph, state, actor_id):
        raise FiringNotEnabledError(f"actor {actor_id!r} is not enabled")
    tokens = dict(state.tokens)
    for ch in graph.inputs_of(actor_id):
        tokens[ch.channel_id] -= ch.consume_rate
    for ch in graph.outputs_of(actor_id):
        tokens[ch.channel_id] += ch.produce_rate
    firings = dict(state.firings)
    firings[actor_id] = firings.get(actor_id, 0) + 1
    return replace(state, tokens=tokens, firings=firings)


def is_iteration_complete(graph: SdfGraph, state: TokenState) -> bool:
    """True iff tokens are back at the initial distribution and every actor has
    fired an identical positive whole number of repetition vectors."""
    q = repetition_vector(graph)
    rounds: int | None = None
    for actor_id, n in q.items():
        fired = state.firings.get(actor_id, 0)
        if fired == 0 or fired % n != 0:
            return False
        k = fired // n
        if rounds is None:
            rounds = k
        elif k != rounds:
            return False
    for ch in graph.channels:
        if state.tokens[ch.channel_id] != ch.initial_tokens:
            return False
    return True
