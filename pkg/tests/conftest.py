import pytest
from hypothesis import HealthCheck, settings

from sdfprobe import (
    Actor,
    BusSpec,
    Channel,
    CostSpec,
    Mapping,
    MemoryRegion,
    Platform,
    SdfGraph,
    StaticOrderSchedule,
    Tile,
)

# first jit compilation can take seconds; never let hypothesis call it flaky
settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    max_examples=50,
)
settings.load_profile("suite")


def fixed(cycles: float) -> CostSpec:
    return CostSpec(best=cycles, avg=cycles, worst=cycles, mode="fixed")


def chain_graph(
    graph_id: str = "chain",
    costs: tuple[float, ...] = (10.0, 20.0, 30.0),
    rates: tuple[tuple[int, int], ...] | None = None,
    token_words: int = 4,
    capacity: int | None = None,
) -> SdfGraph:
    """Linear a0 -> a1 -> ... with per-edge (produce, consume) rates."""
    n = len(costs)
    rates = rates or tuple((1, 1) for _ in range(n - 1))
    actors = tuple(Actor(f"a{i}", fixed(costs[i])) for i in range(n))
    channels = tuple(
        Channel(
            channel_id=f"c{i}",
            src=f"a{i}",
            dst=f"a{i + 1}",
            produce_rate=rates[i][0],
            consume_rate=rates[i][1],
            capacity=capacity,
            token_size_words=token_words,
        )
        for i in range(n - 1)
    )
    return SdfGraph(graph_id, actors, channels)


def make_platform(
    n_tiles: int = 2,
    arbitration: str = "round_robin",
    grant_overhead: int = 0,
    words_per_grant: int = 8,
) -> Platform:
    return Platform(
        platform_id="plat",
        tiles=tuple(Tile(f"t{i + 1}") for i in range(n_tiles)),
        bus=BusSpec(
            arbitration=arbitration,
            grant_overhead_cycles=grant_overhead,
            cycles_per_word=1,
            words_per_grant=words_per_grant,
        ),
        regions=(MemoryRegion("private", False), MemoryRegion("shared0", True)),
    )


def make_mapping(assignment: dict[str, list[str]], default_region: str = "shared0") -> Mapping:
    """assignment: tile_id -> actor order."""
    actor_to_tile = {a: t for t, order in assignment.items() for a in order}
    schedules = tuple(
        StaticOrderSchedule(t, tuple(order)) for t, order in assignment.items() if order
    )
    return Mapping(
        mapping_id="m",
        actor_to_tile=actor_to_tile,
        schedules=schedules,
        default_region=default_region,
    )


@pytest.fixture
def two_tiles() -> Platform:
    return make_platform(2)


@pytest.fixture
def quad() -> Platform:
    return make_platform(4)
