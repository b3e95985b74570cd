"""Experiment drivers tying the simulator to the measurement pipeline.

Three entry points mirror the CLI verbs:

* analyze: one mapping, one granularity, one simulation run per scenario,
  timing plus triggered power sampling for every block.
* explore: graph latency/power per candidate mapping, Pareto fronts.
* system_profile: uninstrumented run with free-running power sampling.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    MeasurementSummary,
    ParetoPoint,
    aggregate,
    pareto_front,
)
from .dutfile import DutDescription
from .errors import EmptyInputError, UnknownActorError
from .instrument import GranularityLevel, MeasurementScenario, annotate, enumerate_scenarios
from .mapping import Mapping
from .measctrl import ControllerState, TimingRecord, run_controller
from .power import PowerStats, measure_block, measure_continuous, synthesize_power_signal
from .simulator import StopCondition, Trace, simulate


@dataclass
class ScenarioResult:
    scenario: MeasurementScenario
    timing: list[TimingRecord]
    power: list[PowerStats]
    controller: ControllerState
    trace: Trace
    summary: MeasurementSummary


@dataclass
class AnalyzeResult:
    mapping_id: str
    granularity: GranularityLevel
    results: list[ScenarioResult]

    @property
    def summaries(self) -> list[MeasurementSummary]:
        return [r.summary for r in self.results]


@dataclass
class ExploreResult:
    points: list[ParetoPoint]
    fronts: dict[str, list[ParetoPoint]] = field(default_factory=dict)


@dataclass
class SystemResult:
    mapping_id: str
    power: PowerStats
    sample_instants: np.ndarray
    sample_watts: np.ndarray
    end_cycle: int
    iterations: dict[str, int]

    def cycles_per_iteration(self, graph_id: str) -> float:
        n = self.iterations.get(graph_id, 0)
        return float("inf") if n == 0 else self.end_cycle / n


def _pick_mapping(dut: DutDescription, mapping_id: str | None) -> Mapping:
    if mapping_id is None:
        return dut.mappings[0]
    for m in dut.mappings:
        if m.mapping_id == mapping_id:
            return m
    known = ", ".join(m.mapping_id for m in dut.mappings)
    raise UnknownActorError(f"no mapping {mapping_id!r} in DUT (have: {known})")


def _scenario_seeds(base_seed: int, tag: str) -> tuple[int, np.random.Generator]:
    """Stable per-scenario seeding: the simulator seed and the sampler RNG
    depend only on (base seed, scenario tag), not on enumeration order."""
    ss = np.random.SeedSequence([abs(int(base_seed)), zlib.crc32(tag.encode())])
    sim_seed = int(ss.generate_state(1, np.uint64)[0] & 0x7FFFFFFF)
    rng = np.random.Generator(np.random.PCG64(ss.spawn(1)[0]))
    return sim_seed, rng


def run_scenario(
    dut: DutDescription,
    mapping: Mapping,
    scenario: MeasurementScenario,
    repetitions: int,
    seed: int,
    budget: int = 2_000_000_000,
) -> ScenarioResult:
    sim_seed, rng = _scenario_seeds(seed, f"{mapping.mapping_id}:{scenario.scenario_id}")
    stop = StopCondition.measured(
        repetitions, required_stop_count=scenario.controller.required_stop_count
    )
    trace = simulate(
        dut.platform,
        mapping,
        scenario.program,
        dut.graphs,
        cost_model=dut.cost_model,
        stop=stop,
        seed=sim_seed,
        budget=budget,
    )
    config = scenario.controller
    config = type(config)(
        required_stop_count=config.required_stop_count,
        num_measurements=repetitions,
        auto_restart=True,
        buffer_capacity=max(config.buffer_capacity, repetitions),
    )
    records, state = run_controller(config, trace.trigger_events)
    signal = synthesize_power_signal(trace, dut.power_model)
    power = [
        measure_block(signal, r.start_cycle, r.stop_cycle, dut.sampler, dut.clock_hz, rng)
        for r in records
    ]
    summary = aggregate(scenario.block.block_id, records, power)
    return ScenarioResult(
        scenario=scenario,
        timing=records,
        power=power,
        controller=state,
        trace=trace,
        summary=summary,
    )


def analyze(
    dut: DutDescription,
    mapping_id: str | None = None,
    granularity: GranularityLevel | None = None,
    repetitions: int | None = None,
    seed: int | None = None,
    budget: int = 2_000_000_000,
) -> AnalyzeResult:
    mapping = _pick_mapping(dut, mapping_id)
    granularity = granularity or dut.granularity
    repetitions = repetitions if repetitions is not None else dut.repetitions
    seed = seed if seed is not None else dut.seed
    program = annotate(mapping, dut.graphs, granularity, dut.control_cost)
    scenarios = enumerate_scenarios(program, num_measurements=repetitions)
    results = [
        run_scenario(dut, mapping, sc, repetitions, seed, budget) for sc in scenarios
    ]
    return AnalyzeResult(
        mapping_id=mapping.mapping_id, granularity=granularity, results=results
    )


def explore(
    dut: DutDescription,
    repetitions: int | None = None,
    seed: int | None = None,
    budget: int = 2_000_000_000,
) -> ExploreResult:
    """Latency/power per (mapping, graph) at graph granularity, plus the
    per-graph Pareto fronts over the candidate mappings."""
    repetitions = repetitions if repetitions is not None else dut.repetitions
    seed = seed if seed is not None else dut.seed
    points: list[ParetoPoint] = []
    for mapping in dut.mappings:
        program = annotate(mapping, dut.graphs, GranularityLevel.SDFG, dut.control_cost)
        for scenario in enumerate_scenarios(program, num_measurements=repetitions):
            res = run_scenario(dut, mapping, scenario, repetitions, seed, budget)
            summary = res.summary
            if summary.power.measurable:
                watts = summary.power.avg
            else:
                # blocks shorter than the sampling floor fall back to the
                # exact model mean over the measured windows
                signal = synthesize_power_signal(res.trace, dut.power_model)
                watts = float(
                    np.mean(
                        [signal.mean_over(r.start_cycle, r.stop_cycle) for r in res.timing]
                    )
                )
            points.append(
                ParetoPoint(
                    mapping_id=mapping.mapping_id,
                    graph_id=res.scenario.block.subject,
                    latency_cycles=summary.cycles_avg,
                    power_watts=watts,
                )
            )
    fronts = {}
    for graph_id in sorted({p.graph_id for p in points}):
        fronts[graph_id] = pareto_front([p for p in points if p.graph_id == graph_id])
    return ExploreResult(points=points, fronts=fronts)


def system_profile(
    dut: DutDescription,
    mapping_id: str | None = None,
    iterations: int | None = None,
    seed: int | None = None,
    budget: int = 2_000_000_000,
) -> SystemResult:
    """Run without instrumentation and sample the supply continuously."""
    mapping = _pick_mapping(dut, mapping_id)
    iterations = iterations if iterations is not None else dut.repetitions
    seed = seed if seed is not None else dut.seed
    program = annotate(mapping, dut.graphs, GranularityLevel.SYSTEM, dut.control_cost)
    sim_seed, rng = _scenario_seeds(seed, f"{mapping.mapping_id}:system")
    trace = simulate(
        dut.platform,
        mapping,
        program,
        dut.graphs,
        cost_model=dut.cost_model,
        stop=StopCondition.all_iterations(iterations),
        seed=sim_seed,
        budget=budget,
    )
    signal = synthesize_power_signal(trace, dut.power_model)
    stats, instants, sampled = measure_continuous(
        signal, trace.end_cycle, dut.sampler, dut.clock_hz, rng
    )
    return SystemResult(
        mapping_id=mapping.mapping_id,
        power=stats,
        sample_instants=instants,
        sample_watts=sampled,
        end_cycle=trace.end_cycle,
        iterations=dict(trace.iterations),
    )


def import_samples(instants: np.ndarray, watts: np.ndarray) -> PowerStats:
    """Summarize an externally captured sample stream."""
    if len(watts) == 0:
        raise EmptyInputError("no power samples to analyze")
    return PowerStats(
        best=float(np.min(watts)),
        avg=float(np.mean(watts)),
        worst=float(np.max(watts)),
        sample_count=int(len(watts)),
        window_start=int(instants[0]) if len(instants) else None,
        window_stop=int(instants[-1]) if len(instants) else None,
    )
