"""Timing and power measurement toolchain for SDF applications on MPSoC models."""

__version__ = "0.1.0"

from .analysis import (
    MeasurementSummary,
    ParetoPoint,
    aggregate,
    emit_reports,
    pareto_front,
    render_pareto_svg,
    render_table,
)
from .dutfile import DutDescription, bundled_path, load_dut, save_dut, validate_dut
from .errors import (
    CycleBudgetExceededError,
    DeadlockError,
    EmptyInputError,
    FiringNotEnabledError,
    InconsistentGraphError,
    InvalidWindowError,
    ParseError,
    SchemaError,
    SdfProbeError,
    ValidationFailure,
    ValidationReport,
)
from .experiments import (
    AnalyzeResult,
    ExploreResult,
    ScenarioResult,
    SystemResult,
    analyze,
    explore,
    import_samples,
    run_scenario,
    system_profile,
)
from .graphs import (
    Actor,
    Channel,
    CostSpec,
    SdfGraph,
    TokenState,
    can_fire,
    fire,
    initial_state,
    is_iteration_complete,
    repetition_vector,
    validate_graph,
)
from .instrument import (
    ControllerConfig,
    GranularityLevel,
    InstrumentedProgram,
    MeasurementScenario,
    Statement,
    annotate,
    enumerate_scenarios,
    invasiveness,
    neutralize,
)
from .mapping import Mapping, StaticOrderSchedule, builtin_mappings, validate_mapping
from .measctrl import (
    MeasurementController,
    TimingRecord,
    read_timing_csv,
    run_controller,
    write_timing_csv,
)
from .power import (
    PowerModel,
    PowerSignal,
    PowerStats,
    SamplerSpec,
    measure_block,
    measure_continuous,
    read_sample_csv,
    shunt_power,
    synthesize_power_signal,
    write_sample_csv,
)
from .simulator import (
    CostModel,
    StopCondition,
    Trace,
    TraceRecord,
    TriggerEvent,
    detect_deadlock,
    simulate,
)
from .soc import BusSpec, MemoryRegion, Platform, Tile, arbitrate, validate_platform
