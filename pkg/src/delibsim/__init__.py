"""Simulation and verification of coalition formation in metric deliberation spaces.

Agents approve any proposal strictly closer to them than the status quo.
Coalition structures evolve through five transition kinds; the engine runs
maximal deliberations under seeded policies, and the oracle module checks
outcomes against brute-force ground truth.
"""

from __future__ import annotations

from .coalition import (
    CoalitionStructure,
    DeliberativeCoalition,
    Violation,
    canonical_key,
    canonicalize,
    is_successful,
    lex_less,
    potential,
    signature,
    validate_structure,
)
from .engine import (
    BatchRow,
    EngineInvariantError,
    GeneratorConfig,
    Policy,
    PolicyError,
    RunTrace,
    SplitMix64,
    TraceStep,
    batch,
    default_initial_structure,
    default_step_cap,
    generate_scenario,
    run,
    summarize,
)
from .geometry import (
    APPROVAL_MARGIN,
    EuclideanMetric,
    ExplicitMetric,
    FeasibilityResult,
    MetricError,
    SolverError,
    approves,
    best_common_proposal,
    distance,
    nearest_point_in_hull,
    separated_proposal,
)
from .oracle import (
    ExploreReport,
    OracleError,
    explore,
    naive_max_support,
    naive_transitions,
)
from .scenario_io import (
    FIXTURE_NAMES,
    ScenarioFormatError,
    ScenarioValidationError,
    builtin_fixture,
    dump_scenario,
    load_scenario,
    read_summary,
    read_trace,
    write_summary,
    write_trace,
)
from .space import (
    DeliberationSpace,
    OracleCapError,
    SpaceError,
    SupportReport,
)
from .transitions import (
    TRANSITION_KINDS,
    StaleTransitionError,
    SubsetCapError,
    Transition,
    TransitionError,
    apply_transition,
    enumerate_transitions,
)

__version__ = "0.1.0"

__all__ = [
    "APPROVAL_MARGIN",
    "BatchRow",
    "CoalitionStructure",
    "DeliberationSpace",
    "DeliberativeCoalition",
    "EngineInvariantError",
    "EuclideanMetric",
    "ExplicitMetric",
    "ExploreReport",
    "FIXTURE_NAMES",
    "FeasibilityResult",
    "GeneratorConfig",
    "MetricError",
    "OracleCapError",
    "OracleError",
    "Policy",
    "PolicyError",
    "RunTrace",
    "ScenarioFormatError",
    "ScenarioValidationError",
    "SolverError",
    "SpaceError",
    "SplitMix64",
    "StaleTransitionError",
    "SubsetCapError",
    "SupportReport",
    "TRANSITION_KINDS",
    "TraceStep",
    "Transition",
    "TransitionError",
    "Violation",
    "approves",
    "apply_transition",
    "batch",
    "best_common_proposal",
    "builtin_fixture",
    "canonical_key",
    "canonicalize",
    "default_initial_structure",
    "default_step_cap",
    "distance",
    "dump_scenario",
    "enumerate_transitions",
    "explore",
    "generate_scenario",
    "is_successful",
    "lex_less",
    "load_scenario",
    "naive_max_support",
    "naive_transitions",
    "nearest_point_in_hull",
    "potential",
    "read_summary",
    "read_trace",
    "run",
    "separated_proposal",
    "signature",
    "summarize",
    "validate_structure",
    "write_summary",
    "write_trace",
    "__version__",
]
