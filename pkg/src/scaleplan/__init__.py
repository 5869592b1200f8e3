"""Speedup modeling, scaling-curve fitting and cluster capacity planning."""

from .capacity import (
    ClusterNodeSpec,
    QubitPlan,
    RunStatistics,
    efficiency,
    max_qubits,
    min_qubits,
    nodes_for_qubits,
    peak_flops,
    run_statistics,
)
from .errors import (
    DegenerateFitError,
    DomainError,
    InfeasiblePlanError,
    InsufficientDataError,
    ParseError,
    ScaleplanError,
)
from .fitting import FitResult, TimingObservation, advise_node_count, detect_outliers, fit_extended
from .scaling_models import (
    UNBOUNDED,
    CurvePoint,
    ScalingParams,
    amdahl_speedup,
    asymptotic_speedup,
    extended_speedup,
    normalized_speedup,
    optimal_node_count,
    sample_curve,
)
from .synthetic import SimulationConfig, SplitMix64, generate_timings

__version__ = "0.1.0"
