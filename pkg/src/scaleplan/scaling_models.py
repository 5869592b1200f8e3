"""
Closed-form speedup models.

Two models are provided:

- Classical Amdahl:   speedup(N) = 1 / (S + (1-S)/N)
- Communication-extended Amdahl:
                      speedup(N) = 1 / (S + (1-S)/N + C*N/Nc)

S is the serial fraction, C the communication idle fraction and Nc the number
of cores in one node. Both S and C are fractions (0.01 means 1%). N counts
"parallel units"; whether a unit is a core or a node is the caller's choice,
as long as Nc is expressed in the same unit.

The extended model is evaluated exactly as written, so for C > 0 the value at
N = 1 is 1/(1 + C/Nc), slightly below one. Use ``normalized_speedup`` when a
curve has to start at exactly 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal, Optional, Sequence, Union

from .errors import DomainError

Model = Literal["classical", "extended"]

UNBOUNDED = math.inf
"""Returned by ``asymptotic_speedup`` and ``optimal_node_count`` when no finite value exists."""


@dataclass(frozen=True)
class ScalingParams:
    """Parameters of the extended speedup model.

    Attributes:
        serial_fraction: S, share of the work that cannot be parallelized.
        comm_idle_fraction: C, communication idle share per unit of N/Nc.
        cores_per_node: Nc.
        baseline_time: single-unit wall time T1 in hours, optional.
    """

    serial_fraction: float
    comm_idle_fraction: float = 0.0
    cores_per_node: int = 1
    baseline_time: Optional[float] = None

    def __post_init__(self):
        _check_fraction(self.serial_fraction, "serial_fraction")
        c = self.comm_idle_fraction
        if not (math.isfinite(c) and c >= 0):
            raise DomainError(f"comm_idle_fraction must be >= 0, got {c!r}")
        if isinstance(self.cores_per_node, bool) or int(self.cores_per_node) != self.cores_per_node \
                or self.cores_per_node < 1:
            raise DomainError(f"cores_per_node must be a positive integer, got {self.cores_per_node!r}")
        t = self.baseline_time
        if t is not None and not (math.isfinite(t) and t > 0):
            raise DomainError(f"baseline_time must be > 0 when given, got {t!r}")

    def with_baseline(self, baseline_time: Optional[float]) -> "ScalingParams":
        return replace(self, baseline_time=baseline_time)


@dataclass(frozen=True)
class CurvePoint:
    n_units: int
    speedup: float
    predicted_time: Optional[float] = None


def _check_fraction(value: float, name: str) -> None:
    if not (isinstance(value, (int, float)) and 0.0 <= value <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")


def _check_units(n_units) -> None:
    if isinstance(n_units, bool) or not isinstance(n_units, (int, float)) \
            or not math.isfinite(n_units) or n_units < 1:
        raise DomainError(f"n_units must be >= 1, got {n_units!r}")


def amdahl_denominator(serial_fraction: float, n_units: float) -> float:
    _check_fraction(serial_fraction, "serial_fraction")
    _check_units(n_units)
    return serial_fraction + (1.0 - serial_fraction) / n_units


def extended_denominator(params: ScalingParams, n_units: float) -> float:
    """Relative run time T(N)/T1 under the extended model."""
    _check_units(n_units)
    s = params.serial_fraction
    return s + (1.0 - s) / n_units + params.comm_idle_fraction * n_units / params.cores_per_node


def amdahl_speedup(serial_fraction: float, n_units: float) -> float:
    """Classical Amdahl speedup on ``n_units`` parallel units."""
    return 1.0 / amdahl_denominator(serial_fraction, n_units)


def extended_speedup(params: ScalingParams, n_units: float) -> float:
    """Speedup including the communication idle term C*N/Nc.

    >>> round(extended_speedup(ScalingParams(0.3, 0.0, 32), 16), 6) == round(amdahl_speedup(0.3, 16), 6)
    True
    """
    return 1.0 / extended_denominator(params, n_units)


def normalized_speedup(params: ScalingParams, n_units: float) -> float:
    """Extended speedup rescaled so that the curve passes through 1 at N = 1."""
    return extended_denominator(params, 1) / extended_denominator(params, n_units)


def asymptotic_speedup(serial_fraction: float) -> float:
    """Upper bound 1/S of classical speedup; ``UNBOUNDED`` (inf) when S == 0."""
    _check_fraction(serial_fraction, "serial_fraction")
    if serial_fraction == 0:
        return UNBOUNDED
    return 1.0 / serial_fraction


def optimal_node_count(params: ScalingParams) -> float:
    """Real N maximizing the extended speedup.

    The denominator S + (1-S)/N + C*N/Nc is strictly convex in N for C > 0,
    so the optimum is where its derivative vanishes: N* = sqrt((1-S)*Nc/C).
    Returns ``UNBOUNDED`` when C == 0 (speedup keeps growing). For S == 1
    every N > 0 is worse than N -> 0, and the closed form gives 0.
    """
    c = params.comm_idle_fraction
    if c == 0:
        return UNBOUNDED
    return math.sqrt((1.0 - params.serial_fraction) * params.cores_per_node / c)


def sample_curve(
    params: ScalingParams,
    n_values: Sequence[Union[int, float]],
    model: Model = "extended",
    normalized: bool = False,
) -> list[CurvePoint]:
    """Evaluate a model at every N in ``n_values``, keeping input order.

    ``predicted_time`` is ``baseline_time`` times the model denominator, and
    is only filled in when the parameters carry a baseline time.
    ``normalized`` only affects the speedup column of the extended model.
    """
    if len(n_values) == 0:
        raise DomainError("n_values must not be empty")
    for n in n_values:
        _check_units(n)
    if model not in ("classical", "extended"):
        raise DomainError(f"unknown model {model!r}")

    points = []
    for n in n_values:
        if model == "classical":
            denom = amdahl_denominator(params.serial_fraction, n)
            speedup = 1.0 / denom
        else:
            denom = extended_denominator(params, n)
            speedup = normalized_speedup(params, n) if normalized else 1.0 / denom
        t = None if params.baseline_time is None else params.baseline_time * denom
        points.append(CurvePoint(n_units=n, speedup=speedup, predicted_time=t))
    return points
