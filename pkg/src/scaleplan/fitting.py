"""
Fit the extended speedup model to measured wall times.

Measured time under the extended model is

    T(N) = T1 * (S + (1-S)/N + C*N/Nc) = a + b/N + c*N

with a = T1*S, b = T1*(1-S), c = T1*C/Nc. The model is therefore linear in
(a, b, c) over the basis {1, 1/N, N}, and the fit is an ordinary weighted
linear least-squares problem. Rows are weighted by 1/observed so the solver
minimizes squared *relative* residuals; timings spanning more than an order
of magnitude would otherwise be dominated by the N = 1 run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateFitError, DomainError, InsufficientDataError
from .scaling_models import ScalingParams, optimal_node_count

# Relative residuals below this are treated as exact (floating-point noise).
RESIDUAL_FLOOR = 1e-9

DEFAULT_THRESHOLD_K = 3.0


@dataclass(frozen=True)
class TimingObservation:
    n_units: int
    wall_time: float
    censored: bool = False

    def __post_init__(self):
        if isinstance(self.n_units, bool) or int(self.n_units) != self.n_units or self.n_units < 1:
            raise DomainError(f"n_units must be a positive integer, got {self.n_units!r}")
        if not (math.isfinite(self.wall_time) and self.wall_time > 0):
            raise DomainError(f"wall_time must be > 0, got {self.wall_time!r}")


@dataclass
class FitResult:
    params: ScalingParams
    # (n_units, relative residual) for every non-censored observation, input order
    residuals: list[tuple[int, float]]
    outliers: list[int] = field(default_factory=list)
    rms_relative_error: float = 0.0
    coefficients: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @property
    def optimal_node_count(self) -> float:
        return optimal_node_count(self.params)


def _solve(n: np.ndarray, t: np.ndarray, active: list[int]) -> np.ndarray:
    basis = np.column_stack([np.ones_like(n), 1.0 / n, n])
    w = 1.0 / t
    design = basis[:, active] * w[:, None]
    # equilibrate columns: 1/N and N differ by up to six orders of magnitude
    scale = np.linalg.norm(design, axis=0)
    sol, *_ = np.linalg.lstsq(design / scale, t * w, rcond=None)
    coef = np.zeros(3)
    coef[active] = sol / scale
    return coef


def fit_coefficients(observations: Sequence[TimingObservation]) -> tuple[float, float, float]:
    """Return clamped (a, b, c) for T(N) = a + b/N + c*N from non-censored rows.

    A negative ``a`` or ``c`` from the unconstrained solve is fixed at zero
    and the remaining coefficients are refit; at most two refits happen.
    """
    used = [o for o in observations if not o.censored]
    if len({o.n_units for o in used}) < 3:
        raise InsufficientDataError(
            f"need at least 3 distinct non-censored node counts, got {len({o.n_units for o in used})}"
        )
    n = np.array([float(o.n_units) for o in used])
    t = np.array([float(o.wall_time) for o in used])

    active = [0, 1, 2]
    coef = _solve(n, t, active)
    for _ in range(2):
        negative = [i for i in (0, 2) if i in active and coef[i] < 0]
        if not negative:
            break
        # drop the most negative first; the other may recover after refit
        worst = min(negative, key=lambda i: coef[i])
        active.remove(worst)
        coef = _solve(n, t, active)
    a, b, c = (float(x) for x in coef)
    a, c = max(a, 0.0), max(c, 0.0)
    if not b > 0:
        raise DegenerateFitError(f"fitted parallel coefficient b = {b!r} is not positive")
    return a, b, c


def params_from_coefficients(a: float, b: float, c: float, cores_per_node: int) -> ScalingParams:
    t1 = a + b
    return ScalingParams(
        serial_fraction=a / t1,
        comm_idle_fraction=c * cores_per_node / t1,
        cores_per_node=cores_per_node,
        baseline_time=t1,
    )


def relative_residuals(observations: Sequence[TimingObservation], params: ScalingParams) -> list[tuple[int, float]]:
    """(model - observed) / observed for each non-censored observation."""
    s, c, nc, t1 = params.serial_fraction, params.comm_idle_fraction, params.cores_per_node, params.baseline_time
    out = []
    for o in observations:
        if o.censored:
            continue
        model = t1 * (s + (1.0 - s) / o.n_units + c * o.n_units / nc)
        out.append((o.n_units, (model - o.wall_time) / o.wall_time))
    return out


def fit_extended(
    observations: Sequence[TimingObservation],
    cores_per_node: int,
    threshold_k: float = DEFAULT_THRESHOLD_K,
) -> FitResult:
    """Fit S, C and T1 to timings measured at several node counts.

    Censored runs are left out of the fit and always reported as outliers.

    Raises:
        InsufficientDataError: fewer than 3 distinct non-censored node counts.
        DegenerateFitError: the clamped fit leaves no parallel work (b <= 0).
    """
    if isinstance(cores_per_node, bool) or int(cores_per_node) != cores_per_node or cores_per_node < 1:
        raise DomainError(f"cores_per_node must be a positive integer, got {cores_per_node!r}")
    a, b, c = fit_coefficients(observations)
    params = params_from_coefficients(a, b, c, int(cores_per_node))
    residuals = relative_residuals(observations, params)
    rms = math.sqrt(sum(r * r for _, r in residuals) / len(residuals))
    result = FitResult(params=params, residuals=residuals, rms_relative_error=rms, coefficients=(a, b, c))
    result.outliers = detect_outliers(observations, result, threshold_k)
    return result


def detect_outliers(
    observations: Sequence[TimingObservation],
    fitted: FitResult,
    threshold_k: float = DEFAULT_THRESHOLD_K,
) -> list[int]:
    """Node counts whose fit residual is anomalously large, plus censored runs.

    A point is flagged when |relative residual| > threshold_k * median |relative
    residual|. Residuals under ``RESIDUAL_FLOOR`` never count, so data that the
    model reproduces exactly yields no outliers. The result is sorted and has
    no duplicates.
    """
    if not threshold_k > 0:
        raise DomainError(f"threshold_k must be > 0, got {threshold_k!r}")
    flagged = {o.n_units for o in observations if o.censored}
    mags = [abs(r) for _, r in fitted.residuals]
    if mags:
        cut = max(threshold_k * float(np.median(mags)), RESIDUAL_FLOOR)
        flagged.update(n for n, r in fitted.residuals if abs(r) > cut)
    return sorted(flagged)


@dataclass(frozen=True)
class NodeCountAdvice:
    n_units: int
    # multiple -> (divides, nearest multiple below or None, nearest multiple above)
    multiples: dict[int, tuple[bool, int | None, int]]
    power_of_two: bool

    @property
    def flagged(self) -> bool:
        return not all(d for d, _, _ in self.multiples.values())


def advise_node_count(n_units: int, preferred_multiples: Sequence[int] = (8, 16)) -> NodeCountAdvice:
    """Divisibility facts about a node count.

    This is a heuristic only: some codes run badly at counts that are not a
    multiple of 8 or 16, but nothing here predicts that a given count will.
    When ``n_units`` is itself a multiple, both neighbours equal ``n_units``.
    A "below" neighbour of 0 is not a usable node count and is reported as None.
    """
    if isinstance(n_units, bool) or int(n_units) != n_units or n_units < 1:
        raise DomainError(f"n_units must be a positive integer, got {n_units!r}")
    if not preferred_multiples:
        raise DomainError("preferred_multiples must not be empty")
    info = {}
    for m in preferred_multiples:
        if m < 1:
            raise DomainError(f"multiples must be positive, got {m!r}")
        below = (n_units // m) * m
        above = below if below == n_units else below + m
        info[int(m)] = (n_units % m == 0, below if below >= 1 else None, above)
    return NodeCountAdvice(n_units=int(n_units), multiples=info, power_of_two=n_units & (n_units - 1) == 0)
