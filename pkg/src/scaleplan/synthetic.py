"""
Seeded synthetic timing data that follows the extended speedup model.

Random numbers come from SplitMix64 (Steele, Lea & Flood, "Fast splittable
pseudorandom number generators", OOPSLA 2014), chosen because it is fully
specified by a few integer operations and therefore reproducible on any
platform or language:

    state  = (state + 0x9E3779B97F4A7C15) mod 2**64
    z      = state
    z      = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z      = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    output = z ^ (z >> 31)

A uniform double in [0, 1) is (output >> 11) * 2**-53. Each node count, in
the order given, consumes exactly one draw u = jitter * (2*r - 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence

from .errors import DomainError
from .fitting import TimingObservation
from .scaling_models import ScalingParams, extended_denominator

MASK64 = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        if not 0 <= seed <= MASK64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
        self.state = seed

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def next_double(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def __iter__(self) -> Iterator[float]:
        while True:
            yield self.next_double()


@dataclass(frozen=True)
class SimulationConfig:
    """What to generate.

    ``pathological_nodes`` maps a node count to a slowdown multiplier >= 1.
    A pathological run whose time exceeds ``censor_cutoff`` hours is marked
    censored, mimicking a job killed at a wall-time limit; ``None`` disables
    censoring.
    """

    params: ScalingParams
    node_counts: Sequence[int]
    jitter_fraction: float = 0.10
    pathological_nodes: Mapping[int, float] = field(default_factory=dict)
    seed: int = 0
    censor_cutoff: Optional[float] = 100.0

    def __post_init__(self):
        if self.params.baseline_time is None:
            raise DomainError("params.baseline_time must be set to generate timings")
        if len(self.node_counts) == 0:
            raise DomainError("node_counts must not be empty")
        for n in self.node_counts:
            if isinstance(n, bool) or int(n) != n or n < 1:
                raise DomainError(f"node counts must be positive integers, got {n!r}")
        if not 0 <= self.jitter_fraction < 1:
            raise DomainError(f"jitter_fraction must lie in [0, 1), got {self.jitter_fraction!r}")
        for n, mult in self.pathological_nodes.items():
            if not (math.isfinite(mult) and mult >= 1):
                raise DomainError(f"slowdown multiplier for N={n} must be >= 1, got {mult!r}")
        if self.censor_cutoff is not None and not self.censor_cutoff > 0:
            raise DomainError("censor_cutoff must be positive")
        if not 0 <= self.seed <= MASK64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


def generate_timings(config: SimulationConfig) -> list[TimingObservation]:
    rng = SplitMix64(config.seed)
    t1 = config.params.baseline_time
    j = config.jitter_fraction
    out = []
    for n in config.node_counts:
        u = j * (2.0 * rng.next_double() - 1.0)
        t = t1 * extended_denominator(config.params, n)
        if j:
            t *= 1.0 + u
        censored = False
        mult = config.pathological_nodes.get(n)
        if mult is not None:
            t *= mult
            censored = config.censor_cutoff is not None and t > config.censor_cutoff
        out.append(TimingObservation(n_units=int(n), wall_time=t, censored=censored))
    return out
