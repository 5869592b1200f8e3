"""
Hardware arithmetic for a homogeneous cluster.

State-vector memory: an n-qubit register holds 2**n complex amplitudes. A
distributed simulator also keeps a receive buffer as large as its local
partition, hence the default ``buffer_factor`` of 2 on more than one node.
Memory comparisons use integers and Fractions only, so the 2**n term is exact.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import DomainError, InfeasiblePlanError

log = logging.getLogger(__name__)

GIB = 1 << 30
GB = 10**9

# 2 * 2**59 * 16 bytes is the largest total that fits an unsigned 64-bit integer
MAX_SUPPORTED_QUBITS = 59

BYTES_PER_AMPLITUDE = 16  # complex double


@dataclass(frozen=True)
class ClusterNodeSpec:
    """Per-node hardware of a homogeneous cluster.

    ``ranks_per_node`` defaults to ``cores`` (one process per physical core).
    """

    cores: int
    clock_hz: float
    flops_per_cycle: int
    ram_bytes: int
    ranks_per_node: Optional[int] = None

    def __post_init__(self):
        for name in ("cores", "flops_per_cycle", "ram_bytes"):
            _check_positive_int(getattr(self, name), name)
        if not (math.isfinite(self.clock_hz) and self.clock_hz > 0):
            raise DomainError(f"clock_hz must be > 0, got {self.clock_hz!r}")
        if self.ranks_per_node is None:
            object.__setattr__(self, "ranks_per_node", self.cores)
        _check_positive_int(self.ranks_per_node, "ranks_per_node")

    @classmethod
    def xeon_gold_6130_node(cls) -> "ClusterNodeSpec":
        """Dual-socket Xeon Gold 6130 node: 32 cores at 2.1 GHz, 376 GiB RAM."""
        return cls(cores=32, clock_hz=2.1e9, flops_per_cycle=32, ram_bytes=376 * GIB)


@dataclass(frozen=True)
class QubitPlan:
    nodes: int
    max_qubits: int
    min_qubits: int
    bytes_required: int
    bytes_available: int


@dataclass(frozen=True)
class RunStatistics:
    best: float
    mean: float
    relative_spread: float


def _check_positive_int(value, name: str) -> None:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise DomainError(f"{name} must be a positive integer, got {value!r}")


def _default_buffer(nodes: int) -> int:
    return 2 if nodes > 1 else 1


def state_vector_bytes(n_qubits: int, bytes_per_amplitude: int = BYTES_PER_AMPLITUDE,
                       buffer_factor: float = 1) -> Fraction:
    """Exact memory needed for an n-qubit state vector including buffers."""
    if n_qubits < 0 or n_qubits > MAX_SUPPORTED_QUBITS:
        raise DomainError(f"qubit counts above {MAX_SUPPORTED_QUBITS} are not supported, got {n_qubits}")
    return Fraction(buffer_factor) * (1 << n_qubits) * bytes_per_amplitude


def min_qubits(nodes: int, spec: ClusterNodeSpec) -> int:
    """Smallest register giving each process at least one amplitude."""
    ranks = nodes * spec.ranks_per_node
    return (ranks - 1).bit_length()  # exact ceil(log2(ranks))


def max_qubits(
    nodes: int,
    spec: ClusterNodeSpec,
    bytes_per_amplitude: int = BYTES_PER_AMPLITUDE,
    buffer_factor: Optional[float] = None,
    usable_ram_fraction: float = 1.0,
) -> QubitPlan:
    """Largest fully described register the cluster can hold in RAM.

    Raises:
        InfeasiblePlanError: not even the minimum register fits.
        DomainError: RAM would allow 60 or more qubits.
    """
    _check_positive_int(nodes, "nodes")
    _check_positive_int(bytes_per_amplitude, "bytes_per_amplitude")
    if buffer_factor is None:
        buffer_factor = _default_buffer(nodes)
    if not buffer_factor > 0:
        raise DomainError(f"buffer_factor must be > 0, got {buffer_factor!r}")
    if not 0 < usable_ram_fraction <= 1:
        raise DomainError(f"usable_ram_fraction must lie in (0, 1], got {usable_ram_fraction!r}")

    available = Fraction(nodes * spec.ram_bytes) * Fraction(usable_ram_fraction)
    lo = min_qubits(nodes, spec)
    if state_vector_bytes(lo, bytes_per_amplitude, buffer_factor) > available:
        raise InfeasiblePlanError(
            f"{nodes} node(s) cannot hold even the minimum {lo}-qubit register "
            f"({int(state_vector_bytes(lo, bytes_per_amplitude, buffer_factor))} bytes needed, "
            f"{int(available)} available)"
        )
    n = lo
    while True:
        if n + 1 > MAX_SUPPORTED_QUBITS:
            raise DomainError(f"available memory exceeds the {MAX_SUPPORTED_QUBITS}-qubit supported range")
        if state_vector_bytes(n + 1, bytes_per_amplitude, buffer_factor) > available:
            break
        n += 1
    return QubitPlan(
        nodes=nodes,
        max_qubits=n,
        min_qubits=lo,
        bytes_required=math.ceil(state_vector_bytes(n, bytes_per_amplitude, buffer_factor)),
        bytes_available=math.floor(available),
    )


def _fits(n_qubits: int, nodes: int, spec: ClusterNodeSpec, bytes_per_amplitude: int,
          buffer_factor: Optional[float], usable_ram_fraction: float) -> bool:
    factor = _default_buffer(nodes) if buffer_factor is None else buffer_factor
    need = state_vector_bytes(n_qubits, bytes_per_amplitude, factor)
    return need <= Fraction(nodes * spec.ram_bytes) * Fraction(usable_ram_fraction)


def nodes_for_qubits(
    n_qubits: int,
    spec: ClusterNodeSpec,
    bytes_per_amplitude: int = BYTES_PER_AMPLITUDE,
    buffer_factor: Optional[float] = None,
    usable_ram_fraction: float = 1.0,
    round_to_power_of_two: bool = True,
) -> int:
    """Fewest nodes whose combined RAM holds an ``n_qubits`` state vector.

    Only the memory constraint is applied. With ``round_to_power_of_two`` the
    raw minimum is rounded up to the next power of two, which is how
    distributed state-vector codes partition the register.
    """
    _check_positive_int(n_qubits, "n_qubits")
    if n_qubits > MAX_SUPPORTED_QUBITS:
        raise DomainError(f"qubit counts above {MAX_SUPPORTED_QUBITS} are not supported, got {n_qubits}")
    args = (spec, bytes_per_amplitude, buffer_factor, usable_ram_fraction)

    if _fits(n_qubits, 1, *args):
        raw = 1
    else:
        # with the default factor, going 1 -> 2 nodes doubles the buffer, so search from 2
        lo, hi = 1, 2
        while not _fits(n_qubits, hi, *args):
            lo, hi = hi, hi * 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _fits(n_qubits, mid, *args):
                hi = mid
            else:
                lo = mid
        raw = hi
    if round_to_power_of_two:
        return 1 << (raw - 1).bit_length()
    return raw


def peak_flops(spec: ClusterNodeSpec, nodes: int) -> float:
    """Theoretical peak (Rpeak) in flop/s."""
    _check_positive_int(nodes, "nodes")
    return nodes * spec.cores * spec.clock_hz * spec.flops_per_cycle


def efficiency(measured_flops: float, peak: float) -> float:
    """Rmax/Rpeak. A ratio above 1 is returned but logged as a warning."""
    if not (measured_flops > 0 and peak > 0):
        raise DomainError("measured and peak flops must both be positive")
    ratio = measured_flops / peak
    if ratio > 1:
        log.warning("measured %.4g flop/s exceeds theoretical peak %.4g; check the node spec", measured_flops, peak)
    return ratio


def run_statistics(samples: Sequence[float]) -> RunStatistics:
    if len(samples) == 0:
        raise DomainError("run_statistics needs at least one sample")
    if any(not x > 0 for x in samples):
        raise DomainError("samples must be positive")
    best, worst = max(samples), min(samples)
    return RunStatistics(best=best, mean=math.fsum(samples) / len(samples), relative_spread=(best - worst) / best)
