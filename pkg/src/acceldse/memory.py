"""Buffer hierarchy: tiling, byte traffic per level, and phase latency.

Each core owns one local SRAM buffer that feeds its arrays; all cores
share one global buffer that double-buffers external-memory transfers.
Latency is max(compute_time, memory_time): the global buffer decouples
compute from memory, so whichever side is slower hides the other.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from math import ceil

from .dataflow import (ArraySpec, CycleEstimate, FabricSpec,
                       analytic_cycles, matmul_local_accesses)
from .workload import MatmulDims, PhaseTrace, flops_of

KIB = 1024
MIB = 1024 * 1024
GB = 10**9  # bandwidth uses SI gigabytes


class BufferLevel(Enum):
    LOCAL = "local"
    GLOBAL = "global"


class TilingError(ValueError):
    """Local buffer cannot hold even a minimal double-buffered tile set."""


@dataclass(frozen=True)
class BufferSpec:
    level: BufferLevel
    capacity: int  # bytes

    def __post_init__(self) -> None:
        if self.capacity <= 0:
            raise ValueError("buffer capacity must be > 0")


@dataclass(frozen=True)
class Buffers:
    local: BufferSpec
    global_: BufferSpec


@dataclass(frozen=True)
class MemorySpec:
    ext_bandwidth: float  # bytes/s into and out of the global buffer
    onchip_bandwidth: float  # bytes/s aggregate global<->local

    def __post_init__(self) -> None:
        if self.ext_bandwidth <= 0 or self.onchip_bandwidth <= 0:
            raise ValueError("bandwidths must be > 0")


@dataclass(frozen=True)
class ClockSpec:
    frequency: float  # Hz

    def __post_init__(self) -> None:
        if self.frequency <= 0:
            raise ValueError("frequency must be > 0")


@dataclass(frozen=True)
class TilingPlan:
    tile_m: int
    tile_k: int
    tile_n: int
    double_buffered: bool = True


@dataclass(frozen=True)
class TrafficReport:
    dram_bytes: int = 0
    onchip_bytes: int = 0
    local_reads: int = 0
    local_writes: int = 0
    global_reads: int = 0
    global_writes: int = 0

    def __add__(self, other: "TrafficReport") -> "TrafficReport":
        return TrafficReport(
            self.dram_bytes + other.dram_bytes,
            self.onchip_bytes + other.onchip_bytes,
            self.local_reads + other.local_reads,
            self.local_writes + other.local_writes,
            self.global_reads + other.global_reads,
            self.global_writes + other.global_writes,
        )

    def scaled(self, count: int) -> "TrafficReport":
        return TrafficReport(*(count * v for v in (
            self.dram_bytes, self.onchip_bytes, self.local_reads,
            self.local_writes, self.global_reads, self.global_writes)))


@dataclass(frozen=True)
class PhaseResult:
    compute_cycles: int
    compute_time: float
    memory_time: float
    latency: float
    total_cycles: float  # latency * frequency; grows with f when memory-bound
    compute_fraction: float
    traffic: TrafficReport
    utilization: float
    flops: int

    @property
    def memory_bound(self) -> bool:
        return self.memory_time > self.compute_time


def tile_set_bytes(tm: int, tk: int, tn: int, b: int) -> int:
    # resident weight tile plus double-buffered input and output tiles
    return b * (tk * tn + 2 * tm * tk + 2 * tm * tn)


def _pow2_candidates(dim: int) -> list[int]:
    out = []
    v = 1
    while v < dim:
        out.append(v)
        v *= 2
    out.append(dim)
    return out


@lru_cache(maxsize=None)
def plan_tiling(m: MatmulDims, local: BufferSpec, bytes_per_element: int,
                array: ArraySpec = ArraySpec()) -> TilingPlan:
    """Capacity-feasible plan maximizing weight reuse.

    Deterministic search over power-of-two tile dims clipped to (M, K, N),
    lexicographically maximizing (tile_k * tile_n, tile_m, tile_n, tile_k).
    Weight tiles span whole array folds (tile_k >= rows, tile_n >= cols
    unless the matmul is smaller) so each weight loads into the arrays
    once, and plans that stream at least an array's worth of rows per
    tile (tile_m >= rows) are preferred so pipeline fill amortizes; the
    row preference is dropped when capacity cannot afford it.
    """
    cap = local.capacity
    b = bytes_per_element
    k_floor = min(m.K, array.rows)
    n_floor = min(m.N, array.cols)
    for m_floor in (min(m.M, array.rows), 1):
        best = _search_plan(m, cap, b, k_floor, n_floor, m_floor)
        if best is not None:
            _, tm, tn, tk = best
            return TilingPlan(tile_m=tm, tile_k=tk, tile_n=tn)
    raise TilingError(
        f"local buffer of {cap} bytes cannot hold a minimal "
        f"double-buffered tile set of "
        f"{tile_set_bytes(1, k_floor, n_floor, b)} bytes")


def _search_plan(m: MatmulDims, cap: int, b: int, k_floor: int,
                 n_floor: int, m_floor: int) -> tuple[int, int, int, int] | None:
    tm_cands = [t for t in _pow2_candidates(m.M) if t >= m_floor]
    best: tuple[int, int, int, int] | None = None
    for tk in _pow2_candidates(m.K):
        if tk < k_floor:
            continue
        for tn in _pow2_candidates(m.N):
            if tn < n_floor:
                continue
            if tile_set_bytes(m_floor, tk, tn, b) > cap:
                continue
            tm_limit = (cap - b * tk * tn) // (2 * b * (tk + tn))
            tm = max(t for t in tm_cands if t <= tm_limit)
            key = (tk * tn, tm, tn, tk)
            if best is None or key > best:
                best = key
    return best


@lru_cache(maxsize=None)
def traffic(m: MatmulDims, plan: TilingPlan, bytes_per_element: int,
            fabric: FabricSpec) -> TrafficReport:
    """Byte traffic and access counts for one matmul under a tiling plan.

    Weight tiles are fetched once (weight-stationary); the input panel is
    re-read from the global buffer for every column tile, but cores sweep
    distinct column tiles concurrently, so external memory sees the panel
    once per wave of `cores` tiles.  Outputs cross each level once;
    K-fold partial sums stay in the local buffers.
    """
    b = bytes_per_element
    n_tiles = ceil(m.N / plan.tile_n)
    waves = ceil(n_tiles / fabric.cores)
    weight_b = m.K * m.N * b
    input_b = m.M * m.K * b
    output_b = m.M * m.N * b

    dram_bytes = weight_b + input_b * waves + output_b
    onchip_bytes = weight_b + input_b * n_tiles + output_b

    local = matmul_local_accesses(m, fabric.array)
    in_el = m.M * m.K
    w_el = m.K * m.N
    out_el = m.M * m.N
    # reads: feed locals (inputs per column tile + weights once) and the
    # DRAM writeback of outputs; writes: DRAM ingress plus output arrival.
    global_reads = in_el * n_tiles + w_el + out_el
    global_writes = in_el * waves + w_el + out_el
    return TrafficReport(
        dram_bytes=dram_bytes,
        onchip_bytes=onchip_bytes,
        local_reads=local.reads,
        local_writes=local.writes,
        global_reads=global_reads,
        global_writes=global_writes,
    )


@dataclass(frozen=True)
class MatmulEvaluation:
    cycles: CycleEstimate
    plan: TilingPlan
    traffic: TrafficReport


def evaluate_matmul(m: MatmulDims, fabric: FabricSpec, local: BufferSpec,
                    bytes_per_element: int) -> MatmulEvaluation:
    plan = plan_tiling(m, local, bytes_per_element, fabric.array)
    return MatmulEvaluation(
        cycles=analytic_cycles(m, fabric),
        plan=plan,
        traffic=traffic(m, plan, bytes_per_element, fabric),
    )


def phase_result(trace: PhaseTrace, fabric: FabricSpec, buffers: Buffers,
                 mem: MemorySpec, clock: ClockSpec,
                 bytes_per_element: int) -> PhaseResult:
    """Latency and traffic for one phase at one design point.

    compute_time covers the arrays; memory_time covers external and
    on-chip transfers; perfect double-buffered overlap means latency is
    the max of the two.
    """
    cycles = 0
    macs = 0
    flops = 0
    total_traffic = TrafficReport()
    for m, count in Counter(trace.matmuls).items():
        ev = evaluate_matmul(m, fabric, buffers.local, bytes_per_element)
        cycles += ev.cycles.compute_cycles * count
        macs += m.M * m.K * m.N * count
        flops += flops_of(m) * count
        total_traffic = total_traffic + ev.traffic.scaled(count)

    compute_time = cycles / clock.frequency
    memory_time = max(total_traffic.dram_bytes / mem.ext_bandwidth,
                      total_traffic.onchip_bytes / mem.onchip_bandwidth)
    latency = max(compute_time, memory_time)
    utilization = macs / (fabric.total_arrays * cycles
                          * fabric.array.rows * fabric.array.cols)
    return PhaseResult(
        compute_cycles=cycles,
        compute_time=compute_time,
        memory_time=memory_time,
        latency=latency,
        total_cycles=latency * clock.frequency,
        compute_fraction=compute_time / latency,
        traffic=total_traffic,
        utilization=utilization,
        flops=flops,
    )
