"""Compute-cycle and utilization model for weight-stationary systolic arrays.

A matmul is executed as a grid of weight folds: each fold pins one
rows x cols weight tile in an array, streams all M input rows through it,
and drains the pipeline before the next fold is loaded.  Folds are
distributed round-robin across every array in the fabric; M is never
split.  `analytic_cycles` is the closed form; `simulate_cycles` is a
cycle-accurate PE-grid simulation of a single array that pins the closed
form exactly (and checks the numeric matmul result while it is at it).
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from math import ceil

import numpy as np

from .workload import MatmulDims, PhaseTrace

SIMULATION_MAC_GUARD = 1_000_000


class Dataflow(Enum):
    WEIGHT_STATIONARY = "weight_stationary"


class SimulationGuardError(ValueError):
    """Matmul too large for desk-scale cycle-accurate simulation."""


@dataclass(frozen=True)
class ArraySpec:
    rows: int = 16
    cols: int = 16
    dataflow: Dataflow = Dataflow.WEIGHT_STATIONARY

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError("array dims must be >= 1")


@dataclass(frozen=True)
class FabricSpec:
    cores: int = 108
    arrays_per_core: int = 4
    array: ArraySpec = ArraySpec()

    def __post_init__(self) -> None:
        if self.cores < 1 or self.arrays_per_core < 1:
            raise ValueError("fabric must contain at least one array")

    @property
    def total_arrays(self) -> int:
        return self.cores * self.arrays_per_core

    @property
    def macs_per_cycle(self) -> int:
        return self.total_arrays * self.array.rows * self.array.cols


@dataclass(frozen=True)
class CycleEstimate:
    compute_cycles: int
    folds: int
    utilization: float


@dataclass(frozen=True)
class AccessCounts:
    """Local-buffer traffic at the array edge, in element accesses."""

    input_reads: int = 0
    weight_reads: int = 0
    output_writes: int = 0
    output_reads: int = 0  # read-modify-write per extra K-fold

    def __add__(self, other: "AccessCounts") -> "AccessCounts":
        return AccessCounts(
            self.input_reads + other.input_reads,
            self.weight_reads + other.weight_reads,
            self.output_writes + other.output_writes,
            self.output_reads + other.output_reads,
        )

    @property
    def reads(self) -> int:
        return self.input_reads + self.weight_reads + self.output_reads

    @property
    def writes(self) -> int:
        return self.output_writes


@dataclass(frozen=True)
class SimulatedCycles:
    estimate: CycleEstimate
    counts: AccessCounts


def fold_count(m: MatmulDims, array: ArraySpec) -> int:
    return ceil(m.K / array.rows) * ceil(m.N / array.cols)


def per_fold_cycles(m: MatmulDims, array: ArraySpec) -> int:
    # rows cycles of weight preload (one row per cycle), then M streamed
    # rows plus rows + cols - 2 cycles of pipeline fill/drain.
    return m.M + 2 * array.rows + array.cols - 2


@lru_cache(maxsize=None)
def analytic_cycles(m: MatmulDims, fabric: FabricSpec) -> CycleEstimate:
    folds = fold_count(m, fabric.array)
    rounds = ceil(folds / fabric.total_arrays)
    cycles = rounds * per_fold_cycles(m, fabric.array)
    util = (m.M * m.K * m.N) / (fabric.total_arrays * cycles
                                * fabric.array.rows * fabric.array.cols)
    return CycleEstimate(cycles, folds, util)


def matmul_local_accesses(m: MatmulDims, array: ArraySpec) -> AccessCounts:
    """Closed-form local-buffer accesses for one matmul.

    Inputs are re-read once per fold-column, weights are read exactly
    once, and K-fold partial sums accumulate in the local buffer (one
    write plus one read-modify-write per extra K-fold).
    """
    k_folds = ceil(m.K / array.rows)
    n_folds = ceil(m.N / array.cols)
    return AccessCounts(
        input_reads=m.M * m.K * n_folds,
        weight_reads=m.K * m.N,
        output_writes=m.M * m.N * k_folds,
        output_reads=m.M * m.N * (k_folds - 1),
    )


def accesses_per_phase(trace: PhaseTrace, fabric: FabricSpec) -> dict[str, int]:
    """Aggregate local-buffer reads/writes for every matmul in a trace."""
    total = AccessCounts()
    for m in trace.matmuls:
        total = total + matmul_local_accesses(m, fabric.array)
    return {"local_reads": total.reads, "local_writes": total.writes}


# --- cycle-accurate single-array simulator -------------------------------

_FOLD_CACHE: dict[tuple[int, int, int, int, int], int] = {}


def _simulate_fold(M: int, k_sub: int, n_sub: int, rows: int, cols: int) -> int:
    """Simulate one weight fold on a rows x cols PE grid, cycle by cycle.

    Weights shift in from the top, one row per cycle, for `rows` cycles.
    Input rows then stream from the left with a one-cycle skew per row
    while partial sums flow downward, entering at the top (accumulating a
    previously stored partial) and exiting at the bottom.  The simulated
    outputs are checked against an exact integer matmul before the cycle
    count is trusted.
    """
    key = (M, k_sub, n_sub, rows, cols)
    cached = _FOLD_CACHE.get(key)
    if cached is not None:
        return cached

    rng = np.random.default_rng(zlib.crc32(repr(key).encode()))
    acts = rng.integers(-8, 9, size=(M, k_sub)).astype(np.int64)
    weights = rng.integers(-8, 9, size=(k_sub, n_sub)).astype(np.int64)
    psum_in = rng.integers(-8, 9, size=(M, n_sub)).astype(np.int64)

    w_grid = np.zeros((rows, cols), dtype=np.int64)
    w_feed = np.zeros((rows, cols), dtype=np.int64)
    w_feed[:k_sub, :n_sub] = weights

    cycles = 0
    # preload: rows enter top-down in reverse so row k settles at depth k
    for step in range(rows):
        w_grid[1:, :] = w_grid[:-1, :]
        w_grid[0, :] = w_feed[rows - 1 - step, :]
        cycles += 1
    assert np.array_equal(w_grid[:k_sub, :n_sub], weights)

    a_grid = np.zeros((rows, cols), dtype=np.int64)
    p_grid = np.zeros((rows, cols), dtype=np.int64)
    out = np.zeros((M, n_sub), dtype=np.int64)
    stream_cycles = M + rows + cols - 2
    row_idx = np.arange(rows)
    for t in range(stream_cycles):
        # activations shift right; row k consumes input element (t-k, k)
        a_grid[:, 1:] = a_grid[:, :-1]
        inject = np.zeros(rows, dtype=np.int64)
        m_for_row = t - row_idx
        valid = (m_for_row >= 0) & (m_for_row < M) & (row_idx < k_sub)
        inject[valid] = acts[m_for_row[valid], row_idx[valid]]
        a_grid[:, 0] = inject
        # partial sums shift down; output row m enters column n at t = m + n
        p_top = np.zeros(cols, dtype=np.int64)
        for n in range(n_sub):
            mi = t - n
            if 0 <= mi < M:
                p_top[n] = psum_in[mi, n]
        p_in = np.vstack((p_top, p_grid[:-1, :]))
        p_grid = p_in + w_grid * a_grid
        # bottom row emits output (m, n) at t = m + n + rows - 1
        for n in range(n_sub):
            mo = t - n - rows + 1
            if 0 <= mo < M:
                out[mo, n] = p_grid[rows - 1, n]
        cycles += 1

    expected = psum_in + acts @ weights
    if not np.array_equal(out, expected):
        raise AssertionError(
            f"systolic fold simulation produced a wrong matmul result for {key}")

    _FOLD_CACHE[key] = cycles
    return cycles


def _fold_shapes(dim: int, extent: int) -> list[tuple[int, int]]:
    """(sub_extent, count) pairs covering `dim` in `extent`-sized folds."""
    shapes = []
    if dim // extent:
        shapes.append((extent, dim // extent))
    if dim % extent:
        shapes.append((dim % extent, 1))
    return shapes


def simulate_cycles(m: MatmulDims, array: ArraySpec) -> SimulatedCycles:
    """Exact cycles and SRAM access counts for one matmul on one array.

    Folds run back to back with no cross-fold pipeline state, so each
    distinct fold shape is simulated once cycle by cycle and its count
    multiplies the result; at most four shapes occur (interior and edge
    tiles along K and N).
    """
    if m.M * m.K * m.N > SIMULATION_MAC_GUARD:
        raise SimulationGuardError(
            f"matmul {m.M}x{m.K}x{m.N} exceeds the {SIMULATION_MAC_GUARD} MAC guard")
    rows, cols = array.rows, array.cols
    k_folds = ceil(m.K / rows)
    n_folds = ceil(m.N / cols)

    cycles = 0
    in_reads = w_reads = out_writes = 0
    for k_sub, k_count in _fold_shapes(m.K, rows):
        for n_sub, n_count in _fold_shapes(m.N, cols):
            count = k_count * n_count
            cycles += count * _simulate_fold(m.M, k_sub, n_sub, rows, cols)
            in_reads += count * m.M * k_sub
            w_reads += count * k_sub * n_sub
            out_writes += count * m.M * n_sub
    # psum re-read per extra K-fold (fold index > 0 along K)
    out_reads = m.M * m.N * (k_folds - 1)
    counts = AccessCounts(in_reads, w_reads, out_writes, out_reads)
    folds = k_folds * n_folds
    util = (m.M * m.K * m.N) / (cycles * rows * cols)
    return SimulatedCycles(CycleEstimate(cycles, folds, util), counts)
