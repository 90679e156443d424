"""Roofline points, EDP, and S x f metric grids for isoplots and argmins."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .dataflow import FabricSpec
from .memory import ClockSpec, PhaseResult


class Bound(Enum):
    COMPUTE = "compute"
    MEMORY = "memory"


class Metric(Enum):
    LATENCY = "latency"
    TOTAL_ENERGY = "total_energy"
    EDP = "edp"
    CYCLES = "cycles"
    COMPUTE_FRACTION = "compute_fraction"
    DYNAMIC_POWER = "dynamic_power"
    DYNAMIC_ENERGY = "dynamic_energy"
    STATIC_ENERGY = "static_energy"


@dataclass(frozen=True)
class RooflinePoint:
    oi: float  # flops per external-memory byte
    attainable: float  # flops/s under min(peak, bw * oi)
    achieved: float  # flops/s actually reached
    bound: Bound


@dataclass(frozen=True)
class MetricPoint:
    latency: float
    energy: float
    edp: float
    edp_normalized: float | None = None


def peak_flops(fabric: FabricSpec, clock: ClockSpec) -> float:
    return fabric.macs_per_cycle * 2 * clock.frequency


def roofline(point: PhaseResult, peak: float, bw: float) -> RooflinePoint:
    if point.traffic.dram_bytes <= 0:
        raise ValueError("roofline undefined for zero external traffic")
    oi = point.flops / point.traffic.dram_bytes
    attainable = min(peak, bw * oi)
    achieved = point.flops / point.latency
    bound = Bound.MEMORY if oi < peak / bw else Bound.COMPUTE
    return RooflinePoint(oi=oi, attainable=attainable,
                         achieved=achieved, bound=bound)


def edp(energy: float, latency: float) -> MetricPoint:
    if energy < 0 or latency < 0:
        raise ValueError("energy and latency must be non-negative")
    return MetricPoint(latency=latency, energy=energy, edp=energy * latency)


def normalize_edp(points: list[MetricPoint]) -> list[MetricPoint]:
    """Grid-wide normalization to the minimum EDP (min cell becomes 1.0)."""
    finite = [p.edp for p in points if math.isfinite(p.edp)]
    if not finite:
        return points
    lowest = min(finite)
    return [replace(p, edp_normalized=p.edp / lowest if lowest > 0 else None)
            for p in points]


@dataclass(frozen=True)
class MetricGrid:
    metric: Metric
    s_axis: tuple[int, ...]  # bytes, ascending
    f_axis: tuple[float, ...]  # Hz, ascending
    values: tuple[tuple[float, ...], ...]  # [s_index][f_index], NaN = error cell

    def __post_init__(self) -> None:
        if len(self.values) != len(self.s_axis) or any(
                len(row) != len(self.f_axis) for row in self.values):
            raise ValueError("grid shape must be |s_axis| x |f_axis|")

    def value(self, s: int, f: float) -> float:
        return self.values[self.s_axis.index(s)][self.f_axis.index(f)]

    def argmin(self) -> tuple[int, float]:
        """Cell with the smallest value; ties break to smallest S then f."""
        best = None
        best_cell = None
        for si, s in enumerate(self.s_axis):
            for fi, f in enumerate(self.f_axis):
                v = self.values[si][fi]
                if math.isnan(v):
                    continue
                if best is None or v < best:
                    best, best_cell = v, (s, f)
        if best_cell is None:
            raise ValueError("grid has no finite cells")
        return best_cell

    def argmax(self) -> tuple[int, float]:
        best = None
        best_cell = None
        for si, s in enumerate(self.s_axis):
            for fi, f in enumerate(self.f_axis):
                v = self.values[si][fi]
                if math.isnan(v):
                    continue
                if best is None or v > best:
                    best, best_cell = v, (s, f)
        if best_cell is None:
            raise ValueError("grid has no finite cells")
        return best_cell

    def contour_levels(self, count: int = 10) -> list[float]:
        """Evenly spaced levels between grid min and max (for isoplots)."""
        finite = [v for row in self.values for v in row if not math.isnan(v)]
        if not finite:
            raise ValueError("grid has no finite cells")
        lo, hi = min(finite), max(finite)
        if count == 1:
            return [lo]
        step = (hi - lo) / (count - 1)
        return [lo + i * step for i in range(count)]


def build_grid(metric: Metric, cells: dict[tuple[int, float], float],
               s_axis: list[int], f_axis: list[float]) -> MetricGrid:
    """Dense grid from per-(S, f) values; every cell must be present."""
    rows = []
    for s in s_axis:
        row = []
        for f in f_axis:
            if (s, f) not in cells:
                raise KeyError(f"missing design point (S={s} B, f={f} Hz)")
            row.append(cells[(s, f)])
        rows.append(tuple(row))
    return MetricGrid(metric=metric, s_axis=tuple(s_axis),
                      f_axis=tuple(f_axis), values=tuple(rows))
