"""Cartesian design-space sweep over (local SRAM size, frequency, bandwidth).

Every (S, f, BW, phase) tuple is evaluated independently; evaluation is
pure, so results are bit-identical regardless of worker count or order.
Reports are per-metric grid CSVs, a roofline CSV, and a JSON summary
with argmin cells and bound-transition frequencies.
"""

from __future__ import annotations

import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .analysis import (Metric, MetricGrid, MetricPoint, RooflinePoint,
                       build_grid, edp, normalize_edp, peak_flops, roofline)
from .config import HardwareConfig
from .energy import EnergyBreakdown, phase_energy
from .memory import GB, PhaseResult, TilingError, phase_result
from .workload import (InferenceRequest, ModelSpec, Phase, PhaseTrace,
                       build_decode_trace, build_prefill_trace)

SCHEMA_VERSION = 1
DECODE_CONVENTION = "per_output_token_at_fixed_step"


@dataclass(frozen=True)
class SweepSpec:
    s_values: tuple[int, ...]  # bytes, ascending
    f_values: tuple[float, ...]  # Hz, ascending
    bw_values: tuple[float, ...]  # bytes/s, ascending
    phases: tuple[Phase, ...]

    def __post_init__(self) -> None:
        for name in ("s_values", "f_values", "bw_values"):
            vals = getattr(self, name)
            if not vals:
                raise ValueError(f"{name} must be non-empty")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{name} must be strictly increasing")

    @property
    def record_count(self) -> int:
        return (len(self.s_values) * len(self.f_values)
                * len(self.bw_values) * len(self.phases))


@dataclass(frozen=True)
class DesignPoint:
    s: int  # local buffer bytes
    f: float  # Hz
    bw: float  # external bytes/s


@dataclass(frozen=True)
class SweepRecord:
    point: DesignPoint
    phase: Phase
    result: PhaseResult | None
    energy: EnergyBreakdown | None
    metrics: MetricPoint | None
    roofline: RooflinePoint | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    records: tuple[SweepRecord, ...]
    decode_step: int

    @property
    def complete(self) -> bool:
        return all(r.ok for r in self.records)

    def select(self, phase: Phase, bw: float) -> list[SweepRecord]:
        return [r for r in self.records
                if r.phase is phase and r.point.bw == bw]


def trace_for(phase: Phase, model: ModelSpec, req: InferenceRequest,
               decode_step: int) -> PhaseTrace:
    if phase is Phase.PREFILL:
        return build_prefill_trace(model, req)
    return build_decode_trace(model, req, decode_step)


def decode_mean_over_generation(hw: HardwareConfig, model: ModelSpec,
                                req: InferenceRequest,
                                point: DesignPoint) -> dict[str, float]:
    """Per-token decode metrics averaged over every generation step.

    The default reporting convention is a single fixed step; this is the
    alternative convention for workloads where KV growth over the whole
    generation matters.
    """
    if req.gen_tokens < 1:
        raise ValueError("gen_tokens must be >= 1 to average over generation")
    latency = energy = edp_sum = 0.0
    for step in range(req.gen_tokens):
        trace = build_decode_trace(model, req, step)
        record = evaluate_point(trace, Phase.DECODE_STEP, hw, point,
                                model.bytes_per_element)
        if not record.ok:
            raise TilingError(record.error)
        latency += record.result.latency
        energy += record.energy.total_j
        edp_sum += record.metrics.edp
    n = req.gen_tokens
    return {
        "steps": float(n),
        "mean_latency_s": latency / n,
        "mean_total_j": energy / n,
        "mean_edp_js": edp_sum / n,
        "aggregate_latency_s": latency,
        "aggregate_total_j": energy,
    }


def evaluate_point(trace: PhaseTrace, phase: Phase, hw: HardwareConfig,
                   point: DesignPoint, bytes_per_element: int) -> SweepRecord:
    hw_pt = hw.with_design_point(point.s, point.f, point.bw)
    try:
        result = phase_result(trace, hw_pt.fabric, hw_pt.buffers, hw_pt.mem,
                              hw_pt.clock, bytes_per_element)
    except TilingError as exc:
        return SweepRecord(point, phase, None, None, None, None, error=str(exc))
    energy = phase_energy(result, phase, hw_pt.sram, hw_pt.arrays,
                          hw_pt.gating, hw_pt.clock, hw_pt.buffers,
                          hw_pt.fabric)
    metrics = edp(energy.total_j, result.latency)
    roof = roofline(result, peak_flops(hw_pt.fabric, hw_pt.clock), point.bw)
    return SweepRecord(point, phase, result, energy, metrics, roof)


def _eval_star(args) -> SweepRecord:
    return evaluate_point(*args)


def run_sweep(spec: SweepSpec, hw: HardwareConfig, model: ModelSpec,
              req: InferenceRequest, decode_step: int = 0,
              jobs: int = 1) -> SweepResult:
    """Evaluate the full cartesian sweep; never aborts on infeasible cells."""
    traces = {phase: trace_for(phase, model, req, decode_step)
              for phase in spec.phases}
    tasks = [(traces[phase], phase, hw, DesignPoint(s, f, bw),
              model.bytes_per_element)
             for phase in spec.phases
             for bw in spec.bw_values
             for s in spec.s_values
             for f in spec.f_values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_eval_star, tasks, chunksize=16))
    else:
        records = [_eval_star(t) for t in tasks]
    records = _normalize_grids(spec, records)
    return SweepResult(spec=spec, records=tuple(records),
                       decode_step=decode_step)


def _normalize_grids(spec: SweepSpec, records: list[SweepRecord]) -> list[SweepRecord]:
    """Fill edp_normalized per (phase, bw) grid."""
    out = list(records)
    for phase in spec.phases:
        for bw in spec.bw_values:
            idx = [i for i, r in enumerate(out)
                   if r.phase is phase and r.point.bw == bw and r.ok]
            normalized = normalize_edp([out[i].metrics for i in idx])
            for i, point in zip(idx, normalized):
                out[i] = replace(out[i], metrics=point)
    return out


# --- report emission ------------------------------------------------------

_METRIC_GETTERS = {
    Metric.LATENCY: lambda r: r.result.latency,
    Metric.TOTAL_ENERGY: lambda r: r.energy.total_j,
    Metric.EDP: lambda r: r.metrics.edp,
    Metric.CYCLES: lambda r: r.result.total_cycles,
    Metric.COMPUTE_FRACTION: lambda r: r.result.compute_fraction,
    Metric.DYNAMIC_POWER: lambda r: r.energy.dynamic_power_w,
    Metric.DYNAMIC_ENERGY: lambda r: r.energy.dynamic_j,
    Metric.STATIC_ENERGY: lambda r: r.energy.static_j,
}


def metric_grid(result: SweepResult, metric: Metric, phase: Phase,
                bw: float) -> MetricGrid:
    getter = _METRIC_GETTERS[metric]
    cells = {(r.point.s, r.point.f): getter(r) if r.ok else math.nan
             for r in result.select(phase, bw)}
    return build_grid(metric, cells, list(result.spec.s_values),
                      list(result.spec.f_values))


def _fmt(value: float) -> str:
    return repr(float(value))


def _grid_csv(grid: MetricGrid, phase: Phase, bw: float) -> str:
    lines = ["metric,phase,bandwidth",
             f"{grid.metric.value},{phase.value},{_fmt(bw)}",
             "S_bytes,f_hz,value"]
    for si, s in enumerate(grid.s_axis):
        for fi, f in enumerate(grid.f_axis):
            lines.append(f"{s},{_fmt(f)},{_fmt(grid.values[si][fi])}")
    return "\n".join(lines) + "\n"


def _roofline_csv(result: SweepResult) -> str:
    lines = ["phase,bandwidth,S_bytes,f_hz,oi,attainable,achieved,bound"]
    for r in result.records:
        if not r.ok:
            continue
        rf = r.roofline
        lines.append(
            f"{r.phase.value},{_fmt(r.point.bw)},{r.point.s},{_fmt(r.point.f)},"
            f"{_fmt(rf.oi)},{_fmt(rf.attainable)},{_fmt(rf.achieved)},{rf.bound.value}")
    return "\n".join(lines) + "\n"


def bound_transition_frequency(result: SweepResult, phase: Phase, bw: float,
                               s: int) -> float | None:
    """Lowest swept frequency at which the phase is memory-bound, or None."""
    for f in result.spec.f_values:
        for r in result.select(phase, bw):
            if r.point.s == s and r.point.f == f and r.ok and r.result.memory_bound:
                return f
    return None


def summary_dict(result: SweepResult) -> dict:
    summary: dict = {
        "schema_version": SCHEMA_VERSION,
        "decode_convention": DECODE_CONVENTION,
        "decode_step": result.decode_step,
        "complete": result.complete,
        "record_count": len(result.records),
        "grids": {},
    }
    for phase in result.spec.phases:
        for bw in result.spec.bw_values:
            key = f"{phase.value}@{int(bw / GB)}GBps"
            entry: dict = {"bound_transition_mhz": {}}
            for metric in (Metric.LATENCY, Metric.TOTAL_ENERGY, Metric.EDP):
                grid = metric_grid(result, metric, phase, bw)
                try:
                    s_min, f_min = grid.argmin()
                    entry[f"{metric.value}_argmin"] = {
                        "S_bytes": s_min, "f_hz": f_min}
                    entry[f"{metric.value}_contour_levels"] = [
                        float(v) for v in grid.contour_levels()]
                except ValueError:  # every cell infeasible
                    entry[f"{metric.value}_argmin"] = None
                    entry[f"{metric.value}_contour_levels"] = []
            for s in result.spec.s_values:
                f_t = bound_transition_frequency(result, phase, bw, s)
                entry["bound_transition_mhz"][str(s)] = (
                    f_t / 1e6 if f_t is not None else None)
            summary["grids"][key] = entry
    return summary


def emit_reports(result: SweepResult, out_dir: str | Path) -> list[Path]:
    """Write grid CSVs, the roofline CSV, and the JSON summary."""
    if not result.spec.phases:
        print("warning: empty phase set, no reports emitted", file=sys.stderr)
        return []
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for metric in Metric:
        for phase in result.spec.phases:
            for bw in result.spec.bw_values:
                grid = metric_grid(result, metric, phase, bw)
                name = f"{metric.value}_{phase.value}_bw{int(bw / GB)}.csv"
                path = out / name
                _write(path, _grid_csv(grid, phase, bw))
                written.append(path)
    roof_path = out / "roofline.csv"
    _write(roof_path, _roofline_csv(result))
    written.append(roof_path)
    summary_path = out / "summary.json"
    _write(summary_path, json.dumps(summary_dict(result), indent=2,
                                    sort_keys=True) + "\n")
    written.append(summary_path)
    return written


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"failed to write report {path}: {exc}") from exc
