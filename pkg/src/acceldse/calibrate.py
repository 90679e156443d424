"""Calibration of the SRAM energy constants against argmin targets.

Deterministic greedy coordinate search over (leakage_per_byte,
access_energy_ref): multiplicative neighbor steps, accept only strict
improvements in grid-step displacement of the decode EDP argmin from the
target cell, stop at a fixed point.  Started from constants that already
achieve the minimum displacement, the search returns them unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .analysis import Metric
from .config import HardwareConfig
from .sweep import SweepSpec, metric_grid, run_sweep
from .workload import InferenceRequest, ModelSpec, Phase

STEP_FACTORS = (4.0, 2.0, 1.5, 1.25)
MAX_ROUNDS = 20


@dataclass(frozen=True)
class CalibrationTarget:
    s_bytes: int
    f_hz: float
    phase: Phase = Phase.DECODE_STEP
    metric: Metric = Metric.EDP


@dataclass(frozen=True)
class CalibrationOutcome:
    leakage_per_byte: float
    access_energy_ref: float
    displacement: int  # grid steps from target, summed over both axes
    achieved_s: int
    achieved_f: float
    evaluations: int


def _displacement(hw: HardwareConfig, spec: SweepSpec, model: ModelSpec,
                  req: InferenceRequest, target: CalibrationTarget,
                  decode_step: int) -> tuple[int, int, float]:
    result = run_sweep(spec, hw, model, req, decode_step=decode_step)
    grid = metric_grid(result, target.metric, target.phase, spec.bw_values[0])
    s_min, f_min = grid.argmin()
    steps = (abs(spec.s_values.index(s_min) - spec.s_values.index(target.s_bytes))
             + abs(spec.f_values.index(f_min) - spec.f_values.index(target.f_hz)))
    return steps, s_min, f_min


def _with_constants(hw: HardwareConfig, leakage: float,
                    access: float) -> HardwareConfig:
    return replace(hw, sram=replace(hw.sram, leakage_per_byte=leakage,
                                    access_energy_ref=access))


def calibrate(hw: HardwareConfig, spec: SweepSpec, model: ModelSpec,
              req: InferenceRequest, target: CalibrationTarget,
              decode_step: int = 0) -> CalibrationOutcome:
    if target.s_bytes not in spec.s_values or target.f_hz not in spec.f_values:
        raise ValueError("calibration target must lie on the sweep grid")
    leakage = hw.sram.leakage_per_byte
    access = hw.sram.access_energy_ref
    evals = 0

    def measure(lk: float, ac: float) -> tuple[int, int, float]:
        nonlocal evals
        evals += 1
        return _displacement(_with_constants(hw, lk, ac), spec, model, req,
                             target, decode_step)

    best_disp, best_s, best_f = measure(leakage, access)
    for _ in range(MAX_ROUNDS):
        if best_disp == 0:
            break
        improved = False
        for coord in ("leakage", "access"):
            for factor in STEP_FACTORS:
                for direction in (factor, 1.0 / factor):
                    lk = leakage * direction if coord == "leakage" else leakage
                    ac = access * direction if coord == "access" else access
                    disp, s_min, f_min = measure(lk, ac)
                    if disp < best_disp:
                        best_disp, best_s, best_f = disp, s_min, f_min
                        leakage, access = lk, ac
                        improved = True
                        break
                if improved:
                    break
            if improved:
                break
        if not improved:
            break
    return CalibrationOutcome(
        leakage_per_byte=leakage,
        access_energy_ref=access,
        displacement=best_disp,
        achieved_s=best_s,
        achieved_f=best_f,
        evaluations=evals,
    )


def constants_file_text(outcome: CalibrationOutcome,
                        target: CalibrationTarget,
                        ref_size: int, exponent: float) -> str:
    lines = [
        "# SRAM energy calibration constants",
        f"# target: {target.phase.value} {target.metric.value} argmin at "
        f"(S={target.s_bytes} B, f={target.f_hz:g} Hz)",
        f"# achieved: (S={outcome.achieved_s} B, f={outcome.achieved_f:g} Hz), "
        f"displacement {outcome.displacement} grid step(s)",
        f"hw.sram_leakage_w_per_byte = {outcome.leakage_per_byte!r}",
        f"hw.sram_access_energy_j = {outcome.access_energy_ref!r}",
        f"hw.sram_access_ref_kb = {ref_size / 1024!r}",
        f"hw.sram_access_exponent = {exponent!r}",
    ]
    return "\n".join(lines) + "\n"
