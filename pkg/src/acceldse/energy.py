"""Parametric SRAM and systolic-array power models.

SRAM leakage is linear in capacity; per-access energy follows a power
law in capacity (longer wordlines and bitlines cost more per access).
Arrays draw dynamic power only while computing (clock-gated when
stalled) and leak all the time; power gating trims a phase-dependent
share of all leakage.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dataflow import FabricSpec
from .memory import Buffers, ClockSpec, PhaseResult
from .workload import Phase


@dataclass(frozen=True)
class SramEnergyModel:
    leakage_per_byte: float  # W/byte
    access_energy_ref: float  # J/access at ref_size
    ref_size: int  # bytes
    access_exponent: float = 0.5

    def __post_init__(self) -> None:
        if min(self.leakage_per_byte, self.access_energy_ref,
               self.ref_size, self.access_exponent) <= 0:
            raise ValueError("SRAM energy parameters must be positive")

    def leakage(self, size: int) -> float:
        return self.leakage_per_byte * size

    def access_energy(self, size: int) -> float:
        return self.access_energy_ref * (size / self.ref_size) ** self.access_exponent


@dataclass(frozen=True)
class ArrayPower:
    leakage_w: float = 9.31e-3  # per array, post-layout
    dynamic_w_ref: float = 1.25  # per array at ref_frequency, full utilization
    ref_frequency: float = 1.0e9

    def __post_init__(self) -> None:
        if min(self.leakage_w, self.dynamic_w_ref, self.ref_frequency) <= 0:
            raise ValueError("array power parameters must be positive")

    def dynamic_power(self, frequency: float, utilization: float) -> float:
        return self.dynamic_w_ref * (frequency / self.ref_frequency) * utilization


@dataclass(frozen=True)
class GatingPolicy:
    prefill_saving: float = 0.04
    decode_saving: float = 0.20

    def __post_init__(self) -> None:
        for s in (self.prefill_saving, self.decode_saving):
            if not 0 <= s < 1:
                raise ValueError("gating saving must be in [0, 1)")

    def saving(self, phase: Phase) -> float:
        return self.prefill_saving if phase is Phase.PREFILL else self.decode_saving


@dataclass(frozen=True)
class EnergyBreakdown:
    static_j: float
    dynamic_j: float
    total_j: float
    dynamic_power_w: float
    by_component: dict[str, dict[str, float]]


def static_energy(result: PhaseResult, leakage_sum: float,
                  gating: float) -> float:
    """Leakage integrated over execution time, less the gated share."""
    return result.latency * leakage_sum * (1.0 - gating)


def leakage_sum(sram: SramEnergyModel, arrays: ArrayPower,
                buffers: Buffers, fabric: FabricSpec) -> float:
    return (sram.leakage(buffers.local.capacity) * fabric.cores
            + sram.leakage(buffers.global_.capacity)
            + arrays.leakage_w * fabric.total_arrays)


def dynamic_energy(result: PhaseResult, sram: SramEnergyModel,
                   arrays: ArrayPower, clock: ClockSpec,
                   buffers: Buffers, fabric: FabricSpec) -> float:
    """SRAM access energy plus array switching energy.

    The array term is P_dyn(f, util) * compute_time; written with the
    frequency cancelled (cycles / ref_frequency) so that design points
    with identical cycles get bit-identical energy at every frequency.
    """
    del clock  # frequency cancels out of the array term exactly
    parts = dynamic_components(result, sram, arrays, buffers, fabric)
    return sum(parts.values())


def dynamic_components(result: PhaseResult, sram: SramEnergyModel,
                       arrays: ArrayPower, buffers: Buffers,
                       fabric: FabricSpec) -> dict[str, float]:
    tr = result.traffic
    local = (tr.local_reads + tr.local_writes) \
        * sram.access_energy(buffers.local.capacity)
    global_ = (tr.global_reads + tr.global_writes) \
        * sram.access_energy(buffers.global_.capacity)
    array = (arrays.dynamic_w_ref * result.utilization
             * (result.compute_cycles / arrays.ref_frequency)
             * fabric.total_arrays)
    return {"local_buffers": local, "global_buffer": global_, "arrays": array}


def total_energy(static_j: float, dynamic_j: float,
                 latency: float) -> tuple[float, float]:
    """Returns (total_j, dynamic_power_w)."""
    if static_j < 0 or dynamic_j < 0:
        raise ValueError("energy must be non-negative")
    return static_j + dynamic_j, dynamic_j / latency


def phase_energy(result: PhaseResult, phase: Phase, sram: SramEnergyModel,
                 arrays: ArrayPower, gating: GatingPolicy, clock: ClockSpec,
                 buffers: Buffers, fabric: FabricSpec) -> EnergyBreakdown:
    """Full static/dynamic/total breakdown for one evaluated phase."""
    g = gating.saving(phase)
    static = static_energy(result, leakage_sum(sram, arrays, buffers, fabric), g)
    dyn_parts = dynamic_components(result, sram, arrays, buffers, fabric)
    dynamic = sum(dyn_parts.values())
    total, dyn_power = total_energy(static, dynamic, result.latency)

    static_parts = {
        "local_buffers": result.latency * sram.leakage(buffers.local.capacity)
        * fabric.cores * (1.0 - g),
        "global_buffer": result.latency * sram.leakage(buffers.global_.capacity)
        * (1.0 - g),
        "arrays": result.latency * arrays.leakage_w * fabric.total_arrays
        * (1.0 - g),
    }
    by_component = {
        name: {"static_j": static_parts[name], "dynamic_j": dyn_parts[name]}
        for name in ("local_buffers", "global_buffer", "arrays")
    }
    return EnergyBreakdown(
        static_j=static,
        dynamic_j=dynamic,
        total_j=total,
        dynamic_power_w=dyn_power,
        by_component=by_component,
    )
