"""Line-oriented configuration with dotted keys.

Format: one `key = value` per line, `#` starts a comment, blank lines
ignored.  Keys are namespaced (`hw.*`, `model.*`, `sweep.*`); list
values are comma-separated.  Overrides (`key=value` strings) apply after
file parsing, last writer wins.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .dataflow import ArraySpec, FabricSpec
from .energy import ArrayPower, GatingPolicy, SramEnergyModel
from .memory import GB, KIB, MIB, BufferLevel, Buffers, BufferSpec, ClockSpec, MemorySpec
from .workload import InferenceRequest, ModelSpec, Phase

MHZ = 10**6


class ConfigError(ValueError):
    pass


def parse_config(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{path}:{lineno}: empty key or value in {raw!r}")
        values[key] = value
    return values


def apply_overrides(values: dict[str, str], overrides: list[str]) -> dict[str, str]:
    out = dict(values)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        if not key or not value:
            raise ConfigError(f"override has empty key or value: {item!r}")
        out[key] = value
    return out


def _get(values: dict[str, str], key: str, cast, default):
    if key not in values:
        return default
    try:
        return cast(values[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {values[key]!r} ({exc})") from exc


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


@dataclass(frozen=True)
class HardwareConfig:
    fabric: FabricSpec
    buffers: Buffers
    mem: MemorySpec
    clock: ClockSpec
    sram: SramEnergyModel
    arrays: ArrayPower
    gating: GatingPolicy

    def with_design_point(self, s_bytes: int, f_hz: float,
                          bw_bytes_per_s: float) -> "HardwareConfig":
        """Same hardware with local size, frequency, and ext bandwidth replaced."""
        return replace(
            self,
            buffers=Buffers(
                local=BufferSpec(BufferLevel.LOCAL, s_bytes),
                global_=self.buffers.global_,
            ),
            clock=ClockSpec(f_hz),
            mem=replace(self.mem, ext_bandwidth=bw_bytes_per_s),
        )


def load_model_spec(values: dict[str, str]) -> ModelSpec:
    return ModelSpec(
        d_model=_get(values, "model.d_model", int, 12288),
        n_heads=_get(values, "model.n_heads", int, 96),
        head_dim=_get(values, "model.head_dim", int, 128),
        mlp_ratio=_get(values, "model.mlp_ratio", int, 4),
        bytes_per_element=_get(values, "model.bytes_per_element", int, 2),
        n_layers=_get(values, "model.n_layers", int, 1),
    )


def load_request(values: dict[str, str]) -> InferenceRequest:
    return InferenceRequest(
        batch=_get(values, "model.batch", int, 8),
        prompt_len=_get(values, "model.prompt_len", int, 2048),
        gen_tokens=_get(values, "model.gen_tokens", int, 16),
    )


def decode_step(values: dict[str, str]) -> int:
    return _get(values, "model.decode_step", int, 0)


def load_hardware(values: dict[str, str]) -> HardwareConfig:
    fabric = FabricSpec(
        cores=_get(values, "hw.cores", int, 108),
        arrays_per_core=_get(values, "hw.arrays_per_core", int, 4),
        array=ArraySpec(
            rows=_get(values, "hw.array_rows", int, 16),
            cols=_get(values, "hw.array_cols", int, 16),
        ),
    )
    ext_bw = _get(values, "hw.ext_bandwidth_gbps", float, 2048.0) * GB
    onchip_default = 8.0 * ext_bw / GB
    mem = MemorySpec(
        ext_bandwidth=ext_bw,
        onchip_bandwidth=_get(values, "hw.onchip_bandwidth_gbps",
                              float, onchip_default) * GB,
    )
    buffers = Buffers(
        local=BufferSpec(
            BufferLevel.LOCAL,
            int(_get(values, "hw.local_buffer_kb", float, 64.0) * KIB)),
        global_=BufferSpec(
            BufferLevel.GLOBAL,
            int(_get(values, "hw.global_buffer_mb", float, 40.0) * MIB)),
    )
    clock = ClockSpec(_get(values, "hw.frequency_mhz", float, 800.0) * MHZ)
    sram = SramEnergyModel(
        leakage_per_byte=_get(values, "hw.sram_leakage_w_per_byte", float, 3.0e-7),
        access_energy_ref=_get(values, "hw.sram_access_energy_j", float, 2.0e-13),
        ref_size=int(_get(values, "hw.sram_access_ref_kb", float, 32.0) * KIB),
        access_exponent=_get(values, "hw.sram_access_exponent", float, 0.5),
    )
    arrays = ArrayPower(
        leakage_w=_get(values, "hw.array_leakage_w", float, 9.31e-3),
        dynamic_w_ref=_get(values, "hw.array_dynamic_w", float, 1.25),
        ref_frequency=_get(values, "hw.array_ref_frequency_mhz", float, 1000.0) * MHZ,
    )
    gating = GatingPolicy(
        prefill_saving=_get(values, "hw.gating_prefill", float, 0.04),
        decode_saving=_get(values, "hw.gating_decode", float, 0.20),
    )
    return HardwareConfig(fabric=fabric, buffers=buffers, mem=mem, clock=clock,
                          sram=sram, arrays=arrays, gating=gating)


DEFAULT_S_KB = [16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0]
DEFAULT_F_MHZ = [200.0, 400.0, 600.0, 800.0, 1000.0, 1200.0, 1400.0]
DEFAULT_BW_GBPS = [2048.0, 4096.0, 8192.0]


def load_sweep_axes(values: dict[str, str]) -> tuple[list[int], list[float], list[float], list[Phase]]:
    s_kb = _get(values, "sweep.local_buffer_kb", _float_list, DEFAULT_S_KB)
    f_mhz = _get(values, "sweep.frequency_mhz", _float_list, DEFAULT_F_MHZ)
    bw_gbps = _get(values, "sweep.bandwidth_gbps", _float_list, DEFAULT_BW_GBPS)
    phase_text = _get(values, "sweep.phases", str, "prefill,decode")
    phases = []
    for name in (p.strip() for p in phase_text.split(",") if p.strip()):
        if name == "prefill":
            phases.append(Phase.PREFILL)
        elif name == "decode":
            phases.append(Phase.DECODE_STEP)
        else:
            raise ConfigError(f"unknown phase in sweep.phases: {name!r}")
    s_values = sorted({int(v * KIB) for v in s_kb})
    f_values = sorted({v * MHZ for v in f_mhz})
    bw_values = sorted({v * GB for v in bw_gbps})
    return s_values, f_values, bw_values, phases
