"""Command-line entry point: simulate, sweep, roofline, calibrate, report."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .calibrate import CalibrationTarget, calibrate, constants_file_text
from .config import (ConfigError, HardwareConfig, apply_overrides,
                     decode_step, load_hardware, load_model_spec,
                     load_request, load_sweep_axes, parse_config)
from .memory import GB, KIB
from .sweep import (DesignPoint, SweepRecord, SweepSpec, emit_reports,
                    evaluate_point, run_sweep, summary_dict, trace_for)
from .workload import Phase

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_BAD_CONFIG = 2


def _phase_from_name(name: str) -> Phase:
    return Phase.PREFILL if name == "prefill" else Phase.DECODE_STEP


def _load(args) -> tuple[dict[str, str], HardwareConfig]:
    values = parse_config(args.config)
    values = apply_overrides(values, args.override or [])
    return values, load_hardware(values)


def _record_dict(record: SweepRecord) -> dict:
    if not record.ok:
        return {"error": record.error,
                "point": {"S_bytes": record.point.s, "f_hz": record.point.f,
                          "bw_bytes_per_s": record.point.bw}}
    r, e, m, rf = record.result, record.energy, record.metrics, record.roofline
    return {
        "point": {"S_bytes": record.point.s, "f_hz": record.point.f,
                  "bw_bytes_per_s": record.point.bw},
        "phase": record.phase.value,
        "compute_cycles": r.compute_cycles,
        "compute_time_s": r.compute_time,
        "memory_time_s": r.memory_time,
        "latency_s": r.latency,
        "total_cycles": r.total_cycles,
        "compute_fraction": r.compute_fraction,
        "utilization": r.utilization,
        "bound": "memory" if r.memory_bound else "compute",
        "flops": r.flops,
        "traffic": {
            "dram_bytes": r.traffic.dram_bytes,
            "onchip_bytes": r.traffic.onchip_bytes,
            "local_reads": r.traffic.local_reads,
            "local_writes": r.traffic.local_writes,
            "global_reads": r.traffic.global_reads,
            "global_writes": r.traffic.global_writes,
        },
        "energy": {
            "static_j": e.static_j,
            "dynamic_j": e.dynamic_j,
            "total_j": e.total_j,
            "dynamic_power_w": e.dynamic_power_w,
            "by_component": e.by_component,
        },
        "edp_js": m.edp,
        "roofline": {"oi": rf.oi, "attainable": rf.attainable,
                     "achieved": rf.achieved, "bound": rf.bound.value},
    }


def _print_table(record: SweepRecord) -> None:
    d = _record_dict(record)
    s_kb = record.point.s / KIB
    f_mhz = record.point.f / 1e6
    bw_gbps = record.point.bw / GB
    print(f"design point     S={s_kb:g} KB  f={f_mhz:g} MHz  BW={bw_gbps:g} GB/s")
    print(f"phase            {d['phase']}")
    print(f"bound            {d['bound']}")
    print(f"latency          {d['latency_s']:.6e} s")
    print(f"compute time     {d['compute_time_s']:.6e} s")
    print(f"memory time      {d['memory_time_s']:.6e} s")
    print(f"compute cycles   {d['compute_cycles']}")
    print(f"total cycles     {d['total_cycles']:.6e}")
    print(f"compute fraction {d['compute_fraction']:.4f}")
    print(f"utilization      {d['utilization']:.4f}")
    print(f"dram bytes       {d['traffic']['dram_bytes']}")
    print(f"onchip bytes     {d['traffic']['onchip_bytes']}")
    print(f"static energy    {d['energy']['static_j']:.6e} J")
    print(f"dynamic energy   {d['energy']['dynamic_j']:.6e} J")
    print(f"total energy     {d['energy']['total_j']:.6e} J")
    print(f"dynamic power    {d['energy']['dynamic_power_w']:.6e} W")
    print(f"EDP              {d['edp_js']:.6e} J*s")
    print(f"roofline         OI={d['roofline']['oi']:.4f} fl/B  "
          f"attainable={d['roofline']['attainable']:.6e}  "
          f"achieved={d['roofline']['achieved']:.6e}  "
          f"bound={d['roofline']['bound']}")


def _simulate_record(values: dict[str, str], hw: HardwareConfig,
                     phase: Phase) -> SweepRecord:
    model = load_model_spec(values)
    req = load_request(values)
    step = decode_step(values)
    trace = trace_for(phase, model, req, step)
    point = DesignPoint(hw.buffers.local.capacity, hw.clock.frequency,
                        hw.mem.ext_bandwidth)
    return evaluate_point(trace, phase, hw, point, model.bytes_per_element)


def _print_csv(record: SweepRecord) -> None:
    d = _record_dict(record)
    fields = [
        ("phase", d["phase"]), ("S_bytes", d["point"]["S_bytes"]),
        ("f_hz", repr(d["point"]["f_hz"])),
        ("bw_bytes_per_s", repr(d["point"]["bw_bytes_per_s"])),
        ("bound", d["bound"]), ("latency_s", repr(d["latency_s"])),
        ("compute_time_s", repr(d["compute_time_s"])),
        ("memory_time_s", repr(d["memory_time_s"])),
        ("compute_cycles", d["compute_cycles"]),
        ("total_cycles", repr(d["total_cycles"])),
        ("compute_fraction", repr(d["compute_fraction"])),
        ("utilization", repr(d["utilization"])),
        ("dram_bytes", d["traffic"]["dram_bytes"]),
        ("static_j", repr(d["energy"]["static_j"])),
        ("dynamic_j", repr(d["energy"]["dynamic_j"])),
        ("total_j", repr(d["energy"]["total_j"])),
        ("edp_js", repr(d["edp_js"])),
    ]
    print(",".join(name for name, _ in fields))
    print(",".join(str(value) for _, value in fields))


def cmd_simulate(args) -> int:
    values, hw = _load(args)
    phase = _phase_from_name(args.phase)
    record = _simulate_record(values, hw, phase)
    if not record.ok:
        print(f"error: {record.error}", file=sys.stderr)
        return EXIT_FAILURE
    if args.format == "json":
        out = _record_dict(record)
        if phase is Phase.DECODE_STEP and args.decode_mode == "mean":
            out["decode_mean"] = _decode_mean(values, hw)
        print(json.dumps(out, indent=2, sort_keys=True))
    elif args.format == "csv":
        _print_csv(record)
    else:
        _print_table(record)
        if phase is Phase.DECODE_STEP and args.decode_mode == "mean":
            mean = _decode_mean(values, hw)
            print(f"mean over gen    {mean['mean_latency_s']:.6e} s/token, "
                  f"{mean['mean_total_j']:.6e} J/token "
                  f"({int(mean['steps'])} steps)")
    return EXIT_OK


def _decode_mean(values: dict[str, str], hw: HardwareConfig) -> dict:
    from .sweep import decode_mean_over_generation
    model = load_model_spec(values)
    req = load_request(values)
    point = DesignPoint(hw.buffers.local.capacity, hw.clock.frequency,
                        hw.mem.ext_bandwidth)
    return decode_mean_over_generation(hw, model, req, point)


def _sweep_from_config(values: dict[str, str], hw: HardwareConfig, jobs: int):
    model = load_model_spec(values)
    req = load_request(values)
    s_values, f_values, bw_values, phases = load_sweep_axes(values)
    spec = SweepSpec(tuple(s_values), tuple(f_values), tuple(bw_values),
                     tuple(phases))
    return run_sweep(spec, hw, model, req, decode_step=decode_step(values),
                     jobs=jobs)


def cmd_sweep(args) -> int:
    values, hw = _load(args)
    result = _sweep_from_config(values, hw, args.jobs)
    written = emit_reports(result, args.out)
    print(f"evaluated {len(result.records)} records, "
          f"wrote {len(written)} files to {args.out}")
    if not result.complete:
        failed = [r for r in result.records if not r.ok]
        print(f"error: {len(failed)} design points could not be evaluated",
              file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def cmd_roofline(args) -> int:
    values, hw = _load(args)
    result = _sweep_from_config(values, hw, args.jobs)
    phase = _phase_from_name(args.phase)
    print("bandwidth,S_bytes,f_hz,oi,attainable,achieved,bound")
    for bw in result.spec.bw_values:
        for r in result.select(phase, bw):
            if r.ok:
                rf = r.roofline
                print(f"{bw!r},{r.point.s},{r.point.f!r},{rf.oi!r},"
                      f"{rf.attainable!r},{rf.achieved!r},{rf.bound.value}")
    return EXIT_OK if result.complete else EXIT_FAILURE


def cmd_calibrate(args) -> int:
    values, hw = _load(args)
    model = load_model_spec(values)
    req = load_request(values)
    s_values, f_values, bw_values, phases = load_sweep_axes(values)
    spec = SweepSpec(tuple(s_values), tuple(f_values), tuple(bw_values),
                     tuple(phases))
    target = CalibrationTarget(s_bytes=int(args.target_s_kb * KIB),
                               f_hz=args.target_f_mhz * 1e6)
    outcome = calibrate(hw, spec, model, req, target,
                        decode_step=decode_step(values))
    text = constants_file_text(outcome, target, hw.sram.ref_size,
                               hw.sram.access_exponent)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote constants to {args.out}")
    else:
        print(text, end="")
    print(f"achieved argmin (S={outcome.achieved_s} B, "
          f"f={outcome.achieved_f:g} Hz) after {outcome.evaluations} "
          f"evaluations; displacement {outcome.displacement} grid step(s)")
    if outcome.displacement > 0:
        print("error: target argmin not reachable; best displacement "
              f"{outcome.displacement} grid step(s)", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def cmd_report(args) -> int:
    values, hw = _load(args)
    result = _sweep_from_config(values, hw, args.jobs)
    summary = summary_dict(result)
    print(f"records: {summary['record_count']}  complete: {summary['complete']}")
    print(f"decode convention: {summary['decode_convention']} "
          f"(step {summary['decode_step']})")
    for key in sorted(summary["grids"]):
        entry = summary["grids"][key]
        lat = entry["latency_argmin"]
        en = entry["total_energy_argmin"]
        ed = entry["edp_argmin"]
        print(f"{key}:")
        print(f"  latency argmin      S={lat['S_bytes'] / KIB:g} KB, "
              f"f={lat['f_hz'] / 1e6:g} MHz")
        print(f"  total energy argmin S={en['S_bytes'] / KIB:g} KB, "
              f"f={en['f_hz'] / 1e6:g} MHz")
        print(f"  EDP argmin          S={ed['S_bytes'] / KIB:g} KB, "
              f"f={ed['f_hz'] / 1e6:g} MHz")
        transitions = {
            f"{int(s) / KIB:g}KB": (f"{mhz:g} MHz" if mhz else "none")
            for s, mhz in entry["bound_transition_mhz"].items()}
        print(f"  memory-bound from   {transitions}")
    if args.out:
        written = emit_reports(result, args.out)
        print(f"wrote {len(written)} files to {args.out}")
    return EXIT_OK if result.complete else EXIT_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acceldse",
        description="Design-space exploration for LLM inference on a "
                    "systolic-array accelerator")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, needs_out=False):
        p.add_argument("--config", required=True, help="config file path")
        p.add_argument("--override", action="append", metavar="KEY=VALUE",
                       help="config override, repeatable, last writer wins")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel evaluation workers")
        if needs_out:
            p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("simulate", help="evaluate one design point")
    common(p)
    p.add_argument("--phase", choices=("prefill", "decode"), default="decode")
    p.add_argument("--format", choices=("table", "json", "csv"),
                   default="table")
    p.add_argument("--decode-mode", choices=("step", "mean"), default="step",
                   help="decode reporting: fixed step (default) or mean "
                        "over all generated tokens")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run the full design-space sweep")
    common(p, needs_out=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("roofline", help="print roofline points for a phase")
    common(p)
    p.add_argument("--phase", choices=("prefill", "decode"), default="decode")
    p.set_defaults(func=cmd_roofline)

    p = sub.add_parser("calibrate",
                       help="search SRAM constants for an EDP argmin target")
    common(p)
    p.add_argument("--target-s-kb", type=float, default=32.0)
    p.add_argument("--target-f-mhz", type=float, default=600.0)
    p.add_argument("--out", help="constants file to write")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("report", help="run the sweep and print a summary")
    common(p)
    p.add_argument("--out", help="also write report files here")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    sys.exit(main())
