"""Command-line entry point: compile one QASM file or sweep a directory.

Single compile writes the schedule and metrics report as JSON; suite mode
writes one CSV row per (circuit, technique, grid). Exit codes: 1 parse or
usage error, 2 capacity/geometry error, 3 validation failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import time
from pathlib import Path

from .circuit import CircuitError, decompose_to_basis
from .machine import GRID_KINDS, CapacityError, GeometryError, build_layout, generate_grid, load_params
from .metrics import build_report
from .qasm import QasmError, parse_qasm
from .schedule import schedule_to_json
from .scheduler import TECHNIQUES, Compiler
from .verifier import EQUIVALENCE_QUBIT_CAP, equivalence_check, validate_schedule

CSV_HEADER = ["name", "technique", "grid", "runtime_us", "esp", "swaps",
              "trap_changes", "movement_um", "u3", "cz", "compile_ms", "error"]

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_CAPACITY = 2
EXIT_VALIDATION = 3


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pachinqo",
        description="Compile QASM circuits onto a zoned Rydberg atom array.",
    )
    p.add_argument("--input", help="QASM 2.0 file to compile")
    p.add_argument("--technique", default="pachinqo",
                   help=f"one of {', '.join(TECHNIQUES)}")
    p.add_argument("--grid", default="large-square",
                   help=f"one of {', '.join(GRID_KINDS)}")
    p.add_argument("--params",
                   default=os.environ.get("PACHINQO_PARAMS") or None,
                   help="JSON parameter file (default: $PACHINQO_PARAMS)")
    p.add_argument("--scale", default="auto",
                   choices=["default", "doubled", "auto"])
    p.add_argument("--out-schedule", default="schedule.json")
    p.add_argument("--out-report", default="report.json")
    p.add_argument("--suite-dir", help="directory of QASM files to sweep")
    p.add_argument("--out-csv", default="suite.csv")
    p.add_argument("--techniques",
                   help="comma list for suite mode (default: all)")
    p.add_argument("--grids",
                   help="comma list for suite mode (default: --grid)")
    p.add_argument("--validate", action="store_true",
                   help="run the schedule validator (and the equivalence "
                        "oracle on small circuits)")
    p.add_argument("--serial-movement", action="store_true",
                   help="time column moves serially instead of concurrently")
    return p


def _compile_file(path: str, technique: str, grid_kind: str, params,
                  scale: str, serial: bool):
    """Parse, lower, and compile one file. Returns (schedule, report, extras)."""
    text = Path(path).read_text(encoding="utf-8")
    raw = parse_qasm(text, name=Path(path).stem)
    t0 = time.perf_counter()
    circuit = decompose_to_basis(raw)
    layout = build_layout(circuit.num_qubits, scale, params, grid_kind)
    grid = generate_grid(grid_kind, layout, params)
    compiler = Compiler(circuit, technique, grid, layout, params, serial)
    schedule = compiler.run()
    compile_ms = (time.perf_counter() - t0) * 1e3
    report = build_report(schedule, params, compile_ms)
    return circuit, layout, grid, schedule, report


def run_compile(args) -> int:
    params, file_scale = load_params(args.params)
    scale = args.scale if args.scale != "auto" else (file_scale or "auto")
    try:
        circuit, layout, grid, schedule, report = _compile_file(
            args.input, args.technique, args.grid, params, scale,
            args.serial_movement)
    except (QasmError, CircuitError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (CapacityError, GeometryError) as e:
        print(f"capacity/geometry error: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    Path(args.out_schedule).write_text(schedule_to_json(schedule),
                                       encoding="utf-8")
    Path(args.out_report).write_text(report.to_json(), encoding="utf-8")
    if args.validate:
        violations = validate_schedule(schedule, layout, grid, params, circuit)
        for v in violations:
            print(str(v), file=sys.stderr)
        if circuit.num_qubits <= EQUIVALENCE_QUBIT_CAP:
            equal, tvd = equivalence_check(schedule, circuit)
            if not equal:
                print(f"equivalence check diverged: TVD={tvd:.3e}",
                      file=sys.stderr)
                return EXIT_VALIDATION
        if violations:
            return EXIT_VALIDATION
    return EXIT_OK


def run_suite(args) -> int:
    params, file_scale = load_params(args.params)
    scale = args.scale if args.scale != "auto" else (file_scale or "auto")
    techniques = (args.techniques.split(",") if args.techniques
                  else list(TECHNIQUES))
    grids = args.grids.split(",") if args.grids else [args.grid]
    for t in techniques:
        if t not in TECHNIQUES:
            print(f"unknown technique {t!r}", file=sys.stderr)
            return EXIT_PARSE
    for g in grids:
        if g not in GRID_KINDS:
            print(f"unknown grid {g!r}", file=sys.stderr)
            return EXIT_PARSE
    files = sorted(Path(args.suite_dir).glob("*.qasm"))
    if not files:
        print(f"no .qasm files in {args.suite_dir}", file=sys.stderr)
        return EXIT_PARSE

    rows = []
    failures = 0
    jobs = sorted(
        (f.stem, t, g, f) for f in files for t in techniques for g in grids
    )
    for name, technique, grid_kind, path in jobs:
        try:
            _, _, _, schedule, report = _compile_file(
                str(path), technique, grid_kind, params, scale,
                args.serial_movement)
            rows.append([name, technique, grid_kind,
                         repr(report.runtime_us), repr(report.esp),
                         report.swap_count, report.trap_change_count,
                         repr(report.total_movement_um),
                         report.gate_counts["u3"], report.gate_counts["cz"],
                         repr(report.compile_time_ms), ""])
        except (QasmError, CircuitError, CapacityError, GeometryError) as e:
            failures += 1
            rows.append([name, technique, grid_kind,
                         "", "", "", "", "", "", "", "", str(e)])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)
    Path(args.out_csv).write_text(buf.getvalue(), encoding="utf-8")
    return EXIT_OK if failures < len(rows) else EXIT_PARSE


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.technique not in TECHNIQUES:
        parser.print_usage(sys.stderr)
        print(f"unknown technique {args.technique!r}", file=sys.stderr)
        return EXIT_PARSE
    if args.grid not in GRID_KINDS:
        parser.print_usage(sys.stderr)
        print(f"unknown grid {args.grid!r}", file=sys.stderr)
        return EXIT_PARSE
    try:
        if args.suite_dir:
            return run_suite(args)
        if not args.input:
            parser.print_usage(sys.stderr)
            print("one of --input or --suite-dir is required", file=sys.stderr)
            return EXIT_PARSE
        return run_compile(args)
    except GeometryError as e:
        print(f"capacity/geometry error: {e}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
