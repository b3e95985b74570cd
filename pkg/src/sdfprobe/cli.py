"""Command line front end.

Verbs:
  analyze   timing + power per measured block in one mapping
  explore   latency/power per mapping and Pareto fronts
  system    uninstrumented run with free-running power sampling
  import    summarize an external sample capture (CSV)
  validate  check a DUT file and report violations

Exit codes: 0 success, 2 parse/validation failure, 3 deadlock, 4 I/O error.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import experiments
from .analysis import emit_reports, render_table
from .dutfile import load_dut, validate_dut
from .errors import DeadlockError, SdfProbeError
from .instrument import GranularityLevel, invasiveness
from .measctrl import write_timing_csv
from .power import write_sample_csv

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DEADLOCK = 3
EXIT_IO = 4

_GRANULARITIES = [g.value for g in GranularityLevel]


def _out_dir(args) -> Path:
    if args.out_dir:
        return Path(args.out_dir)
    return Path(os.environ.get("SDFPROBE_OUT_DIR", "sdfprobe_out"))


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("dut", help="DUT description (.xml or .json, or a bundled name)")
    parser.add_argument("--repetitions", type=int, default=None, metavar="N",
                        help="measurements per block (default: from the DUT file)")
    parser.add_argument("--seed", type=int, default=None, metavar="N",
                        help="base seed (default: from the DUT file)")
    parser.add_argument("--out-dir", default=None, metavar="DIR",
                        help="report directory (default: $SDFPROBE_OUT_DIR or ./sdfprobe_out)")
    parser.add_argument("--format", choices=["csv", "svg", "table"], default="csv",
                        help="report format (CSV is always written)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdfprobe",
        description="Cycle-level timing and power measurement for dataflow "
        "applications on a shared-bus multiprocessor.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="measure every block at one granularity")
    _add_common(p)
    p.add_argument("--mapping", default=None, metavar="ID",
                   help="mapping to analyze (default: first in the DUT)")
    p.add_argument("--granularity", choices=_GRANULARITIES, default=None,
                   help="measurement granularity (default: from the DUT file)")

    p = sub.add_parser("explore", help="compare mappings and compute Pareto fronts")
    _add_common(p)

    p = sub.add_parser("system", help="profile a mapping without instrumentation")
    _add_common(p)
    p.add_argument("--mapping", default=None, metavar="ID")
    p.add_argument("--iterations", type=int, default=None, metavar="N",
                   help="graph iterations to run (default: repetitions)")

    p = sub.add_parser("import", help="summarize an external power capture")
    p.add_argument("samples", help="sample CSV (cycle,rail,watts)")
    p.add_argument("--out-dir", default=None, metavar="DIR")

    p = sub.add_parser("validate", help="check a DUT description")
    p.add_argument("dut", help="DUT description (.xml or .json)")
    return parser


def _cmd_analyze(args) -> int:
    dut = load_dut(args.dut)
    validate_dut(dut).raise_if_failed()
    granularity = GranularityLevel(args.granularity) if args.granularity else dut.granularity
    out = _out_dir(args)
    if granularity is GranularityLevel.SYSTEM:
        # no blocks to instrument: fall through to the system profile
        res = experiments.system_profile(
            dut, mapping_id=args.mapping, iterations=args.repetitions, seed=args.seed
        )
        return _emit_system(res, out)
    result = experiments.analyze(
        dut,
        mapping_id=args.mapping,
        granularity=granularity,
        repetitions=args.repetitions,
        seed=args.seed,
    )
    paths = emit_reports(out, summaries=result.summaries, fmt=args.format)
    out.mkdir(parents=True, exist_ok=True)
    tpath = out / "timing.csv"
    write_timing_csv(tpath, [r for sc in result.results for r in sc.timing])
    paths.append(str(tpath))
    print(render_table(result.summaries))
    ref = min(
        (s.cycles_avg for s in result.summaries if s.block_id.endswith(".compute")),
        default=None,
    )
    if ref:
        pct = invasiveness(ref, granularity, dut.control_cost)
        print(f"worst-case instrumentation overhead: {pct:.3f}% "
              f"(relative to the shortest compute phase, {ref:.0f} cycles)")
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def _cmd_explore(args) -> int:
    dut = load_dut(args.dut)
    validate_dut(dut).raise_if_failed()
    result = experiments.explore(dut, repetitions=args.repetitions, seed=args.seed)
    out = _out_dir(args)
    paths = emit_reports(out, points=result.points, fronts=result.fronts, fmt=args.format)
    for graph_id, front in sorted(result.fronts.items()):
        ids = ", ".join(p.mapping_id for p in front)
        print(f"{graph_id}: pareto front = [{ids}]")
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def _emit_system(res, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    spath = out / "samples.csv"
    write_sample_csv(spath, res.sample_instants, res.sample_watts)
    lines = [
        f"mapping: {res.mapping_id}",
        f"cycles: {res.end_cycle}",
        f"power_avg_watts: {res.power.avg!r}",
        f"power_best_watts: {res.power.best!r}",
        f"power_worst_watts: {res.power.worst!r}",
        f"samples: {res.power.sample_count}",
    ]
    for graph_id, n in sorted(res.iterations.items()):
        lines.append(f"iterations[{graph_id}]: {n}")
        lines.append(
            f"cycles_per_iteration[{graph_id}]: {res.cycles_per_iteration(graph_id)!r}"
        )
    (out / "system.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    print(f"wrote {spath}")
    print(f"wrote {out / 'system.txt'}")
    return EXIT_OK


def _cmd_system(args) -> int:
    dut = load_dut(args.dut)
    validate_dut(dut).raise_if_failed()
    res = experiments.system_profile(
        dut,
        mapping_id=args.mapping,
        iterations=args.iterations if args.iterations is not None else args.repetitions,
        seed=args.seed,
    )
    return _emit_system(res, _out_dir(args))


def _cmd_import(args) -> int:
    from .power import read_sample_csv

    instants, _rails, watts = read_sample_csv(args.samples)
    stats = experiments.import_samples(instants, watts)
    lines = [
        f"samples: {stats.sample_count}",
        f"power_avg_watts: {stats.avg!r}",
        f"power_best_watts: {stats.best!r}",
        f"power_worst_watts: {stats.worst!r}",
    ]
    print("\n".join(lines))
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "import.txt").write_text("\n".join(lines) + "\n")
        print(f"wrote {out / 'import.txt'}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    dut = load_dut(args.dut)
    report = validate_dut(dut)
    if report.ok:
        graphs = ", ".join(g.graph_id for g in dut.graphs)
        print(f"ok: {len(dut.graphs)} graph(s) [{graphs}], "
              f"{len(dut.platform.tiles)} tiles, {len(dut.mappings)} mapping(s)")
        return EXIT_OK
    for v in report.violations:
        print(f"violation: {v}", file=sys.stderr)
    return EXIT_INVALID


_COMMANDS = {
    "analyze": _cmd_analyze,
    "explore": _cmd_explore,
    "system": _cmd_system,
    "import": _cmd_import,
    "validate": _cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except DeadlockError as exc:
        print(f"deadlock: {exc}", file=sys.stderr)
        return EXIT_DEADLOCK
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SdfProbeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
