"""``sdfap`` command line: check, graph, analyze, sim and verify."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import CONSERVATIVE, EAGER, render_report
from .compile import compile_program
from .errors import SdfapError, SimulationFault
from .frontend import parse_program
from .graph.dot import emit_dot
from .graph.export import graph_json, load_capacities
from .sim.simulator import simulate
from .sim.verify import random_inputs, verify_equivalence
from .values import from_json, to_json

EXIT_OK, EXIT_DIAG, EXIT_USAGE, EXIT_FAULT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _color(stream) -> bool:
    env = os.environ.get("SDFAP_COLOR")
    if env is not None:
        return env != "0"
    return hasattr(stream, "isatty") and stream.isatty()


def _diag(kind, text):
    label = f"{kind}:"
    if _color(sys.stderr):
        code = "31" if kind == "error" else "33" if kind == "fault" else "36"
        label = f"\x1b[1;{code}m{label}\x1b[0m"
    print(f"{label} {text}", file=sys.stderr)


def _read_source(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"{path}: cannot read source: {e.strerror or e}") from e


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        p = Path(path)
        if p.parent and not p.parent.exists():
            p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")
    except OSError as e:
        raise UsageError(f"{path}: cannot write: {e.strerror or e}") from e


def _design(args):
    text = _read_source(args.file)
    p = parse_program(text)
    return compile_program(p, args.entry, shapes=args.shape or None, mode=args.mode)


def _debug_specs(args, design):
    """FIFO specs after the debug capacity overrides, for fault injection."""
    specs = list(design.specs)
    if getattr(args, "debug_capacities", None):
        caps = load_capacities(_read_source(args.debug_capacities))
        specs = [s.with_capacity(caps.get(s.edge, s.capacity)) for s in specs]
    delta = getattr(args, "debug_capacity_delta", 0) or 0
    if delta:
        specs = [s.with_capacity(max(0, s.capacity + delta)) for s in specs]
    return specs


def _inputs(args, design):
    if (args.input is None) == (args.random is None):
        raise UsageError("give exactly one of --input FILE or --random N")
    if args.random is not None:
        if args.random < 1:
            raise UsageError("--random: count must be >= 1")
        return random_inputs(design.shapes, args.random, args.seed)
    try:
        doc = json.loads(_read_source(args.input))
    except json.JSONDecodeError as e:
        raise UsageError(f"{args.input}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}") from e
    raw = doc["inputs"] if isinstance(doc, dict) and "inputs" in doc else [doc]
    if not raw:
        raise UsageError(f"{args.input}: no inputs")
    shp = design.shapes
    if len(shp) == 1:
        return [from_json(v, shp[0]) for v in raw]
    return [[from_json(a, s) for a, s in zip(v, shp)] for v in raw]


# commands ---------------------------------------------------------------------


def cmd_check(args):
    d = _design(args)
    print(f"{args.file}: ok: {d.entry} ({len(d.graph.netlist.actors)} SDF-AP nodes, {len(d.specs)} FIFOs)")
    return EXIT_OK


def cmd_graph(args):
    d = _design(args)
    out = Path(args.out) if args.out else None

    def target(path, suffix):
        if path in (None, "-"):
            return "-" if out is None else str(out / f"{d.entry}{suffix}")
        return str(out / path) if out is not None and not Path(path).is_absolute() else path

    dot = args.dot is not None or args.json is None
    if dot:
        _write(target(args.dot, ".dot"), emit_dot(d.graph, d.specs, name=d.entry))
    if args.json is not None:
        _write(target(args.json, ".json"), graph_json(d.graph, d.specs))
    return EXIT_OK


def cmd_analyze(args):
    d = compile_program(parse_program(_read_source(args.file)), args.entry, shapes=args.shape or None,
                        mode=args.mode, div_weight=args.div_weight)
    _write(args.out or "-", render_report(d.report, args.format))
    return EXIT_OK


def cmd_sim(args):
    d = _design(args)
    inputs = _inputs(args, d)
    specs = _debug_specs(args, d)
    outs, trace = simulate(d.graph, specs, inputs, max_cycles=args.max_cycles, mode=args.mode,
                           frames=len(inputs), record=bool(args.trace), mutate=args.debug_mutate)
    if args.trace:
        _write(args.trace, trace.to_jsonl())
        _write(str(Path(args.trace).with_suffix(".wave.txt")), trace.waveform())
    print(to_json(outs[0] if len(outs) == 1 else outs))
    ii = trace.initiation_interval
    print(f"latency {trace.latency} cycles, initiation interval {'-' if ii is None else ii}, "
          f"{len(inputs)} frame(s), mode {trace.mode}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args):
    d = _design(args)
    inputs = _inputs(args, d)
    rep = verify_equivalence(d, inputs, mode=args.mode, specs=_debug_specs(args, d), mutate=args.debug_mutate,
                             max_cycles=args.max_cycles)
    if args.format == "json":
        print(json.dumps(rep.as_dict(), indent=2))
    else:
        print(rep.summary())
        bad = rep.first_failure()
        if bad is not None and rep.fault is None:
            print(f"first failing input #{bad.index}: {bad.error}")
            if bad.divergence is not None:
                print(f"  divergence path: {list(bad.divergence)}")
                print(f"  expected: {to_json(bad.expected)}")
                print(f"  got:      {to_json(bad.got)}")
            for r in bad.excerpt:
                print("  " + json.dumps(r, sort_keys=True, separators=(",", ":")))
    if rep.fault is not None:
        return EXIT_FAULT
    return EXIT_OK if rep.ok else EXIT_DIAG


# parser -------------------------------------------------------------------------


def _parser():
    ap = argparse.ArgumentParser(prog="sdfap", description="Compile and simulate SDF-AP annotated programs.")
    ap.add_argument("--version", action="version", version=f"sdfap {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(p):
        p.add_argument("file", help="DSL source file")
        p.add_argument("--entry", help="entry definition (default: the program's last definition)")
        p.add_argument("--mode", choices=[EAGER, CONSERVATIVE], default=EAGER, help="readiness mode")
        p.add_argument("--shape", action="append", metavar="SHAPE",
                       help="entry parameter shape such as 6x3 or Int, once per parameter")

    def run_inputs(p):
        p.add_argument("--input", metavar="FILE", help="JSON input value, or {\"inputs\": [...]} for a stream")
        p.add_argument("--random", type=int, metavar="N", help="N seeded random inputs")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-cycles", type=int, default=1_000_000)
        p.add_argument("--debug-mutate", metavar="NODE", help=argparse.SUPPRESS)
        p.add_argument("--debug-capacities", metavar="GRAPH_JSON", help=argparse.SUPPRESS)
        p.add_argument("--debug-capacity-delta", type=int, default=0, help=argparse.SUPPRESS)

    p = sub.add_parser("check", help="parse, classify and build the graph; report diagnostics")
    common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("graph", help="export the SDF-AP graph as DOT and/or JSON")
    common(p)
    p.add_argument("--dot", nargs="?", const="-", metavar="FILE")
    p.add_argument("--json", nargs="?", const="-", metavar="FILE")
    p.add_argument("--out", metavar="DIR", help="directory for the exported files")
    p.set_defaults(fn=cmd_graph)

    p = sub.add_parser("analyze", help="latency, initiation interval and resource report")
    common(p)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--div-weight", type=int, default=1, help="DSPs charged per divider")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("sim", help="cycle-accurate simulation")
    common(p)
    run_inputs(p)
    p.add_argument("--trace", metavar="FILE", help="write a JSON-lines trace here (plus a .wave.txt waveform)")
    p.set_defaults(fn=cmd_sim)

    p = sub.add_parser("verify", help="check the simulated design against the golden model")
    common(p)
    run_inputs(p)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(fn=cmd_verify)
    return ap


def run(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    fname = getattr(args, "file", "<input>")
    try:
        if getattr(args, "max_cycles", 1) < 1:
            raise UsageError("--max-cycles must be >= 1")
        return args.fn(args)
    except UsageError as e:
        _diag("error", str(e))
        return EXIT_USAGE
    except SimulationFault as e:
        where = f" at cycle {e.cycle}" if e.cycle is not None and "cycle" not in e.message else ""
        _diag("fault", f"{fname}: {e.message}{where}")
        return EXIT_FAULT
    except SdfapError as e:
        _diag("error", e.located(fname))
        return EXIT_DIAG
    except ValueError as e:
        _diag("error", f"{fname}: {e}")
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
