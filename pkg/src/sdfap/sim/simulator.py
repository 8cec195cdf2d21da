"""Cycle-by-cycle execution of a compiled SDF-AP graph.

Each cycle has two phases. First every node controller that may start a
firing samples the readiness of its input FIFOs; then all controllers and
FIFOs advance together. FIFO contents are tracked per occurrence so a read
of data that has not been written is caught as an underflow, and the
occupancy of every buffer is checked against its capacity.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..analysis import CONSERVATIVE, EAGER, check_mode, source_period
from ..control import IDLE, FifoControllerState, fifo_apply, node_controller_step
from ..errors import CycleLimitError, DeadlockError, EvalError, UnderflowFault
from ..graph.elaborate import Op, Out, Src, scalar_leaves
from ..interp import GoldenInterpreter, int_div, wrap
from .golden import entry_args


@dataclass
class SimTrace:
    mode: str
    frames: int
    period: int
    records: list = field(default_factory=list)  # one dict per cycle
    starts: dict = field(default_factory=dict)  # actor id -> start cycles
    completion: list = field(default_factory=list)  # per frame
    peaks: dict = field(default_factory=dict)  # fifo id -> max occupancy seen
    totals: dict = field(default_factory=dict)  # fifo id -> (written, read)
    final_occupancy: dict = field(default_factory=dict)

    @property
    def latency(self):
        return self.completion[0] if self.completion else 0

    @property
    def initiation_interval(self):
        if len(self.completion) < 2:
            return None
        return self.completion[-1] - self.completion[-2]

    @property
    def cycles(self):
        return len(self.records)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n" for r in self.records)

    def waveform(self, limit: Optional[int] = None) -> str:
        """Compact text waveform: one row per node, one column per cycle."""
        recs = self.records if limit is None else self.records[:limit]
        if not recs:
            return ""
        names = sorted({n for r in recs for n in r["nodes"]}, key=_natural)
        w = max(len(n) for n in names)
        lines = [" " * w + " | " + "".join(f"{r['cycle'] % 10}" for r in recs)]
        for n in names:
            row = []
            for r in recs:
                st = r["nodes"].get(n, "Idle")
                row.append("." if st == "Idle" else st[1:][-1])
            lines.append(f"{n:<{w}} | " + "".join(row))
        return "\n".join(lines) + "\n"

    def excerpt(self, cycle, radius=2):
        lo, hi = max(0, cycle - radius), cycle + radius
        return [r for r in self.records if lo <= r["cycle"] <= hi]


def _natural(s):
    parts = []
    for chunk in s.replace(":", ".").split("."):
        parts.append((0, int(chunk), "") if chunk.isdigit() else (1, 0, chunk))
    return parts


# values ---------------------------------------------------------------------


class _BatchInterp(GoldenInterpreter):
    """Golden semantics over numpy vectors: one lane per input frame."""

    def is_scalar(self, v):
        return isinstance(v, (int, np.ndarray))

    def scalar_op(self, op, a, b, node, ctx):
        return _apply(op, a, b, self.width, node)


def _wrap(v, width):
    if isinstance(v, int):
        return wrap(v, width)
    if v.dtype == object:
        return np.array([wrap(int(x), width) for x in v], dtype=object)
    half = 1 << (width - 1)
    return ((v + half) & ((1 << width) - 1)) - half


def _apply(op, a, b, width, node=None):
    if op == "+":
        r = a + b
    elif op == "-":
        r = a - b
    elif op == "*":
        r = a * b
    elif op == "div":
        if np.any(np.asarray(b) == 0):
            frames = [int(i) for i in np.flatnonzero(np.asarray(b) == 0)] if isinstance(b, np.ndarray) else []
            where = f" (frames {frames[:5]})" if frames else ""
            raise EvalError(f"division by zero{where}", *GoldenInterpreter.where(node))
        if isinstance(a, int) and isinstance(b, int):
            r = int_div(a, b)
        else:
            q = np.abs(a) // np.abs(b)
            r = np.where((np.asarray(a) < 0) != (np.asarray(b) < 0), -q, q)
    else:
        raise EvalError(f"unknown operator {op!r}")
    return _wrap(r, width)


class _Values:
    """Signal values for every frame at once, resolved through firing bodies.

    Timing and values are kept apart: the cycle loop proves every read saw
    data that was already written, and values are resolved afterwards, so a
    consumer that overlaps a still-running producer needs no speculation.
    Each scalar is a vector with one entry per frame.
    """

    def __init__(self, g, frames_args, mutate=None):
        self.g = g
        self.args = frames_args
        self.nfr = len(frames_args)
        self.width = g.width
        self.dtype = np.int64 if g.width <= 32 else object
        self.interp = _BatchInterp(g.program, g.width)
        self.outs = {}  # firing -> output tokens
        self.ops = {}
        self.src = {}
        self.mutate = mutate
        self._dense = {}

    def _param(self, i):
        hit = self._dense.get(i)
        if hit is None:
            try:
                hit = np.array([a[i] for a in self.args], dtype=self.dtype)
                if hit.dtype == object and self.dtype != object:
                    hit = False
            except (ValueError, TypeError):
                hit = False
            self._dense[i] = hit
        return hit

    def _source(self, s):
        key = (s.param, s.path)
        hit = self.src.get(key)
        if hit is None:
            dense = self._param(s.param)
            if dense is not False and dense.ndim == len(s.path) + 1:
                hit = dense[(slice(None),) + tuple(s.path)]
            else:
                vals = []
                for a in self.args:
                    v = a[s.param]
                    for i in s.path:
                        v = v[i]
                    vals.append(v)
                hit = np.array(vals, dtype=self.dtype)
            self.src[key] = hit
        return hit

    def scalar(self, s):
        if isinstance(s, int):
            return s
        if isinstance(s, Src):
            return self._source(s)
        if isinstance(s, Out):
            v = self.fire(s.firing)[s.token]
            for i in s.path:
                v = v[i]
            return v
        return self._op(s)

    def _op(self, s):
        hit = self.ops.get(id(s))
        if hit is not None:
            return hit
        stack = [s]
        while stack:
            x = stack[-1]
            if id(x) in self.ops:
                stack.pop()
                continue
            todo = [c for c in (x.a, x.b) if isinstance(c, Op) and id(c) not in self.ops]
            if todo:
                stack.extend(todo)
                continue
            a = self.ops[id(x.a)] if isinstance(x.a, Op) else self.scalar(x.a)
            b = self.ops[id(x.b)] if isinstance(x.b, Op) else self.scalar(x.b)
            op = x.op
            if self.mutate == x.node:
                op = {"+": "-", "-": "+", "*": "+", "div": "*"}[op]
            self.ops[id(x)] = _apply(op, a, b, self.width)
            stack.pop()
        return self.ops[id(s)]

    def tree(self, v):
        if isinstance(v, list):
            return [self.tree(x) for x in v]
        if isinstance(v, tuple):
            return tuple(self.tree(x) for x in v)
        return self.scalar(v)

    def fire(self, f):
        hit = self.outs.get(f)
        if hit is None:
            values = [[self.tree(t) for t in toks] for toks in f.inputs]
            hit = f.body(self.interp, values)
            if self.mutate == f.actor.id:
                hit = [_bump(t, self.width) for t in hit]
            self.outs[f] = hit
        return hit

    def split(self, v):
        """Per-frame plain values of a batched tree."""
        if isinstance(v, list):
            cols = [self.split(x) for x in v]
            return [list(r) for r in zip(*cols)] if cols else [[] for _ in range(self.nfr)]
        if isinstance(v, tuple):
            cols = [self.split(x) for x in v]
            return [tuple(r) for r in zip(*cols)]
        if isinstance(v, np.ndarray):
            return [int(x) for x in v]
        return [int(v)] * self.nfr


def _bump(v, width):
    if isinstance(v, list):
        return [_bump(x, width) for x in v]
    if isinstance(v, tuple):
        return tuple(_bump(x, width) for x in v)
    return _wrap(v + 1, width)


# simulation -------------------------------------------------------------------


@dataclass
class _ActorState:
    actor: object
    nc: object = IDLE
    next: int = 0  # global firing index (frame-major)
    cur: Optional[int] = None
    starts: list = field(default_factory=list)


def simulate(g, specs, input, max_cycles: int = 100_000, mode: str = EAGER, frames: Optional[int] = None,
             record: bool = True, mutate: Optional[str] = None):
    """Run the design on ``input`` and return ``(output, trace)``.

    With ``frames`` set, ``input`` is a list of that many input values,
    streamed one frame per source period, and the output is a list too.
    """
    mode = check_mode(mode)
    if max_cycles < 1:
        raise ValueError("max_cycles must be >= 1")
    nl = g.netlist
    defn = g.program.get(g.entry)
    stream = frames is not None
    frames_in = list(input) if stream else [input]
    if stream and len(frames_in) != frames:
        raise ValueError(f"expected {frames} input frames, got {len(frames_in)}")
    nfr = len(frames_in)
    period = source_period(g)
    spec_by = {s.edge: s for s in specs}
    ports = g.ports
    missing = [p.id for p in ports if p.id not in spec_by]
    if missing:
        raise ValueError(f"no FifoSpec for {', '.join(missing[:3])}")
    values = _Values(g, [entry_args(defn, v) for v in frames_in], mutate)

    actors = [_ActorState(a) for a in nl.actors]
    nf = {a.id: len(a.firings) for a in nl.actors}
    total = {a.id: nf[a.id] * nfr for a in nl.actors}

    # occurrences by consumer firing, and their dependence on producer firings
    occ_of = defaultdict(list)  # firing -> [occurrence]
    waiting = defaultdict(list)  # producer firing -> [(occurrence, producer phase)]
    for port in ports:
        for oc in port.occurrences:
            occ_of[oc.firing].append(oc)
            for pf, ph in oc.roots:
                waiting[pf].append((oc, ph))
    sink_roots = []
    sink_src = 0
    for s in scalar_leaves(nl.output):
        rs, src, _ = g.roots.roots(s)
        sink_roots.extend(rs)
        if src is not None:
            sink_src = max(sink_src, src)
    sink_roots = list(dict.fromkeys(sink_roots))
    sink_wait = defaultdict(list)
    for pf, ph in sink_roots:
        sink_wait[pf].append(ph)

    # per (occurrence, frame): resolved root times and committed write cycle
    remaining = {}
    latest = {}
    write_at = {}  # (id(oc), frame) -> cycle
    writes_due = defaultdict(list)  # cycle -> [(oc, frame)]
    written = set()
    fifo = {p.id: FifoControllerState() for p in ports}
    peaks = {p.id: 0 for p in ports}
    moved = {p.id: [0, 0] for p in ports}
    sink_left = [len(sink_roots)] * nfr
    sink_time = [f * period + sink_src for f in range(nfr)]
    sink_done = [None] * nfr

    def commit(oc, frame, t):
        write_at[(id(oc), frame)] = t
        writes_due[t].append((oc, frame))

    for frame in range(nfr):
        fb = frame * period
        for port in ports:
            for oc in port.occurrences:
                key = (id(oc), frame)
                remaining[key] = len(oc.roots)
                latest[key] = fb + oc.src - 1 if oc.src is not None else None
                if not oc.roots:
                    commit(oc, frame, fb + oc.src - 1)
        if not sink_roots:
            sink_done[frame] = sink_time[frame] + 1

    def ready(ast, t):
        a = ast.actor
        i = ast.next
        if i >= total[a.id]:
            return False
        frame, fi = divmod(i, nf[a.id])
        if t < frame * period:
            return False
        f = a.firings[fi]
        for oc in occ_of[f]:
            w = write_at.get((id(oc), frame))
            if w is None:
                return False
            if mode == CONSERVATIVE:
                if w > t - 1:
                    return False
            elif w > t + oc.phase - 1:
                return False
        return True

    records = []
    # cycle -1 only preloads frame 0's source data
    t = -1
    _land(writes_due.pop(-1, []), written, fifo, spec_by, peaks, moved, -1, {})
    t = 0
    while True:
        if all(ast.next >= total[ast.actor.id] and ast.nc.idle for ast in actors) and all(
            d is not None for d in sink_done
        ):
            break
        if t >= max_cycles:
            raise CycleLimitError(f"simulation did not finish within {max_cycles} cycles", t)
        # phase (a): readiness from this cycle's registered state
        en = {}
        for ast in actors:
            L = ast.actor.latency
            if ast.nc.idle or ast.nc.phase == L - 1:
                en[ast.actor.id] = ready(ast, t)
        # phase (b): synchronous update
        reads = defaultdict(int)
        for ast in actors:
            a = ast.actor
            L = a.latency
            new = node_controller_step(ast.nc, en.get(a.id, False), L)
            if new.phase == 0:
                ast.cur = ast.next
                ast.next += 1
                ast.starts.append(t)
                frame, fi = divmod(ast.cur, nf[a.id])
                f = a.firings[fi]
                for oc, ph in waiting.get(f, ()):
                    key = (id(oc), frame)
                    remaining[key] -= 1
                    at = t + ph
                    if latest[key] is None or at > latest[key]:
                        latest[key] = at
                    if remaining[key] == 0:
                        commit(oc, frame, latest[key])
                for ph in sink_wait.get(f, ()):
                    sink_left[frame] -= 1
                    sink_time[frame] = max(sink_time[frame], t + ph)
                    if sink_left[frame] == 0:
                        sink_done[frame] = sink_time[frame] + 1
            elif new.idle:
                ast.cur = None
            ast.nc = new
            if not new.idle:
                frame, fi = divmod(ast.cur, nf[a.id])
                f = a.firings[fi]
                for oc in occ_of[f]:
                    if oc.phase != new.phase:
                        continue
                    key = (id(oc), frame)
                    if key not in written:
                        raise UnderflowFault(
                            f"underflow on {oc.port.id} at cycle {t}: {a.id} reads data that has not arrived",
                            t,
                            oc.port.id,
                        )
                    written.discard(key)
                    reads[oc.port.id] += oc.scalars
        w_counts = _land(writes_due.pop(t, []), written, None, None, None, None, t, {})
        for pid in set(w_counts) | set(reads):
            w = w_counts.get(pid, 0)
            r = reads.get(pid, 0)
            nxt = fifo_apply(fifo[pid], spec_by[pid], w, r, t)
            fifo[pid] = nxt
            if nxt.occupancy > peaks[pid]:
                peaks[pid] = nxt.occupancy
            moved[pid][0] += w
            moved[pid][1] += r
        if record:
            records.append(
                {
                    "cycle": t,
                    "nodes": {ast.actor.id: str(ast.nc) for ast in actors},
                    "fifos": {pid: fifo[pid].occupancy for pid in fifo},
                    "writes": {k: v for k, v in sorted(w_counts.items()) if v},
                    "reads": {k: v for k, v in sorted(reads.items()) if v},
                    "sink": [f for f in range(nfr) if sink_done[f] == t + 1],
                }
            )
        busy = any(not ast.nc.idle for ast in actors)
        future = bool(writes_due)
        later_frame = any(
            ast.next < total[ast.actor.id] and (ast.next // nf[ast.actor.id]) * period > t for ast in actors
        )
        unfinished = any(ast.next < total[ast.actor.id] for ast in actors)
        if unfinished and not busy and not future and not later_frame and not any(en.values()):
            stuck = [ast.actor.id for ast in actors if ast.next < total[ast.actor.id]]
            raise DeadlockError(
                f"deadlock at cycle {t}: {', '.join(stuck[:5])} can never become ready", t, stuck[0]
            )
        t += 1

    # resolve firings in start order so producers are always memoised first
    order = []
    for ai, ast in enumerate(actors):
        for fi in range(nf[ast.actor.id]):
            order.append((ast.starts[fi], ai, fi, ast.actor.firings[fi]))
    order.sort(key=lambda x: x[:3])
    for *_, f in order:
        values.fire(f)
    outputs = values.split(values.tree(nl.output))
    trace = SimTrace(mode, nfr, period, records)
    trace.starts = {ast.actor.id: list(ast.starts) for ast in actors}
    trace.completion = [d if d is not None else 0 for d in sink_done]
    trace.peaks = peaks
    trace.totals = {k: tuple(v) for k, v in moved.items()}
    trace.final_occupancy = {k: v.occupancy for k, v in fifo.items()}
    return (outputs if stream else outputs[0]), trace


def _land(items, written, fifo, spec_by, peaks, moved, t, counts):
    """Mark occurrences written this cycle; returns scalars per FIFO."""
    for oc, frame in items:
        written.add((id(oc), frame))
        counts[oc.port.id] = counts.get(oc.port.id, 0) + oc.scalars
    if fifo is not None:
        for pid, n in counts.items():
            st = fifo[pid]
            fifo[pid] = fifo_apply(st, spec_by[pid], n, 0, t)
            peaks[pid] = max(peaks[pid], fifo[pid].occupancy)
            moved[pid][0] += n
    return counts
