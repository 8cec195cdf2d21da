"""Static schedule, resource counts and reports."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .errors import DeadlockError
from .graph.elaborate import scalar_leaves

CONSERVATIVE = "conservative"
EAGER = "eager"
MODES = (EAGER, CONSERVATIVE)


def check_mode(mode):
    m = str(mode).lower()
    if m not in MODES:
        raise ValueError(f"unknown readiness mode {mode!r}; expected eager or conservative")
    return m


@dataclass
class PortTimeline:
    port: str
    events: dict  # cycle -> (writes, reads) in scalars
    peak: int
    firing_scalars: int  # scalars one consumer firing takes from this port
    write_hist: tuple  # frame-0 writes per cycle, first to last write

    def occupancy(self):
        """(cycle, occupancy) at every cycle boundary from -1 on."""
        if not self.events:
            return []
        lo, hi = min(self.events), max(self.events)
        occ = 0
        out = []
        for t in range(lo, hi + 1):
            w, r = self.events.get(t, (0, 0))
            occ += w - r
            out.append((t, occ))
        return out


@dataclass
class StaticSchedule:
    mode: str
    frames: int
    period: int  # cycles between frame injections
    starts: dict  # actor id -> list of start cycles (frame-major, slot order)
    completion: list  # per frame: cycle after the last output scalar is produced
    ports: dict = field(default_factory=dict)  # port id -> PortTimeline

    @property
    def latency(self):
        return self.completion[0]

    @property
    def initiation_interval(self) -> Optional[int]:
        if len(self.completion) < 2:
            return None
        return self.completion[-1] - self.completion[-2]

    def firing_cycles(self):
        return {k: list(v) for k, v in self.starts.items()}


def source_period(g):
    """Cycles between consecutive input frames.

    The environment injects a new frame once per source firing, but never
    faster than the busiest physical node can absorb it (its firings per
    frame times its latency); without backpressure a faster source would
    only grow the buffers without bound.
    """
    nl = g.netlist
    hi = 0
    for tree in nl.inputs:
        for s in scalar_leaves(tree):
            if s.demand is not None:
                hi = max(hi, s.demand)
    busy = max((len(a.firings) * a.latency for a in nl.actors), default=1)
    return max(hi + 1, busy)


def firing_constraints(g, mode):
    """Per firing: ({producer firing: offset}, source offset).

    A firing may start at ``t`` once ``t >= start(producer) + offset`` for
    every producer and ``t >= frame_base + source offset``.

    Eager: every token consumed in phase ``k`` must be readable by ``t+k``
    and its producer must already have started (its arrival is committed,
    not speculative). Conservative: everything must be readable by ``t``.
    """
    mode = check_mode(mode)
    cons = {}
    for port in g.ports:
        for oc in port.occurrences:
            deps, so = cons.get(oc.firing, (None, 0))
            if deps is None:
                deps = {}
            k = oc.phase
            for pf, ph in oc.roots:
                off = max(1, ph + 1 - k) if mode == EAGER else ph + 1
                if deps.get(pf, -1) < off:
                    deps[pf] = off
            if oc.src is not None:
                so = max(so, oc.src - k if mode == EAGER else oc.src)
            cons[oc.firing] = (deps, max(so, 0))
    return cons


def schedule(g, mode=EAGER, frames: int = 1) -> StaticSchedule:
    """Earliest-start schedule by a forward sweep over firing dependencies."""
    mode = check_mode(mode)
    if frames < 1:
        raise ValueError("frames must be >= 1")
    nl = g.netlist
    per = source_period(g)
    cons = firing_constraints(g, mode)
    actors = nl.actors
    nf = {a.id: len(a.firings) for a in actors}
    starts = {a.id: [] for a in actors}

    def start_of(pf, frame):
        lst = starts[pf.actor.id]
        i = frame * nf[pf.actor.id] + pf.index
        return lst[i] if i < len(lst) else None

    total = sum(nf.values()) * frames
    done = 0
    while done < total:
        progress = False
        for a in actors:
            lst = starts[a.id]
            while len(lst) < nf[a.id] * frames:
                i = len(lst)
                frame, fi = divmod(i, nf[a.id])
                f = a.firings[fi]
                deps, so = cons.get(f, ({}, 0))
                fb = frame * per
                t = fb + so
                if lst:
                    t = max(t, lst[-1] + a.latency)
                blocked = False
                for pf, off in deps.items():
                    s = start_of(pf, frame)
                    if s is None:
                        blocked = True
                        break
                    t = max(t, s + off)
                if blocked:
                    break
                lst.append(t)
                done += 1
                progress = True
        if not progress:
            stuck = [a.id for a in actors if len(starts[a.id]) < nf[a.id] * frames]
            raise DeadlockError(f"structural deadlock: {', '.join(stuck[:5])} can never become ready")

    completion = []
    for frame in range(frames):
        completion.append(_produced(nl.output, starts, nf, frame, frame * per, g.roots) + 1)
    sched = StaticSchedule(mode, frames, per, starts, completion)
    sched.ports = _timelines(g, sched, nf)
    return sched


def sizing_schedule(g, mode=EAGER, frames: int = 2) -> StaticSchedule:
    """Schedule long enough to reach steady state.

    Buffers are sized from the frames that fill the pipeline (the transient
    prefix) plus one steady-state iteration; with ``L`` the single-frame
    latency and ``P`` the source period that is ``ceil(L / P) + 2`` frames.
    """
    one = schedule(g, mode, frames=1)
    need = -(-one.latency // one.period) + 2
    return schedule(g, mode, frames=max(frames, need))


def _produced(value, starts, nf, frame, fb, roots):
    t = fb
    for s in scalar_leaves(value):
        rs, src, _ = roots.roots(s)
        for pf, ph in rs:
            t = max(t, starts[pf.actor.id][frame * nf[pf.actor.id] + pf.index] + ph)
        if src is not None:
            t = max(t, fb + src)
    return t


def occurrence_readable(oc, starts, nf, frame, fb):
    t = None
    for pf, ph in oc.roots:
        r = starts[pf.actor.id][frame * nf[pf.actor.id] + pf.index] + ph + 1
        t = r if t is None else max(t, r)
    if oc.src is not None:
        r = fb + oc.src
        t = r if t is None else max(t, r)
    return t


def _timelines(g, sched, nf):
    out = {}
    for port in g.ports:
        a = port.actor
        events = {}
        frame0 = Counter()
        for frame in range(sched.frames):
            fb = frame * sched.period
            for oc in port.occurrences:
                ready = occurrence_readable(oc, sched.starts, nf, frame, fb)
                w_at = ready - 1
                r_at = sched.starts[a.id][frame * nf[a.id] + oc.firing.index] + oc.phase
                w, r = events.get(w_at, (0, 0))
                events[w_at] = (w + oc.scalars, r)
                w, r = events.get(r_at, (0, 0))
                events[r_at] = (w, r + oc.scalars)
                if frame == 0:
                    frame0[w_at] += oc.scalars
        per_firing = Counter()
        for oc in port.occurrences:
            per_firing[oc.firing.index] += oc.scalars
        lo, hi = min(frame0), max(frame0)
        hist = tuple(frame0.get(t, 0) for t in range(lo, hi + 1))
        tl = PortTimeline(port.id, events, 0, max(per_firing.values()), hist)
        tl.peak = max((o for _, o in tl.occupancy()), default=0)
        out[port.id] = tl
    return out


# resources ---------------------------------------------------------------------


@dataclass
class ResourceReport:
    dsp_count: int
    adder_count: int
    buffer_words: int
    buffer_bits: int
    node_count: int
    fifo_count: int
    latency_cycles: int
    initiation_interval: Optional[int]
    mode: str = EAGER
    entry: str = ""
    div_weight: int = 1
    per_node: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "entry": self.entry,
            "mode": self.mode,
            "dsp_count": self.dsp_count,
            "adder_count": self.adder_count,
            "buffer_words": self.buffer_words,
            "buffer_bits": self.buffer_bits,
            "node_count": self.node_count,
            "fifo_count": self.fifo_count,
            "latency_cycles": self.latency_cycles,
            "initiation_interval": self.initiation_interval,
            "div_weight": self.div_weight,
            "per_node": {k: self.per_node[k] for k in sorted(self.per_node)},
        }


def node_dsps(node, div_weight=1):
    return node.ops.get("*", 0) + div_weight * node.ops.get("div", 0)


def node_adders(node):
    return node.ops.get("+", 0) + node.ops.get("-", 0)


def count_resources(g, specs, sched: StaticSchedule, div_weight: int = 1) -> ResourceReport:
    """DSPs are ``*`` and ``div`` instances over the physical design.

    Each actor contributes the operators of its body once (with unannotated
    HoFs unrolled); a combinational-HoF node contributes one copy per lane,
    i.e. its widest phase. Time-multiplexed phases share hardware.
    """
    dsp = add = 0
    per_node = {}
    count = 0
    for n in g.nodes.values():
        if n.is_actor or n.kind == "Combinational":
            d, a = node_dsps(n, div_weight), node_adders(n)
            dsp += d
            add += a
            if n.is_actor:
                count += 1
            if d or a:
                per_node[n.id] = {"dsp": d, "adders": a}
    specs = list(specs or [])
    words = sum(s.capacity for s in specs)
    bits = sum(s.capacity * s.scalar_bits for s in specs)
    return ResourceReport(
        dsp, add, words, bits, count, len(specs), sched.latency, sched.initiation_interval, sched.mode,
        g.entry or "", div_weight, per_node,
    )


def render_report(r: ResourceReport, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(r.as_dict(), indent=2) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    rows = [
        ("Entry", r.entry),
        ("Mode", r.mode),
        ("DSPs", r.dsp_count),
        ("Latency", r.latency_cycles),
        ("Initiation interval", "-" if r.initiation_interval is None else r.initiation_interval),
        ("Adders", r.adder_count),
        ("SDF-AP nodes", r.node_count),
        ("FIFOs", r.fifo_count),
        ("Buffer words", r.buffer_words),
        ("Buffer bits", r.buffer_bits),
    ]
    lines = [f"{k}: {v}" for k, v in rows]
    return "\n".join(lines) + "\n"
