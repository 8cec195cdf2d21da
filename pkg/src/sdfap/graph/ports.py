"""Consumer ports and their token occurrences.

An occurrence is a group of scalars that one consumer firing reads in one
phase and that share the same upstream roots (the producer firings, or the
source, whose output they depend on). Scheduling, buffer sizing and the
cycle simulator all work on occurrences; values are looked up through the
signals they carry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..values import shape_of
from .elaborate import Op, Out, Src, scalar_leaves, token_phases


@dataclass(eq=False)
class Occurrence:
    port: "Port"
    firing: object
    phase: int
    scalars: int
    roots: tuple  # ((producer firing, producer phase), ...)
    src: Optional[int]  # latest frame-relative source injection, if any


@dataclass(eq=False)
class Port:
    id: str
    actor: object
    index: int
    pattern: object
    token_shape: object
    occurrences: list = field(default_factory=list)
    producers: list = field(default_factory=list)  # node ids, first-seen order


def out_phase(sig: Out) -> int:
    return token_phases(sig.firing.actor.out_pattern.entries)[sig.token]


class RootIndex:
    """Memoised upstream roots of each signal."""

    def __init__(self):
        self._memo = {}

    def roots(self, s):
        key = id(s)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        # iterative post-order over Op chains (folds can nest deeply)
        stack = [s]
        while stack:
            x = stack[-1]
            if id(x) in self._memo:
                stack.pop()
                continue
            if isinstance(x, Src):
                self._memo[id(x)] = (frozenset(), x.demand if x.demand is not None else 0, (x,))
                stack.pop()
            elif isinstance(x, Out):
                self._memo[id(x)] = (frozenset([(x.firing, out_phase(x))]), None, (x,))
                stack.pop()
            else:
                kids = [k for k in (x.a, x.b) if isinstance(k, (Src, Op, Out))]
                todo = [k for k in kids if id(k) not in self._memo]
                if todo:
                    stack.extend(todo)
                    continue
                rs = frozenset()
                src = None
                for k in kids:
                    r, sv, _ = self._memo[id(k)]
                    rs |= r
                    if sv is not None:
                        src = sv if src is None else max(src, sv)
                self._memo[id(x)] = (rs, src, ())
                stack.pop()
        return self._memo[key]


def immediate_producer(s, param_names):
    if isinstance(s, Src):
        return f"src.{param_names[s.param]}"
    if isinstance(s, Out):
        return s.firing.actor.id
    return s.node


def _root_key(roots):
    return tuple(sorted(((f.actor.id, f.index, ph) for f, ph in roots)))


def build_ports(netlist, index: RootIndex):
    ports = []
    for actor in netlist.actors:
        first = actor.firings[0]
        for pi, pat in enumerate(actor.in_patterns):
            tok0 = first.inputs[pi][0]
            try:
                tshape = shape_of(_zeroed(tok0), netlist.width)
            except Exception:
                tshape = None
            port = Port(f"fifo:{actor.id}:{pi}", actor, pi, pat, tshape)
            seen_prod = {}
            phases = token_phases(pat.entries)
            for f in actor.firings:
                by_phase = {}
                for ph, tok in zip(phases, f.inputs[pi]):
                    groups = by_phase.setdefault(ph, {})
                    for s in scalar_leaves(tok):
                        prod = immediate_producer(s, netlist.params)
                        seen_prod.setdefault(prod, None)
                        roots, src, _ = index.roots(s)
                        k = (roots, src)
                        g = groups.get(k)
                        if g is None:
                            groups[k] = [roots, src, 1]
                        else:
                            g[2] += 1
                for ph, groups in by_phase.items():
                    keyed = [(_root_key(r), -1 if sv is None else sv, r, sv, n) for r, sv, n in groups.values()]
                    for _, _, roots, src, n in sorted(keyed, key=lambda x: (x[0], x[1])):
                        rs = tuple(sorted(roots, key=lambda r: (r[0].actor.id, r[0].index, r[1])))
                        port.occurrences.append(Occurrence(port, f, ph, n, rs, src))
            port.producers = list(seen_prod)
            if port.occurrences:
                ports.append(port)
    return ports


def _zeroed(v):
    if isinstance(v, list):
        return [_zeroed(x) for x in v]
    if isinstance(v, tuple):
        return tuple(_zeroed(x) for x in v)
    return 0
