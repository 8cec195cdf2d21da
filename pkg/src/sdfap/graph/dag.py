"""The SDF-AP graph: nodes, edges with pp/cp, and the HoF hierarchy."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from ..errors import GraphError, ShapeError
from ..frontend import ast as A
from ..frontend.analysis import COMBINATIONAL, classify_definitions, entry_shapes
from ..patterns import EdgeSpec, Flat, display

SOURCE = "Source"
SINK = "Sink"
SDFAP_NODE = "SdfapNode"
HOF_INSTANCE = "HofInstance"
COMB = "Combinational"
HOF = "Hof"  # an annotated HoF before expansion

ACTOR_KINDS = (SDFAP_NODE, HOF_INSTANCE)


@dataclass(eq=False)
class DagNode:
    id: str
    kind: str
    name: str
    latency: int = 0
    in_patterns: list = field(default_factory=list)
    out_pattern: object = None
    group: Optional[str] = None
    lane: tuple = ()
    ops: Counter = field(default_factory=Counter)
    origin: Optional[str] = None
    firings: int = 0
    label: int = -1

    @property
    def is_actor(self):
        return self.kind in ACTOR_KINDS


@dataclass(eq=False)
class SdfapGraph:
    nodes: dict
    edges: list
    hierarchy: dict
    program: object = None
    entry: Optional[str] = None
    shapes: list = field(default_factory=list)
    width: int = 32
    expanded: bool = False
    propagated: bool = False
    netlist: object = None
    ports: list = field(default_factory=list)
    roots: object = None

    def node(self, nid):
        return self.nodes[nid]

    def actors(self):
        return [n for n in self.nodes.values() if n.is_actor]

    def in_edges(self, nid):
        return [e for e in self.edges if e.consumer == nid]

    def out_edges(self, nid):
        return [e for e in self.edges if e.producer == nid]

    def topo_order(self):
        indeg = {n: 0 for n in self.nodes}
        for e in self.edges:
            if e.producer != e.consumer:
                indeg[e.consumer] += 1
        ready = [n for n in self.nodes if indeg[n] == 0]
        order = []
        succ = {}
        for e in self.edges:
            succ.setdefault(e.producer, []).append(e.consumer)
        while ready:
            n = ready.pop(0)
            order.append(n)
            for m in succ.get(n, []):
                if m == n:
                    continue
                indeg[m] -= 1
                if indeg[m] == 0:
                    ready.append(m)
        if len(order) != len(self.nodes):
            raise GraphError("graph has a cycle")
        return order

    def ancestors(self, nid):
        """Group ids enclosing node/group ``nid``, innermost first."""
        out = []
        g = self.nodes[nid].group if nid in self.nodes else self.hierarchy[nid]["parent"]
        while g is not None:
            out.append(g)
            g = self.hierarchy[g]["parent"]
        return out


def replace_edge(e: EdgeSpec, pp=None, cp=None) -> EdgeSpec:
    return EdgeSpec(
        e.producer, e.consumer, e.pp if pp is None else pp, e.cp if cp is None else cp, e.producer_port, e.consumer_port
    )


# pre-expansion DAG -------------------------------------------------------------


def _ensure_shapes(p, entry, shapes, width):
    try:
        return entry_shapes(p, entry, shapes, width)
    except ShapeError:
        if shapes is None:
            return None
        raise


def build_dag(p: A.Program, entry: Optional[str] = None, shapes=None, width: int = 32) -> SdfapGraph:
    """One node per application in the entry body, before HoF expansion.

    Local bindings are inlined (a binding used twice is still one node);
    traversal is depth-first, left to right, with a single label counter.
    """
    entry = entry or p.entry or p.defs[0].name
    kinds = classify_definitions(p)
    d = p.get(entry)
    defs = {x.name: x for x in p.defs}
    nodes = {}
    edges = []
    counter = Counter()

    def new(kind, name, **kw):
        nid = f"{name}.{counter[name]}"
        counter[name] += 1
        nodes[nid] = DagNode(nid, kind, name, **kw)
        return nid

    for q in d.params:
        nodes[f"src.{q.name}"] = DagNode(f"src.{q.name}", SOURCE, q.name)
    bindings = dict(d.local_bindings)
    memo = {}
    active = set()

    def visit(e):
        """Returns the list of node ids whose outputs make up ``e``."""
        if isinstance(e, A.Var):
            if e.name in bindings:
                if e.name in active:
                    raise GraphError(f"cyclic binding reference through {e.name!r}", *(e.pos or (None, None)))
                if e.name not in memo:
                    active.add(e.name)
                    memo[e.name] = visit(bindings[e.name])
                    active.discard(e.name)
                return memo[e.name]
            if f"src.{e.name}" in nodes:
                return [f"src.{e.name}"]
            return []
        if isinstance(e, (A.Lit, A.OpRef, A.Lambda)):
            return []
        if isinstance(e, (A.Tuple, A.VecLit)):
            out = []
            for i in e.items:
                out += visit(i)
            return out
        if isinstance(e, A.BinOp):
            ins = visit(e.left) + visit(e.right)
            nid = new(COMB, e.op if e.op != "div" else "div", label=e.label)
            _connect(ins, nid)
            return [nid]
        if isinstance(e, A.Transpose):
            ins = visit(e.arg)
            nid = new(COMB, "transpose", label=e.label)
            _connect(ins, nid)
            return [nid]
        if isinstance(e, A.Hof):
            arg_outs = [visit(a) for a in e.args]
            if e.pattern is not None:
                q = Flat(e.pattern)
                nid = new(HOF, e.kind, label=e.label, origin=f"{e.kind} {display(q)}", latency=len(e.pattern),
                          in_patterns=[q], out_pattern=q)
            else:
                nid = new(COMB, e.kind, label=e.label)
            for port, outs in enumerate(arg_outs):
                _connect(outs, nid, port)
            return [nid]
        if isinstance(e, A.App):
            arg_outs = [visit(a) for a in e.args]
            callee = e.func.name if isinstance(e.func, A.Var) else None
            if callee in defs:
                cd = defs[callee]
                if cd.annotated:
                    nid = new(
                        SDFAP_NODE,
                        callee,
                        label=e.label,
                        latency=len(cd.output_annotation),
                        in_patterns=[Flat(q.annotation) for q in cd.params],
                        out_pattern=Flat(cd.output_annotation),
                    )
                else:
                    nid = new(COMB if kinds[callee].kind == COMBINATIONAL else SDFAP_NODE, callee, label=e.label)
            else:
                fn_outs = visit(e.func)
                nid = new(COMB, "apply", label=e.label)
                _connect(fn_outs, nid, len(arg_outs))
            for port, outs in enumerate(arg_outs):
                _connect(outs, nid, port)
            return [nid]
        raise GraphError(f"unexpected expression {type(e).__name__}")

    def _connect(ins, nid, port=None):
        for i, src in enumerate(ins):
            cport = port if port is not None else i
            if not any(x.producer == src and x.consumer == nid and x.consumer_port == cport for x in edges):
                edges.append(EdgeSpec(src, nid, None, None, 0, cport))

    outs = visit(d.body)
    nodes["sink"] = DagNode("sink", SINK, "sink")
    for i, o in enumerate(outs):
        edges.append(EdgeSpec(o, "sink", None, None, 0, i))
    # patterns that are already known: annotated nodes
    fixed = []
    for e in edges:
        pn, cn = nodes[e.producer], nodes[e.consumer]
        pp = pn.out_pattern
        cp = cn.in_patterns[e.consumer_port] if cn.in_patterns and e.consumer_port < len(cn.in_patterns) else None
        fixed.append(replace_edge(e, pp=pp, cp=cp))
    return SdfapGraph(nodes, fixed, {}, program=p, entry=entry, shapes=_ensure_shapes(p, entry, shapes, width),
                      width=width)
