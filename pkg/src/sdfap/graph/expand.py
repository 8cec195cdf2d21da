"""HoF expansion into physical node instances, and pattern propagation."""

from __future__ import annotations

from collections import Counter

from ..errors import GraphError, PatternConflictError, ShapeError
from ..frontend.analysis import check_shapes
from ..patterns import EdgeSpec, Flat, display, firing_latency
from .dag import COMB, HOF, SINK, SOURCE, DagNode, SdfapGraph, replace_edge
from .elaborate import Elaborator, Op, Src, scalar_leaves
from .ports import RootIndex, build_ports, immediate_producer


def _source_patterns(elab, netlist, shapes):
    """Production pattern of each entry parameter.

    For a one-parameter entry this is the entry's boundary pattern, which
    keeps the hierarchical display (e.g. ``([3]|[1])``). Otherwise, and as a
    cross-check, it is the histogram of the cycles at which the design first
    asks for each top-level element.
    """
    pats = []
    clo = elab.globals.vars[netlist.entry]
    for i, tree in enumerate(netlist.inputs):
        pat = _demand_histogram(tree)
        if len(netlist.inputs) == 1:
            try:
                pat = elab._boundary(clo, [tree], "in", 0)
            except (GraphError, ShapeError):
                pass
        pats.append(pat)
    return pats


def _demand_histogram(tree):
    if not isinstance(tree, list):
        return Flat([1])
    times = []
    for x in tree:
        ds = [s.demand for s in scalar_leaves(x) if isinstance(s, Src) and s.demand is not None]
        times.append(min(ds) if ds else 0)
    hist = [0] * (max(times) + 1)
    for t in times:
        hist[t] += 1
    return Flat(hist)


def expand_hofs(g: SdfapGraph) -> SdfapGraph:
    """Elaborate the entry: one node per physical SDF-AP instance.

    Annotated HoFs over functions containing SDF-AP nodes become groups in
    ``hierarchy``; annotated HoFs over plain functions become a single
    ``HofInstance`` node; everything else becomes combinational nodes.
    """
    p = g.program
    if g.shapes is None:
        raise ShapeError(f"no input shape for {g.entry!r}: add a signature or pass a shape")
    check_shapes(p, g.shapes, g.entry, g.width)
    elab = Elaborator(p, g.width)
    nl = elab.elaborate(g.entry, g.shapes)
    nodes = {}
    names = nl.params
    src_pats = _source_patterns(elab, nl, g.shapes)
    for i, name in enumerate(names):
        pat = src_pats[i]
        nodes[f"src.{name}"] = DagNode(f"src.{name}", SOURCE, name, latency=firing_latency(pat), out_pattern=pat)
    for a in nl.actors:
        nodes[a.id] = DagNode(
            a.id,
            a.kind,
            a.name,
            latency=a.latency,
            in_patterns=list(a.in_patterns),
            out_pattern=a.out_pattern,
            group=a.group,
            lane=a.lane,
            ops=Counter(a.ops),
            origin=a.origin,
            firings=len(a.firings),
        )
    for c in nl.combs:
        ops = Counter(c.ops.values())
        nodes[c.id] = DagNode(c.id, COMB, c.id, 0, group=c.group, lane=c.lane, ops=ops)
    nodes["sink"] = DagNode("sink", SINK, "sink")

    index = RootIndex()
    ports = build_ports(nl, index)

    edge_keys = {}

    def add(prod, cons, cport):
        k = (prod, cons, cport)
        if k not in edge_keys:
            edge_keys[k] = None

    for port in ports:
        for prod in port.producers:
            add(prod, port.actor.id, port.index)
    # combinational wiring
    seen = set()
    for c_sig in _all_ops(nl):
        if id(c_sig) in seen:
            continue
        seen.add(id(c_sig))
        for x in (c_sig.a, c_sig.b):
            if isinstance(x, (Src, Op)) or hasattr(x, "firing"):
                prod = immediate_producer(x, names)
                if prod != c_sig.node:
                    add(prod, c_sig.node, 0)
    for s in scalar_leaves(nl.output):
        add(immediate_producer(s, names), "sink", 0)

    edges = [EdgeSpec(pr, co, nodes[pr].out_pattern, None, 0, cp) for (pr, co, cp) in edge_keys]
    edges = [
        replace_edge(e, cp=nodes[e.consumer].in_patterns[e.consumer_port]) if nodes[e.consumer].is_actor else e
        for e in edges
    ]
    hierarchy = {}
    for grp in nl.groups:
        hierarchy[grp.id] = {
            "kind": grp.kind,
            "pattern": display(Flat(grp.q)),
            "in_pattern": grp.in_pattern,
            "out_pattern": grp.out_pattern,
            "lanes": grp.lanes,
            "parent": grp.parent,
            "children": list(grp.children),
        }
    out = SdfapGraph(nodes, edges, hierarchy, program=p, entry=g.entry, shapes=g.shapes, width=g.width,
                     expanded=True, netlist=nl, ports=ports, roots=index)
    return out


def _all_ops(nl):
    """Every Op signal reachable from actor inputs or the output."""
    stack = []
    for a in nl.actors:
        for f in a.firings:
            for toks in f.inputs:
                stack.extend(s for s in scalar_leaves(toks) if isinstance(s, Op))
    stack.extend(s for s in scalar_leaves(nl.output) if isinstance(s, Op))
    seen = set()
    order = []
    while stack:
        s = stack.pop()
        if id(s) in seen:
            continue
        seen.add(id(s))
        order.append(s)
        for x in (s.a, s.b):
            if isinstance(x, Op):
                stack.append(x)
    order.sort(key=lambda s: s.node)
    return order


def propagate_patterns(g: SdfapGraph) -> SdfapGraph:
    """Give every combinational node, and every edge, a concrete pattern.

    A combinational node takes the pattern of the SDF-AP nodes feeding it
    (directly or through other combinational nodes). Two different SDF-AP
    patterns meeting at one combinational node is an error. With no SDF-AP
    producer upstream it inherits the source pattern.
    """
    order = g.topo_order()
    preds = {}
    for e in g.edges:
        preds.setdefault(e.consumer, []).append(e.producer)
    sdfap_in = {}  # node -> {display: (pattern, producer id)}
    for nid in order:
        n = g.nodes[nid]
        if n.kind != COMB:
            continue
        found = {}
        fallback = None
        for pr in preds.get(nid, []):
            pn = g.nodes[pr]
            if pn.is_actor or pn.kind == HOF:
                if pn.out_pattern is not None:
                    found.setdefault(display(pn.out_pattern), (pn.out_pattern, pr))
            elif pn.kind == COMB:
                for k, v in sdfap_in.get(pr, {}).items():
                    found.setdefault(k, v)
                if fallback is None:
                    fallback = pn.out_pattern
            elif pn.kind == SOURCE and fallback is None:
                fallback = pn.out_pattern
        if len(found) > 1:
            items = sorted(found.items())
            (d1, (_, a)), (d2, (_, b)) = items[0], items[1]
            raise PatternConflictError(
                f"combinational node {nid} receives pattern {d1} from {a} and {d2} from {b}"
            )
        sdfap_in[nid] = found
        pat = next(iter(found.values()))[0] if found else fallback
        if pat is None:
            pat = Flat([1])
        n.out_pattern = pat
        n.in_patterns = [pat]
    edges = []
    for e in g.edges:
        pn, cn = g.nodes[e.producer], g.nodes[e.consumer]
        pp = pn.out_pattern if pn.out_pattern is not None else Flat([1])
        if cn.is_actor:
            cp = cn.in_patterns[e.consumer_port]
        elif cn.kind == HOF and cn.in_patterns:
            cp = cn.in_patterns[0]
        elif cn.kind == COMB:
            cp = cn.out_pattern
        else:  # sink adopts whatever arrives
            cp = pp
        edges.append(EdgeSpec(e.producer, e.consumer, pp, cp, e.producer_port, e.consumer_port))
    g.edges = edges
    g.propagated = True
    return g


def compile_graph(p, entry=None, shapes=None, width=32) -> SdfapGraph:
    """build_dag -> expand_hofs -> propagate_patterns."""
    from .dag import build_dag

    g = build_dag(p, entry, shapes, width)
    propagate_patterns(g)
    return propagate_patterns(expand_hofs(g))
