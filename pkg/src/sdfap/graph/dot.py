"""Graphviz rendering of an SDF-AP graph."""

from __future__ import annotations

from ..patterns import display
from .dag import COMB, HOF, SINK, SOURCE


def _q(s):
    return '"' + str(s).replace('"', '\\"') + '"'


def _node_label(n):
    if n.kind == SOURCE:
        return f"{n.name}\\n{display(n.out_pattern)}" if n.out_pattern is not None else n.name
    if n.kind == SINK:
        return "out"
    if n.kind == COMB:
        return n.name
    cp = ",".join(display(p) for p in n.in_patterns)
    pp = display(n.out_pattern) if n.out_pattern is not None else "?"
    return f"{n.name} {cp}/{pp}"


_SHAPES = {SOURCE: "invhouse", SINK: "house", COMB: "ellipse", HOF: "box3d"}


def emit_dot(g, specs=None, name: str = "sdfap") -> str:
    """DOT text: SDF-AP nodes as boxes, expanded HoFs as (nested) clusters.

    Edge labels show ``pp -> cp``; edges into a FIFO also show its capacity
    when ``specs`` is given, and a reshaping FIFO is drawn bold.
    """
    cap = {s.edge: s for s in (specs or [])}
    lines = [f"digraph {_q(name)} {{", "  rankdir=LR;", '  node [fontname="Helvetica", fontsize=10];',
             '  edge [fontname="Helvetica", fontsize=9];']
    by_group = {}
    for n in g.nodes.values():
        by_group.setdefault(n.group, []).append(n)

    def node_line(n, ind):
        shape = _SHAPES.get(n.kind, "box")
        return f"{ind}{_q(n.id)} [label={_q(_node_label(n))}, shape={shape}];"

    def emit_group(gid, depth):
        h = g.hierarchy[gid]
        ind = "  " * (depth + 1)
        out = [f"{ind}subgraph {_q('cluster_' + gid)} {{",
               f"{ind}  label={_q(h['kind'] + ' ' + h['pattern'])};",
               f'{ind}  style=rounded; color=gray50;']
        for n in by_group.get(gid, []):
            out.append(node_line(n, ind + "  "))
        for child in sorted(_child_groups(g, gid), key=_natural):
            out.extend(emit_group(child, depth + 1))
        out.append(f"{ind}}}")
        return out

    for n in by_group.get(None, []):
        lines.append(node_line(n, "  "))
    for gid in sorted((k for k, h in g.hierarchy.items() if h["parent"] is None), key=_natural):
        lines.extend(emit_group(gid, 0))
    for e in g.edges:
        label = f"{display(e.pp) if e.pp is not None else '?'} -> {display(e.cp) if e.cp is not None else '?'}"
        attrs = []
        spec = cap.get(f"fifo:{e.consumer}:{e.consumer_port}")
        if spec is not None:
            label += f"\\ncap {spec.capacity}"
            if not spec.reshape.identity:
                attrs.append("style=bold")
        attrs.insert(0, f"label={_q(label)}")
        lines.append(f"  {_q(e.producer)} -> {_q(e.consumer)} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _child_groups(g, gid):
    return [k for k, h in g.hierarchy.items() if h["parent"] == gid]


def _natural(s):
    return [int(c) if c.isdigit() else c for c in str(s).replace(".", " . ").split()]


def cluster_depth(dot_text: str) -> int:
    """Deepest nesting of ``subgraph cluster_`` blocks in DOT text."""
    depth = best = 0
    for line in dot_text.splitlines():
        s = line.strip()
        if s.startswith("subgraph") and "cluster_" in s:
            depth += 1
            best = max(best, depth)
        elif s == "}" and depth:
            depth -= 1
    return best
