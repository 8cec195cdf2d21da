"""Graph JSON export (schema in docs/graph-schema.md)."""

from __future__ import annotations

import json

from ..patterns import display

SCHEMA_VERSION = 1


def _pat(p):
    return None if p is None else display(p)


def graph_dict(g, specs=None) -> dict:
    by_fifo = {s.edge: s for s in (specs or [])}
    nodes = []
    for n in g.nodes.values():
        nodes.append(
            {
                "id": n.id,
                "kind": n.kind,
                "name": n.name,
                "latency": n.latency,
                "in_patterns": [_pat(p) for p in n.in_patterns],
                "out_pattern": _pat(n.out_pattern),
                "group": n.group,
                "lane": list(n.lane),
                "origin": n.origin,
                "firings": n.firings,
                "ops": {k: n.ops[k] for k in sorted(n.ops)},
            }
        )
    edges = []
    for e in g.edges:
        fid = f"fifo:{e.consumer}:{e.consumer_port}"
        spec = by_fifo.get(fid)
        edges.append(
            {
                "from": e.producer,
                "to": e.consumer,
                "port": e.consumer_port,
                "pp": _pat(e.pp),
                "cp": _pat(e.cp),
                "fifo": fid if spec is not None else None,
                "capacity": spec.capacity if spec is not None else None,
                "write_widths": list(spec.write_widths) if spec is not None else None,
                "read_widths": list(spec.read_widths) if spec is not None else None,
            }
        )
    hierarchy = {}
    for gid, h in g.hierarchy.items():
        hierarchy[gid] = {
            "kind": h["kind"],
            "pattern": h["pattern"],
            "in_pattern": _pat(h["in_pattern"]),
            "out_pattern": _pat(h["out_pattern"]),
            "lanes": h["lanes"],
            "parent": h["parent"],
            "children": list(h["children"]),
        }
    return {
        "schema": SCHEMA_VERSION,
        "entry": g.entry,
        "width": g.width,
        "nodes": nodes,
        "edges": edges,
        "fifos": [s.as_dict() for s in (specs or [])],
        "hierarchy": hierarchy,
    }


def graph_json(g, specs=None) -> str:
    return json.dumps(graph_dict(g, specs), indent=2) + "\n"


def load_capacities(text: str) -> dict:
    """FIFO id -> capacity from a graph JSON document (a hand-edited one included)."""
    doc = json.loads(text)
    return {f["id"]: int(f["capacity"]) for f in doc.get("fifos", [])}
