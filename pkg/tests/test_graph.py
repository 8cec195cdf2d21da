import json

import pytest

from sdfap import compile_source, load_corpus, parse_program
from sdfap.errors import PatternConflictError
from sdfap.graph import build_dag
from sdfap.graph.dag import COMB, HOF, HOF_INSTANCE, SDFAP_NODE as SDFAP, SINK, SOURCE
from sdfap.graph.dot import cluster_depth, emit_dot
from sdfap.graph.dag import SdfapGraph
from sdfap.graph.export import graph_dict, graph_json
from sdfap.graph.reshape import reshape_spec
from sdfap.patterns import display, firing_latency, parse_pattern

from conftest import CORPUS, design

NODE_F4 = "f ([1],a) ([1],b) ([1],c) ([1],d) = ([1],o) where\n  o = a + b + c + d\nh a b c d = f a b c d\n"


def kinds(g):
    return [n.kind for n in g.nodes.values()]


def test_four_sources_into_one_node():
    g = build_dag(parse_program(NODE_F4), "h", shapes=["Int"] * 4)
    assert kinds(g).count(SOURCE) == 4 and kinds(g).count(SDFAP) == 1
    assert sorted(e.producer for e in g.in_edges("f.0")) == ["src.a", "src.b", "src.c", "src.d"]
    assert [e.consumer for e in g.out_edges("f.0")] == ["sink"]


def test_nested_application_gets_distinct_labels():
    src = "g ([1],x) = ([1],y) where\n  y = x * 2\nh x = o where\n  o = g (g x)\n"
    g = build_dag(parse_program(src), "h", shapes=["Int"])
    assert [n.id for n in g.nodes.values()] == ["src.x", "g.0", "g.1", "sink"]
    assert [(e.producer, e.consumer) for e in g.edges] == [("src.x", "g.0"), ("g.0", "g.1"), ("g.1", "sink")]


def test_identity_program():
    g = build_dag(parse_program("h x = o where\n  o = x\n"), "h", shapes=["Int"])
    assert kinds(g) == [SOURCE, SINK]
    assert [(e.producer, e.consumer) for e in g.edges] == [("src.x", "sink")]


def test_map_expands_into_instances():
    g = design("map_nodes.sdf", "g").graph
    assert [n.id for n in g.nodes.values() if n.kind == SDFAP] == ["f.0", "f.1", "f.2"]
    assert display(g.nodes["src.xs"].out_pattern) == "([3]|[1])"
    (gid, h), = g.hierarchy.items()
    assert h["kind"] == "map" and h["lanes"] == 3 and display(h["in_pattern"]) == "([3]|[1])"


def test_foldl_chains_instances():
    g = design("foldl_chain.sdf", "chain").graph
    assert [n.id for n in g.nodes.values() if n.kind == SDFAP] == ["n.0", "n.1", "n.2"]
    chain = [(e.producer, e.consumer) for e in g.edges if e.consumer_port == 0]
    assert chain == [("src.s", "n.0"), ("n.0", "n.1"), ("n.1", "n.2"), ("n.2", "sink")]


def test_combinational_hof_is_one_node():
    g = design("com.sdf", "com").graph
    m = g.nodes["map_lambda.0"]
    assert m.kind == HOF_INSTANCE and [display(p) for p in m.in_patterns] == ["[8]"]


def test_imap_lambda_inherits_pattern():
    g = design("com.sdf", "com").graph
    n = g.nodes["imap_lambda.0"]
    assert [display(p) for p in n.in_patterns] == ["[8]"] and display(n.out_pattern) == "[8]"


def test_sink_pattern_propagates():
    g = design("c_node.sdf", "c").graph
    (e,) = g.in_edges("sink")
    assert display(e.cp) == "[2]"


def test_conflicting_patterns_rejected():
    with pytest.raises(PatternConflictError, match=r"\[0,1\].*\[1\]"):
        compile_source(load_corpus("conflict.sdf"), "bad")


def test_nested_hof_pattern_display():
    g = design("nested_maps.sdf", "foo").graph
    assert display(g.nodes["src.xss"].out_pattern) == "([2,2]|[1,1,1])"


@pytest.mark.parametrize("file,entry", CORPUS)
def test_edge_patterns_match_node_latency(file, entry):
    g = design(file, entry).graph
    for e in g.edges:
        p, c = g.nodes[e.producer], g.nodes[e.consumer]
        if p.is_actor:
            assert firing_latency(e.pp) == p.latency
        if c.is_actor:
            assert firing_latency(e.cp) == c.latency


@pytest.mark.parametrize("file,entry", CORPUS)
def test_every_node_reachable_from_a_source(file, entry):
    g = design(file, entry).graph
    seen = {n.id for n in g.nodes.values() if n.kind == SOURCE}
    frontier = list(seen)
    while frontier:
        nid = frontier.pop()
        for e in g.out_edges(nid):
            if e.consumer not in seen:
                seen.add(e.consumer)
                frontier.append(e.consumer)
    assert seen == set(g.nodes)


# reshape


def test_reshape_wide_to_narrow():
    plan = reshape_spec(parse_pattern("[4]"), parse_pattern("[2,2]"))
    assert plan.write_widths == (4,) and plan.read_widths == (2, 2) and not plan.identity


def test_reshape_identity():
    assert reshape_spec(parse_pattern("[2,2]"), parse_pattern("[2,2]")).identity


def test_reshape_regroups_rows_into_blocks():
    d = design("composition.sdf", "comp")
    g_specs = [s for s in d.specs if s.consumer.startswith("g.")]
    assert len(g_specs) == 2
    for s in g_specs:
        assert s.reshape.blocks == (2, 1, 9)
        assert s.reshape.describe() == "Vec 2 (Vec 1 (Vec 9 a))"


# DOT


def test_dot_one_cluster_three_boxes():
    dot = emit_dot(design("map_nodes.sdf", "g").graph)
    assert dot.count("subgraph") == 1
    assert dot.count('label="f [1]/[1]", shape=box') == 3
    assert '"src.xs" -> "f.0" [label="([3]|[1]) -> [1]"]' in dot


def test_dot_empty_graph():
    dot = emit_dot(SdfapGraph({}, [], {}))
    assert dot.startswith("digraph") and dot.rstrip().endswith("}")
    assert "->" not in dot and "subgraph" not in dot


def test_dot_composition_two_top_clusters_and_reshape_edge():
    d = design("composition.sdf", "comp")
    dot = emit_dot(d.graph, d.specs)
    top = [l for l in dot.splitlines() if l.startswith("  subgraph")]
    assert len(top) == 2
    assert '"f.0" -> "g.0"' in dot and "cap 9" in dot and "style=bold" in dot


def _annotated_hof_levels(g, gid):
    kids = [k for k, h in g.hierarchy.items() if h["parent"] == gid]
    return 1 + max((_annotated_hof_levels(g, k) for k in kids), default=0)


@pytest.mark.parametrize("entry", ["maps6844", "maps3422", "maps1111"])
def test_cluster_nesting_follows_hof_nesting(entry):
    g = design("maps.sdf", entry).graph
    roots = [k for k, h in g.hierarchy.items() if h["parent"] is None]
    want = max(_annotated_hof_levels(g, r) for r in roots)
    assert cluster_depth(emit_dot(g)) == want == 3


# JSON export


def _check_schema(doc):
    assert set(doc) == {"schema", "entry", "width", "nodes", "edges", "fifos", "hierarchy"}
    ids = {n["id"] for n in doc["nodes"]}
    for n in doc["nodes"]:
        assert {"id", "kind", "latency", "in_patterns", "out_pattern", "group"} <= set(n)
        assert n["kind"] in {SOURCE, SINK, SDFAP, HOF_INSTANCE, COMB}
    fifo_ids = {f["id"] for f in doc["fifos"]}
    for e in doc["edges"]:
        assert e["from"] in ids and e["to"] in ids
        assert e["fifo"] is None or e["fifo"] in fifo_ids
        if e["pp"] is not None:
            parse_pattern(e["pp"])
    for f in doc["fifos"]:
        assert f["capacity"] >= 1 and f["consumer"] in ids
    for gid, h in doc["hierarchy"].items():
        assert h["parent"] is None or h["parent"] in doc["hierarchy"]


@pytest.mark.parametrize("file,entry", CORPUS)
def test_graph_json_schema(file, entry):
    d = design(file, entry)
    doc = json.loads(graph_json(d.graph, d.specs))
    _check_schema(doc)
    assert doc == graph_dict(d.graph, d.specs)
