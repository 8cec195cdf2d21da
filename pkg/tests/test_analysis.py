import json

import pytest
from hypothesis import given, settings

from sdfap import compile_source, load_corpus
from sdfap.analysis import CONSERVATIVE, EAGER, count_resources, render_report, schedule, source_period

from conftest import CORPUS, design
from oracles import chain_schedule, square_family
from strategies import chain_program


def test_foldl_starts_one_cycle_apart():
    d = design("foldl_chain.sdf", "chain")
    s = schedule(d.graph, EAGER, frames=1)
    assert [s.starts[f"n.{i}"][0] for i in range(3)] == [0, 1, 2]
    assert s.latency == 3


def test_single_node_two_phases():
    src = "f ([2,2], xs) = ([2,2], ys) where\n  ys = map (\\x -> x + 1) xs\nh :: Vec 4 Int -> Vec 4 Int\nh xs = f xs\n"
    s = schedule(compile_source(src, "h").graph, EAGER)
    assert s.starts["f.0"] == [0]
    assert s.latency - 1 == 1  # last phase runs in cycle 1


def test_regrouped_consumer_waits_for_its_nine_tokens():
    d = design("composition.sdf", "comp")
    s = schedule(d.graph, EAGER, frames=1)
    f_done = max(s.starts[f"f.{i}"][-1] for i in range(18))
    for g in ("g.0", "g.1"):
        port = f"fifo:{g}:0"
        first = s.starts[g][0]
        assert first == f_done + 1
        occ = dict(s.ports[port].occupancy())
        assert occ[first - 1] == 9  # everything this instance will read is buffered


@pytest.mark.parametrize(
    "entry,levels",
    [
        ("sq_3_6_4", [[3], [6], [4]]),
        ("sq_111_6_4", [[1, 1, 1], [6], [4]]),
        ("sq_111_33_22", [[1, 1, 1], [3, 3], [2, 2]]),
    ],
)
def test_square_family(entry, levels):
    d = design("square3d.sdf", entry)
    dsp, lat = square_family(levels)
    assert (d.report.dsp_count, d.report.latency_cycles) == (dsp, lat)


def test_square_family_headline_numbers():
    got = {e: (design("square3d.sdf", e).report.dsp_count, design("square3d.sdf", e).latency)
           for e in ("sq_3_6_4", "sq_111_6_4", "sq_111_33_22")}
    assert got == {"sq_3_6_4": (72, 1), "sq_111_6_4": (24, 3), "sq_111_33_22": (6, 12)}


def test_report_rendering():
    r = design("maps.sdf", "maps1111").report
    text = render_report(r)
    assert "DSPs: 1\n" in text and "Latency: 768\n" in text
    doc = json.loads(render_report(r, "json"))
    assert doc["dsp_count"] == 1 and doc["latency_cycles"] == 768
    text = render_report(design("maps.sdf", "maps6844").report)
    assert "DSPs: 768\n" in text and "Latency: 1\n" in text
    with pytest.raises(ValueError):
        render_report(r, "xml")


def test_combinational_report():
    r = design("combinational.sdf", "poly").report
    assert r.buffer_words == 0 and r.fifo_count == 0 and r.latency_cycles == 1
    assert r.dsp_count == 8  # two multiplies per lane, four lanes


def test_div_weight():
    d = design("com.sdf", "com")
    r2 = count_resources(d.graph, d.specs, d.schedule, div_weight=2)
    assert r2.dsp_count == d.report.dsp_count + 2  # two dividers


def test_maps_3422_within_bounds():
    d = design("maps.sdf", "maps3422")
    assert d.report.dsp_count == 48
    critical = 2 * 2 * 2 * 2  # sequential phases of the four levels
    assert critical <= d.latency <= 768


def test_bad_mode():
    with pytest.raises(ValueError):
        schedule(design("c_node.sdf", "c").graph, "speculative")


def test_frames_must_be_positive():
    with pytest.raises(ValueError):
        schedule(design("c_node.sdf", "c").graph, EAGER, frames=0)


def test_source_period_covers_busiest_node():
    d = design("composition.sdf", "comp")
    assert source_period(d.graph) == 9  # each g instance fires 9 times per frame
    assert d.schedule.initiation_interval == 9


@pytest.mark.parametrize("file,entry", CORPUS)
def test_conservative_never_faster(file, entry):
    e = design(file, entry)
    c = design(file, entry, CONSERVATIVE)
    assert c.latency >= e.latency


@settings(max_examples=60)
@given(chain_program())
def test_chain_schedule_matches_oracle(prog):
    src, stages, _ = prog
    for mode, eager in ((EAGER, True), (CONSERVATIVE, False)):
        d = compile_source(src, "top", mode=mode)
        starts, lat = chain_schedule(stages, eager)
        assert [d.schedule.starts[f"s{i}.0"][0] for i in range(len(stages))] == starts
        assert d.latency == lat


@given(chain_program())
def test_dsp_count_is_one_per_multiply(prog):
    src, stages, n = prog
    d = compile_source(src, "top")
    # each node body multiplies every element of its vector once
    assert d.report.dsp_count == n * len(stages)
