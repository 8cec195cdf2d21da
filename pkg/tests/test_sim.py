import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdfap import compile_source, golden_eval, load_corpus, parse_program, simulate, verify_equivalence
from sdfap.analysis import CONSERVATIVE, EAGER
from sdfap.errors import CycleLimitError, EvalError, OverflowFault
from sdfap.sim.verify import measure_pipeline, random_inputs

from conftest import CORPUS, design
from oracles import com_block, reference
from strategies import chain_program


def ones(shape, v=1):
    return np.full(shape, v, dtype=np.int64).tolist()


# golden model


def test_golden_square():
    p = parse_program(load_corpus("square3d.sdf"))
    assert golden_eval(p, "sq_3_6_4", ones((3, 6, 4), 2)) == ones((3, 6, 4), 4)


def test_golden_fold():
    assert golden_eval(parse_program("s xs = fold (+) xs\n"), "s", [1, 2, 3, 4, 5, 6, 7, 8]) == 36


def test_golden_com_rows_single_pixel():
    p = parse_program(load_corpus("com.sdf"))
    for r in range(8):
        for c in range(8):
            im = [[0] * 8 for _ in range(8)]
            im[r][c] = 5 + r + c
            assert golden_eval(p, "comRows", im) == r + 1
            assert golden_eval(p, "com", im) == (r + 1, c + 1) == com_block(im)


def test_golden_division_by_zero():
    src = "d :: Vec 2 Int -> Int\nd xs = div (fold (+) xs) (fold (*) xs)\n"
    with pytest.raises(EvalError, match="division by zero"):
        golden_eval(parse_program(src), "d", [0, 0])


@pytest.mark.parametrize("file,entry", [c for c in CORPUS if c[1] != "coms"])
def test_golden_against_reference(file, entry):
    d = design(file, entry)
    for v in random_inputs(d.shapes, 5, seed=3):
        assert golden_eval(d.program, entry, v) == reference(entry, v)


def test_golden_wraps_to_width():
    p = parse_program("sq :: Int -> Int\nsq x = x * x\n")
    assert golden_eval(p, "sq", 65536) == 0
    assert golden_eval(p, "sq", 46341) == 46341 * 46341 - 2 ** 32


# simulator


def test_maps6844_one_cycle():
    d = design("maps.sdf", "maps6844")
    out, trace = simulate(d.graph, d.specs, ones((6, 8, 4, 4), 2))
    assert out == ones((6, 8, 4, 4), 4) and trace.latency == 1


def test_maps1111_768_cycles():
    d = design("maps.sdf", "maps1111")
    out, trace = simulate(d.graph, d.specs, ones((6, 8, 4, 4), 3), record=False)
    assert out == ones((6, 8, 4, 4), 9) and trace.latency == 768


def test_single_node_trace():
    d = design("c_node.sdf", "c")
    out, trace = simulate(d.graph, d.specs, [1, 2, 3])
    assert out == [6, 6]
    r0 = trace.records[0]
    assert r0["nodes"] == {"c.0": "F0"} and r0["reads"] == {"fifo:c.0:0": 3}
    # the two outputs are complete at the end of cycle 0, visible at cycle 1
    assert r0["sink"] == [0] and trace.latency == 1


def test_cycle_limit():
    d = design("maps.sdf", "maps1111")
    with pytest.raises(CycleLimitError) as ei:
        simulate(d.graph, d.specs, ones((6, 8, 4, 4)), max_cycles=100, record=False)
    assert ei.value.cycle == 100


def test_max_cycles_validated():
    d = design("c_node.sdf", "c")
    with pytest.raises(ValueError):
        simulate(d.graph, d.specs, [1, 2, 3], max_cycles=0)


def test_overflow_from_shrunk_buffer():
    d = design("retime.sdf", "pipeline")
    specs = [s.with_capacity(s.capacity - 1) for s in d.specs]
    with pytest.raises(OverflowFault):
        simulate(d.graph, specs, [1, 2, 3, 4])


def test_trace_exports():
    d = design("retime.sdf", "pipeline")
    _, t = simulate(d.graph, d.specs, [[1, 2, 3, 4], [5, 6, 7, 8]], frames=2)
    lines = t.to_jsonl().splitlines()
    assert len(lines) == t.cycles
    wave = t.waveform().splitlines()
    assert wave[1:] == ["f.0 | 0.0....", "g.0 | .0101..", "g.1 | ..0101."]


# equivalence


def test_equivalence_maps6844_hundred_inputs():
    rep = verify_equivalence(design("maps.sdf", "maps6844"), random=(100, 42))
    assert rep.ok and rep.passed == rep.total == 100


def test_equivalence_identity():
    rep = verify_equivalence(design("combinational.sdf", "ident"), random=(10, 1))
    assert rep.ok and rep.latency == 1


def test_equivalence_reports_overflow():
    d = design("composition.sdf", "comp")
    specs = [s.with_capacity(s.capacity - 1) for s in d.specs]
    rep = verify_equivalence(d, random=(3, 0), specs=specs)
    assert not rep.ok and "overflow" in rep.fault and rep.passed == 0


def test_equivalence_catches_mutation():
    d = design("retime.sdf", "pipeline")
    rep = verify_equivalence(d, random=(4, 5), mutate="g.1")
    bad = rep.first_failure()
    assert rep.passed == 0 and bad.divergence == (0,)
    assert bad.excerpt and all("cycle" in r for r in bad.excerpt)


def test_equivalence_division_by_zero_isolated():
    src = "d :: Vec 2 Int -> Int\nd xs = div (fold (+) xs) (fold (*) xs)\n"
    rep = verify_equivalence(compile_source(src, "d"), inputs=[[1, 2], [0, 0], [3, 3]])
    assert [r.passed for r in rep.results] == [True, False, True]
    assert "division by zero" in rep.results[1].error


def test_random_inputs_validation():
    with pytest.raises(ValueError):
        random_inputs(design("c_node.sdf", "c").shapes, 0, 1)
    with pytest.raises(ValueError):
        verify_equivalence(design("c_node.sdf", "c"))


def test_random_inputs_are_seeded():
    shp = design("foldl_chain.sdf", "chain").shapes
    assert random_inputs(shp, 4, 9) == random_inputs(shp, 4, 9)
    assert random_inputs(shp, 4, 9) != random_inputs(shp, 4, 10)


# pipelines


def test_combinational_pipeline():
    d = design("combinational.sdf", "poly")
    assert measure_pipeline(d, random_inputs(d.shapes, 3, 0)) == (1, 1)


def test_measure_pipeline_needs_a_stream():
    d = design("c_node.sdf", "c")
    with pytest.raises(ValueError):
        measure_pipeline(d, [[1, 2, 3]])


def test_com_pipeline_matches_static_schedule():
    d = design("com.sdf", "com")
    lat, ii = measure_pipeline(d, random_inputs(d.shapes, 4, 0))
    assert (lat, ii) == (d.schedule.latency, d.schedule.initiation_interval)


@pytest.mark.parametrize("file,entry", CORPUS)
def test_simulated_starts_equal_schedule(file, entry):
    d = design(file, entry)
    ins = random_inputs(d.shapes, 2, 0)
    _, t = simulate(d.graph, d.specs, ins, frames=2, record=False)
    assert t.starts == d.schedule.starts
    assert t.completion == d.schedule.completion


@settings(max_examples=40)
@given(chain_program(), st.integers(0, 2 ** 16))
def test_random_pipelines_match_golden(prog, seed):
    src, _, _ = prog
    for mode in (EAGER, CONSERVATIVE):
        rep = verify_equivalence(compile_source(src, "top", mode=mode), random=(3, seed))
        assert rep.ok, rep.summary()
