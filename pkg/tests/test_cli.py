import json

import numpy as np
import pytest

from sdfap import corpus_path
from sdfap.cli import EXIT_DIAG, EXIT_FAULT, EXIT_OK, EXIT_USAGE, run
from sdfap.graph.dot import cluster_depth


def src(name):
    return str(corpus_path(name))


@pytest.fixture(autouse=True)
def no_color(monkeypatch):
    monkeypatch.setenv("SDFAP_COLOR", "0")


def test_check_ok(capsys):
    assert run(["check", src("maps.sdf"), "--entry", "maps6844"]) == EXIT_OK
    assert "ok: maps6844" in capsys.readouterr().out


def test_check_mismatch(capsys):
    assert run(["check", src("mismatch.sdf")]) == EXIT_DIAG
    err = capsys.readouterr().err
    assert "mismatch.sdf:5:13:" in err and "sums to 4" in err and "\x1b[" not in err


def test_check_conflict(capsys):
    assert run(["check", src("conflict.sdf"), "--entry", "bad"]) == EXIT_DIAG
    assert "[0,1]" in capsys.readouterr().err


def test_check_missing_file(capsys, tmp_path):
    assert run(["check", str(tmp_path / "nope.sdf")]) == EXIT_USAGE
    assert "cannot read" in capsys.readouterr().err


def test_usage_errors():
    assert run([]) == EXIT_USAGE
    assert run(["frobnicate"]) == EXIT_USAGE
    assert run(["check", src("c_node.sdf"), "--mode", "lazy"]) == EXIT_USAGE


def test_color_forced(capsys, monkeypatch):
    monkeypatch.setenv("SDFAP_COLOR", "1")
    run(["check", src("mismatch.sdf")])
    assert "\x1b[" in capsys.readouterr().err


def test_graph_dot_and_json(tmp_path):
    rc = run(["graph", src("maps.sdf"), "--entry", "maps6844", "--dot", "out.dot", "--json", "out.json",
              "--out", str(tmp_path)])
    assert rc == EXIT_OK
    dot = (tmp_path / "out.dot").read_text()
    assert cluster_depth(dot) == 3
    doc = json.loads((tmp_path / "out.json").read_text())
    assert doc["entry"] == "maps6844" and len(doc["fifos"]) == 192


def test_graph_dot_to_stdout(capsys):
    assert run(["graph", src("map_nodes.sdf")]) == EXIT_OK
    assert capsys.readouterr().out.startswith('digraph "g"')


def test_analyze_text(capsys):
    assert run(["analyze", src("maps.sdf"), "--entry", "maps1111"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "DSPs: 1\n" in out and "Latency: 768\n" in out


def test_analyze_square_json(capsys):
    assert run(["analyze", src("square3d.sdf"), "--entry", "sq_3_6_4", "--format", "json"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert (doc["dsp_count"], doc["latency_cycles"]) == (72, 1)


def test_analyze_combinational(capsys):
    assert run(["analyze", src("combinational.sdf"), "--entry", "poly"]) == EXIT_OK
    assert "Buffer words: 0\n" in capsys.readouterr().out


def test_sim_maps_both_modes(capsys, tmp_path):
    inp = tmp_path / "in.json"
    inp.write_text(json.dumps(np.full((6, 8, 4, 4), 2).tolist()))
    outs = {}
    for mode in ("eager", "conservative"):
        assert run(["sim", src("maps.sdf"), "--entry", "maps6844", "--input", str(inp), "--mode", mode]) == EXIT_OK
        cap = capsys.readouterr()
        outs[mode] = json.loads(cap.out)
        lat = int(cap.err.split()[1])
        assert lat >= 1 if mode == "conservative" else lat == 1
    assert outs["eager"] == outs["conservative"] == np.full((6, 8, 4, 4), 4).tolist()


def test_sim_trace_files(tmp_path, capsys):
    tr = tmp_path / "t.jsonl"
    assert run(["sim", src("retime.sdf"), "--random", "2", "--trace", str(tr)]) == EXIT_OK
    recs = [json.loads(l) for l in tr.read_text().splitlines()]
    assert [r["cycle"] for r in recs] == list(range(len(recs)))
    assert "g.1 |" in (tmp_path / "t.wave.txt").read_text()


def test_sim_corrupted_capacity(tmp_path, capsys):
    gj = tmp_path / "g.json"
    assert run(["graph", src("retime.sdf"), "--json", str(gj)]) == EXIT_OK
    doc = json.loads(gj.read_text())
    for f in doc["fifos"]:
        f["capacity"] -= 1
    gj.write_text(json.dumps(doc))
    rc = run(["sim", src("retime.sdf"), "--random", "2", "--debug-capacities", str(gj)])
    assert rc == EXIT_FAULT
    assert "overflow" in capsys.readouterr().err


def test_sim_needs_exactly_one_input_source(capsys):
    assert run(["sim", src("retime.sdf")]) == EXIT_USAGE


def test_sim_bad_input_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2,")
    assert run(["sim", src("retime.sdf"), "--input", str(bad)]) == EXIT_USAGE


def test_sim_input_stream(tmp_path, capsys):
    inp = tmp_path / "in.json"
    inp.write_text(json.dumps({"inputs": [[1, 2, 3, 4], [0, 0, 0, 0]]}))
    assert run(["sim", src("retime.sdf"), "--input", str(inp)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out) == [[18, 27, 36, 45], [9, 9, 9, 9]]


def test_verify_coms(capsys):
    assert run(["verify", src("com.sdf"), "--entry", "coms", "--random", "20", "--seed", "7"]) == EXIT_OK
    assert "20/20" in capsys.readouterr().out


def test_verify_zero_count(capsys):
    assert run(["verify", src("com.sdf"), "--entry", "com", "--random", "0"]) == EXIT_USAGE
    assert "count must be >= 1" in capsys.readouterr().err


def test_verify_divergent_fixture(capsys):
    rc = run(["verify", src("retime.sdf"), "--random", "3", "--debug-mutate", "g.0"])
    assert rc == EXIT_DIAG
    out = capsys.readouterr().out
    assert "0/3" in out and "divergence path: [0]" in out


def test_verify_json(capsys):
    assert run(["verify", src("foldl_chain.sdf"), "--random", "5", "--format", "json"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] == doc["total"] == 5


def test_verify_fault_exit(capsys):
    rc = run(["verify", src("retime.sdf"), "--random", "2", "--debug-capacity-delta", "-1"])
    assert rc == EXIT_FAULT


def test_max_cycles_validated(capsys):
    assert run(["sim", src("retime.sdf"), "--random", "1", "--max-cycles", "0"]) == EXIT_USAGE
    assert run(["sim", src("maps.sdf"), "--entry", "maps1111", "--random", "1", "--max-cycles", "10"]) == EXIT_FAULT


def test_output_independent_of_hash_seed():
    import os
    import subprocess
    import sys

    outs = []
    for seed in ("1", "2"):
        env = dict(os.environ, PYTHONHASHSEED=seed)
        r = subprocess.run([sys.executable, "-m", "sdfap", "graph", src("com.sdf"), "--entry", "com", "--json"],
                           capture_output=True, text=True, env=env, check=True)
        outs.append(r.stdout)
    assert outs[0] == outs[1] and outs[0].startswith("{")
