import pytest

from sdfap import load_corpus, parse_program
from sdfap.errors import ClassificationError, LexError, ParseError, ResolveError, ShapeError
from sdfap.frontend import COMBINATIONAL, SDFAP, check_shapes, classify_definitions, print_program
from sdfap.frontend import ast as A
from sdfap.values import Shape

CORPUS_FILES = ["c_node.sdf", "com.sdf", "combinational.sdf", "composition.sdf", "foldl_chain.sdf",
                "map_nodes.sdf", "maps.sdf", "nested_maps.sdf", "retime.sdf", "square3d.sdf"]


def test_annotated_definition():
    p = parse_program("c ([3], i) = ([2], o) where\n  o = [fold (+) i, fold (*) i]\n")
    c = p.get("c")
    assert c.params[0].name == "i" and c.params[0].annotation == [3]
    assert c.output_annotation == [2]


def test_unannotated_definition_with_hof():
    p = parse_program("g xs = os where\n  os = map [3] f xs\nf ([1],x) = ([1],y) where\n  y = x\n")
    g = p.get("g")
    assert g.output_annotation is None and g.params[0].annotation is None
    (name, hof), = g.local_bindings
    assert name == "os" and isinstance(hof, A.Hof) and hof.kind == "map" and hof.pattern == [3]


def test_empty_source():
    with pytest.raises(ParseError, match="no definitions"):
        parse_program("")


def test_classification():
    p = parse_program(load_corpus("c_node.sdf") + "\nsq x = x * x\n")
    cls = classify_definitions(p)
    assert cls["c"].kind == SDFAP
    assert cls["sq"].kind == COMBINATIONAL and not cls["sq"].contains_sdfap_descendants
    cls = classify_definitions(parse_program(load_corpus("com.sdf")))
    assert cls["comRows"].kind == COMBINATIONAL and cls["comRows"].contains_sdfap_descendants


def test_map_over_rows_shape():
    src = "f ([1], x) = ([1], y) where\n  y = x\nh :: Vec 6 (Vec 3 Int) -> Vec 6 (Vec 3 Int)\nh xs = map [6] (map [3] f) xs\n"
    shapes = check_shapes(parse_program(src), None, "h")
    assert Shape((3,), 32) in shapes.values()


def test_pattern_sum_mismatch():
    src = "f x = x\ng :: Vec 5 Int -> Vec 5 Int\ng xs = map [2,2] f xs\n"
    with pytest.raises(ShapeError, match="sums to 4") as ei:
        check_shapes(parse_program(src), None, "g")
    assert (ei.value.line, ei.value.col) == (3, 8)


def test_transpose_shape():
    shapes = check_shapes(parse_program(load_corpus("com.sdf")), ["8x8"], "com")
    assert all(s.dims == (8, 8) for s in shapes.values() if isinstance(s, Shape) and len(s.dims) == 2)


@pytest.mark.parametrize(
    "src,err,where",
    [
        ("f x = x\nf y = y\n", ResolveError, (2, 1)),
        ("f x = y\n", ResolveError, (1, 7)),
        ("f x = g x\ng x = f x\n", ResolveError, (1, 1)),
        ("f ([1], x) = y where\n  y = x\n", ClassificationError, (1, 1)),
        ("f ([1,1], x) = ([1], y) where\n  y = x\n", ClassificationError, (1, 1)),
        ("f x y = x\ng z = f z z z\n", ResolveError, (2, 7)),
        ("g xs = map [] f xs\nf x = x\n", ParseError, (1, 13)),
        ("f x = x $ 1\n", LexError, (1, 9)),
    ],
)
def test_diagnostics_are_located(src, err, where):
    with pytest.raises(err) as ei:
        classify_definitions(parse_program(src))
    assert (ei.value.line, ei.value.col) == where


@pytest.mark.parametrize("name", CORPUS_FILES)
def test_printer_is_a_fixed_point(name):
    once = print_program(parse_program(load_corpus(name)))
    assert print_program(parse_program(once)) == once
