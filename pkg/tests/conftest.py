import functools
import os

import pytest
from hypothesis import HealthCheck, settings

from sdfap import compile_source, load_corpus

os.environ.setdefault("SDFAP_COLOR", "0")

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# corpus entries: (file, entry)
CORPUS = [
    ("c_node.sdf", "c"),
    ("retime.sdf", "pipeline"),
    ("map_nodes.sdf", "g"),
    ("nested_maps.sdf", "foo"),
    ("foldl_chain.sdf", "chain"),
    ("composition.sdf", "comp"),
    ("square3d.sdf", "sq_3_6_4"),
    ("square3d.sdf", "sq_111_6_4"),
    ("square3d.sdf", "sq_111_33_22"),
    ("maps.sdf", "maps6844"),
    ("maps.sdf", "maps3422"),
    ("maps.sdf", "maps1111"),
    ("com.sdf", "com"),
    ("com.sdf", "coms"),
    ("combinational.sdf", "poly"),
    ("combinational.sdf", "ident"),
]


@functools.lru_cache(maxsize=None)
def design(file, entry, mode="eager"):
    return compile_source(load_corpus(file), entry, mode=mode)


@pytest.fixture
def get_design():
    return design


ACCEPTANCE = {}


def record_criterion(n, ok, detail):
    ACCEPTANCE[n] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
