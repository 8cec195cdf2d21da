"""One-call pipeline: source text to graph, schedule, FIFOs and report."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Optional

from .analysis import EAGER, ResourceReport, StaticSchedule, check_mode, count_resources, schedule, sizing_schedule
from .control import fifo_specs
from .frontend import entry_shapes, parse_program
from .graph import compile_graph
from .graph.dag import SdfapGraph
from .values import parse_shape

# the reported schedule covers two frames so it yields an initiation interval
REPORT_FRAMES = 2


@dataclass
class Design:
    program: object
    entry: str
    shapes: list
    graph: SdfapGraph
    schedule: StaticSchedule
    specs: list
    report: ResourceReport
    mode: str

    @property
    def latency(self):
        return self.schedule.latency

    def spec(self, fifo_id):
        return next(s for s in self.specs if s.edge == fifo_id)


def _shapes(shapes, width):
    if shapes is None:
        return None
    return [parse_shape(s, width) if isinstance(s, str) else s for s in shapes]


def compile_program(p, entry: Optional[str] = None, shapes=None, mode: str = EAGER, width: int = 32,
                    div_weight: int = 1) -> Design:
    mode = check_mode(mode)
    entry = entry or p.entry or p.defs[-1].name
    shp = entry_shapes(p, entry, _shapes(shapes, width), width)
    g = compile_graph(p, entry, shp, width)
    sched = schedule(g, mode, frames=REPORT_FRAMES)
    specs = fifo_specs(g, sizing_schedule(g, mode))
    report = count_resources(g, specs, sched, div_weight)
    return Design(p, entry, shp, g, sched, specs, report, mode)


def compile_source(text: str, entry: Optional[str] = None, **kw) -> Design:
    return compile_program(parse_program(text), entry, **kw)


def corpus_path(name: str):
    """Path of a bundled example program, e.g. ``corpus_path("maps.sdf")``."""
    return resources.files("sdfap") / "corpus" / name


def load_corpus(name: str) -> str:
    return corpus_path(name).read_text(encoding="utf-8")
