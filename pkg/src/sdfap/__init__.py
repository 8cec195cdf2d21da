"""Compiler and cycle-accurate simulator for SDF-AP annotated functional programs."""

__version__ = "0.1.0"

from .analysis import CONSERVATIVE, EAGER, ResourceReport, StaticSchedule, count_resources, render_report, schedule
from .compile import Design, compile_program, compile_source, corpus_path, load_corpus
from .control import FifoSpec, derive_fifo, fifo_specs, size_buffer
from .errors import (
    OverflowFault,
    PatternConflictError,
    PatternError,
    SdfapError,
    ShapeError,
    SimulationFault,
    UnderflowFault,
)
from .frontend import parse_program
from .patterns import Flat, Hier, parse_pattern
from .sim.golden import golden_eval
from .sim.simulator import SimTrace, simulate
from .sim.verify import EquivalenceReport, verify_equivalence

__all__ = [
    "CONSERVATIVE",
    "EAGER",
    "Design",
    "EquivalenceReport",
    "FifoSpec",
    "Flat",
    "Hier",
    "OverflowFault",
    "PatternConflictError",
    "PatternError",
    "ResourceReport",
    "SdfapError",
    "ShapeError",
    "SimTrace",
    "SimulationFault",
    "StaticSchedule",
    "UnderflowFault",
    "compile_program",
    "compile_source",
    "corpus_path",
    "count_resources",
    "derive_fifo",
    "fifo_specs",
    "golden_eval",
    "load_corpus",
    "parse_pattern",
    "parse_program",
    "render_report",
    "schedule",
    "simulate",
    "size_buffer",
    "verify_equivalence",
]
