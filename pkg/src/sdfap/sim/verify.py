"""Equivalence of the simulated design against the golden model."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..analysis import EAGER
from ..errors import EvalError, SimulationFault
from ..graph.elaborate import scalar_leaves
from ..values import first_divergence, random_value
from .golden import division_path, golden_eval
from .simulator import simulate


@dataclass
class InputResult:
    index: int
    passed: bool
    expected: object = None
    got: object = None
    divergence: Optional[tuple] = None  # element path of the first mismatch
    error: Optional[str] = None
    excerpt: list = field(default_factory=list)  # trace records around the divergence

    def as_dict(self):
        return {
            "index": self.index,
            "passed": self.passed,
            "divergence": None if self.divergence is None else list(self.divergence),
            "error": self.error,
        }


@dataclass
class EquivalenceReport:
    entry: str
    mode: str
    results: list
    latency: Optional[int] = None
    initiation_interval: Optional[int] = None
    fault: Optional[str] = None

    @property
    def passed(self):
        return sum(r.passed for r in self.results)

    @property
    def total(self):
        return len(self.results)

    @property
    def ok(self):
        return self.fault is None and self.passed == self.total

    def first_failure(self):
        return next((r for r in self.results if not r.passed), None)

    def summary(self):
        line = f"{self.entry} [{self.mode}]: {self.passed}/{self.total} inputs match the golden model"
        if self.fault:
            line += f"; simulation fault: {self.fault}"
        return line

    def as_dict(self):
        return {
            "entry": self.entry,
            "mode": self.mode,
            "passed": self.passed,
            "total": self.total,
            "latency": self.latency,
            "initiation_interval": self.initiation_interval,
            "fault": self.fault,
            "results": [r.as_dict() for r in self.results],
        }


def random_inputs(shapes, count: int, seed: int, low: int = 1, high: int = 255):
    """``count`` seeded random entry inputs (one list of args per input if several params)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        vals = [random_value(s, rng, low, high) for s in shapes]
        out.append(vals[0] if len(vals) == 1 else vals)
    return out


def _output_cycle(design, path, frame, trace):
    """Cycle at which the output scalar at ``path`` was produced."""
    v = design.graph.netlist.output
    for i in path:
        v = v[i]
    t = frame * trace.period
    roots = design.graph.roots
    for s in scalar_leaves(v):
        rs, src, _ = roots.roots(s)
        for pf, ph in rs:
            nfa = len(pf.actor.firings)
            t = max(t, trace.starts[pf.actor.id][frame * nfa + pf.index] + ph)
        if src is not None:
            t = max(t, frame * trace.period + src)
    return t


def verify_equivalence(design, inputs=None, random=None, mode: Optional[str] = None, specs=None,
                       mutate: Optional[str] = None, max_cycles: int = 1_000_000) -> EquivalenceReport:
    """Simulate every input (streamed back to back) and compare with golden_eval.

    ``random`` is ``(count, seed)``. ``specs`` overrides the design's FIFO
    specs, which is how fault-injection tests shrink a buffer. A simulation
    fault fails every input and is reported, not raised.
    """
    if (inputs is None) == (random is None):
        raise ValueError("give exactly one of inputs or random=(count, seed)")
    if random is not None:
        inputs = random_inputs(design.shapes, *random)
    inputs = list(inputs)
    if not inputs:
        raise ValueError("no inputs to verify")
    mode = mode or design.mode or EAGER
    specs = design.specs if specs is None else specs
    p, entry = design.program, design.entry
    expected = []
    for v in inputs:
        try:
            expected.append(golden_eval(p, entry, v, design.graph.width))
        except EvalError as err:
            path = division_path(p, entry, v, design.graph.width)
            where = "" if path is None else f" at element {list(path)}"
            expected.append(EvalError(f"golden model: {err.message}{where}"))
    report = EquivalenceReport(entry, mode, [])
    try:
        outs, trace = simulate(design.graph, specs, inputs, max_cycles=max_cycles, mode=mode,
                               frames=len(inputs), record=False, mutate=mutate)
    except SimulationFault as fault:
        report.fault = str(fault)
        report.results = [InputResult(i, False, error=str(fault)) for i in range(len(inputs))]
        return report
    except EvalError:
        # a division by zero in some frame poisons the batch: rerun frames alone
        outs, trace = [], None
        for v in inputs:
            try:
                o, _ = simulate(design.graph, specs, [v], max_cycles=max_cycles, mode=mode, frames=1,
                                record=False, mutate=mutate)
                outs.append(o[0])
            except EvalError as err:
                outs.append(err)
    report.latency = trace.latency if trace else None
    report.initiation_interval = trace.initiation_interval if trace else None
    for i, v in enumerate(inputs):
        exp = expected[i]
        if isinstance(exp, EvalError):
            report.results.append(InputResult(i, False, error=exp.message))
            continue
        got = outs[i]
        if isinstance(got, EvalError):
            report.results.append(InputResult(i, False, expected=exp, error=f"simulation: {got.message}"))
            continue
        path = first_divergence(exp, got)
        if path is None:
            report.results.append(InputResult(i, True, exp, got))
            continue
        res = InputResult(i, False, exp, got, path)
        cycle = _output_cycle(design, path, i, trace) if trace is not None else None
        # re-run the failing input alone with recording on for the excerpt
        _, one = simulate(design.graph, specs, [v], max_cycles=max_cycles, mode=mode, frames=1, mutate=mutate)
        res.excerpt = one.excerpt(_output_cycle(design, path, 0, one))
        res.error = f"output differs at {list(path)}"
        if cycle is not None:
            res.error += f" (produced at cycle {cycle} of the stream)"
        report.results.append(res)
    return report


def measure_pipeline(design, inputs, mode: Optional[str] = None):
    """(latency, initiation interval) of ``inputs`` streamed back to back."""
    inputs = list(inputs)
    if len(inputs) < 2:
        raise ValueError("measure_pipeline needs at least two input frames")
    _, trace = simulate(design.graph, design.specs, inputs, mode=mode or design.mode, frames=len(inputs),
                        record=False)
    return trace.latency, trace.initiation_interval
