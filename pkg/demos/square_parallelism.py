"""
Trading multipliers for cycles
==============================

The same squaring function over a 3x6x4 array, annotated three ways.
Each annotation level says how many lanes run side by side and how many
phases run one after another.
"""

from sdfap import load_corpus, compile_source
from sdfap.patterns import display

src = load_corpus("square3d.sdf")

for entry in ("sq_3_6_4", "sq_111_6_4", "sq_111_33_22"):
    d = compile_source(src, entry)
    boundary = display(d.graph.nodes["src.xs"].out_pattern)
    print(f"{entry:14s} {boundary:24s} DSPs {d.report.dsp_count:3d}  latency {d.latency:3d}")

# %%
# Fewer lanes means fewer multipliers; the phases multiply into cycles.
# The simulated design still computes the same thing as the plain program:

from sdfap import verify_equivalence

print(verify_equivalence(compile_source(src, "sq_111_33_22"), random=(20, 0)).summary())
