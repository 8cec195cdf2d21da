"""
Centre of mass of image blocks
==============================

Each 8x8 block is reduced to the 1-based row and column of its centre of
mass. The outer map processes 256 blocks with 64, 16, 8 or 1 lanes.
"""

import numpy as np

from sdfap import compile_source, load_corpus, simulate, verify_equivalence

src = load_corpus("com.sdf")

block = np.zeros((8, 8), dtype=int)
block[2, 5] = 9
d = compile_source(src, "com")
out, _ = simulate(d.graph, d.specs, block.tolist())
print("single pixel at row 3, column 6 ->", out)

# %%
# Latency and throughput of the different lane counts.

for entry in ("com", "coms", "coms16", "coms8", "coms1"):
    d = compile_source(src, entry)
    r = d.report
    print(f"{entry:7s} DSPs {r.dsp_count:5d}  latency {r.latency_cycles:4d}  II {r.initiation_interval}")

# %%
# Twenty random batches against the buffer-free golden model.

print(verify_equivalence(compile_source(src, "coms"), random=(20, 7)).summary())
