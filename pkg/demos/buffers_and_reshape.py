"""
Buffers between mismatched patterns
===================================

A producer that writes four values at once feeds a consumer that reads two
per cycle, and a 6x3 grid of producers feeds consumers that want their data
as 2x1x9. The compiler sizes each FIFO from the static schedule.
"""

from sdfap import compile_source, load_corpus, simulate

d = compile_source(load_corpus("retime.sdf"), "pipeline")
for s in d.specs:
    print(s.edge, "writes", s.write_widths, "reads", s.read_widths, "capacity", s.capacity)

# %%
# Two frames streamed back to back. The waveform shows each node's phase per
# cycle; the second frame overlaps the first.

out, trace = simulate(d.graph, d.specs, [[1, 2, 3, 4], [5, 6, 7, 8]], frames=2)
print(out)
print(trace.waveform())

# %%
# The composition program regroups 18 scalars for two consumers.

d = compile_source(load_corpus("composition.sdf"), "comp")
for s in d.specs:
    if s.consumer.startswith("g."):
        print(s.edge, s.reshape.describe(), "capacity", s.capacity)
print("latency", d.latency, "initiation interval", d.schedule.initiation_interval)
