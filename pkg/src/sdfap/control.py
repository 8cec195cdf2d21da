"""Parameterized FIFOs and the node/FIFO controller state machines.

One generic buffer implementation is specialised per edge by a `FifoSpec`
(element shape, widths, capacity, reshape plan). The controller step
functions are pure; the simulator owns all mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import OverflowFault, PatternError, UnderflowFault
from .graph.elaborate import scalar_leaves
from .graph.reshape import ReshapePlan, reshape_spec
from .patterns import EdgeSpec, Flat, display, firing_latency, phase_tokens, tokens_per_firing

CONSERVATIVE = "conservative"
EAGER = "eager"


@dataclass(frozen=True)
class FifoSpec:
    edge: str
    element_shape: object
    write_widths: tuple
    read_widths: tuple
    capacity: int
    reshape: ReshapePlan
    scalar_bits: int = 32
    producers: tuple = ()
    consumer: str = ""
    port: int = 0
    lifted: Optional[EdgeSpec] = None  # the group-level edge the reshape describes

    def with_capacity(self, capacity):
        """Copy with another capacity (used for fault injection)."""
        return FifoSpec(
            self.edge, self.element_shape, self.write_widths, self.read_widths, capacity, self.reshape,
            self.scalar_bits, self.producers, self.consumer, self.port, self.lifted,
        )

    def as_dict(self):
        return {
            "id": self.edge,
            "consumer": self.consumer,
            "port": self.port,
            "producers": list(self.producers),
            "element_shape": None if self.element_shape is None else str(self.element_shape),
            "write_widths": list(self.write_widths),
            "read_widths": list(self.read_widths),
            "capacity": self.capacity,
            "scalar_bits": self.scalar_bits,
            "reshape": {
                "identity": self.reshape.identity,
                "blocks": list(self.reshape.blocks),
                "view": self.reshape.describe(),
                "pp": None if self.lifted is None else display(self.lifted.pp),
                "cp": None if self.lifted is None else display(self.lifted.cp),
            },
        }


# state machines ---------------------------------------------------------------


@dataclass(frozen=True)
class NodeControllerState:
    phase: Optional[int] = None  # None while idle

    @property
    def idle(self):
        return self.phase is None

    def __str__(self):
        return "Idle" if self.phase is None else f"F{self.phase}"


IDLE = NodeControllerState()


def firing(k: int) -> NodeControllerState:
    return NodeControllerState(k)


@dataclass(frozen=True)
class FifoControllerState:
    occupancy: int = 0
    # pending_writes[j]: scalars committed to be written during cycle t+j
    pending_writes: tuple = ()


def node_controller_step(nc: NodeControllerState, all_inputs_ready: bool, latency: int) -> NodeControllerState:
    if latency < 1:
        raise ValueError("latency must be >= 1")
    if nc.phase is None or nc.phase == latency - 1:
        return firing(0) if all_inputs_ready else IDLE
    return firing(nc.phase + 1)


def fifo_ready(f: FifoControllerState, spec: FifoSpec, consumer_latency: int = None, mode: str = EAGER) -> bool:
    """Can the consumer start a firing now, as far as this FIFO is concerned?

    Eager mode credits only arrivals already committed by a running
    producer, so a firing that starts can never be starved mid-way.
    """
    reads = spec.read_widths
    if consumer_latency is not None and consumer_latency != len(reads):
        raise ValueError("consumer latency disagrees with the read widths")
    if mode == CONSERVATIVE:
        return f.occupancy >= sum(reads)
    avail = f.occupancy
    need = 0
    for k, r in enumerate(reads):
        if k > 0:
            avail += f.pending_writes[k - 1] if k - 1 < len(f.pending_writes) else 0
        need += r
        if avail < need:
            return False
    return True


def fifo_apply(f: FifoControllerState, spec: FifoSpec, writes: int, reads: int, cycle=None,
               new_pending=()) -> FifoControllerState:
    """Commit one cycle: ``writes`` land, ``reads`` leave.

    Read data is registered, so a read may only use what was present before
    this cycle; the slot it frees is reusable in the same cycle.
    """
    if reads > f.occupancy:
        raise UnderflowFault(
            f"underflow on {spec.edge} at cycle {cycle}: read {reads} with {f.occupancy} present", cycle, spec.edge
        )
    occ = f.occupancy + writes - reads
    if occ > spec.capacity:
        raise OverflowFault(
            f"overflow on {spec.edge} at cycle {cycle}: occupancy {occ} exceeds capacity {spec.capacity}",
            cycle,
            spec.edge,
        )
    pend = list(f.pending_writes[1:])
    for j, n in enumerate(new_pending):
        while len(pend) <= j:
            pend.append(0)
        pend[j] += n
    while pend and pend[-1] == 0:
        pend.pop()
    return FifoControllerState(occ, tuple(pend))


def fifo_step(f: FifoControllerState, spec: FifoSpec, producer_nc: NodeControllerState,
              consumer_nc: NodeControllerState, cycle=None) -> FifoControllerState:
    """One FIFO controller cycle for a point-to-point edge."""
    w = spec.write_widths[producer_nc.phase] if not producer_nc.idle else 0
    r = spec.read_widths[consumer_nc.phase] if not consumer_nc.idle else 0
    pend = ()
    if producer_nc.phase == 0:
        pend = tuple(spec.write_widths[1:])
    return fifo_apply(FifoControllerState(f.occupancy, f.pending_writes), spec, w, r, cycle, pend)


# derivation -----------------------------------------------------------------


def _round_up(n, m):
    return n if m <= 1 else -(-n // m) * m


def _capacity(peak, one_firing, write_widths):
    return _round_up(max(peak, one_firing, 1), max(write_widths, default=1))


def _token_scalars(shapes, key):
    if shapes is None:
        return 1
    if isinstance(shapes, dict):
        shapes = shapes.get(key)
    if shapes is None:
        return 1
    return shapes if isinstance(shapes, int) else shapes.size


def pair_schedule(edge: EdgeSpec, mode: str = EAGER) -> dict:
    """Earliest start of one consumer firing fed by one producer firing at 0."""
    pp, cp = edge.pp, edge.cp
    ready = []  # cycle at which cumulative token count becomes readable
    acc = 0
    for k in range(firing_latency(pp)):
        acc += phase_tokens(pp, k)
        ready.append((k + 1, acc))

    def avail_by(t):
        return max((n for c, n in ready if c <= t), default=0)

    t = 1
    need_total = tokens_per_firing(cp)
    while True:
        if mode == CONSERVATIVE:
            ok = avail_by(t) >= need_total
        else:
            need = 0
            ok = True
            for k in range(firing_latency(cp)):
                need += phase_tokens(cp, k)
                if avail_by(t + k) < need:
                    ok = False
                    break
        if ok:
            return {edge.producer: [0], edge.consumer: [t]}
        t += 1


def size_buffer(edge, schedule, scalars_per_token: int = 1) -> int:
    """Capacity in scalar slots from a token-count run of ``schedule``.

    ``edge`` is either a compiled port id / FifoSpec, looked up in a
    StaticSchedule's occupancy timelines, or an EdgeSpec together with a
    mapping of start cycles for its producer and consumer.
    """
    if schedule is None:
        raise ValueError("size_buffer needs a schedule")
    ports = getattr(schedule, "ports", None)
    key = edge.edge if isinstance(edge, FifoSpec) else edge
    if ports is not None and isinstance(key, str) and key in ports:
        tl = ports[key]
        widths = edge.write_widths if isinstance(edge, FifoSpec) else tl.write_hist
        return _capacity(tl.peak, tl.firing_scalars, widths)
    if not isinstance(edge, EdgeSpec):
        raise ValueError(f"no occupancy timeline for {key!r}")
    starts = schedule.starts if hasattr(schedule, "starts") else schedule
    sc = scalars_per_token
    events = {}
    for s in starts[edge.producer]:
        for k in range(firing_latency(edge.pp)):
            w, r = events.get(s + k, (0, 0))
            events[s + k] = (w + phase_tokens(edge.pp, k) * sc, r)
    for s in starts[edge.consumer]:
        for k in range(firing_latency(edge.cp)):
            w, r = events.get(s + k, (0, 0))
            events[s + k] = (w, r + phase_tokens(edge.cp, k) * sc)
    occ = peak = 0
    for t in sorted(events):
        w, r = events[t]
        occ += w - r
        peak = max(peak, occ)
    writes = [phase_tokens(edge.pp, k) * sc for k in range(firing_latency(edge.pp))]
    return _capacity(peak, tokens_per_firing(edge.cp) * sc, writes)


def derive_fifo(edge: EdgeSpec, shapes=None, schedule=None, mode: str = EAGER, scalar_bits: int = 32) -> FifoSpec:
    """FifoSpec for a point-to-point edge.

    ``shapes`` gives the token shape (a Shape, a scalar count, or a mapping
    keyed by edge id). Without a schedule the edge is sized for one producer
    firing at cycle 0 feeding one consumer firing at its earliest start.
    """
    if edge.pp is None or edge.cp is None:
        raise PatternError(f"edge {edge.id} has no concrete patterns")
    shp = shapes.get(edge.id) if isinstance(shapes, dict) else shapes
    sc = _token_scalars(shp, edge.id)
    plan = reshape_spec(edge.pp, edge.cp, sc)
    if schedule is None:
        schedule = pair_schedule(edge, mode)
    cap = size_buffer(edge, schedule, sc)
    return FifoSpec(
        edge.id, shp, plan.write_widths, plan.read_widths, cap, plan, scalar_bits,
        (edge.producer,), edge.consumer, edge.consumer_port, edge,
    )


# compiled graphs ------------------------------------------------------------


def _members(g):
    """Group id -> set of actor ids inside it (transitively)."""
    out = {gid: set() for gid in g.hierarchy}
    for n in g.nodes.values():
        if n.is_actor:
            for gid in g.ancestors(n.id):
                out[gid].add(n.id)
    return out


def lift_edge(g, port, members=None) -> EdgeSpec:
    """The outermost group-level edge that ``port`` realises.

    The consumer side climbs to the outermost group around the consumer that
    holds none of the producers; the producer side climbs to the outermost
    group holding every producer but not the consumer.
    """
    members = members if members is not None else _members(g)
    cons = port.actor.id
    prods = []
    src = False
    for oc in port.occurrences:
        for pf, _ in oc.roots:
            if pf.actor.id not in prods:
                prods.append(pf.actor.id)
        if oc.src is not None and not oc.roots:
            src = True
    c_end, cp = cons, g.nodes[cons].in_patterns[port.index]
    for gid in g.ancestors(cons):
        if any(p in members[gid] for p in prods):
            break
        c_end, cp = gid, g.hierarchy[gid]["in_pattern"]
    if not prods or src:
        srcs = [p for p in port.producers if p.startswith("src.")]
        if len(srcs) == 1 and not prods:
            return EdgeSpec(srcs[0], c_end, g.nodes[srcs[0]].out_pattern, cp, 0, port.index)
        return EdgeSpec(port.producers[0], cons, g.nodes[port.producers[0]].out_pattern or Flat([1]),
                        port.pattern, 0, port.index)
    p_end = prods[0] if len(prods) == 1 else None
    pp = g.nodes[prods[0]].out_pattern if p_end else None
    for gid in g.ancestors(prods[0]):
        if cons in members[gid]:
            break
        if all(p in members[gid] for p in prods):
            p_end, pp = gid, g.hierarchy[gid]["out_pattern"]
    if p_end is None:
        p_end, pp = prods[0], g.nodes[prods[0]].out_pattern
    return EdgeSpec(p_end, c_end, pp, cp, 0, port.index)


def _lifted_plan(lifted, port, sc):
    """Reshape plan of the lifted edge, falling back to the port itself."""
    try:
        total = tokens_per_firing(lifted.cp) * sc
        tp = tokens_per_firing(lifted.pp)
        if tp and total % tp == 0:
            return reshape_spec(lifted.pp, lifted.cp, sc, total // tp), lifted
    except PatternError:
        pass
    direct = EdgeSpec(lifted.producer, port.actor.id, lifted.pp, port.pattern, 0, port.index)
    n = tokens_per_firing(port.pattern) * sc
    plan = ReshapePlan((n,), tuple(phase_tokens(port.pattern, k) * sc for k in range(firing_latency(port.pattern))),
                       (n,), n, False)
    return plan, direct


def fifo_specs(g, sched) -> list:
    """One FifoSpec per consumer input port of the compiled graph."""
    if sched is None:
        raise ValueError("fifo_specs needs a schedule")
    members = _members(g)
    out = []
    for port in g.ports:
        tl = sched.ports[port.id]
        sc = port.token_shape.size if port.token_shape is not None and hasattr(port.token_shape, "size") else 1
        lifted = lift_edge(g, port, members)
        plan, lifted = _lifted_plan(lifted, port, sc)
        reads = tuple(phase_tokens(port.pattern, k) * sc for k in range(firing_latency(port.pattern)))
        actor_prods = [p for p in port.producers if p in g.nodes and g.nodes[p].is_actor]
        if len(port.producers) == 1 and actor_prods:
            pn = g.nodes[actor_prods[0]]
            per_tok = _producer_token_scalars(pn, g)
            writes = tuple(phase_tokens(pn.out_pattern, k) * per_tok for k in range(firing_latency(pn.out_pattern)))
        else:
            writes = tuple(tl.write_hist)
        cap = _capacity(tl.peak, tl.firing_scalars, writes)
        out.append(FifoSpec(port.id, port.token_shape, writes, reads, cap, plan, g.width,
                            tuple(port.producers), port.actor.id, port.index, lifted))
    return out


def _producer_token_scalars(node, g):
    actor = next(a for a in g.netlist.actors if a.id == node.id)
    tok = actor.firings[0].outputs[0]
    return max(1, sum(1 for _ in scalar_leaves(tok))) if isinstance(tok, (list, tuple)) else 1


def firing_scalars(spec: FifoSpec) -> int:
    return sum(spec.read_widths)
