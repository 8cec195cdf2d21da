"""How a buffer regroups producer writes into consumer reads."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import PatternError
from ..patterns import Hier, display, firing_latency, levels, phase_tokens, tokens_per_firing


@dataclass(frozen=True)
class ReshapePlan:
    write_widths: tuple  # scalars written per producer phase
    read_widths: tuple  # scalars read per consumer phase
    blocks: tuple  # consumer-side nesting, outermost first, innermost in scalars
    total: int  # scalars per complete transfer
    identity: bool

    def describe(self):
        if self.identity:
            return "identity"
        inner = "a"
        for b in reversed(self.blocks):
            inner = f"Vec {b} ({inner})" if inner != "a" else f"Vec {b} a"
        return inner


def _scalars(shape):
    if shape is None:
        return 1
    return shape if isinstance(shape, int) else shape.size


def reshape_spec(pp, cp, element_shape=None, producer_shape=None) -> ReshapePlan:
    """Regrouping of ``pp`` writes into ``cp`` reads, counted in scalars.

    ``element_shape`` is the shape of one consumer token (or its scalar
    count); the producer token shape defaults to the same. The blocks spell out the consumer view: one
    entry per hierarchical level of ``cp`` (its widest phase) followed by the
    number of scalars each innermost instance receives.
    """
    sc = _scalars(element_shape)
    sp = _scalars(producer_shape) if producer_shape is not None else sc
    total_p = tokens_per_firing(pp) * sp
    total_c = tokens_per_firing(cp) * sc
    if total_p != total_c:
        raise PatternError(
            f"token mismatch: {display(pp)} produces {total_p} scalars, {display(cp)} consumes {total_c}"
        )
    writes = tuple(phase_tokens(pp, k) * sp for k in range(firing_latency(pp)))
    reads = tuple(phase_tokens(cp, k) * sc for k in range(firing_latency(cp)))
    outer = [max(e) for e in levels(cp)[:-1]] if isinstance(cp, Hier) else []
    lanes = 1
    for m in outer:
        lanes *= m
    blocks = tuple(outer) + (total_c // lanes,)
    identity = display(pp) == display(cp) and sp == sc
    return ReshapePlan(writes, reads, blocks, total_c, identity)
