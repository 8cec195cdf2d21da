"""Access patterns: flat per-cycle token lists and their hierarchical nesting.

A flat pattern ``[a, b, c]`` says how many tokens cross an edge in each cycle
of one firing. A hierarchical pattern ``([2,2]|[1,1,1])`` is produced by an
annotated higher-order function: every outer phase runs one complete firing
of the inner pattern, with ``entries[k]`` lanes active in phase ``k``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import PatternError


def _check_entries(entries):
    if len(entries) == 0:
        raise PatternError("pattern must have at least one entry")
    if any((not isinstance(e, int)) or e < 0 for e in entries):
        raise PatternError(f"pattern entries must be nonnegative integers: {list(entries)}")
    if not any(entries):
        raise PatternError(f"pattern of all zeros is not allowed: {list(entries)}")


@dataclass(frozen=True)
class Flat:
    entries: tuple

    def __init__(self, entries):
        entries = tuple(entries)
        _check_entries(entries)
        object.__setattr__(self, "entries", entries)

    def __str__(self):
        return display(self)


@dataclass(frozen=True)
class Hier:
    entries: tuple
    inner: "Pattern"

    def __init__(self, entries, inner):
        entries = tuple(entries)
        _check_entries(entries)
        if not isinstance(inner, (Flat, Hier)):
            raise PatternError("inner pattern must be a Pattern")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "inner", inner)

    def __str__(self):
        return display(self)


Pattern = Union[Flat, Hier]


def depth(p: Pattern) -> int:
    return 1 if isinstance(p, Flat) else 1 + depth(p.inner)


def firing_latency(p: Pattern) -> int:
    """Cycles needed for one complete firing."""
    if isinstance(p, Flat):
        return len(p.entries)
    return len(p.entries) * firing_latency(p.inner)


def tokens_per_firing(p: Pattern) -> int:
    if isinstance(p, Flat):
        return sum(p.entries)
    return sum(p.entries) * tokens_per_firing(p.inner)


def max_parallel(p: Pattern) -> int:
    """Number of lanes that must exist in hardware to honour the pattern."""
    if isinstance(p, Flat):
        return max(p.entries)
    return max(p.entries) * max_parallel(p.inner)


def phase_tokens(p: Pattern, cycle: int) -> int:
    """Tokens moved in cycle ``cycle`` of a single firing."""
    n = firing_latency(p)
    if not 0 <= cycle < n:
        raise PatternError(f"cycle {cycle} outside firing of {n} cycles for {display(p)}")
    if isinstance(p, Flat):
        return p.entries[cycle]
    inner_n = firing_latency(p.inner)
    return p.entries[cycle // inner_n] * phase_tokens(p.inner, cycle % inner_n)


def phase_table(p: Pattern) -> list:
    return [phase_tokens(p, k) for k in range(firing_latency(p))]


def levels(p: Pattern) -> list:
    """Entry lists from the outermost level inwards."""
    out = []
    while isinstance(p, Hier):
        out.append(p.entries)
        p = p.inner
    out.append(p.entries)
    return out


def from_levels(lvls) -> Pattern:
    lvls = list(lvls)
    p = Flat(lvls[-1])
    for entries in reversed(lvls[:-1]):
        p = Hier(entries, p)
    return p


def nest(entries, inner: Pattern) -> Hier:
    return Hier(entries, inner)


def _fmt(entries):
    return "[" + ",".join(str(e) for e in entries) + "]"


def display(p: Pattern) -> str:
    if isinstance(p, Flat):
        return _fmt(p.entries)
    return "(" + "|".join(_fmt(e) for e in levels(p)) + ")"


_LIST = re.compile(r"\[\s*\d+\s*(?:,\s*\d+\s*)*\]")


def parse_pattern(text: str) -> Pattern:
    """Inverse of :func:`display`."""
    s = text.strip()
    if s.startswith("(") and s.endswith(")"):
        parts = s[1:-1].split("|")
        if len(parts) < 2:
            raise PatternError(f"hierarchical pattern needs at least two levels: {text!r}")
    else:
        parts = [s]
    lvls = []
    for part in parts:
        part = part.strip()
        if not _LIST.fullmatch(part):
            raise PatternError(f"malformed pattern: {text!r}")
        lvls.append([int(x) for x in part[1:-1].split(",")])
    return from_levels(lvls)


@dataclass(frozen=True)
class EdgeSpec:
    """Edge ``producer -> consumer``; ``pp``/``cp`` are given per firing."""

    producer: str
    consumer: str
    pp: Pattern
    cp: Pattern
    producer_port: int = 0
    consumer_port: int = 0

    @property
    def id(self):
        return f"{self.producer}.{self.producer_port}->{self.consumer}.{self.consumer_port}"
