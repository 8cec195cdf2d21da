"""AST for the pattern-annotated DSL.

Every expression node has a ``label`` assigned after parsing by a
depth-first, left-to-right walk. Labels never take part in equality, so two
parses of the same text compare equal even if labelled differently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

HOF_KINDS = ("map", "imap", "foldl", "fold")
BINOPS = ("+", "-", "*", "div")

# number of arguments after the (optional) pattern: function + data args
HOF_ARITY = {"map": 2, "imap": 2, "fold": 2, "foldl": 3}


def _loc():
    return field(default=None, compare=False, repr=False)


@dataclass
class Expr:
    pass


@dataclass
class Var(Expr):
    name: str
    label: int = field(default=-1, compare=False, repr=False)
    pos: Optional[tuple] = _loc()


@dataclass
class Lit(Expr):
    value: int
    label: int = field(default=-1, compare=False, repr=False)
    pos: Optional[tuple] = _loc()


@dataclass
class OpRef(Expr):
    """An operator used as a value, e.g. the ``(+)`` in ``fold (+) xs``."""

    op: str
    label: int = field(default=-1, compare=False, repr=False)
    pos: Optional[tuple] = _loc()


@dataclass
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr
    label: int = field(default=-1, compare=False, repr=False)
    pos: Optional[tuple] = _loc()


@dataclass
class Tuple(Expr):
    items: list
    label: int = field(default=-1, compare=False, repr=False)
    pos: Optional[tuple] = _loc()


@dataclass
class VecLit(Expr):
    items: list
    label: int = field(default=-1, compare=False, repr=False)
    pos: Optional[tuple] = _loc()


@dataclass
class App(Expr):
    func: Expr
    args: list
    label: int = field(default=-1, compare=False, repr=False)
    pos: Optional[tuple] = _loc()


@dataclass
class Hof(Expr):
    kind: str
    pattern: Optional[list]
    func: Expr
    args: list
    label: int = field(default=-1, compare=False, repr=False)
    pos: Optional[tuple] = _loc()


@dataclass
class Transpose(Expr):
    arg: Expr
    label: int = field(default=-1, compare=False, repr=False)
    pos: Optional[tuple] = _loc()


@dataclass
class Lambda(Expr):
    params: list
    body: Expr
    label: int = field(default=-1, compare=False, repr=False)
    pos: Optional[tuple] = _loc()


@dataclass
class Param:
    name: str
    annotation: Optional[list] = None


@dataclass
class TypeInt:
    pass


@dataclass
class TypeVec:
    size: int
    elem: object


@dataclass
class TypeTuple:
    items: list


@dataclass
class Signature:
    params: list
    result: object


@dataclass
class Definition:
    name: str
    params: list
    output_annotation: Optional[list]
    body: Expr
    local_bindings: list = field(default_factory=list)
    signature: Optional[Signature] = None
    pos: Optional[tuple] = _loc()

    @property
    def annotated(self):
        return self.output_annotation is not None or any(p.annotation is not None for p in self.params)


@dataclass
class Program:
    defs: list
    entry: Optional[str] = None

    def get(self, name):
        for d in self.defs:
            if d.name == name:
                return d
        raise KeyError(name)

    def names(self):
        return [d.name for d in self.defs]


def children(e):
    if isinstance(e, BinOp):
        return [e.left, e.right]
    if isinstance(e, (Tuple, VecLit)):
        return list(e.items)
    if isinstance(e, App):
        return [e.func, *e.args]
    if isinstance(e, Hof):
        return [e.func, *e.args]
    if isinstance(e, Transpose):
        return [e.arg]
    if isinstance(e, Lambda):
        return [e.body]
    return []


def walk(e):
    yield e
    for c in children(e):
        yield from walk(c)


def assign_labels(program: Program):
    """Deterministic pre-order numbering across the whole program."""
    counter = 0
    for d in program.defs:
        roots = [d.body] + [b for _, b in d.local_bindings]
        for root in roots:
            for node in walk(root):
                node.label = counter
                counter += 1
    return counter


def free_vars(e, bound=frozenset()):
    if isinstance(e, Var):
        return set() if e.name in bound else {e.name}
    if isinstance(e, Lambda):
        return free_vars(e.body, bound | set(e.params))
    out = set()
    for c in children(e):
        out |= free_vars(c, bound)
    return out
