"""Buffer-free reference evaluation of a program."""

from __future__ import annotations

from ..errors import EvalError, ShapeError
from ..frontend import ast as A
from ..frontend.analysis import entry_shapes
from ..interp import GoldenInterpreter
from ..values import conforms, shape_of


def entry_args(defn: A.Definition, value):
    """Split an entry input into its positional arguments."""
    if len(defn.params) == 1:
        return [value]
    if not isinstance(value, (list, tuple)) or len(value) != len(defn.params):
        raise ShapeError(f"{defn.name!r} takes {len(defn.params)} arguments; pass them as a list")
    return list(value)


class _PathGolden(GoldenInterpreter):
    """Tracks the element path through HoFs so errors can say where they happened."""

    def plain_hof(self, kind, fn, data, ctx, label, node=None):
        path = ctx or ()
        xs = data[-1]
        if kind in ("map", "imap") and isinstance(xs, list):
            out = []
            for i, x in enumerate(xs):
                args = [i, x] if kind == "imap" else [x]
                out.append(self.apply(fn, args, path + (i,), label, node))
            return out
        return super().plain_hof(kind, fn, data, path, label, node)

    def annotated_hof(self, node, fn, data, ctx):
        return self.plain_hof(node.kind, fn, data, ctx, node.label, node)


def golden_eval(p: A.Program, entry: str, value, width: int = 32):
    defn = p.get(entry)
    args = entry_args(defn, value)
    try:
        shapes = entry_shapes(p, entry, None, width)
    except ShapeError:
        shapes = [shape_of(a, width) for a in args]
    for a, s in zip(args, shapes):
        if not conforms(a, s):
            raise ShapeError(f"input does not have shape {s}")
    interp = _PathGolden(p, width)
    try:
        return interp.run_entry(entry, args, ())
    except EvalError as err:
        raise
    except RecursionError as err:  # pragma: no cover - programs are acyclic
        raise EvalError("evaluation nested too deeply") from err


def division_path(p, entry, value, width=32):
    """Element path of the first division by zero, or None."""
    defn = p.get(entry)
    interp = _PathGolden(p, width)
    path_seen = []

    orig = interp.scalar_op

    def op(o, a, b, node, ctx):
        if o == "div" and b == 0:
            path_seen.append(ctx)
        return orig(o, a, b, node, ctx)

    interp.scalar_op = op
    try:
        interp.run_entry(entry, entry_args(defn, value), ())
    except EvalError:
        return path_seen[0] if path_seen else ()
    return None
