"""Pattern detection (SDF-AP node vs. combinational) and static shape inference."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ClassificationError, ShapeError
from ..interp import Interpreter
from ..values import Shape, TupleShape, fill, parse_shape, shape_from_type, shape_of
from . import ast as A

SDFAP = "SdfapNode"
COMBINATIONAL = "Combinational"


@dataclass(frozen=True)
class Classification:
    kind: str
    contains_sdfap_descendants: bool = False


def _mentions(d: A.Definition):
    roots = [d.body] + [e for _, e in d.local_bindings]
    annotated_hof = False
    names = set()
    for r in roots:
        for node in A.walk(r):
            if isinstance(node, A.Hof) and node.pattern is not None:
                annotated_hof = True
        names |= A.free_vars(r)
    return annotated_hof, names


def classify_definitions(p: A.Program) -> dict:
    by_name = {d.name: d for d in p.defs}
    for d in p.defs:
        flags = [q.annotation is not None for q in d.params] + [d.output_annotation is not None]
        if any(flags) and not all(flags):
            raise ClassificationError(
                f"definition {d.name!r} mixes annotated and unannotated parameters/result", *(d.pos or (None, None))
            )
        if all(flags) and d.output_annotation is not None:
            if not d.params:
                raise ClassificationError(f"SDF-AP node {d.name!r} needs at least one input", *(d.pos or (None, None)))
            n = len(d.output_annotation)
            for q in d.params:
                if len(q.annotation) != n:
                    raise ClassificationError(
                        f"{d.name!r}: pattern of {q.name!r} has {len(q.annotation)} phases but the output has {n}",
                        *(d.pos or (None, None)),
                    )
            for pat in [q.annotation for q in d.params] + [d.output_annotation]:
                if not any(pat):
                    raise ClassificationError(f"{d.name!r}: all-zero pattern", *(d.pos or (None, None)))

    memo = {}

    def descends(name, stack=()):
        if name in memo:
            return memo[name]
        d = by_name[name]
        local = {n for n, _ in d.local_bindings} | {q.name for q in d.params}
        hof, names = _mentions(d)
        result = hof
        for n in sorted(names - local):
            if n not in by_name or n in stack:
                continue
            if by_name[n].annotated or descends(n, stack + (name,)):
                result = True
        memo[name] = result
        return result

    out = {}
    for d in p.defs:
        if d.annotated:
            if descends(d.name):
                raise ClassificationError(
                    f"SDF-AP node {d.name!r} must have a combinational body (found annotated HoF or SDF-AP call)",
                    *(d.pos or (None, None)),
                )
            out[d.name] = Classification(SDFAP, False)
        else:
            out[d.name] = Classification(COMBINATIONAL, descends(d.name))
    return out


class _Scalar:
    __slots__ = ()

    def __repr__(self):
        return "Int"


SC = _Scalar()


class ShapeInterpreter(Interpreter):
    def __init__(self, program, width=32):
        super().__init__(program, width)
        self.shapes = {}

    def is_scalar(self, v):
        return v is SC

    def literal(self, n, node, ctx):
        return SC

    def scalar_op(self, op, a, b, node, ctx):
        return SC

    def on_value(self, node, value):
        if node.label not in self.shapes and not _has_fn(value):
            try:
                self.shapes[node.label] = shape_of(_concrete(value), self.width)
            except ShapeError:
                pass

    def annotated_hof(self, node, fn, data, ctx):
        xs = data[-1]
        if not isinstance(xs, list):
            raise ShapeError(f"{node.kind} expects a vector argument", *self.where(node))
        total = sum(node.pattern)
        if total != len(xs):
            raise ShapeError(
                f"pattern {list(node.pattern)} sums to {total} but the vector has length {len(xs)}",
                *self.where(node),
            )
        return self.plain_hof(node.kind, fn, data, ctx, node.label, node)

    def call_sdfap(self, clo, args, ctx, label):
        d = clo.defn
        for q, a in zip(d.params, args):
            check_token_arg(d, q.name, q.annotation, a)
        out = self.call_closure(clo, args, ctx, label)
        check_token_arg(d, "result", d.output_annotation, out)
        return out


def check_token_arg(d, name, pattern, value):
    total = sum(pattern)
    if total == 1:
        return
    if not isinstance(value, list) or len(value) != total:
        got = f"length {len(value)}" if isinstance(value, list) else "a non-vector"
        raise ShapeError(
            f"{d.name!r}: {name} has pattern {list(pattern)} (tokens {total}) but receives {got}",
            *(d.pos or (None, None)),
        )


def _has_fn(v):
    from ..interp import is_function

    if isinstance(v, (list, tuple)):
        return any(_has_fn(x) for x in v)
    return is_function(v)


def _concrete(v):
    if isinstance(v, list):
        return [_concrete(x) for x in v]
    if isinstance(v, tuple):
        return tuple(_concrete(x) for x in v)
    return 0


def _skeleton(shape):
    return fill(shape, lambda: SC)


def entry_shapes(p: A.Program, entry: str, given=None, width=32):
    """Parameter shapes for ``entry`` from ``given`` and/or its signature."""
    d = p.get(entry)
    sig = None
    if d.signature is not None:
        if len(d.signature.params) != len(d.params):
            raise ShapeError(f"signature of {entry!r} does not match its parameter count", *(d.pos or (None, None)))
        sig = [shape_from_type(t, width) for t in d.signature.params]
    if given is None:
        if sig is None:
            raise ShapeError(f"no input shape for {entry!r}: add a signature or pass a shape")
        return sig
    if isinstance(given, (Shape, TupleShape, str)):
        given = [given]
    given = [parse_shape(s, width) if isinstance(s, str) else s for s in given]
    if len(given) != len(d.params):
        raise ShapeError(f"{entry!r} takes {len(d.params)} argument(s), {len(given)} shape(s) given")
    if sig is not None and [str(s) for s in sig] != [str(s) for s in given]:
        raise ShapeError(f"given shape {[str(s) for s in given]} disagrees with the signature of {entry!r}")
    return given


def check_shapes(p: A.Program, entry_input_shape=None, entry=None, width=32) -> dict:
    """Infer a Shape for every evaluated expression (keyed by label)."""
    entry = entry or p.entry or p.defs[0].name
    classify_definitions(p)
    shapes = entry_shapes(p, entry, entry_input_shape, width)
    interp = ShapeInterpreter(p, width)
    out = interp.run_entry(entry, [_skeleton(s) for s in shapes])
    d = p.get(entry)
    if d.signature is not None:
        want = shape_from_type(d.signature.result, width)
        got = shape_of(_concrete(out), width)
        if str(want) != str(got):
            raise ShapeError(f"{entry!r} returns {got} but its signature says {want}", *(d.pos or (None, None)))
    return interp.shapes


def result_shape(p: A.Program, entry: str, input_shapes, width=32):
    interp = ShapeInterpreter(p, width)
    out = interp.run_entry(entry, [_skeleton(s) for s in input_shapes])
    return shape_of(_concrete(out), width)
