"""A single evaluator for the DSL, specialised by overriding a few hooks.

The golden model, static shape inference and graph elaboration all walk the
same AST with the same closure/HoF semantics; they differ only in what a
scalar leaf is and in how SDF-AP calls and annotated HoFs are treated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from .errors import EvalError, ResolveError, ShapeError
from .frontend import ast as A


class Env:
    __slots__ = ("vars", "parent")

    def __init__(self, vars=None, parent=None):
        self.vars = vars if vars is not None else {}
        self.parent = parent

    def lookup(self, name):
        env = self
        while env is not None:
            if name in env.vars:
                v = env.vars[name]
                if isinstance(v, Thunk):
                    v = v.force()
                    env.vars[name] = v
                return v
            env = env.parent
        raise ResolveError(f"unresolved name {name!r}")

    def raw(self, name):
        env = self
        while env is not None:
            if name in env.vars:
                return env.vars[name]
            env = env.parent
        return None


class Thunk:
    __slots__ = ("fn", "active")

    def __init__(self, fn):
        self.fn = fn
        self.active = False

    def force(self):
        if self.active:
            raise ResolveError("cyclic binding reference")
        self.active = True
        return self.fn()


@dataclass
class Closure:
    params: list
    body: A.Expr
    env: Env
    defn: Optional[A.Definition] = None
    lam: Optional[A.Lambda] = None

    @property
    def arity(self):
        return len(self.params)


@dataclass
class OpFn:
    op: str
    arity: int = 2


@dataclass
class Partial:
    fn: Any
    args: list = field(default_factory=list)

    @property
    def arity(self):
        return self.fn.arity - len(self.args)


def is_function(v):
    return isinstance(v, (Closure, OpFn, Partial))


def wrap(value, width):
    mask = (1 << width) - 1
    value &= mask
    if value >> (width - 1):
        value -= 1 << width
    return value


def int_div(a, b):
    """Integer division truncating toward zero."""
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


class Interpreter:
    """Base evaluator. ``ctx`` is threaded through untouched by default."""

    def __init__(self, program: A.Program, width: int = 32):
        self.program = program
        self.width = width
        self.defs = {d.name: d for d in program.defs}
        self.globals = Env({d.name: Closure([p.name for p in d.params], d.body, None, defn=d) for d in program.defs})
        for c in self.globals.vars.values():
            c.env = self.globals

    # hooks ------------------------------------------------------------
    def scalar_op(self, op, a, b, node, ctx):
        raise NotImplementedError

    def is_scalar(self, v):
        raise NotImplementedError

    def literal(self, n, node, ctx):
        return n

    def call_sdfap(self, clo, args, ctx, label):
        return self.call_closure(clo, args, ctx, label)

    def annotated_hof(self, node, fn, data, ctx):
        return self.plain_hof(node.kind, fn, data, ctx, node.label)

    def sub_ctx(self, ctx, label):
        return ctx

    def on_value(self, node, value):
        pass

    # evaluation -------------------------------------------------------
    def eval(self, e, env, ctx):
        v = self._eval(e, env, ctx)
        self.on_value(e, v)
        return v

    def _eval(self, e, env, ctx):
        if isinstance(e, A.Lit):
            return self.literal(e.value, e, ctx)
        if isinstance(e, A.Var):
            return env.lookup(e.name)
        if isinstance(e, A.OpRef):
            return OpFn(e.op)
        if isinstance(e, A.BinOp):
            a = self.eval(e.left, env, ctx)
            b = self.eval(e.right, env, ctx)
            return self.binop(e.op, a, b, e, ctx)
        if isinstance(e, A.Tuple):
            return tuple(self.eval(i, env, ctx) for i in e.items)
        if isinstance(e, A.VecLit):
            items = [self.eval(i, env, ctx) for i in e.items]
            s0 = self.shape_key(items[0])
            for it in items[1:]:
                if self.shape_key(it) != s0:
                    raise ShapeError("vector literal elements differ in shape", *self.where(e))
            return items
        if isinstance(e, A.Transpose):
            return self.transpose(self.eval(e.arg, env, ctx), e)
        if isinstance(e, A.Lambda):
            return Closure(list(e.params), e.body, env, lam=e)
        if isinstance(e, A.App):
            fn = self.eval(e.func, env, ctx)
            args = [self.eval(a, env, ctx) for a in e.args]
            return self.apply(fn, args, ctx, e.label, e)
        if isinstance(e, A.Hof):
            fn = self.eval(e.func, env, ctx)
            data = [self.eval(a, env, ctx) for a in e.args]
            if not is_function(fn):
                raise ShapeError(f"{e.kind} expects a function argument", *self.where(e))
            if e.pattern is not None:
                return self.annotated_hof(e, fn, data, ctx)
            return self.plain_hof(e.kind, fn, data, ctx, e.label, e)
        raise TypeError(e)

    @staticmethod
    def where(e):
        return e.pos if e is not None and getattr(e, "pos", None) else (None, None)

    def shape_key(self, v):
        if isinstance(v, list):
            return ("v", len(v), self.shape_key(v[0]))
        if isinstance(v, tuple):
            return ("t",) + tuple(self.shape_key(i) for i in v)
        if is_function(v):
            return ("fn",)
        return "s"

    def binop(self, op, a, b, node, ctx):
        if not (self.is_scalar(a) and self.is_scalar(b)):
            raise ShapeError(f"operator {op!r} needs scalar operands", *self.where(node))
        return self.scalar_op(op, a, b, node, ctx)

    def transpose(self, v, node):
        if not (isinstance(v, list) and v and all(isinstance(r, list) for r in v)):
            raise ShapeError("transpose needs a 2-D vector", *self.where(node))
        n = len(v[0])
        if any(len(r) != n for r in v):
            raise ShapeError("transpose of a ragged vector", *self.where(node))
        return [[row[j] for row in v] for j in range(n)]

    def apply(self, fn, args, ctx, label, node=None):
        if isinstance(fn, Partial):
            return self.apply(fn.fn, fn.args + list(args), ctx, label, node)
        if isinstance(fn, OpFn):
            if len(args) < 2:
                return Partial(fn, list(args))
            if len(args) > 2:
                raise ShapeError(f"({fn.op}) applied to too many arguments", *self.where(node))
            return self.binop(fn.op, args[0], args[1], node, ctx)
        if isinstance(fn, Closure):
            if len(args) < fn.arity:
                return Partial(fn, list(args))
            if len(args) > fn.arity:
                extra = args[fn.arity:]
                res = self.apply(fn, args[: fn.arity], ctx, label, node)
                return self.apply(res, extra, ctx, label, node)
            if fn.defn is not None and fn.defn.annotated:
                return self.call_sdfap(fn, args, ctx, label)
            return self.call_closure(fn, args, ctx, label)
        raise ShapeError("application of a non-function", *self.where(node))

    def call_closure(self, clo, args, ctx, label):
        inner = self.sub_ctx(ctx, label)
        env = Env(dict(zip(clo.params, args)), clo.env)
        if clo.defn is not None:
            for name, expr in clo.defn.local_bindings:
                env.vars[name] = Thunk(lambda expr=expr, env=env: self.eval(expr, env, inner))
        return self.eval(clo.body, env, inner)

    def plain_hof(self, kind, fn, data, ctx, label, node=None):
        xs = data[-1]
        if not isinstance(xs, list):
            raise ShapeError(f"{kind} expects a vector argument", *self.where(node))
        if kind == "map":
            return [self.apply(fn, [x], ctx, label, node) for x in xs]
        if kind == "imap":
            return [self.apply(fn, [self.literal(i, node, ctx), x], ctx, label, node) for i, x in enumerate(xs)]
        if kind == "foldl":
            acc = data[0]
            for x in xs:
                acc = self.apply(fn, [acc, x], ctx, label, node)
            return acc
        if kind == "fold":
            acc = xs[0]
            for x in xs[1:]:
                acc = self.apply(fn, [acc, x], ctx, label, node)
            return acc
        raise ShapeError(f"unsupported higher-order function {kind!r}", *self.where(node))

    def run_entry(self, entry, inputs, ctx=None):
        clo = self.globals.vars[entry]
        if len(inputs) != clo.arity:
            raise ShapeError(f"{entry!r} takes {clo.arity} argument(s), got {len(inputs)}")
        return self.apply(clo, list(inputs), ctx, -1)


class GoldenInterpreter(Interpreter):
    """Buffer-free reference semantics: patterns are ignored entirely."""

    def is_scalar(self, v):
        return isinstance(v, int)

    def scalar_op(self, op, a, b, node, ctx):
        if op == "+":
            r = a + b
        elif op == "-":
            r = a - b
        elif op == "*":
            r = a * b
        elif op == "div":
            if b == 0:
                raise EvalError("division by zero", *self.where(node))
            r = int_div(a, b)
        else:
            raise EvalError(f"unknown operator {op!r}")
        return wrap(r, self.width)
