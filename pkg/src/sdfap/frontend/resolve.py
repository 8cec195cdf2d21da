"""Post-parse checks: unique names, scoping, arity, and absence of recursion."""

from __future__ import annotations

from ..errors import ResolveError
from . import ast as A


def _pos(e, default=(None, None)):
    return e.pos if getattr(e, "pos", None) else default


def _lambda_arity(e):
    return len(e.params) if isinstance(e, A.Lambda) else None


def resolve(prog: A.Program):
    seen = {}
    for d in prog.defs:
        if d.name in seen:
            line, col = d.pos or (None, None)
            raise ResolveError(f"duplicate definition {d.name!r}", line, col)
        if d.name in A.HOF_KINDS or d.name in ("transpose", "div"):
            line, col = d.pos or (None, None)
            raise ResolveError(f"{d.name!r} is a builtin and cannot be redefined", line, col)
        seen[d.name] = d
    if prog.entry is not None and prog.entry not in seen:
        raise ResolveError(f"entry {prog.entry!r} is not defined")

    top_arity = {d.name: len(d.params) for d in prog.defs}
    calls = {d.name: set() for d in prog.defs}

    for d in prog.defs:
        names = [p.name for p in d.params]
        if len(set(names)) != len(names):
            line, col = d.pos or (None, None)
            raise ResolveError(f"repeated parameter name in {d.name!r}", line, col)
        local_names = [n for n, _ in d.local_bindings]
        if len(set(local_names)) != len(local_names):
            line, col = d.pos or (None, None)
            raise ResolveError(f"repeated local binding in {d.name!r}", line, col)
        # scope: name -> arity (None when unknown / not a function)
        scope = {n: None for n in names}
        for n, e in d.local_bindings:
            scope[n] = _lambda_arity(e)
        for root in [d.body] + [e for _, e in d.local_bindings]:
            _check(root, scope, top_arity, calls[d.name])
        _check_local_cycles(d)

    _check_recursion(prog, calls)


def _check(e, scope, top_arity, calls):
    if isinstance(e, A.Var):
        if e.name in scope:
            return
        if e.name in top_arity:
            calls.add(e.name)
            return
        line, col = _pos(e)
        raise ResolveError(f"unresolved name {e.name!r}", line, col)
    if isinstance(e, A.Lambda):
        inner = dict(scope)
        for p in e.params:
            inner[p] = None
        _check(e.body, inner, top_arity, calls)
        return
    if isinstance(e, A.App) and isinstance(e.func, A.Var):
        name = e.func.name
        arity = scope[name] if name in scope else top_arity.get(name)
        if arity is not None and len(e.args) != arity:
            line, col = _pos(e)
            raise ResolveError(
                f"{name!r} expects {arity} argument(s) but is applied to {len(e.args)}", line, col
            )
    if isinstance(e, A.App) and isinstance(e.func, A.Lambda):
        if len(e.args) != len(e.func.params):
            line, col = _pos(e)
            raise ResolveError("lambda applied to the wrong number of arguments", line, col)
    if isinstance(e, A.Hof) and e.pattern is not None and not e.pattern:
        line, col = _pos(e)
        raise ResolveError("empty HoF pattern", line, col)
    for c in A.children(e):
        _check(c, scope, top_arity, calls)


def _check_local_cycles(d):
    local = {n: e for n, e in d.local_bindings}
    deps = {n: A.free_vars(e) & local.keys() for n, e in local.items()}
    state = {}

    def visit(n, stack):
        if state.get(n) == "done":
            return
        if state.get(n) == "active":
            cyc = " -> ".join(stack[stack.index(n):] + [n])
            line, col = _pos(local[n], d.pos or (None, None))
            raise ResolveError(f"cyclic binding reference in {d.name!r}: {cyc}", line, col)
        state[n] = "active"
        for m in sorted(deps[n]):
            visit(m, stack + [n])
        state[n] = "done"

    for n, _ in d.local_bindings:
        visit(n, [])


def _check_recursion(prog, calls):
    state = {}
    by_name = {d.name: d for d in prog.defs}

    def visit(n, stack):
        if state.get(n) == "done":
            return
        if state.get(n) == "active":
            cyc = " -> ".join(stack[stack.index(n):] + [n])
            line, col = by_name[n].pos or (None, None)
            raise ResolveError(f"recursive definitions are not supported: {cyc}", line, col)
        state[n] = "active"
        for m in sorted(calls[n]):
            visit(m, stack + [n])
        state[n] = "done"

    for d in prog.defs:
        visit(d.name, [])
