"""Pretty-printer whose output parses back to an equal AST."""

from __future__ import annotations

from . import ast as A


def _pat(p):
    return "[" + ",".join(str(x) for x in p) + "]"


def _atom(e):
    s = print_expr(e)
    if isinstance(e, (A.Var, A.Lit, A.OpRef, A.Tuple, A.VecLit)):
        return s
    return "(" + s + ")"


def print_expr(e) -> str:
    if isinstance(e, A.Var):
        return e.name
    if isinstance(e, A.Lit):
        return str(e.value)
    if isinstance(e, A.OpRef):
        return "div" if e.op == "div" else f"({e.op})"
    if isinstance(e, A.BinOp):
        if e.op == "div":
            return f"div {_atom(e.left)} {_atom(e.right)}"
        return f"{_atom(e.left)} {e.op} {_atom(e.right)}"
    if isinstance(e, A.Tuple):
        return "(" + ", ".join(print_expr(i) for i in e.items) + ")"
    if isinstance(e, A.VecLit):
        return "[" + ", ".join(print_expr(i) for i in e.items) + "]"
    if isinstance(e, A.App):
        return " ".join([_atom(e.func)] + [_atom(a) for a in e.args])
    if isinstance(e, A.Hof):
        parts = [e.kind]
        if e.pattern is not None:
            parts.append(_pat(e.pattern))
        parts += [_atom(e.func)] + [_atom(a) for a in e.args]
        return " ".join(parts)
    if isinstance(e, A.Transpose):
        return f"transpose {_atom(e.arg)}"
    if isinstance(e, A.Lambda):
        return "\\" + " ".join(e.params) + " -> " + print_expr(e.body)
    raise TypeError(f"cannot print {e!r}")


def _type(t) -> str:
    if isinstance(t, A.TypeInt):
        return "Int"
    if isinstance(t, A.TypeVec):
        inner = _type(t.elem)
        if not isinstance(t.elem, A.TypeInt):
            inner = "(" + inner + ")"
        return f"Vec {t.size} {inner}"
    if isinstance(t, A.TypeTuple):
        return "(" + ", ".join(_type(i) for i in t.items) + ")"
    raise TypeError(t)


def print_definition(d: A.Definition) -> str:
    lines = []
    if d.signature is not None:
        sig = [_type(t) for t in d.signature.params] + [_type(d.signature.result)]
        lines.append(f"{d.name} :: " + " -> ".join(sig))
    params = []
    for p in d.params:
        params.append(f"({_pat(p.annotation)}, {p.name})" if p.annotation is not None else p.name)
    body = print_expr(d.body)
    if d.output_annotation is not None:
        body = f"({_pat(d.output_annotation)}, {body})"
    head = " ".join([d.name] + params)
    lines.append(f"{head} = {body}")
    if d.local_bindings:
        lines[-1] += " where"
        for name, e in d.local_bindings:
            lines.append(f"  {name} = {print_expr(e)}")
    return "\n".join(lines)


def print_program(p: A.Program) -> str:
    return "\n\n".join(print_definition(d) for d in p.defs) + "\n"
