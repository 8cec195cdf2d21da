"""Recursive-descent parser for the DSL.

Grammar (after layout resolution; see docs/grammar.md for the EBNF)::

    program    = item { ";" item }
    item       = signature | definition
    definition = IDENT { param } "=" rhs [ "where" "{" binding { ";" binding } "}" ]
    param      = IDENT | "(" pattern "," IDENT ")"
    rhs        = "(" pattern "," expr ")" | expr

HoF applications with missing trailing arguments, bare ``transpose``/``div``
and under-applied operator sections are eta-expanded into lambdas here, so
later stages only ever see saturated applications.
"""

from __future__ import annotations

from ..errors import ParseError
from . import ast as A
from .lexer import layout, tokenize


class Parser:
    def __init__(self, src: str):
        self.toks = layout(tokenize(src))
        self.i = 0
        self.eta = 0

    # token helpers
    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        j = min(self.i + k, len(self.toks) - 1)
        return self.toks[j]

    def at(self, text, kind=None):
        t = self.tok
        return t.text == text and (kind is None or t.kind == kind) and t.kind != "INT"

    def advance(self):
        t = self.tok
        self.i += 1
        return t

    def expect(self, text):
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.advance()

    def fail(self, msg, tok=None):
        t = tok or self.tok
        found = "end of input" if t.kind == "EOF" else repr(t.text)
        raise ParseError(f"{msg}, found {found}", t.line, t.col)

    def fresh(self):
        name = f"_e{self.eta}"
        self.eta += 1
        return name

    # program structure
    def program(self):
        defs = []
        sigs = {}
        while self.at(";"):
            self.advance()
        if self.tok.kind == "EOF":
            raise ParseError("no definitions", self.tok.line, self.tok.col)
        while True:
            if self.tok.kind != "IDENT":
                self.fail("expected a definition")
            if self.peek().text == "::":
                name_tok = self.tok
                name, sig = self.signature()
                if name in sigs:
                    raise ParseError(f"duplicate signature for {name!r}", name_tok.line, name_tok.col)
                sigs[name] = (sig, name_tok)
            else:
                defs.append(self.definition())
            if self.tok.kind == "EOF":
                break
            self.expect(";")
            while self.at(";"):
                self.advance()
            if self.tok.kind == "EOF":
                break
        by_name = {d.name: d for d in defs}
        from ..errors import ResolveError

        for name, (sig, tok) in sigs.items():
            if name not in by_name:
                raise ResolveError(f"signature for undefined name {name!r}", tok.line, tok.col)
            by_name[name].signature = sig
        return A.Program(defs)

    def signature(self):
        name = self.advance().text
        self.expect("::")
        types = [self.type_btype()]
        while self.at("->"):
            self.advance()
            types.append(self.type_btype())
        return name, A.Signature(types[:-1], types[-1])

    def type_btype(self):
        t = self.tok
        if t.kind == "IDENT" and t.text == "Int":
            self.advance()
            return A.TypeInt()
        if t.kind == "IDENT" and t.text == "Vec":
            self.advance()
            if self.tok.kind != "INT":
                self.fail("expected vector length")
            n = int(self.advance().text)
            if n < 1:
                raise ParseError("vector length must be >= 1", t.line, t.col)
            return A.TypeVec(n, self.type_atom())
        return self.type_atom()

    def type_atom(self):
        t = self.tok
        if t.kind == "IDENT" and t.text == "Int":
            self.advance()
            return A.TypeInt()
        if self.at("("):
            self.advance()
            items = [self.type_btype()]
            while self.at(","):
                self.advance()
                items.append(self.type_btype())
            self.expect(")")
            return items[0] if len(items) == 1 else A.TypeTuple(items)
        self.fail("expected a type")

    def pattern(self):
        t = self.expect("[")
        vals = []
        while True:
            if self.tok.kind != "INT":
                self.fail("expected integer in pattern")
            vals.append(int(self.advance().text))
            if self.at(","):
                self.advance()
                continue
            break
        self.expect("]")
        if not vals:
            raise ParseError("empty pattern", t.line, t.col)
        return vals

    def looks_like_annotation(self):
        # "(" "[" INT ... "]" ","
        if not (self.at("(") and self.peek().text == "["):
            return False
        k = 2
        while True:
            t = self.peek(k)
            if t.kind != "INT":
                return False
            t2 = self.peek(k + 1)
            if t2.text == ",":
                k += 2
                continue
            return t2.text == "]" and self.peek(k + 2).text == ","

    def definition(self):
        name_tok = self.advance()
        params = []
        while not self.at("="):
            if self.tok.kind == "IDENT":
                params.append(A.Param(self.advance().text))
            elif self.looks_like_annotation():
                self.advance()
                pat = self.pattern()
                self.expect(",")
                if self.tok.kind != "IDENT":
                    self.fail("expected parameter name")
                pname = self.advance().text
                self.expect(")")
                params.append(A.Param(pname, pat))
            else:
                self.fail("expected parameter or '='")
        self.expect("=")
        out_ann = None
        if self.looks_like_annotation():
            self.advance()
            out_ann = self.pattern()
            self.expect(",")
            body = self.expr()
            self.expect(")")
        else:
            body = self.expr()
        bindings = []
        if self.at("where", "KW"):
            self.advance()
            self.expect("{")
            while not self.at("}"):
                bindings.append(self.binding())
                if self.at(";"):
                    self.advance()
                elif not self.at("}"):
                    self.fail("expected end of binding")
            self.expect("}")
        return A.Definition(name_tok.text, params, out_ann, body, bindings, pos=name_tok.pos)

    def binding(self):
        if self.tok.kind != "IDENT":
            self.fail("expected binding name")
        name_tok = self.advance()
        params = []
        while self.tok.kind == "IDENT":
            params.append(self.advance().text)
        self.expect("=")
        body = self.expr()
        if params:
            body = A.Lambda(params, body, pos=name_tok.pos)
        return (name_tok.text, body)

    # expressions
    def expr(self):
        if self.at("\\"):
            t = self.advance()
            params = []
            while self.tok.kind == "IDENT":
                params.append(self.advance().text)
            if not params:
                self.fail("expected lambda parameter")
            self.expect("->")
            return A.Lambda(params, self.expr(), pos=t.pos)
        return self.arith()

    def arith(self):
        left = self.term()
        while self.at("+") or self.at("-"):
            t = self.advance()
            right = self.term()
            left = A.BinOp(t.text, left, right, pos=t.pos)
        return left

    def term(self):
        left = self.app()
        while self.at("*"):
            t = self.advance()
            right = self.app()
            left = A.BinOp("*", left, right, pos=t.pos)
        return left

    def starts_aexpr(self):
        t = self.tok
        if t.kind == "INT":
            return True
        if t.kind == "IDENT":
            return True
        return t.kind == "SYM" and t.text in ("(", "[", "\\")

    def args(self):
        out = []
        while self.starts_aexpr():
            if self.at("\\"):
                out.append(self.expr())
                break
            out.append(self.aexpr())
        return out

    def eta_wrap(self, n_missing, build, pos):
        names = [self.fresh() for _ in range(n_missing)]
        inner = build([A.Var(nm, pos=pos) for nm in names])
        return A.Lambda(names, inner, pos=pos) if names else inner

    def app(self):
        t = self.tok
        if t.kind == "IDENT" and t.text in A.HOF_KINDS:
            self.advance()
            pattern = None
            if self.at("["):
                pattern = self.pattern()
            args = self.args()
            need = A.HOF_ARITY[t.text]
            if not args:
                self.fail(f"{t.text} needs a function argument")
            if len(args) > need:
                raise ParseError(f"{t.text} applied to too many arguments", t.line, t.col)
            return self.eta_wrap(
                need - len(args),
                lambda extra: A.Hof(t.text, pattern, args[0], args[1:] + extra, pos=t.pos),
                t.pos,
            )
        if t.kind == "IDENT" and t.text == "transpose":
            self.advance()
            args = self.args()
            if len(args) > 1:
                raise ParseError("transpose takes one argument", t.line, t.col)
            return self.eta_wrap(1 - len(args), lambda extra: A.Transpose((args + extra)[0], pos=t.pos), t.pos)
        if t.kind == "IDENT" and t.text == "div":
            self.advance()
            args = self.args()
            if len(args) > 2:
                raise ParseError("div takes two arguments", t.line, t.col)
            return self.eta_wrap(2 - len(args), lambda extra: A.BinOp("div", *(args + extra), pos=t.pos), t.pos)
        head = self.aexpr()
        args = self.args()
        if not args:
            return head
        if isinstance(head, A.OpRef):
            if len(args) > 2:
                raise ParseError(f"({head.op}) takes two arguments", t.line, t.col)
            return self.eta_wrap(2 - len(args), lambda extra: A.BinOp(head.op, *(args + extra), pos=t.pos), t.pos)
        return A.App(head, args, pos=t.pos)

    def aexpr(self):
        t = self.tok
        if t.kind == "INT":
            self.advance()
            return A.Lit(int(t.text), pos=t.pos)
        if t.kind == "IDENT":
            if t.text in A.HOF_KINDS:
                self.fail(f"{t.text} must be parenthesised when used as an argument")
            if t.text == "transpose":
                self.advance()
                return self.eta_wrap(1, lambda extra: A.Transpose(extra[0], pos=t.pos), t.pos)
            if t.text == "div":
                self.advance()
                return A.OpRef("div", pos=t.pos)
            self.advance()
            return A.Var(t.text, pos=t.pos)
        if self.at("("):
            self.advance()
            if self.tok.text in ("+", "-", "*") and self.tok.kind == "SYM" and self.peek().text == ")":
                op = self.advance().text
                self.advance()
                return A.OpRef(op, pos=t.pos)
            first = self.expr()
            if self.at(","):
                items = [first]
                while self.at(","):
                    self.advance()
                    items.append(self.expr())
                self.expect(")")
                return A.Tuple(items, pos=t.pos)
            self.expect(")")
            return first
        if self.at("["):
            self.advance()
            items = []
            if self.at("]"):
                raise ParseError("empty vector literal", t.line, t.col)
            items.append(self.expr())
            while self.at(","):
                self.advance()
                items.append(self.expr())
            self.expect("]")
            return A.VecLit(items, pos=t.pos)
        self.fail("expected an expression")


def parse_program(source: str, entry=None) -> A.Program:
    """Parse and resolve ``source``; raises on any lexical/syntax/name error."""
    from .resolve import resolve

    prog = Parser(source).program()
    prog.entry = entry
    A.assign_labels(prog)
    resolve(prog)
    return prog
