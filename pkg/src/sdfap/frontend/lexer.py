"""Tokenizer plus a small offside-rule pass.

Layout is resolved into explicit ``{ ; }`` tokens: ``where`` opens a block
whose column is fixed by the next token, a line starting at that column
separates bindings, and a line starting further left closes the block.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import LexError

SYMBOLS = ("::", "->", "(", ")", "[", "]", ",", "|", "=", "\\", "+", "-", "*", ";", "{", "}")
KEYWORDS = {"where"}


@dataclass
class Token:
    kind: str  # INT, IDENT, SYM, KW, EOF
    text: str
    line: int
    col: int
    first: bool = False

    @property
    def pos(self):
        return (self.line, self.col)

    def __repr__(self):
        return f"{self.kind}:{self.text!r}@{self.line}:{self.col}"


def tokenize(src: str):
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(src)
    first = True
    while i < n:
        ch = src[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            first = True
            continue
        if ch in " \t\r":
            i += 1
            col += 1 if ch != "\t" else 8 - (col - 1) % 8
            continue
        if src.startswith("--", i) and not src.startswith("-->", i):
            while i < n and src[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            if j < n and (src[j].isalpha() or src[j] == "_"):
                raise LexError(f"malformed number {src[i:j + 1]!r}", line, start_col)
            tokens.append(Token("INT", src[i:j], line, start_col, first))
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] in "_'"):
                j += 1
            word = src[i:j]
            tokens.append(Token("KW" if word in KEYWORDS else "IDENT", word, line, start_col, first))
        else:
            for sym in SYMBOLS:
                if src.startswith(sym, i):
                    j = i + len(sym)
                    tokens.append(Token("SYM", sym, line, start_col, first))
                    break
            else:
                raise LexError(f"unexpected character {ch!r}", line, start_col)
        col += j - i
        i = j
        first = False
    tokens.append(Token("EOF", "", line, col, True))
    return tokens


def layout(tokens):
    out = []
    stack = []
    pending_open = False
    for tok in tokens:
        if tok.kind == "EOF":
            if pending_open:
                out.append(Token("SYM", "{", tok.line, tok.col))
                out.append(Token("SYM", "}", tok.line, tok.col))
                pending_open = False
            while len(stack) > 1:
                out.append(Token("SYM", "}", tok.line, tok.col))
                stack.pop()
            out.append(tok)
            break
        if not stack:
            stack.append(tok.col)
        elif pending_open:
            if stack and tok.col <= stack[0] and tok.first:
                # `where` with no indented bindings
                out.append(Token("SYM", "{", tok.line, tok.col))
                out.append(Token("SYM", "}", tok.line, tok.col))
                pending_open = False
                while tok.col < stack[-1]:
                    out.append(Token("SYM", "}", tok.line, tok.col))
                    stack.pop()
                if tok.col == stack[-1]:
                    out.append(Token("SYM", ";", tok.line, tok.col))
            else:
                out.append(Token("SYM", "{", tok.line, tok.col))
                stack.append(tok.col)
                pending_open = False
        elif tok.first:
            while len(stack) > 1 and tok.col < stack[-1]:
                out.append(Token("SYM", "}", tok.line, tok.col))
                stack.pop()
            if tok.col == stack[-1]:
                out.append(Token("SYM", ";", tok.line, tok.col))
        out.append(tok)
        if tok.kind == "KW" and tok.text == "where":
            pending_open = True
    return out
