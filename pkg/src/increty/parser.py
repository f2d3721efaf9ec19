"""Hand-rolled lexer and recursive-descent parsers for both languages.

``parse_fun`` accepts the ML-like functional syntax (typed or untyped,
detected from the abstraction form) and ``parse_while`` the imperative one.
Parse failures raise ``ParseError`` with a line/column position. Terms do
not embed positions (they must compare structurally), so parsers can also
return a side table mapping node identity to source spans for diagnostics.
"""

from __future__ import annotations

import re

from . import terms as T
from .types import Arrow, BOOL, INT, Type


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__("%d:%d: %s" % (line, col, message))
        self.message = message
        self.line = line
        self.col = col


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<op>->|:=|<=|>=|[()+\-*=:;]))"
)

KEYWORDS = {
    "fun", "let", "in", "if", "then", "else", "true", "false",
    "int", "bool", "skip", "while", "do", "not", "or",
}


class _Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind: str, text: str, line: int, col: int):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col


def _lex(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            line += text.count("\n", line_start, pos)
            raise ParseError("unexpected character %r" % stripped[0], line, pos - line_start + 1)
        ws_end = m.start(m.lastgroup)  # type: ignore[arg-type]
        nl = text.count("\n", pos, ws_end)
        if nl:
            line += nl
            line_start = text.rfind("\n", pos, ws_end) + 1
        col = ws_end - line_start + 1
        if m.group("num") is not None:
            toks.append(_Tok("num", m.group("num"), line, col))
        elif m.group("ident") is not None:
            word = m.group("ident")
            toks.append(_Tok("kw" if word in KEYWORDS else "ident", word, line, col))
        else:
            toks.append(_Tok("op", m.group("op"), line, col))
        pos = m.end()
    toks.append(_Tok("eof", "", line, len(text) - line_start + 1))
    return toks


class SourceMap:
    """Node-identity keyed spans; survives only as long as the parsed tree."""

    def __init__(self) -> None:
        self._spans: dict[int, tuple[int, int]] = {}

    def record(self, node: T.Term, line: int, col: int) -> None:
        self._spans.setdefault(id(node), (line, col))

    def span(self, node: T.Term) -> tuple[int, int] | None:
        return self._spans.get(id(node))


class _Parser:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.i = 0
        self.spans = SourceMap()

    # -- token helpers

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def eat(self, kind: str, text: str | None = None) -> _Tok:
        if not self.at(kind, text):
            tok = self.peek()
            want = text if text is not None else kind
            raise ParseError("expected %r, found %r" % (want, tok.text or "end of input"), tok.line, tok.col)
        return self.next()

    def fail(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.col)

    def done(self) -> None:
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError("unexpected trailing input %r" % tok.text, tok.line, tok.col)

    def mark(self, node: T.Term, tok: _Tok) -> T.Term:
        self.spans.record(node, tok.line, tok.col)
        return node

    # -- functional expressions

    def fun_expr(self) -> T.FunExpr:
        tok = self.peek()
        if self.at("kw", "fun"):
            return self.fun_abs()
        if self.at("kw", "let"):
            self.next()
            name = self.eat("ident").text
            self.eat("op", "=")
            bound = self.fun_expr()
            self.eat("kw", "in")
            body = self.fun_expr()
            return self.mark(T.Let(name, bound, body), tok)
        if self.at("kw", "if"):
            self.next()
            cond = self.fun_expr()
            self.eat("kw", "then")
            then = self.fun_expr()
            self.eat("kw", "else")
            orelse = self.fun_expr()
            return self.mark(T.If(cond, then, orelse), tok)
        return self.fun_cmp()

    def fun_abs(self) -> T.FunExpr:
        tok = self.eat("kw", "fun")
        fn_name = self.eat("ident").text
        if self.at("op", "("):
            self.next()
            param = self.eat("ident").text
            self.eat("op", ":")
            param_ty = self.type_expr()
            self.eat("op", ")")
            self.eat("op", "->")
            self.eat("op", "(")
            body = self.fun_expr()
            self.eat("op", ":")
            body_ty = self.type_expr()
            self.eat("op", ")")
            return self.mark(T.Abs(fn_name, param, param_ty, body, body_ty), tok)
        param = self.eat("ident").text
        self.eat("op", "->")
        body = self.fun_expr()
        return self.mark(T.Abs(fn_name, param, None, body, None), tok)

    def fun_cmp(self) -> T.FunExpr:
        tok = self.peek()
        left = self.fun_add()
        if self.peek().kind == "op" and self.peek().text in ("=", "<=", ">="):
            op = self.next().text
            right = self.fun_add()
            return self.mark(T.BinOp(left, op, right), tok)
        return left

    def fun_add(self) -> T.FunExpr:
        tok = self.peek()
        e = self.fun_mul()
        while self.peek().kind == "op" and self.peek().text in ("+", "-"):
            op = self.next().text
            e = self.mark(T.BinOp(e, op, self.fun_mul()), tok)
        return e

    def fun_mul(self) -> T.FunExpr:
        tok = self.peek()
        e = self.fun_app()
        while self.at("op", "*"):
            self.next()
            e = self.mark(T.BinOp(e, "*", self.fun_app()), tok)
        return e

    def fun_app(self) -> T.FunExpr:
        tok = self.peek()
        e = self.fun_atom()
        while self._at_fun_atom():
            e = self.mark(T.App(e, self.fun_atom()), tok)
        return e

    def _at_fun_atom(self) -> bool:
        tok = self.peek()
        if tok.kind in ("num", "ident"):
            return True
        if tok.kind == "kw" and tok.text in ("true", "false"):
            return True
        return tok.kind == "op" and tok.text == "("

    def fun_atom(self) -> T.FunExpr:
        tok = self.peek()
        if tok.kind == "num":
            self.next()
            return self.mark(T.Const(int(tok.text)), tok)
        if tok.kind == "ident":
            self.next()
            return self.mark(T.Var(tok.text), tok)
        if tok.kind == "kw" and tok.text in ("true", "false"):
            self.next()
            return self.mark(T.Const(tok.text == "true"), tok)
        if self.at("op", "("):
            self.next()
            e = self.fun_expr()
            self.eat("op", ")")
            return e
        raise self.fail("expected an expression")

    def type_expr(self) -> Type:
        left = self.type_atom()
        if self.at("op", "->"):
            self.next()
            return Arrow(left, self.type_expr())
        return left

    def type_atom(self) -> Type:
        if self.at("kw", "int"):
            self.next()
            return INT
        if self.at("kw", "bool"):
            self.next()
            return BOOL
        if self.at("op", "("):
            self.next()
            ty = self.type_expr()
            self.eat("op", ")")
            return ty
        raise self.fail("expected a type")

    # -- imperative phrases

    def command(self) -> T.WhilePhrase:
        tok = self.peek()
        first = self.simple_command()
        if self.at("op", ";"):
            self.next()
            return self.mark(T.Seq(first, self.command()), tok)
        return first

    def simple_command(self) -> T.WhilePhrase:
        tok = self.peek()
        if self.at("kw", "skip"):
            self.next()
            return self.mark(T.Skip(), tok)
        if self.at("kw", "if"):
            self.next()
            cond = self.bool_expr()
            self.eat("kw", "then")
            then = self.simple_command()
            self.eat("kw", "else")
            orelse = self.simple_command()
            return self.mark(T.WIf(cond, then, orelse), tok)
        if self.at("kw", "while"):
            self.next()
            cond = self.bool_expr()
            self.eat("kw", "do")
            return self.mark(T.While(cond, self.simple_command()), tok)
        if self.at("op", "("):
            save = self.i
            self.next()
            try:
                c = self.command()
                self.eat("op", ")")
                return c
            except ParseError:
                self.i = save
                raise
        if self.peek().kind == "ident":
            name = self.next().text
            self.eat("op", ":=")
            return self.mark(T.Assign(name, self.arith_expr()), tok)
        raise self.fail("expected a command")

    def bool_expr(self) -> T.WhilePhrase:
        tok = self.peek()
        left = self.bool_unit()
        if self.at("kw", "or"):
            self.next()
            return self.mark(T.Or(left, self.bool_expr()), tok)
        return left

    def bool_unit(self) -> T.WhilePhrase:
        tok = self.peek()
        if self.at("kw", "true"):
            self.next()
            return self.mark(T.BConst(True), tok)
        if self.at("kw", "false"):
            self.next()
            return self.mark(T.BConst(False), tok)
        if self.at("kw", "not"):
            self.next()
            return self.mark(T.Not(self.bool_unit()), tok)
        if self.at("op", "("):
            save = self.i
            self.next()
            try:
                b = self.bool_expr()
                self.eat("op", ")")
                return b
            except ParseError:
                self.i = save
            # fall through: the parenthesis opens an arithmetic operand
        left = self.arith_expr()
        self.eat("op", "<=")
        return self.mark(T.Leq(left, self.arith_expr()), tok)

    def arith_expr(self) -> T.WhilePhrase:
        tok = self.peek()
        e = self.arith_mul()
        while self.peek().kind == "op" and self.peek().text in ("+", "-"):
            op = self.next().text
            e = self.mark(T.ABin(e, op, self.arith_mul()), tok)
        return e

    def arith_mul(self) -> T.WhilePhrase:
        tok = self.peek()
        e = self.arith_atom()
        while self.at("op", "*"):
            self.next()
            e = self.mark(T.ABin(e, "*", self.arith_atom()), tok)
        return e

    def arith_atom(self) -> T.WhilePhrase:
        tok = self.peek()
        if tok.kind == "num":
            self.next()
            return self.mark(T.Num(int(tok.text)), tok)
        if tok.kind == "ident":
            self.next()
            return self.mark(T.WVar(tok.text), tok)
        if self.at("op", "("):
            self.next()
            e = self.arith_expr()
            self.eat("op", ")")
            return e
        raise self.fail("expected an arithmetic expression")


def parse_fun(text: str, with_spans: bool = False):
    """Parse a functional expression; returns the AST (and spans on request)."""
    p = _Parser(text)
    expr = p.fun_expr()
    p.done()
    if with_spans:
        return expr, p.spans
    return expr


def parse_type(text: str) -> Type:
    p = _Parser(text)
    ty = p.type_expr()
    p.done()
    return ty


def parse_while(text: str, with_spans: bool = False):
    """Parse an imperative phrase: a command, boolean or arithmetic expression."""
    best: ParseError | None = None
    for production in ("command", "bool_expr", "arith_expr"):
        p = _Parser(text)
        try:
            phrase = getattr(p, production)()
            p.done()
            if with_spans:
                return phrase, p.spans
            return phrase
        except ParseError as err:
            if best is None or (err.line, err.col) >= (best.line, best.col):
                best = err
    assert best is not None
    raise best
