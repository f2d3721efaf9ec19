"""Abstract syntax for the functional and imperative object languages.

Every node is immutable and carries two precomputed annotations set at
construction time:

* ``_hash`` — a deterministic structural fingerprint (see ``fingerprint``),
  so terms can key the result cache in expected O(1);
* ``fv`` — the free-variable set, binder-aware for abstraction and let.
  The imperative language has no binders, so there ``fv`` is simply every
  occurring variable (assignment targets included).

Typed and untyped functional abstractions share one node class: the type
slots are ``None`` in the untyped variant, which keeps them structurally
distinct from annotated ones.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fingerprint import Fingerprinted, mix, mix_str
from .types import Type, pretty_type

_EMPTY: frozenset[str] = frozenset()


class Term(Fingerprinted):
    __slots__ = ()

    fv: frozenset[str]

    def __str__(self) -> str:
        return pretty(self)

    def __repr__(self) -> str:
        return "%s(%s)" % (self.__class__.__name__, pretty(self))


class FunExpr(Term):
    __slots__ = ()


class WhilePhrase(Term):
    __slots__ = ()


# ---------------------------------------------------------------------------
# Functional expressions

# Operator groups: arithmetic operators take ints to int, comparisons take
# ints to bool. Operand types must also agree with each other.
ARITH_OPS = ("+", "-", "*")
CMP_OPS = ("=", "<=", ">=")
FUN_OPS = ARITH_OPS + CMP_OPS


@dataclass(frozen=True, eq=False)
class Const(FunExpr):
    value: object  # int or bool

    _fields = ("value",)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", mix(0x20, mix_str(repr(self.value))))
        object.__setattr__(self, "fv", _EMPTY)


@dataclass(frozen=True, eq=False)
class Var(FunExpr):
    name: str

    _fields = ("name",)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", mix(0x21, mix_str(self.name)))
        object.__setattr__(self, "fv", frozenset((self.name,)))


@dataclass(frozen=True, eq=False)
class Abs(FunExpr):
    """``fun f (x : T) -> (e : T)``; f names the (possibly recursive) function.

    ``param_type``/``body_type`` are both None in the untyped language.
    """

    fn_name: str
    param: str
    param_type: Type | None
    body: FunExpr
    body_type: Type | None

    _fields = ("fn_name", "param", "param_type", "body", "body_type")

    def __post_init__(self) -> None:
        pt = 0 if self.param_type is None else self.param_type._hash
        bt = 0 if self.body_type is None else self.body_type._hash
        object.__setattr__(
            self,
            "_hash",
            mix(0x22, mix_str(self.fn_name), mix_str(self.param), pt, self.body._hash, bt),
        )
        object.__setattr__(self, "fv", self.body.fv - {self.fn_name, self.param})

    @property
    def annotated(self) -> bool:
        return self.param_type is not None and self.body_type is not None


@dataclass(frozen=True, eq=False)
class BinOp(FunExpr):
    left: FunExpr
    op: str
    right: FunExpr

    _fields = ("left", "op", "right")

    def __post_init__(self) -> None:
        if self.op not in FUN_OPS:
            raise ValueError("unknown operator %r" % self.op)
        object.__setattr__(self, "_hash", mix(0x23, self.left._hash, mix_str(self.op), self.right._hash))
        object.__setattr__(self, "fv", self.left.fv | self.right.fv)


@dataclass(frozen=True, eq=False)
class App(FunExpr):
    fn: FunExpr
    arg: FunExpr

    _fields = ("fn", "arg")

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", mix(0x24, self.fn._hash, self.arg._hash))
        object.__setattr__(self, "fv", self.fn.fv | self.arg.fv)


@dataclass(frozen=True, eq=False)
class If(FunExpr):
    cond: FunExpr
    then: FunExpr
    orelse: FunExpr

    _fields = ("cond", "then", "orelse")

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", mix(0x25, self.cond._hash, self.then._hash, self.orelse._hash))
        object.__setattr__(self, "fv", self.cond.fv | self.then.fv | self.orelse.fv)


@dataclass(frozen=True, eq=False)
class Let(FunExpr):
    name: str
    bound: FunExpr
    body: FunExpr

    _fields = ("name", "bound", "body")

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", mix(0x26, mix_str(self.name), self.bound._hash, self.body._hash))
        object.__setattr__(self, "fv", self.bound.fv | (self.body.fv - {self.name}))


def is_annotated(e: FunExpr) -> bool:
    """True when every abstraction in ``e`` carries its type annotations."""
    if isinstance(e, Abs):
        return e.annotated and is_annotated(e.body)
    if isinstance(e, BinOp):
        return is_annotated(e.left) and is_annotated(e.right)
    if isinstance(e, App):
        return is_annotated(e.fn) and is_annotated(e.arg)
    if isinstance(e, If):
        return is_annotated(e.cond) and is_annotated(e.then) and is_annotated(e.orelse)
    if isinstance(e, Let):
        return is_annotated(e.bound) and is_annotated(e.body)
    return True


def is_untyped(e: FunExpr) -> bool:
    """True when no abstraction in ``e`` carries annotations."""
    if isinstance(e, Abs):
        return e.param_type is None and e.body_type is None and is_untyped(e.body)
    if isinstance(e, BinOp):
        return is_untyped(e.left) and is_untyped(e.right)
    if isinstance(e, App):
        return is_untyped(e.fn) and is_untyped(e.arg)
    if isinstance(e, If):
        return is_untyped(e.cond) and is_untyped(e.then) and is_untyped(e.orelse)
    if isinstance(e, Let):
        return is_untyped(e.bound) and is_untyped(e.body)
    return True


def erase(e: FunExpr) -> FunExpr:
    """Strip all type annotations, producing the untyped variant."""
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Abs):
        return Abs(e.fn_name, e.param, None, erase(e.body), None)
    if isinstance(e, BinOp):
        return BinOp(erase(e.left), e.op, erase(e.right))
    if isinstance(e, App):
        return App(erase(e.fn), erase(e.arg))
    if isinstance(e, If):
        return If(erase(e.cond), erase(e.then), erase(e.orelse))
    assert isinstance(e, Let)
    return Let(e.name, erase(e.bound), erase(e.body))


# ---------------------------------------------------------------------------
# Imperative phrases

AEXPR_OPS = ("+", "-", "*")


@dataclass(frozen=True, eq=False)
class Num(WhilePhrase):
    value: int

    _fields = ("value",)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", mix(0x40, self.value))
        object.__setattr__(self, "fv", _EMPTY)


@dataclass(frozen=True, eq=False)
class WVar(WhilePhrase):
    name: str

    _fields = ("name",)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", mix(0x41, mix_str(self.name)))
        object.__setattr__(self, "fv", frozenset((self.name,)))


@dataclass(frozen=True, eq=False)
class ABin(WhilePhrase):
    left: WhilePhrase
    op: str
    right: WhilePhrase

    _fields = ("left", "op", "right")

    def __post_init__(self) -> None:
        if self.op not in AEXPR_OPS:
            raise ValueError("unknown arithmetic operator %r" % self.op)
        object.__setattr__(self, "_hash", mix(0x42, self.left._hash, mix_str(self.op), self.right._hash))
        object.__setattr__(self, "fv", self.left.fv | self.right.fv)


@dataclass(frozen=True, eq=False)
class BConst(WhilePhrase):
    value: bool

    _fields = ("value",)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", mix(0x43, int(self.value)))
        object.__setattr__(self, "fv", _EMPTY)


@dataclass(frozen=True, eq=False)
class Or(WhilePhrase):
    left: WhilePhrase
    right: WhilePhrase

    _fields = ("left", "right")

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", mix(0x44, self.left._hash, self.right._hash))
        object.__setattr__(self, "fv", self.left.fv | self.right.fv)


@dataclass(frozen=True, eq=False)
class Not(WhilePhrase):
    operand: WhilePhrase

    _fields = ("operand",)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", mix(0x45, self.operand._hash))
        object.__setattr__(self, "fv", self.operand.fv)


@dataclass(frozen=True, eq=False)
class Leq(WhilePhrase):
    left: WhilePhrase
    right: WhilePhrase

    _fields = ("left", "right")

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", mix(0x46, self.left._hash, self.right._hash))
        object.__setattr__(self, "fv", self.left.fv | self.right.fv)


@dataclass(frozen=True, eq=False)
class Skip(WhilePhrase):
    _fields = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", mix(0x47))
        object.__setattr__(self, "fv", _EMPTY)


@dataclass(frozen=True, eq=False)
class Assign(WhilePhrase):
    target: str
    value: WhilePhrase

    _fields = ("target", "value")

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", mix(0x48, mix_str(self.target), self.value._hash))
        object.__setattr__(self, "fv", self.value.fv | {self.target})


@dataclass(frozen=True, eq=False)
class Seq(WhilePhrase):
    first: WhilePhrase
    second: WhilePhrase

    _fields = ("first", "second")

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", mix(0x49, self.first._hash, self.second._hash))
        object.__setattr__(self, "fv", self.first.fv | self.second.fv)


@dataclass(frozen=True, eq=False)
class WIf(WhilePhrase):
    cond: WhilePhrase
    then: WhilePhrase
    orelse: WhilePhrase

    _fields = ("cond", "then", "orelse")

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", mix(0x4A, self.cond._hash, self.then._hash, self.orelse._hash))
        object.__setattr__(self, "fv", self.cond.fv | self.then.fv | self.orelse.fv)


@dataclass(frozen=True, eq=False)
class While(WhilePhrase):
    cond: WhilePhrase
    body: WhilePhrase

    _fields = ("cond", "body")

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", mix(0x4B, self.cond._hash, self.body._hash))
        object.__setattr__(self, "fv", self.cond.fv | self.body.fv)


SKIP = Skip()
TRUE = BConst(True)
FALSE = BConst(False)


def free_vars(t: Term) -> frozenset[str]:
    """The precomputed free-variable set of ``t``."""
    return t.fv


# ---------------------------------------------------------------------------
# Pretty printing
#
# Precedence levels (functional): 0 if/let/fun, 1 comparison, 2 additive,
# 3 multiplicative, 4 application, 5 atom. A child is parenthesized when its
# own level is below what its position requires.

_FUN_OP_LEVEL = {"=": 1, "<=": 1, ">=": 1, "+": 2, "-": 2, "*": 3}


def _fun_level(e: FunExpr) -> int:
    if isinstance(e, (Const, Var)):
        return 5
    if isinstance(e, App):
        return 4
    if isinstance(e, BinOp):
        return _FUN_OP_LEVEL[e.op]
    return 0


def _pf(e: FunExpr, need: int) -> str:
    level = _fun_level(e)
    if isinstance(e, Const):
        s = "true" if e.value is True else "false" if e.value is False else str(e.value)
    elif isinstance(e, Var):
        s = e.name
    elif isinstance(e, Abs):
        if e.annotated:
            s = "fun %s (%s : %s) -> (%s : %s)" % (
                e.fn_name,
                e.param,
                pretty_type(e.param_type),
                _pf(e.body, 0),
                pretty_type(e.body_type),
            )
        else:
            s = "fun %s %s -> %s" % (e.fn_name, e.param, _pf(e.body, 0))
    elif isinstance(e, BinOp):
        lv = _FUN_OP_LEVEL[e.op]
        # comparisons are non-associative, + - * associate to the left
        s = "%s %s %s" % (_pf(e.left, lv if lv > 1 else 2), e.op, _pf(e.right, lv + 1))
    elif isinstance(e, App):
        s = "%s %s" % (_pf(e.fn, 4), _pf(e.arg, 5))
    elif isinstance(e, If):
        s = "if %s then %s else %s" % (_pf(e.cond, 0), _pf(e.then, 0), _pf(e.orelse, 0))
    else:
        assert isinstance(e, Let)
        s = "let %s = %s in %s" % (e.name, _pf(e.bound, 0), _pf(e.body, 0))
    if level < need:
        return "(%s)" % s
    return s


def _pw(p: WhilePhrase, in_seq_head: bool = False) -> str:
    if isinstance(p, Num):
        return str(p.value)
    if isinstance(p, WVar):
        return p.name
    if isinstance(p, ABin):
        lv = 3 if p.op == "*" else 2
        return "%s %s %s" % (_pwa(p.left, lv if lv == 2 else 3), p.op, _pwa(p.right, lv + 1))
    if isinstance(p, BConst):
        return "true" if p.value else "false"
    if isinstance(p, Or):
        left = _pw(p.left)
        if isinstance(p.left, Or):
            left = "(%s)" % left
        return "%s or %s" % (left, _pw(p.right))
    if isinstance(p, Not):
        inner = _pw(p.operand)
        if isinstance(p.operand, Or):
            inner = "(%s)" % inner
        return "not %s" % inner
    if isinstance(p, Leq):
        return "%s <= %s" % (_pwa(p.left, 2), _pwa(p.right, 2))
    if isinstance(p, Skip):
        return "skip"
    if isinstance(p, Assign):
        return "%s := %s" % (p.target, _pwa(p.value, 2))
    if isinstance(p, Seq):
        s = "%s; %s" % (_pcmd(p.first), _pw(p.second))
        return "(%s)" % s if in_seq_head else s
    if isinstance(p, WIf):
        return "if %s then %s else %s" % (_pw(p.cond), _pcmd(p.then), _pcmd(p.orelse))
    assert isinstance(p, While)
    return "while %s do %s" % (_pw(p.cond), _pcmd(p.body))


def _pcmd(p: WhilePhrase) -> str:
    # a single-command position: sequences need parentheses
    return _pw(p, in_seq_head=isinstance(p, Seq))


def _pwa(p: WhilePhrase, need: int) -> str:
    if isinstance(p, ABin):
        lv = 3 if p.op == "*" else 2
        s = _pw(p)
        return "(%s)" % s if lv < need else s
    return _pw(p)


def pretty(t: Term) -> str:
    """Concrete syntax for ``t``; inverse of the parsers."""
    if isinstance(t, FunExpr):
        return _pf(t, 0)
    return _pw(t)
