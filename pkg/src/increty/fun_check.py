"""Type checking for the annotated functional language, plus its incremental
instance for the engine.

Abstractions carry their parameter and body types, so recursive functions
check in a single pass: the body is checked under an environment binding
both the parameter and the function name (at its arrow type).

Operators have fixed signatures — arithmetic takes ints to int, comparisons
take ints to bool — and both operand types must agree.
"""

from __future__ import annotations

from . import engine
from .engine import Cache, EngineStats, IdAlloc, LanguageInstance, TypeEnv, TypingError, restrict
from .parser import parse_fun, parse_type
from .terms import Abs, App, BinOp, Const, FunExpr, If, Let, Term, Var
from .types import Arrow, BOOL, INT, Type, pretty_type

OP_RESULT: dict[str, Type] = {
    "+": INT, "-": INT, "*": INT,
    "=": BOOL, "<=": BOOL, ">=": BOOL,
}
OP_OPERAND: dict[str, Type] = {op: INT for op in OP_RESULT}


def const_type(value: object) -> Type:
    return BOOL if isinstance(value, bool) else INT


def type_check(env: TypeEnv, expr: FunExpr) -> Type:
    """The unique simple type of ``expr`` under ``env``, or TypingError."""
    if isinstance(expr, Const):
        return const_type(expr.value)
    if isinstance(expr, Var):
        try:
            return env[expr.name]
        except KeyError:
            raise TypingError(expr, "unbound variable %r" % expr.name) from None
    if isinstance(expr, BinOp):
        left = type_check(env, expr.left)
        right = type_check(env, expr.right)
        return _join_op(expr, left, right)
    if isinstance(expr, App):
        fn = type_check(env, expr.fn)
        arg = type_check(env, expr.arg)
        return _join_app(expr, fn, arg)
    if isinstance(expr, If):
        cond = type_check(env, expr.cond)
        then = type_check(env, expr.then)
        orelse = type_check(env, expr.orelse)
        return _join_if(expr, cond, then, orelse)
    if isinstance(expr, Let):
        bound = type_check(env, expr.bound)
        inner = dict(env)
        inner[expr.name] = bound
        return type_check(inner, expr.body)
    assert isinstance(expr, Abs)
    if not expr.annotated:
        raise TypingError(expr, "abstraction lacks type annotations")
    inner = dict(env)
    inner[expr.param] = expr.param_type
    inner[expr.fn_name] = Arrow(expr.param_type, expr.body_type)
    body = type_check(inner, expr.body)
    return _join_abs(expr, body)


def _join_op(expr: BinOp, left: Type, right: Type) -> Type:
    if left != right:
        raise TypingError(expr, "operand types must agree: %s vs %s" % (pretty_type(left), pretty_type(right)))
    want = OP_OPERAND[expr.op]
    if left != want:
        raise TypingError(expr, "operator %r needs %s operands, got %s" % (expr.op, pretty_type(want), pretty_type(left)))
    return OP_RESULT[expr.op]


def _join_app(expr: App, fn: Type, arg: Type) -> Type:
    if not isinstance(fn, Arrow):
        raise TypingError(expr, "application of a non-function of type %s" % pretty_type(fn))
    if fn.domain != arg:
        raise TypingError(expr, "argument type must equal the domain: %s vs %s" % (pretty_type(fn.domain), pretty_type(arg)))
    return fn.codomain


def _join_if(expr: If, cond: Type, then: Type, orelse: Type) -> Type:
    if cond != BOOL:
        raise TypingError(expr, "condition must be bool, got %s" % pretty_type(cond))
    if then != orelse:
        raise TypingError(expr, "branch types must agree: %s vs %s" % (pretty_type(then), pretty_type(orelse)))
    return then


def _join_abs(expr: Abs, body: Type) -> Type:
    if body != expr.body_type:
        raise TypingError(expr, "body type must match the annotation: %s vs %s"
                          % (pretty_type(body), pretty_type(expr.body_type)))
    return Arrow(expr.param_type, expr.body_type)


_MISSING = object()


def compatible(env: TypeEnv, other: TypeEnv, expr: Term) -> bool:
    """Both environments cover the free variables and agree pointwise on them."""
    for name in expr.fv:
        a = env.get(name, _MISSING)
        if a is _MISSING:
            return False
        b = other.get(name, _MISSING)
        if b is _MISSING:
            return False
        if a is not b and a != b:
            return False
    return True


class FunChecker(LanguageInstance):
    """Engine instance wrapping the annotated-language checker."""

    name = "fun-check"

    def base(self, env: TypeEnv, term: Term) -> Type:
        return type_check(env, term)

    def subterms(self, term: Term) -> tuple[Term, ...]:
        if isinstance(term, BinOp):
            return (term.left, term.right)
        if isinstance(term, App):
            return (term.fn, term.arg)
        if isinstance(term, If):
            return (term.cond, term.then, term.orelse)
        if isinstance(term, Let):
            return (term.bound, term.body)
        if isinstance(term, Abs):
            return (term.body,)
        return ()

    def child_env(self, term: Term, i: int, env: TypeEnv, results, scratch) -> TypeEnv:
        if isinstance(term, Abs):
            if not term.annotated:
                raise TypingError(term, "abstraction lacks type annotations")
            inner = dict(env)
            inner[term.param] = term.param_type
            inner[term.fn_name] = Arrow(term.param_type, term.body_type)
            return inner
        if isinstance(term, Let) and i == 1:
            inner = dict(env)
            inner[term.name] = results[0]
            return inner
        return env

    def join(self, term: Term, env: TypeEnv, results, scratch) -> Type:
        if isinstance(term, BinOp):
            return _join_op(term, results[0], results[1])
        if isinstance(term, App):
            return _join_app(term, results[0], results[1])
        if isinstance(term, If):
            return _join_if(term, results[0], results[1], results[2])
        if isinstance(term, Let):
            return results[1]
        assert isinstance(term, Abs)
        return _join_abs(term, results[0])

    def compat(self, env: TypeEnv, cached_env: TypeEnv, term: Term) -> bool:
        return compatible(env, cached_env, term)

    # textual cache format
    def parse_term(self, text: str) -> Term:
        return parse_fun(text)

    def pretty_entry(self, term: Term, env: TypeEnv, result: Type) -> tuple[str, str, str]:
        env_s = "".join("%s:%s," % (n, pretty_type(env[n])) for n in sorted(env))
        return str(term), env_s, pretty_type(result)

    def parse_entry(self, term_s: str, env_s: str, result_s: str, alloc: IdAlloc):
        env = {}
        for item in filter(None, env_s.split(",")):
            name, _, ty = item.partition(":")
            env[name] = parse_type(ty)
        return parse_fun(term_s), env, parse_type(result_s)


CHECKER = FunChecker()


def check_incremental(env: TypeEnv, cache: Cache, expr: FunExpr,
                      record_trace: bool = False) -> tuple[Type, Cache, EngineStats]:
    """Incremental counterpart of ``type_check`` against a result cache."""
    return engine.incremental_type(env, cache, expr, CHECKER, record_trace=record_trace)
