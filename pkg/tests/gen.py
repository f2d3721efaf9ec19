"""Seeded random program generators and mutators shared by the tests."""

from __future__ import annotations

import random

from increty.terms import (
    ABin, Abs, App, Assign, BConst, BinOp, Const, FunExpr, If, Leq, Let, Not, Num, Or,
    Seq, Skip, Var, WIf, While, WVar, WhilePhrase,
)
from increty.types import Arrow, BOOL, HIGH, INT, LOW, Type, level_join, level_leq, sec_var

NAMES = ["a", "b", "c", "x", "y", "z"]


def gen_type(rng: random.Random, depth: int = 1) -> Type:
    if depth <= 0 or rng.random() < 0.7:
        return INT if rng.random() < 0.6 else BOOL
    return Arrow(gen_type(rng, depth - 1), gen_type(rng, depth - 1))


def gen_base_env(rng: random.Random, nvars: int = 3) -> dict[str, Type]:
    return {NAMES[i]: gen_type(rng, 1) for i in range(nvars)}


def gen_typed(rng: random.Random, env: dict[str, Type], ty: Type, fuel: int) -> FunExpr:
    """A well-typed expression of type ``ty`` under ``env``."""
    matching = [n for n, t in env.items() if t == ty]
    if fuel <= 0:
        if matching and rng.random() < 0.8:
            return Var(rng.choice(matching))
        return _leaf(rng, env, ty)
    roll = rng.random()
    if roll < 0.22 and matching:
        return Var(rng.choice(matching))
    if roll < 0.30:
        return _leaf(rng, env, ty)
    if roll < 0.45 and ty in (INT, BOOL):
        op = rng.choice(("+", "-", "*")) if ty == INT else rng.choice(("=", "<=", ">="))
        return BinOp(gen_typed(rng, env, INT, fuel - 1), op, gen_typed(rng, env, INT, fuel - 1))
    if roll < 0.57:
        return If(gen_typed(rng, env, BOOL, fuel - 1),
                  gen_typed(rng, env, ty, fuel - 1),
                  gen_typed(rng, env, ty, fuel - 1))
    if roll < 0.72:
        name = rng.choice(NAMES)
        bound_ty = gen_type(rng, 1)
        inner = dict(env)
        inner[name] = bound_ty
        return Let(name, gen_typed(rng, env, bound_ty, fuel - 1),
                   gen_typed(rng, inner, ty, fuel - 1))
    if roll < 0.85:
        arg_ty = gen_type(rng, 1)
        fn = gen_typed(rng, env, Arrow(arg_ty, ty), fuel - 1)
        return App(fn, gen_typed(rng, env, arg_ty, fuel - 1))
    if isinstance(ty, Arrow):
        return _abs(rng, env, ty, fuel - 1)
    return _leaf(rng, env, ty)


def _leaf(rng: random.Random, env: dict[str, Type], ty: Type) -> FunExpr:
    if ty == INT:
        return Const(rng.randrange(10))
    if ty == BOOL:
        return Const(rng.random() < 0.5)
    assert isinstance(ty, Arrow)
    return _abs(rng, env, ty, 0)


def _abs(rng: random.Random, env: dict[str, Type], ty: Arrow, fuel: int) -> FunExpr:
    fn_name = rng.choice(NAMES)
    param = rng.choice(NAMES)
    inner = dict(env)
    inner[param] = ty.domain
    inner[fn_name] = ty
    return Abs(fn_name, param, ty.domain, gen_typed(rng, inner, ty.codomain, fuel), ty.codomain)


# -- positions and mutation (functional) ------------------------------------

def fun_positions(expr: FunExpr, env: dict[str, Type]):
    """Yield (path, node, env-at-node); paths index into checker subterms."""
    yield (), expr, env
    if isinstance(expr, BinOp):
        kids = ((0, expr.left, env), (1, expr.right, env))
    elif isinstance(expr, App):
        kids = ((0, expr.fn, env), (1, expr.arg, env))
    elif isinstance(expr, If):
        kids = ((0, expr.cond, env), (1, expr.then, env), (2, expr.orelse, env))
    elif isinstance(expr, Let):
        inner = dict(env)
        from increty.fun_check import type_check
        try:
            inner[expr.name] = type_check(env, expr.bound)
        except Exception:
            pass
        kids = ((0, expr.bound, env), (1, expr.body, inner))
    elif isinstance(expr, Abs) and expr.annotated:
        inner = dict(env)
        inner[expr.param] = expr.param_type
        inner[expr.fn_name] = Arrow(expr.param_type, expr.body_type)
        kids = ((0, expr.body, inner),)
    else:
        kids = ()
    for i, child, child_env in kids:
        for path, node, node_env in fun_positions(child, child_env):
            yield (i,) + path, node, node_env


def fun_replace(expr: FunExpr, path: tuple[int, ...], new: FunExpr) -> FunExpr:
    if not path:
        return new
    i, rest = path[0], path[1:]
    if isinstance(expr, BinOp):
        if i == 0:
            return BinOp(fun_replace(expr.left, rest, new), expr.op, expr.right)
        return BinOp(expr.left, expr.op, fun_replace(expr.right, rest, new))
    if isinstance(expr, App):
        if i == 0:
            return App(fun_replace(expr.fn, rest, new), expr.arg)
        return App(expr.fn, fun_replace(expr.arg, rest, new))
    if isinstance(expr, If):
        parts = [expr.cond, expr.then, expr.orelse]
        parts[i] = fun_replace(parts[i], rest, new)
        return If(*parts)
    if isinstance(expr, Let):
        if i == 0:
            return Let(expr.name, fun_replace(expr.bound, rest, new), expr.body)
        return Let(expr.name, expr.bound, fun_replace(expr.body, rest, new))
    assert isinstance(expr, Abs)
    return Abs(expr.fn_name, expr.param, expr.param_type,
               fun_replace(expr.body, rest, new), expr.body_type)


def mutate_typed(rng: random.Random, expr: FunExpr, env: dict[str, Type]) -> FunExpr:
    """Replace a random subexpression; usually type-preserving, sometimes not."""
    from increty.fun_check import type_check
    spots = list(fun_positions(expr, env))
    path, node, node_env = rng.choice(spots)
    if rng.random() < 0.75:
        try:
            ty = type_check(node_env, node)
        except Exception:
            ty = gen_type(rng, 1)
    else:
        ty = gen_type(rng, 1)
    replacement = gen_typed(rng, node_env, ty, rng.randrange(3))
    return fun_replace(expr, path, replacement)


# -- imperative generators ---------------------------------------------------

def gen_levels(rng: random.Random, nvars: int = 3) -> dict[str, object]:
    return {NAMES[i]: sec_var(rng.choice((LOW, HIGH))) for i in range(nvars)}


def gen_aexpr(rng: random.Random, pool: list[str], fuel: int) -> WhilePhrase:
    if fuel <= 0 or rng.random() < 0.4:
        if pool and rng.random() < 0.7:
            return WVar(rng.choice(pool))
        return Num(rng.randrange(4))
    return ABin(gen_aexpr(rng, pool, fuel - 1), rng.choice(("+", "-", "*")),
                gen_aexpr(rng, pool, fuel - 1))


def gen_bexpr(rng: random.Random, pool: list[str], fuel: int) -> WhilePhrase:
    roll = rng.random()
    if fuel <= 0 or roll < 0.25:
        return BConst(rng.random() < 0.5)
    if roll < 0.55:
        return Leq(gen_aexpr(rng, pool, fuel - 1), gen_aexpr(rng, pool, fuel - 1))
    if roll < 0.75:
        return Not(gen_bexpr(rng, pool, fuel - 1))
    return Or(gen_bexpr(rng, pool, fuel - 1), gen_bexpr(rng, pool, fuel - 1))


def gen_command(rng: random.Random, levels: dict[str, object], fuel: int,
                min_level: str = LOW) -> WhilePhrase:
    """A command whose principal level is at least ``min_level``."""
    writable = [n for n, t in levels.items() if level_leq(min_level, t.level)]
    roll = rng.random()
    if fuel <= 0 or roll < 0.15 or not writable:
        if writable and roll < 0.5:
            return _gen_assign(rng, levels, rng.choice(writable), fuel)
        return Skip()
    if roll < 0.45:
        return _gen_assign(rng, levels, rng.choice(writable), fuel)
    if roll < 0.65:
        return Seq(gen_command(rng, levels, fuel - 1, min_level),
                   gen_command(rng, levels, fuel - 1, min_level))
    guard_pool = list(levels)
    guard = gen_bexpr(rng, guard_pool, fuel - 1)
    guard_level = _bexpr_level(levels, guard)
    need = level_join(min_level, guard_level)
    if roll < 0.85:
        return WIf(guard, gen_command(rng, levels, fuel - 1, need),
                   gen_command(rng, levels, fuel - 1, need))
    return While(guard, gen_command(rng, levels, fuel - 1, need))


def _gen_assign(rng: random.Random, levels: dict[str, object], target: str, fuel: int) -> WhilePhrase:
    readable = [n for n, t in levels.items() if level_leq(t.level, levels[target].level)]
    return Assign(target, gen_aexpr(rng, readable, max(fuel - 1, 0)))


def _bexpr_level(levels: dict[str, object], b: WhilePhrase) -> str:
    lvl = LOW
    for name in b.fv:
        lvl = level_join(lvl, levels[name].level)
    return lvl


def gen_phrase(rng: random.Random, levels: dict[str, object], fuel: int) -> WhilePhrase:
    """A well-typed phrase of any sort."""
    roll = rng.random()
    pool = list(levels)
    if roll < 0.25:
        return gen_aexpr(rng, pool, fuel)
    if roll < 0.45:
        return gen_bexpr(rng, pool, fuel)
    return gen_command(rng, levels, fuel)


# -- imperative positions and mutation ---------------------------------------

def while_positions(p: WhilePhrase):
    """Yield (path, node, sort) with sort in {'a', 'b', 'c'}."""
    sort = phrase_sort(p)
    yield (), p, sort
    for i, child in enumerate(_while_children(p)):
        for path, node, node_sort in while_positions(child):
            yield (i,) + path, node, node_sort


def phrase_sort(p: WhilePhrase) -> str:
    if isinstance(p, (Num, WVar, ABin)):
        return "a"
    if isinstance(p, (BConst, Or, Not, Leq)):
        return "b"
    return "c"


def _while_children(p: WhilePhrase) -> tuple[WhilePhrase, ...]:
    if isinstance(p, (ABin, Leq, Or)):
        return (p.left, p.right)
    if isinstance(p, Not):
        return (p.operand,)
    if isinstance(p, Assign):
        return (p.value,)
    if isinstance(p, Seq):
        return (p.first, p.second)
    if isinstance(p, WIf):
        return (p.cond, p.then, p.orelse)
    if isinstance(p, While):
        return (p.cond, p.body)
    return ()


def while_replace(p: WhilePhrase, path: tuple[int, ...], new: WhilePhrase) -> WhilePhrase:
    if not path:
        return new
    i, rest = path[0], path[1:]
    kids = list(_while_children(p))
    kids[i] = while_replace(kids[i], rest, new)
    if isinstance(p, ABin):
        return ABin(kids[0], p.op, kids[1])
    if isinstance(p, Leq):
        return Leq(kids[0], kids[1])
    if isinstance(p, Or):
        return Or(kids[0], kids[1])
    if isinstance(p, Not):
        return Not(kids[0])
    if isinstance(p, Assign):
        return Assign(p.target, kids[0])
    if isinstance(p, Seq):
        return Seq(kids[0], kids[1])
    if isinstance(p, WIf):
        return WIf(kids[0], kids[1], kids[2])
    assert isinstance(p, While)
    return While(kids[0], kids[1])


def mutate_while(rng: random.Random, p: WhilePhrase, levels: dict[str, object]) -> WhilePhrase:
    spots = list(while_positions(p))
    path, node, sort = rng.choice(spots)
    pool = list(levels)
    fuel = rng.randrange(3)
    if sort == "a":
        new = gen_aexpr(rng, pool, fuel)
    elif sort == "b":
        new = gen_bexpr(rng, pool, fuel)
    else:
        # unconstrained command: may well violate the flow policy
        new = gen_command(rng, levels, fuel) if rng.random() < 0.6 else \
            Assign(rng.choice(pool), gen_aexpr(rng, pool, fuel))
    return while_replace(p, path, new)


# -- untyped functional helpers ----------------------------------------------

def gen_untyped_positions(expr: FunExpr):
    yield (), expr
    if isinstance(expr, BinOp):
        kids = (expr.left, expr.right)
    elif isinstance(expr, App):
        kids = (expr.fn, expr.arg)
    elif isinstance(expr, If):
        kids = (expr.cond, expr.then, expr.orelse)
    elif isinstance(expr, Let):
        kids = (expr.bound, expr.body)
    elif isinstance(expr, Abs):
        kids = (expr.body,)
    else:
        kids = ()
    for i, child in enumerate(kids):
        for path, node in gen_untyped_positions(child):
            yield (i,) + path, node
