"""Independent reference implementations the tests check against.

These deliberately avoid the code paths they validate: free variables by a
plain occurrence scan, security typing by set-valued closure over the
declarative rules (every derivable type, not just the principal one), and
unifier generality by one-way matching.
"""

from __future__ import annotations

from increty.terms import (
    ABin, Abs, App, Assign, BConst, BinOp, Const, If, Leq, Let, Not, Num, Or,
    Seq, Skip, Term, Var, WIf, While, WVar,
)
from increty.types import (
    Arrow, HIGH, LOW, SecBase, SecCmd, SecType, SecVar, Type, TypeVar,
    sec_base, sec_cmd,
)


# -- free variables by occurrence scan minus binders --------------------------

def naive_free_vars(t: Term) -> set[str]:
    if isinstance(t, (Var, WVar)):
        return {t.name}
    if isinstance(t, Abs):
        return naive_free_vars(t.body) - {t.fn_name, t.param}
    if isinstance(t, Let):
        return naive_free_vars(t.bound) | (naive_free_vars(t.body) - {t.name})
    if isinstance(t, Assign):
        return {t.target} | naive_free_vars(t.value)
    out: set[str] = set()
    for name in getattr(t, "_fields", ()):
        child = getattr(t, name)
        if isinstance(child, Term):
            out |= naive_free_vars(child)
    return out


# -- declarative security typing ----------------------------------------------
#
# Computes the complete set of derivable types for a phrase: base-rule
# results closed under the subsumption rule (levels may rise, command
# levels may fall, variable slot types stand alone). Expression positions
# read a variable at its slot's level.

_UP = {LOW: (LOW, HIGH), HIGH: (HIGH,)}
_DOWN = {LOW: (LOW,), HIGH: (LOW, HIGH)}


def _expr_levels(env: dict, p) -> set[str]:
    """Every level at which ``p`` can be read in an expression position."""
    if isinstance(p, (Num, BConst)):
        return set(_UP[LOW])
    if isinstance(p, WVar):
        slot = env.get(p.name)
        if not isinstance(slot, SecVar):
            return set()
        return set(_UP[slot.level])
    if isinstance(p, (ABin, Leq, Or)):
        return _expr_levels(env, p.left) & _expr_levels(env, p.right)
    if isinstance(p, Not):
        return _expr_levels(env, p.operand)
    return set()


def _cmd_levels(env: dict, p) -> set[str]:
    if isinstance(p, Skip):
        return set(_DOWN[HIGH])
    if isinstance(p, Assign):
        slot = env.get(p.target)
        if not isinstance(slot, SecVar):
            return set()
        if slot.level not in _expr_levels(env, p.value):
            return set()
        return set(_DOWN[slot.level])
    if isinstance(p, Seq):
        return _cmd_levels(env, p.first) & _cmd_levels(env, p.second)
    if isinstance(p, WIf):
        return (_expr_levels(env, p.cond)
                & _cmd_levels(env, p.then) & _cmd_levels(env, p.orelse))
    if isinstance(p, While):
        return _expr_levels(env, p.cond) & _cmd_levels(env, p.body)
    return set()


def derivable_types(env: dict, p) -> set[SecType]:
    """All types the declarative system derives for the phrase ``p``."""
    if isinstance(p, WVar):
        slot = env.get(p.name)
        return {slot} if isinstance(slot, SecVar) else set()
    if isinstance(p, (Num, BConst, ABin, Leq, Or, Not)):
        return {sec_base(lvl) for lvl in _expr_levels(env, p)}
    return {sec_cmd(lvl) for lvl in _cmd_levels(env, p)}


ALL_SEC_TYPES: tuple[SecType, ...] = (
    SecBase(LOW), SecBase(HIGH), SecVar(LOW), SecVar(HIGH), SecCmd(LOW), SecCmd(HIGH),
)


# -- exhaustive phrase enumeration ---------------------------------------------

def enumerate_phrases(max_nodes: int, var_names: tuple[str, ...] = ("x", "y", "z"),
                      numerals: tuple[int, ...] = (0, 1)):
    """All phrases of each sort with at most ``max_nodes`` AST nodes.

    Returns (arith, bools, commands): lists indexed by exact node count.
    Subterms are shared between enumerated phrases.
    """
    A: list[list] = [[] for _ in range(max_nodes + 1)]
    B: list[list] = [[] for _ in range(max_nodes + 1)]
    C: list[list] = [[] for _ in range(max_nodes + 1)]
    if max_nodes >= 1:
        A[1] = [Num(n) for n in numerals] + [WVar(v) for v in var_names]
        B[1] = [BConst(True), BConst(False)]
        C[1] = [Skip()]
    for n in range(2, max_nodes + 1):
        A[n] = [
            ABin(l, op, r)
            for i in range(1, n - 1)
            for l in A[i]
            for r in A[n - 1 - i]
            for op in ("+", "-", "*")
        ]
        bs = [Not(b) for b in B[n - 1]]
        bs += [
            Or(l, r)
            for i in range(1, n - 1)
            for l in B[i]
            for r in B[n - 1 - i]
        ]
        bs += [
            Leq(l, r)
            for i in range(1, n - 1)
            for l in A[i]
            for r in A[n - 1 - i]
        ]
        B[n] = bs
        cs = []
        if n >= 3:
            # the target counts as a node of its own (it is typed as one)
            cs += [Assign(v, a) for v in var_names for a in A[n - 2]]
        cs += [
            Seq(l, r)
            for i in range(1, n - 1)
            for l in C[i]
            for r in C[n - 1 - i]
        ]
        cs += [
            While(b, c)
            for i in range(1, n - 1)
            for b in B[i]
            for c in C[n - 1 - i]
        ]
        cs += [
            WIf(b, t, e)
            for i in range(1, n - 1)
            for j in range(1, n - 1 - i)
            for b in B[i]
            for t in C[j]
            for e in C[n - 1 - i - j]
        ]
        C[n] = cs
    return A, B, C


# -- substitution matching / factoring -----------------------------------------

def match_type(pattern: Type, target: Type, binding: dict[int, Type]) -> bool:
    """One-way matching: variables occur in the pattern only."""
    if isinstance(pattern, TypeVar):
        bound = binding.get(pattern.id)
        if bound is None:
            binding[pattern.id] = target
            return True
        return bound == target
    if isinstance(pattern, Arrow):
        return (isinstance(target, Arrow)
                and match_type(pattern.domain, target.domain, binding)
                and match_type(pattern.codomain, target.codomain, binding))
    return pattern == target


def factors_through(sigma: dict[int, Type], theta: dict[int, Type], var_ids) -> bool:
    """Does some s exist with sigma = s after theta, on the given variables?"""
    from increty.fun_infer import apply_subst

    binding: dict[int, Type] = {}
    for v in var_ids:
        pat = apply_subst(theta, TypeVar(v))
        tgt = apply_subst(sigma, TypeVar(v))
        if not match_type(pat, tgt, binding):
            return False
    return True
