"""Type inference for the untyped functional language.

Substitutions are finite maps from type-variable ids to types, kept
idempotent: construction normalizes by applying the map to its own range
until a fixpoint (the occurs check in unification rules out cycles, and
``normalize_subst`` rejects cyclic maps outright). Unification is the
classic recursive algorithm returning a most general unifier.

Inference follows the usual rule-per-construct scheme; an abstraction binds
its parameter and (recursive) name to fresh variables, applications and
conditionals unify the accumulated pieces, and let is monomorphic (no
generalization step). The incremental instance stores the (type,
substitution) pair per node, trims substitutions to the variables visible
in the entry, and rephrases cache hits into the current run's variables.
"""

from __future__ import annotations

from . import engine
from .engine import Cache, EngineStats, IdAlloc, LanguageInstance, TypeEnv, TypingError
from .fun_check import OP_OPERAND, OP_RESULT, const_type
from .parser import parse_fun
from .terms import Abs, App, BinOp, Const, FunExpr, If, Let, Term, Var
from .types import Arrow, BaseType, BOOL, INT, Type, TypeVar, pretty_type, type_vars

Subst = dict[int, Type]


class UnificationError(Exception):
    def __init__(self, left: Type, right: Type, reason: str):
        super().__init__("cannot unify %s with %s (%s)" % (pretty_type(left), pretty_type(right), reason))
        self.left = left
        self.right = right


class FreshSupply:
    """Monotone type-variable id supply; ids are never reused in a session."""

    def __init__(self, start: int = 0):
        self.next = start

    def fresh(self) -> TypeVar:
        v = TypeVar(self.next)
        self.next += 1
        return v


def apply_subst(subst: Subst, ty: Type) -> Type:
    """Simultaneous replacement; one pass suffices on idempotent maps."""
    if not subst:
        return ty
    if isinstance(ty, TypeVar):
        return subst.get(ty.id, ty)
    if isinstance(ty, Arrow):
        dom = apply_subst(subst, ty.domain)
        cod = apply_subst(subst, ty.codomain)
        if dom is ty.domain and cod is ty.codomain:
            return ty
        return Arrow(dom, cod)
    return ty


def apply_subst_env(subst: Subst, env: TypeEnv) -> TypeEnv:
    if not subst:
        return env
    return {name: apply_subst(subst, ty) for name, ty in env.items()}


def normalize_subst(mapping: Subst) -> Subst:
    """Close a map under its own application and drop identity bindings.

    Raises ValueError when the map is cyclic (a variable reachable from its
    own binding), since no idempotent closure exists then.
    """
    current = {v: t for v, t in mapping.items() if not (isinstance(t, TypeVar) and t.id == v)}
    for _ in range(len(current) + 1):
        nxt = {}
        changed = False
        for v, t in current.items():
            t2 = apply_subst(current, t)
            if t2 != t:
                changed = True
            if not (isinstance(t2, TypeVar) and t2.id == v):
                nxt[v] = t2
        current = nxt
        if not changed:
            return current
    raise ValueError("cyclic substitution has no idempotent closure")


def compose_subst(second: Subst, first: Subst) -> Subst:
    """The map acting as ``first`` then ``second`` on any type."""
    out: Subst = {}
    for v, t in first.items():
        t2 = apply_subst(second, t)
        if not (isinstance(t2, TypeVar) and t2.id == v):
            out[v] = t2
    for v, t in second.items():
        if v not in first:
            out[v] = t
    return normalize_subst(out)


def occurs(var_id: int, ty: Type) -> bool:
    if isinstance(ty, TypeVar):
        return ty.id == var_id
    if isinstance(ty, Arrow):
        return occurs(var_id, ty.domain) or occurs(var_id, ty.codomain)
    return False


def unify(left: Type, right: Type) -> Subst:
    """A most general unifier of the two types, or UnificationError."""
    if left is right or left == right:
        return {}
    if isinstance(left, TypeVar):
        if occurs(left.id, right):
            raise UnificationError(left, right, "occurs check")
        return {left.id: right}
    if isinstance(right, TypeVar):
        if occurs(right.id, left):
            raise UnificationError(left, right, "occurs check")
        return {right.id: left}
    if isinstance(left, Arrow) and isinstance(right, Arrow):
        s1 = unify(left.domain, right.domain)
        s2 = unify(apply_subst(s1, left.codomain), apply_subst(s1, right.codomain))
        return compose_subst(s2, s1)
    assert isinstance(left, (BaseType, Arrow)) and isinstance(right, (BaseType, Arrow))
    raise UnificationError(left, right, "constructor clash")


def unifiable(left: Type, right: Type) -> bool:
    try:
        unify(left, right)
        return True
    except UnificationError:
        return False


InferResult = tuple[Type, Subst]


def infer(env: TypeEnv, expr: FunExpr, supply: FreshSupply | None = None) -> InferResult:
    """Infer the type of ``expr`` under ``env``; fresh variables come from
    ``supply`` in deterministic left-to-right order."""
    if supply is None:
        supply = FreshSupply()
    return _infer(env, expr, supply)


def _infer(env: TypeEnv, expr: FunExpr, supply: FreshSupply) -> InferResult:
    if isinstance(expr, Const):
        return const_type(expr.value), {}
    if isinstance(expr, Var):
        try:
            return env[expr.name], {}
        except KeyError:
            raise TypingError(expr, "unbound variable %r" % expr.name) from None
    if isinstance(expr, Abs):
        if expr.param_type is not None or expr.body_type is not None:
            raise TypingError(expr, "inference expects an unannotated abstraction")
        a_x = supply.fresh()
        a_e = supply.fresh()
        inner = dict(env)
        inner[expr.param] = a_x
        inner[expr.fn_name] = Arrow(a_x, a_e)
        t_body, s_body = _infer(inner, expr.body, supply)
        return _join_abs_w(expr, t_body, s_body, a_x, a_e)
    if isinstance(expr, BinOp):
        t1, s1 = _infer(env, expr.left, supply)
        t2, s2 = _infer(apply_subst_env(s1, env), expr.right, supply)
        return _join_op_w(expr, t1, s1, t2, s2)
    if isinstance(expr, App):
        t1, s1 = _infer(env, expr.fn, supply)
        t2, s2 = _infer(apply_subst_env(s1, env), expr.arg, supply)
        return _join_app_w(expr, t1, s1, t2, s2, supply.fresh())
    if isinstance(expr, If):
        t1, s1 = _infer(env, expr.cond, supply)
        t2, s2 = _infer(apply_subst_env(s1, env), expr.then, supply)
        t3, s3 = _infer(apply_subst_env(s2, apply_subst_env(s1, env)), expr.orelse, supply)
        return _join_if_w(expr, t1, s1, t2, s2, t3, s3)
    assert isinstance(expr, Let)
    t2, s2 = _infer(env, expr.bound, supply)
    inner = apply_subst_env(s2, env)
    inner = dict(inner)
    inner[expr.name] = t2
    t3, s3 = _infer(inner, expr.body, supply)
    return t3, compose_subst(s3, s2)


def _fail(expr: FunExpr, err: UnificationError, what: str) -> TypingError:
    return TypingError(expr, "%s: %s" % (what, err))


def _join_abs_w(expr: Abs, t_body: Type, s_body: Subst, a_x: TypeVar, a_e: TypeVar) -> InferResult:
    try:
        s1 = unify(t_body, apply_subst(s_body, a_e))
    except UnificationError as err:
        raise _fail(expr, err, "body type does not fit the result variable") from None
    ty = Arrow(apply_subst(s1, apply_subst(s_body, a_x)), apply_subst(s1, t_body))
    return ty, compose_subst(s1, s_body)


def _join_op_w(expr: BinOp, t1: Type, s1: Subst, t2: Type, s2: Subst) -> InferResult:
    operand = OP_OPERAND[expr.op]
    try:
        s3 = unify(apply_subst(s2, t1), operand)
        s4 = unify(apply_subst(s3, t2), operand)
    except UnificationError as err:
        raise _fail(expr, err, "operand of %r" % expr.op) from None
    return OP_RESULT[expr.op], compose_subst(s4, compose_subst(s3, compose_subst(s2, s1)))


def _join_app_w(expr: App, t1: Type, s1: Subst, t2: Type, s2: Subst, alpha: TypeVar) -> InferResult:
    try:
        s3 = unify(apply_subst(s2, t1), Arrow(t2, alpha))
    except UnificationError as err:
        raise _fail(expr, err, "function applied to an incompatible argument") from None
    return apply_subst(s3, alpha), compose_subst(s3, compose_subst(s2, s1))


def _join_if_w(expr: If, t1: Type, s1: Subst, t2: Type, s2: Subst, t3: Type, s3: Subst) -> InferResult:
    try:
        s4 = unify(apply_subst(s3, apply_subst(s2, t1)), BOOL)
    except UnificationError as err:
        raise _fail(expr, err, "condition must be bool") from None
    try:
        s5 = unify(apply_subst(s4, t3), apply_subst(s4, apply_subst(s3, t2)))
    except UnificationError as err:
        raise _fail(expr, err, "branch types must unify") from None
    ty = apply_subst(s5, apply_subst(s4, t3))
    subst = compose_subst(s5, compose_subst(s4, compose_subst(s3, compose_subst(s2, s1))))
    return ty, subst


def compatible(env: TypeEnv, other: TypeEnv, expr: Term) -> bool:
    """Domains cover the free variables and each binding pair unifies.

    Each pair is checked independently; substitutions are not threaded
    across bindings.
    """
    for name in expr.fv:
        if name not in env or name not in other:
            return False
        if not unifiable(env[name], other[name]):
            return False
    return True


def trim_subst(subst: Subst, keep: set[int]) -> Subst:
    """Bindings whose variable occurs in the entry's type or environment."""
    return {v: t for v, t in subst.items() if v in keep}


def result_vars(result: InferResult, env: TypeEnv | None = None) -> set[int]:
    ty, subst = result
    acc = type_vars(ty)
    for v, t in subst.items():
        acc.add(v)
        type_vars(t, acc)
    if env:
        for t in env.values():
            type_vars(t, acc)
    return acc


# ---------------------------------------------------------------------------
# Canonical display and comparison up to variable renaming


def canonical_name(index: int) -> str:
    letter = chr(ord("a") + index % 26)
    if index < 26:
        return "'%s" % letter
    return "'%s%d" % (letter, index // 26)


def _collect_order(ty: Type, order: list[int], seen: set[int]) -> None:
    if isinstance(ty, TypeVar):
        if ty.id not in seen:
            seen.add(ty.id)
            order.append(ty.id)
    elif isinstance(ty, Arrow):
        _collect_order(ty.domain, order, seen)
        _collect_order(ty.codomain, order, seen)


def pretty_canonical(ty: Type, naming: dict[int, str] | None = None) -> str:
    """Render with variables written 'a, 'b, ... in first-occurrence order."""
    if naming is None:
        order: list[int] = []
        _collect_order(ty, order, set())
        naming = {v: canonical_name(i) for i, v in enumerate(order)}
    if isinstance(ty, TypeVar):
        return naming.get(ty.id, "'t%d" % ty.id)
    if isinstance(ty, Arrow):
        dom = pretty_canonical(ty.domain, naming)
        if isinstance(ty.domain, Arrow):
            dom = "(%s)" % dom
        return "%s -> %s" % (dom, pretty_canonical(ty.codomain, naming))
    return pretty_type(ty)


def types_alpha_equal(left: Type, right: Type) -> bool:
    """Structural equality up to a bijective renaming of type variables."""
    return _match_alpha(left, right, {}, {})


def _match_alpha(left: Type, right: Type, fwd: dict[int, int], bwd: dict[int, int]) -> bool:
    if isinstance(left, TypeVar) and isinstance(right, TypeVar):
        if left.id in fwd:
            return fwd[left.id] == right.id
        if right.id in bwd:
            return False
        fwd[left.id] = right.id
        bwd[right.id] = left.id
        return True
    if isinstance(left, Arrow) and isinstance(right, Arrow):
        return (_match_alpha(left.domain, right.domain, fwd, bwd)
                and _match_alpha(left.codomain, right.codomain, fwd, bwd))
    return left == right


def results_alpha_equal(env: TypeEnv, left: InferResult, right: InferResult) -> bool:
    """Equality of (type, substitution) pairs up to renaming.

    The types must match under one bijection, and the substitutions must
    agree (under the same bijection) on the variables of the environment
    and of the result type.
    """
    lt, ls = left
    rt, rs = right
    fwd: dict[int, int] = {}
    bwd: dict[int, int] = {}
    # environment variables are shared context: they must map to themselves
    env_vars: set[int] = set()
    for t in env.values():
        type_vars(t, env_vars)
    for v in env_vars:
        fwd[v] = v
        bwd[v] = v
    if not _match_alpha(lt, rt, fwd, bwd):
        return False
    for v in sorted(env_vars):
        if not _match_alpha(apply_subst(ls, TypeVar(v)), apply_subst(rs, TypeVar(v)), fwd, bwd):
            return False
    return True


# ---------------------------------------------------------------------------
# Engine instance


class FunInferencer(LanguageInstance):
    """Engine instance wrapping the inference algorithm.

    One instance owns one fresh-variable supply; construct it per run (or
    per cache lineage) so cached variable ids never collide with new ones.
    """

    name = "fun-infer"

    def __init__(self, supply: FreshSupply | None = None):
        self.supply = supply if supply is not None else FreshSupply()

    def base(self, env: TypeEnv, term: Term) -> InferResult:
        return _infer(env, term, self.supply)

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

    def begin(self, term: Term, env: TypeEnv):
        if isinstance(term, Abs):
            return (self.supply.fresh(), self.supply.fresh())
        return None

    def child_env(self, term: Term, i: int, env: TypeEnv, results, scratch) -> TypeEnv:
        if isinstance(term, Abs):
            if term.param_type is not None or term.body_type is not None:
                raise TypingError(term, "inference expects an unannotated abstraction")
            a_x, a_e = scratch
            inner = dict(env)
            inner[term.param] = a_x
            inner[term.fn_name] = Arrow(a_x, a_e)
            return inner
        if i == 0:
            return env
        if isinstance(term, Let):
            inner = dict(apply_subst_env(results[0][1], env))
            inner[term.name] = results[0][0]
            return inner
        env = apply_subst_env(results[0][1], env)
        if i == 2:  # conditional's else branch also sees the then-branch's substitution
            env = apply_subst_env(results[1][1], env)
        return env

    def join(self, term: Term, env: TypeEnv, results, scratch) -> InferResult:
        if isinstance(term, BinOp):
            (t1, s1), (t2, s2) = results
            return _join_op_w(term, t1, s1, t2, s2)
        if isinstance(term, App):
            (t1, s1), (t2, s2) = results
            return _join_app_w(term, t1, s1, t2, s2, self.supply.fresh())
        if isinstance(term, If):
            (t1, s1), (t2, s2), (t3, s3) = results
            return _join_if_w(term, t1, s1, t2, s2, t3, s3)
        if isinstance(term, Let):
            (t2, s2), (t3, s3) = results
            return t3, compose_subst(s3, s2)
        assert isinstance(term, Abs)
        a_x, a_e = scratch
        t_body, s_body = results[0]
        return _join_abs_w(term, t_body, s_body, a_x, a_e)

    def compat(self, env: TypeEnv, cached_env: TypeEnv, term: Term) -> bool:
        return compatible(env, cached_env, term)

    def adapt_hit(self, term: Term, env: TypeEnv, cached_env: TypeEnv,
                  result: InferResult, serves: int) -> InferResult:
        """Rephrase a cached pair for the current environment.

        Cached entries speak the variables of the run that created them.
        The matcher unifying cached bindings against current ones (cached
        side bound first) renames pinned variables into the current run;
        variables local to the entry's derivation are renamed fresh on a
        repeated serve, since reusing them verbatim would alias distinct
        occurrences. A first serve of a pre-existing entry is returned
        verbatim. Where the bindings do not match simultaneously the cached
        pair is returned as-is (no coherence claim, mirroring the
        independent per-binding compatibility test).
        """
        fix: Subst = {}
        try:
            for name in sorted(term.fv):
                s = unify(apply_subst(fix, cached_env[name]), apply_subst(fix, env[name]))
                fix = compose_subst(s, fix)
        except UnificationError:
            return result
        if serves > 0:
            for v in sorted(result_vars(result, cached_env)):
                if v not in fix:
                    fix[v] = self.supply.fresh()
        elif not fix:
            return result
        ty, subst = result
        out: Subst = {}
        for v, t in subst.items():
            key = fix.get(v)
            nv = apply_subst(fix, t)
            if key is None:
                out[v] = nv
            elif isinstance(key, TypeVar):
                out[key.id] = nv
        return apply_subst(fix, ty), normalize_subst(out)

    def results_agree(self, env: TypeEnv, derived: InferResult, cached: InferResult) -> bool:
        return results_alpha_equal(env, derived, cached)

    # textual cache format -------------------------------------------------
    def parse_term(self, text: str) -> Term:
        return parse_fun(text)

    def pretty_entry(self, term: Term, env: TypeEnv, result: InferResult) -> tuple[str, str, str]:
        ty, subst = result
        order: list[int] = []
        seen: set[int] = set()
        for name in sorted(env):
            _collect_order(env[name], order, seen)
        _collect_order(ty, order, seen)
        for v in sorted(subst):
            if v not in seen:
                seen.add(v)
                order.append(v)
            _collect_order(subst[v], order, seen)
        naming = {v: canonical_name(i) for i, v in enumerate(order)}
        env_s = "".join("%s:%s," % (n, pretty_canonical(env[n], naming)) for n in sorted(env))
        items = ", ".join("%s := %s" % (naming[v], pretty_canonical(subst[v], naming)) for v in sorted(subst))
        return str(term), env_s, "%s ; [%s]" % (pretty_canonical(ty, naming), items)

    def parse_entry(self, term_s: str, env_s: str, result_s: str, alloc: IdAlloc):
        names: dict[str, TypeVar] = {}

        def var_for(token: str) -> TypeVar:
            if token not in names:
                names[token] = TypeVar(alloc.take())
            return names[token]

        env = {}
        for item in filter(None, env_s.split(",")):
            name, _, ty = item.partition(":")
            env[name] = _parse_poly_type(ty.strip(), var_for)
        ty_s, _, subst_s = result_s.partition(";")
        ty = _parse_poly_type(ty_s.strip(), var_for)
        subst: Subst = {}
        body = subst_s.strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise ValueError("malformed substitution %r" % subst_s)
        inner = body[1:-1].strip()
        if inner:
            for binding in inner.split(","):
                lhs, _, rhs = binding.partition(":=")
                v = var_for(lhs.strip())
                subst[v.id] = _parse_poly_type(rhs.strip(), var_for)
        return parse_fun(term_s), env, (ty, normalize_subst(subst))


def _parse_poly_type(text: str, var_for) -> Type:
    """Type syntax extended with 'a-style variables."""
    tokens: list[str] = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif text.startswith("->", i):
            tokens.append("->")
            i += 2
        elif c in "()":
            tokens.append(c)
            i += 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "()" and not text.startswith("->", j):
                j += 1
            tokens.append(text[i:j])
            i = j

    pos = 0

    def atom() -> Type:
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of type %r" % text)
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            ty = arrow()
            if pos >= len(tokens) or tokens[pos] != ")":
                raise ValueError("expected ')' in type %r" % text)
            pos += 1
            return ty
        if tok == "int":
            return INT
        if tok == "bool":
            return BOOL
        if tok.startswith("'"):
            return var_for(tok)
        raise ValueError("bad type token %r in %r" % (tok, text))

    def arrow() -> Type:
        nonlocal pos
        left = atom()
        if pos < len(tokens) and tokens[pos] == "->":
            pos += 1
            return Arrow(left, arrow())
        return left

    ty = arrow()
    if pos != len(tokens):
        raise ValueError("trailing tokens in type %r" % text)
    return ty


def infer_incremental(env: TypeEnv, cache: Cache, expr: FunExpr,
                      supply: FreshSupply | None = None,
                      record_trace: bool = False) -> tuple[InferResult, Cache, EngineStats]:
    """Incremental counterpart of ``infer``.

    The supply is seeded past the cache's fresh counter so cached variable
    ids never collide with newly allocated ones; the returned cache carries
    the advanced counter.
    """
    if supply is None:
        supply = FreshSupply(cache.fresh_counter)
    else:
        supply.next = max(supply.next, cache.fresh_counter)
    inst = FunInferencer(supply)
    result, out, stats = engine.incremental_type(env, cache, expr, inst, record_trace=record_trace)
    trimmed = _trim_cache_results(out, cache)
    trimmed.fresh_counter = supply.next
    return result, trimmed, stats


def _trim_cache_results(out: Cache, previous: Cache) -> Cache:
    """Trim substitutions of entries added relative to ``previous``."""
    if out is previous:
        return out
    entries = dict(out.entries)
    for term, pairs in out.entries.items():
        prior = set(map(id, previous.entries.get(term, ())))
        new_pairs = []
        dirty = False
        for pair in pairs:
            if id(pair) in prior:
                new_pairs.append(pair)
                continue
            env, (ty, subst) = pair
            keep = type_vars(ty)
            for t in env.values():
                type_vars(t, keep)
            trimmed = trim_subst(subst, keep)
            if len(trimmed) != len(subst):
                new_pairs.append((env, (ty, trimmed)))
                dirty = True
            else:
                new_pairs.append(pair)
        if dirty:
            entries[term] = tuple(new_pairs)
    return Cache(entries, out.fresh_counter)


def annotate(expr: FunExpr, env: TypeEnv, supply: FreshSupply | None = None):
    """Annotate for inference and return (tree, instance) so the caller can
    build a cache carrying the advanced fresh counter."""
    if supply is None:
        supply = FreshSupply()
    inst = FunInferencer(supply)
    tree = engine.annotate(expr, env, inst)
    return tree, inst


def build_cache(expr: FunExpr, env: TypeEnv, supply: FreshSupply | None = None) -> Cache:
    """Annotate ``expr`` and harvest its cache; trims stored substitutions."""
    tree, inst = annotate(expr, env, supply)
    cache = engine.build_cache(tree, env, inst)
    cache.fresh_counter = inst.supply.next
    return _trim_cache_results(cache, Cache())
