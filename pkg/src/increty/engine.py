"""The language-independent incremental typing engine.

A ``LanguageInstance`` bundles everything the engine needs to drive an
existing syntax-directed typing algorithm without changing it: the base
algorithm itself, the ordered subterm list of each construct, the function
producing each subterm's environment from the parent environment and
earlier sibling results, the joining predicate that combines subterm
results into the parent result, and the environment-compatibility test
that decides whether a cached entry may stand in for a fresh run.

The engine then provides:

* ``annotate``      — run the algorithm structurally, annotating every node
                      with its result (or None where typing fails);
* ``build_cache``   — depth-first harvest of (term, env|fv, result) triples
                      from a fully annotated tree;
* ``incremental_type`` — the three-template algorithm: return cached results
                      on compatible hits, call the base algorithm at missed
                      leaves, recurse and join at missed inner nodes;
* ``verify_cache``  — re-derive every entry with the base algorithm;
* ``merge`` / ``lookup`` / ``miss`` — cache plumbing.

Caches are value-like: a run never mutates its input cache; it returns the
input unchanged when nothing was added, or a copy-on-write successor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator

from .terms import Term

TypeEnv = dict[str, Any]
Result = Any
Entry = tuple[Term, TypeEnv, Result]


class TypingError(Exception):
    """Typing failure; names the offending node and the violated condition.

    When raised out of ``incremental_type``, ``partial_cache`` holds every
    entry added before the failure point.
    """

    def __init__(self, node: Term | None, message: str):
        if node is not None:
            super().__init__("%s: %s" % (message, node))
        else:
            super().__init__(message)
        self.node = node
        self.message = message
        self.partial_cache: Cache | None = None


def restrict(env: TypeEnv, names: Iterable[str]) -> TypeEnv:
    """Restriction of ``env`` to ``names``; bindings are unchanged."""
    return {x: env[x] for x in names if x in env}


class LanguageInstance:
    """Pluggable description of one typing algorithm for the engine."""

    name = "abstract"

    # the original algorithm, used as-is
    def base(self, env: TypeEnv, term: Term) -> Result:
        raise NotImplementedError

    # ordered immediate subterms the algorithm recurses into
    def subterms(self, term: Term) -> tuple[Term, ...]:
        raise NotImplementedError

    # per-visit scratch state (e.g. fresh variables allocated by a rule)
    def begin(self, term: Term, env: TypeEnv) -> Any:
        return None

    # environment under which subterm ``i`` is typed; sees results[0:i]
    def child_env(self, term: Term, i: int, env: TypeEnv, results: list[Result], scratch: Any) -> TypeEnv:
        return env

    # combine subterm results into the node's result (may raise TypingError)
    def join(self, term: Term, env: TypeEnv, results: list[Result], scratch: Any) -> Result:
        raise NotImplementedError

    # may a cached entry under ``cached_env`` answer a query under ``env``?
    def compat(self, env: TypeEnv, cached_env: TypeEnv, term: Term) -> bool:
        raise NotImplementedError

    # rephrase a cached result for the current environment (hit template);
    # ``serves`` counts prior uses of the same entry within this run
    def adapt_hit(self, term: Term, env: TypeEnv, cached_env: TypeEnv, result: Result, serves: int) -> Result:
        return result

    # does a freshly derived result confirm a cached one? (verify_cache)
    def results_agree(self, env: TypeEnv, derived: Result, cached: Result) -> bool:
        return bool(derived == cached)

    # hooks for the textual cache format -----------------------------------
    def parse_term(self, text: str) -> Term:
        raise NotImplementedError

    def pretty_entry(self, term: Term, env: TypeEnv, result: Result) -> tuple[str, str, str]:
        raise NotImplementedError

    def parse_entry(self, term_s: str, env_s: str, result_s: str, alloc: "IdAlloc") -> Entry:
        raise NotImplementedError


class IdAlloc:
    """Monotone id counter used when loading inference caches."""

    def __init__(self, start: int = 0):
        self.next = start

    def take(self) -> int:
        n = self.next
        self.next += 1
        return n


@dataclass
class EngineStats:
    """Counters (and an optional positional trace) for one incremental run."""

    hits: int = 0
    misses: int = 0
    base_calls: int = 0
    nodes_visited: int = 0
    trace: list[tuple[Term, str]] = field(default_factory=list)

    def record(self, term: Term, outcome: str) -> None:
        self.trace.append((term, outcome))


class Cache:
    """Multimap from terms to (restricted environment, result) pairs.

    Entry lists are tuples, so sharing the underlying dict between a cache
    and its copy-on-write successors is safe. ``fresh_counter`` tracks the
    type-variable supply for the inference instance (0 elsewhere).
    """

    __slots__ = ("entries", "fresh_counter")

    def __init__(self, entries: dict[Term, tuple[tuple[TypeEnv, Result], ...]] | None = None,
                 fresh_counter: int = 0):
        self.entries: dict[Term, tuple[tuple[TypeEnv, Result], ...]] = entries if entries is not None else {}
        self.fresh_counter = fresh_counter

    def __len__(self) -> int:
        return sum(len(v) for v in self.entries.values())

    def __iter__(self) -> Iterator[Entry]:
        for term, pairs in self.entries.items():
            for env, result in pairs:
                yield term, env, result

    def __contains__(self, term: Term) -> bool:
        return term in self.entries

    def pairs(self, term: Term) -> tuple[tuple[TypeEnv, Result], ...]:
        return self.entries.get(term, ())

    def insert(self, term: Term, env: TypeEnv, result: Result) -> None:
        """Add an entry; an entry with an identical environment is replaced."""
        old = self.entries.get(term, ())
        kept = tuple(p for p in old if p[0] != env)
        self.entries[term] = kept + ((env, result),)

    def remove(self, term: Term, env: TypeEnv) -> bool:
        """Drop the entry with exactly this environment; True if present."""
        old = self.entries.get(term)
        if old is None:
            return False
        kept = tuple(p for p in old if p[0] != env)
        if len(kept) == len(old):
            return False
        if kept:
            self.entries[term] = kept
        else:
            del self.entries[term]
        return True

    def copy(self) -> "Cache":
        return Cache(dict(self.entries), self.fresh_counter)

    def as_set(self, key: Callable[[Entry], Any] | None = None) -> set:
        """The cache as a set of hashable (term, env, result) images."""
        if key is None:
            key = lambda e: (e[0], tuple(sorted((n, repr(t)) for n, t in e[1].items())), repr(e[2]))
        return {key(entry) for entry in self}


def lookup(cache: Cache, term: Term, env: TypeEnv, inst: LanguageInstance) -> tuple[TypeEnv, Result] | None:
    """First stored pair for ``term`` whose environment is compatible."""
    for cached_env, result in cache.pairs(term):
        if inst.compat(env, cached_env, term):
            return cached_env, result
    return None


def miss(cache: Cache, term: Term, env: TypeEnv, inst: LanguageInstance) -> bool:
    """True iff no cached entry for ``term`` is compatible with ``env``."""
    return lookup(cache, term, env, inst) is None


@dataclass
class AnnotatedAST:
    """A term whose nodes carry their typing result (None when typing fails)
    and the precomputed free-variable set.

    ``scratch`` preserves the per-node state the instance allocated while
    annotating (e.g. fresh type variables), so cache construction recomputes
    child environments with exactly the variables the stored results use.
    """

    node: Term
    result: Result | None
    children: list["AnnotatedAST"]
    scratch: Any = None

    @property
    def fv(self) -> frozenset[str]:
        return self.node.fv

    def depth(self) -> int:
        d = 1
        for c in self.children:
            d = max(d, 1 + c.depth())
        return d


def annotate(term: Term, env: TypeEnv, inst: LanguageInstance) -> AnnotatedAST:
    """Annotate every node with the result the algorithm assigns it under the
    environment reaching it from the root, or None where typing fails.

    Where an earlier sibling failed, later siblings whose environment would
    need its result are annotated under the parent environment as-is.
    """
    subs = inst.subterms(term)
    if not subs:
        try:
            return AnnotatedAST(term, inst.base(env, term), [])
        except TypingError:
            return AnnotatedAST(term, None, [])
    scratch = inst.begin(term, env)
    children: list[AnnotatedAST] = []
    results: list[Result] = []
    broken = False
    for i, sub in enumerate(subs):
        if broken:
            child_env = env
        else:
            try:
                child_env = inst.child_env(term, i, env, results, scratch)
            except TypingError:
                broken = True
                child_env = env
        child = annotate(sub, child_env, inst)
        children.append(child)
        if child.result is None:
            broken = True
        results.append(child.result)
    if broken:
        return AnnotatedAST(term, None, children, scratch)
    try:
        result = inst.join(term, env, results, scratch)
    except TypingError:
        result = None
    return AnnotatedAST(term, result, children, scratch)


def build_cache(tree: AnnotatedAST, env: TypeEnv, inst: LanguageInstance,
                cache: Cache | None = None) -> Cache:
    """Depth-first cache construction from a fully annotated tree.

    Every node contributes (node, env restricted to its free variables,
    result); child environments are recomputed with the instance's
    environment transformer from the stored child results.
    """
    if cache is None:
        cache = Cache()

    def walk(a: AnnotatedAST, node_env: TypeEnv) -> None:
        if a.result is None:
            raise TypingError(a.node, "cannot cache an untypable node")
        cache.insert(a.node, restrict(node_env, a.fv), a.result)
        if not a.children:
            return
        results = [c.result for c in a.children]
        for i, child in enumerate(a.children):
            walk(child, inst.child_env(a.node, i, node_env, results[:i], a.scratch))

    walk(tree, env)
    return cache


def incremental_type(env: TypeEnv, cache: Cache, term: Term, inst: LanguageInstance,
                     record_trace: bool = False) -> tuple[Result, Cache, EngineStats]:
    """Type ``term`` reusing compatible cache entries.

    Implements the three rule templates: a compatible hit returns the cached
    result and leaves the cache untouched; a missed leaf invokes the base
    algorithm; a missed inner node recurses on subterms under the
    environments the instance prescribes and joins their results. All new
    entries are accumulated copy-on-write, so the input cache is unchanged
    and the returned cache shares unmodified buckets with it.
    """
    stats = EngineStats()
    entries = cache.entries
    out: dict[Term, tuple[tuple[TypeEnv, Result], ...]] | None = None
    serves: dict[int, int] = {}

    def current() -> dict[Term, tuple[tuple[TypeEnv, Result], ...]]:
        return out if out is not None else entries

    def visit(node_env: TypeEnv, t: Term) -> Result:
        nonlocal out
        stats.nodes_visited += 1
        for pair in current().get(t, ()):
            cached_env, cached_result = pair
            if inst.compat(node_env, cached_env, t):
                stats.hits += 1
                if record_trace:
                    stats.record(t, "hit")
                n = serves.get(id(pair), 0)
                serves[id(pair)] = n + 1
                return inst.adapt_hit(t, node_env, cached_env, cached_result, n)
        stats.misses += 1
        if record_trace:
            stats.record(t, "miss")
        subs = inst.subterms(t)
        if not subs:
            result = inst.base(node_env, t)
            stats.base_calls += 1
        else:
            scratch = inst.begin(t, node_env)
            results: list[Result] = []
            for i, sub in enumerate(subs):
                results.append(visit(inst.child_env(t, i, node_env, results, scratch), sub))
            result = inst.join(t, node_env, results, scratch)
        if out is None:
            out = dict(entries)
        pair = (restrict(node_env, t.fv), result)
        out[t] = out.get(t, ()) + (pair,)
        # entries born in this run speak its live variables; a later hit on
        # one counts as a repeated serve so the instance can rename apart
        serves[id(pair)] = 1
        return result

    try:
        result = visit(env, term)
    except TypingError as err:
        err.partial_cache = Cache(out, cache.fresh_counter) if out is not None else cache
        raise
    if out is None:
        return result, cache, stats
    return result, Cache(out, cache.fresh_counter), stats


def verify_cache(cache: Cache, inst: LanguageInstance) -> list[Entry]:
    """Entries the base algorithm does not confirm (empty list = sound cache)."""
    violations: list[Entry] = []
    for term, env, result in cache:
        try:
            derived = inst.base(env, term)
        except TypingError:
            violations.append((term, env, result))
            continue
        if not inst.results_agree(env, derived, result):
            violations.append((term, env, result))
    return violations


def merge(first: Cache, second: Cache) -> Cache:
    """Set union of entries; the fresh counter is the max of the two."""
    merged = first.copy()
    for term, env, result in second:
        existing = lookup_exact(merged, term, env)
        if existing is None:
            merged.insert(term, env, result)
    merged.fresh_counter = max(first.fresh_counter, second.fresh_counter)
    return merged


def lookup_exact(cache: Cache, term: Term, env: TypeEnv) -> Result | None:
    for cached_env, result in cache.pairs(term):
        if cached_env == env:
            return result
    return None
