"""Synthetic workloads, diff-driven invalidation and throughput measurement.

Synthetic programs are complete binary trees of integer additions whose
leaves are free variables, the worst case for caching: every internal node
depends on everything below it. Invalidation simulates an edit of the
rightmost subexpression at a chosen depth by dropping the cache entries for
that subtree and for the path reaching it; re-typing then recomputes
exactly the dropped region.

Three modes are measured per configuration: ``standard`` re-runs the plain
checker on the whole tree, ``incremental`` re-types against a warm cache
(steady state), and ``incremental-cold`` performs one full incremental run
starting from an empty cache, i.e. the pass that pays for building the
cache. Reported figures are re-typings per second from the median run.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

from . import engine
from .engine import AnnotatedAST, Cache, TypeEnv, restrict
from .fun_check import CHECKER, type_check
from .terms import BinOp, FunExpr, Var
from .types import INT


@dataclass(frozen=True)
class SyntheticSpec:
    """A complete binary tree workload: its depth, how many distinct leaf
    variables it draws from, and the RNG seed for leaf assignment."""

    depth: int
    nvars: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        leaves = 2 ** (self.depth - 1)
        if not 1 <= self.nvars <= leaves:
            raise ValueError("nvars must be between 1 and %d (the leaf count)" % leaves)

    @property
    def node_count(self) -> int:
        return 2 ** self.depth - 1


@dataclass
class BenchRecord:
    depth: int
    nvars: int
    diff_nodes: int
    mode: str  # standard | incremental | incremental-cold
    retypings_per_sec: float
    trials: int

    def __post_init__(self) -> None:
        if self.retypings_per_sec <= 0:
            raise ValueError("throughput must be positive")
        if self.diff_nodes > 2 ** self.depth - 1:
            raise ValueError("diff cannot exceed the tree size")


def gen_synthetic(spec: SyntheticSpec) -> tuple[FunExpr, TypeEnv]:
    """Deterministically generate the tree and the env typing its variables.

    The first ``nvars`` leaves (left to right) get v0..v(nvars-1) so every
    variable occurs; remaining leaves are drawn at random from the pool.
    """
    rng = random.Random(spec.seed)
    variables = [Var("v%d" % i) for i in range(spec.nvars)]
    counter = [0]

    def build(level: int) -> FunExpr:
        if level == spec.depth:
            i = counter[0]
            counter[0] += 1
            if i < spec.nvars:
                return variables[i]
            return variables[rng.randrange(spec.nvars)]
        return BinOp(build(level + 1), "+", build(level + 1))

    tree = build(1)
    env = {v.name: INT for v in variables}
    return tree, env


def invalidate_diff(cache: Cache, tree: AnnotatedAST, env: TypeEnv,
                    target_depth: int) -> tuple[Cache, int]:
    """Drop the entries for the rightmost subtree rooted at ``target_depth``
    and for every node on the path from the root to it.

    ``target_depth`` counts edges from the root; 0 invalidates the whole
    tree. Because identical subtrees share one (term, env) entry, an entry
    is only removed once no surviving position references it. The returned
    count is positional: path length plus subtree size.
    """
    depth = tree.depth()
    if not 0 <= target_depth < depth:
        raise ValueError("target depth %d out of range for a depth-%d tree" % (target_depth, depth))

    refs: dict[tuple, int] = {}
    inst = CHECKER

    def pair_key(node: AnnotatedAST, node_env: TypeEnv) -> tuple:
        return node.node, frozenset(restrict(node_env, node.fv).items())

    def count(node: AnnotatedAST, node_env: TypeEnv) -> None:
        key = pair_key(node, node_env)
        refs[key] = refs.get(key, 0) + 1
        results = [c.result for c in node.children]
        for i, child in enumerate(node.children):
            count(child, inst.child_env(node.node, i, node_env, results[:i], node.scratch))

    count(tree, env)

    invalidated: list[tuple] = []

    def drop_subtree(node: AnnotatedAST, node_env: TypeEnv) -> int:
        invalidated.append(pair_key(node, node_env))
        n = 1
        results = [c.result for c in node.children]
        for i, child in enumerate(node.children):
            n += drop_subtree(child, inst.child_env(node.node, i, node_env, results[:i], node.scratch))
        return n

    node, node_env = tree, env
    path = 0
    for _ in range(target_depth):
        invalidated.append(pair_key(node, node_env))
        path += 1
        results = [c.result for c in node.children]
        i = len(node.children) - 1
        node_env = inst.child_env(node.node, i, node_env, results[:i], node.scratch)
        node = node.children[i]
    subtree = drop_subtree(node, node_env)

    out = cache.copy()
    for key in invalidated:
        refs[key] -= 1
    for key in set(invalidated):
        if refs[key] <= 0:
            term, frozen = key
            out.remove(term, dict(frozen))
    return out, path + subtree


def _median(xs: list[float]) -> float:
    ordered = sorted(xs)
    n = len(ordered)
    mid = n // 2
    return ordered[mid] if n % 2 else (ordered[mid - 1] + ordered[mid]) / 2.0


def _throughput(fn, trials: int, warmup: int = 2) -> float:
    for _ in range(warmup):
        fn()
    times = []
    for _ in range(trials):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return 1.0 / _median(times)


def bench(specs: list[SyntheticSpec], target_depths: list[int] | None = None,
          trials: int = 20) -> list[BenchRecord]:
    """Measure every spec in all modes, plus one invalidation row per target
    depth; rows come out in a deterministic order."""
    target_depths = target_depths or []
    records: list[BenchRecord] = []
    for spec in specs:
        tree, env = gen_synthetic(spec)

        records.append(BenchRecord(spec.depth, spec.nvars, 0, "standard",
                                   _throughput(lambda: type_check(env, tree), trials), trials))

        annotated = engine.annotate(tree, env, CHECKER)
        full = engine.build_cache(annotated, env, CHECKER)

        empty = Cache()
        records.append(BenchRecord(
            spec.depth, spec.nvars, 0, "incremental-cold",
            _throughput(lambda: engine.incremental_type(env, empty, tree, CHECKER), trials), trials))
        records.append(BenchRecord(
            spec.depth, spec.nvars, 0, "incremental",
            _throughput(lambda: engine.incremental_type(env, full, tree, CHECKER), trials), trials))

        for target_depth in target_depths:
            if not 0 <= target_depth < spec.depth:
                continue
            partial, diff_nodes = invalidate_diff(full, annotated, env, target_depth)
            records.append(BenchRecord(
                spec.depth, spec.nvars, diff_nodes, "incremental",
                _throughput(lambda: engine.incremental_type(env, partial, tree, CHECKER), trials),
                trials))
    return records


CSV_HEADER = "depth,nvars,diff_nodes,mode,retypings_per_sec,trials"


def emit_csv(records: list[BenchRecord]) -> str:
    lines = [CSV_HEADER]
    for r in records:
        lines.append("%d,%d,%d,%s,%r,%d" % (r.depth, r.nvars, r.diff_nodes, r.mode,
                                            r.retypings_per_sec, r.trials))
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> list[BenchRecord]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("missing or malformed CSV header")
    records = []
    for line in lines[1:]:
        depth, nvars, diff_nodes, mode, rps, trials = line.split(",")
        records.append(BenchRecord(int(depth), int(nvars), int(diff_nodes), mode,
                                   float(rps), int(trials)))
    return records
