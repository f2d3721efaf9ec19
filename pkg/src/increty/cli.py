"""Command-line front end.

Subcommands: ``check`` (annotated functional programs), ``infer`` (untyped
ones), ``secure`` (imperative programs against a levels file), ``diff``
(incremental re-typing against a saved cache), ``bench`` (synthetic
throughput measurements, CSV) and ``cache-verify``.

Exit codes: 0 success, 1 typing/security failure, 2 usage, IO or malformed
input (including parse errors, missing level declarations and cache files
whose instance tag does not match the subcommand).
"""

from __future__ import annotations

import argparse
import sys

from . import bench as bench_mod
from . import cacheio, engine, fun_check, fun_infer, while_sec
from .engine import Cache, EngineStats, TypingError
from .parser import ParseError, parse_fun, parse_while
from .terms import erase, is_annotated, is_untyped
from .types import pretty_type


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as err:
        raise CliError("cannot read %s: %s" % (path, err.strerror or err), 2) from None


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as err:
        raise CliError("cannot write %s: %s" % (path, err.strerror or err), 2) from None


def _load_cache(path: str, inst: engine.LanguageInstance) -> Cache:
    text = _read(path)
    try:
        return cacheio.load_cache(text, inst)
    except cacheio.CacheFormatError as err:
        raise CliError("bad cache file %s: %s" % (path, err), 2) from None


def _print_stats(stats: EngineStats, fmt: str) -> None:
    if fmt == "csv":
        print("hits,misses,base_calls,nodes_visited")
        print("%d,%d,%d,%d" % (stats.hits, stats.misses, stats.base_calls, stats.nodes_visited))
    else:
        print("hits=%d misses=%d base_calls=%d nodes_visited=%d"
              % (stats.hits, stats.misses, stats.base_calls, stats.nodes_visited))


def _parse_program(path: str, kind: str):
    text = _read(path)
    try:
        if kind == "while":
            return parse_while(text, with_spans=True)
        return parse_fun(text, with_spans=True)
    except ParseError as err:
        raise CliError("syntax error in %s at %s" % (path, err), 2) from None


def _typing_error(err: TypingError, spans) -> CliError:
    where = ""
    if err.node is not None and spans is not None:
        span = spans.span(err.node)
        if span:
            where = " at %d:%d" % span
    return CliError("type error%s: %s" % (where, err), 1)


def _instance_for(tag: str):
    if tag == "fun-check":
        return fun_check.CHECKER
    if tag == "fun-infer":
        return fun_infer.FunInferencer()
    if tag == "while-sec":
        return while_sec.SECURITY
    raise CliError("unknown cache instance %r" % tag, 2)


def cmd_check(args) -> int:
    expr, spans = _parse_program(args.file, "fun")
    if not is_annotated(expr):
        raise CliError("%s: 'check' needs a fully annotated program (try 'infer')" % args.file, 2)
    inst = fun_check.CHECKER
    cache = _load_cache(args.cache_in, inst) if args.cache_in else Cache()
    try:
        ty, out_cache, stats = fun_check.check_incremental({}, cache, expr)
    except TypingError as err:
        raise _typing_error(err, spans) from None
    print("%s,%s" % (args.file, pretty_type(ty)) if args.format == "csv" else pretty_type(ty))
    if args.stats:
        _print_stats(stats, args.format)
    if args.cache_out:
        _write(args.cache_out, cacheio.dump_cache(out_cache, inst))
    return 0


def cmd_infer(args) -> int:
    expr, spans = _parse_program(args.file, "fun")
    if not is_untyped(expr):
        expr = erase(expr)
    inst = fun_infer.FunInferencer()
    cache = _load_cache(args.cache_in, inst) if args.cache_in else Cache()
    try:
        (ty, _subst), out_cache, stats = fun_infer.infer_incremental({}, cache, expr, inst.supply)
    except TypingError as err:
        raise _typing_error(err, spans) from None
    shown = fun_infer.pretty_canonical(ty)
    print("%s,%s" % (args.file, shown) if args.format == "csv" else shown)
    if args.stats:
        _print_stats(stats, args.format)
    if args.cache_out:
        _write(args.cache_out, cacheio.dump_cache(out_cache, inst))
    return 0


def cmd_secure(args) -> int:
    phrase, spans = _parse_program(args.file, "while")
    try:
        env = while_sec.parse_levels(_read(args.levels))
    except ValueError as err:
        raise CliError("bad levels file %s: %s" % (args.levels, err), 2) from None
    missing = while_sec.undeclared_variables(env, phrase)
    if missing:
        raise CliError("no declared level for: %s" % ", ".join(missing), 2)
    inst = while_sec.SECURITY
    cache = _load_cache(args.cache_in, inst) if args.cache_in else Cache()
    try:
        ty, out_cache, stats = while_sec.security_check_incremental(env, cache, phrase)
    except TypingError as err:
        where = ""
        if err.node is not None and spans is not None:
            span = spans.span(err.node)
            if span:
                where = " at %d:%d" % span
        raise CliError("security error%s: %s" % (where, err), 1) from None
    shown = repr(ty)
    print("%s,%s" % (args.file, shown) if args.format == "csv" else shown)
    if args.stats:
        _print_stats(stats, args.format)
    if args.cache_out:
        _write(args.cache_out, cacheio.dump_cache(out_cache, inst))
    return 0


def cmd_diff(args) -> int:
    text = _read(args.cache)
    try:
        tag = cacheio.peek_instance_name(text)
    except cacheio.CacheFormatError as err:
        raise CliError("bad cache file %s: %s" % (args.cache, err), 2) from None
    inst = _instance_for(tag)
    try:
        cache = cacheio.load_cache(text, inst)
    except cacheio.CacheFormatError as err:
        raise CliError("bad cache file %s: %s" % (args.cache, err), 2) from None

    if tag == "while-sec":
        phrase, spans = _parse_program(args.file, "while")
        if not args.levels:
            raise CliError("diff over a while-sec cache needs --levels", 2)
        env = while_sec.parse_levels(_read(args.levels))
        missing = while_sec.undeclared_variables(env, phrase)
        if missing:
            raise CliError("no declared level for: %s" % ", ".join(missing), 2)
        try:
            ty, out_cache, stats = while_sec.security_check_incremental(env, cache, phrase)
        except TypingError as err:
            raise _typing_error(err, spans) from None
        shown = repr(ty)
    elif tag == "fun-infer":
        expr, spans = _parse_program(args.file, "fun")
        if not is_untyped(expr):
            expr = erase(expr)
        try:
            (ty, _subst), out_cache, stats = fun_infer.infer_incremental({}, cache, expr)
        except TypingError as err:
            raise _typing_error(err, spans) from None
        shown = fun_infer.pretty_canonical(ty)
    else:
        expr, spans = _parse_program(args.file, "fun")
        if not is_annotated(expr):
            raise CliError("%s: this cache types annotated programs" % args.file, 2)
        try:
            ty, out_cache, stats = fun_check.check_incremental({}, cache, expr)
        except TypingError as err:
            raise _typing_error(err, spans) from None
        shown = pretty_type(ty)

    print("%s,%s" % (args.file, shown) if args.format == "csv" else shown)
    if args.stats:
        _print_stats(stats, args.format)
    _write(args.cache_out or args.cache, cacheio.dump_cache(out_cache, inst))
    return 0


def cmd_bench(args) -> int:
    try:
        spec = bench_mod.SyntheticSpec(args.depth, args.vars, args.seed)
    except ValueError as err:
        raise CliError(str(err), 2) from None
    diff_depths = []
    if args.diff_depths:
        try:
            diff_depths = [int(d) for d in args.diff_depths.split(",") if d.strip()]
        except ValueError:
            raise CliError("--diff-depths wants a comma-separated list of ints", 2) from None
    records = bench_mod.bench([spec], diff_depths, trials=args.trials)
    if args.format == "csv":
        sys.stdout.write(bench_mod.emit_csv(records))
    else:
        for r in records:
            print("depth=%d vars=%d diff=%d %-16s %12.2f retypings/s (%d trials)"
                  % (r.depth, r.nvars, r.diff_nodes, r.mode, r.retypings_per_sec, r.trials))
    return 0


def cmd_cache_verify(args) -> int:
    text = _read(args.cache)
    try:
        tag = cacheio.peek_instance_name(text)
    except cacheio.CacheFormatError as err:
        raise CliError("bad cache file %s: %s" % (args.cache, err), 2) from None
    inst = _instance_for(tag)
    try:
        cache = cacheio.load_cache(text, inst)
    except cacheio.CacheFormatError as err:
        raise CliError("bad cache file %s: %s" % (args.cache, err), 2) from None
    violations = engine.verify_cache(cache, inst)
    if violations:
        for term, env, result in violations:
            print("stale: %s" % term)
        print("%d violation(s) in %d entries" % (len(violations), len(cache)))
        return 1
    print("ok: %d entries verified" % len(cache))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="increty",
                                     description="incremental use of standard typing algorithms")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, levels=False):
        p.add_argument("--cache-in", metavar="PATH")
        p.add_argument("--cache-out", metavar="PATH")
        p.add_argument("--stats", action="store_true")
        p.add_argument("--format", choices=("human", "csv"), default="human")
        if levels:
            p.add_argument("--levels", metavar="PATH", required=True)

    p = sub.add_parser("check", help="type check an annotated functional program")
    p.add_argument("file")
    common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("infer", help="infer the type of an untyped functional program")
    p.add_argument("file")
    common(p)
    p.set_defaults(fn=cmd_infer)

    p = sub.add_parser("secure", help="security-check an imperative program")
    p.add_argument("file")
    common(p, levels=True)
    p.set_defaults(fn=cmd_secure)

    p = sub.add_parser("diff", help="re-type a program incrementally against a cache")
    p.add_argument("cache")
    p.add_argument("file")
    p.add_argument("--levels", metavar="PATH")
    p.add_argument("--cache-out", metavar="PATH")
    p.add_argument("--stats", action="store_true")
    p.add_argument("--format", choices=("human", "csv"), default="human")
    p.set_defaults(fn=cmd_diff)

    p = sub.add_parser("bench", help="measure re-typing throughput on synthetic trees")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--vars", type=int, required=True)
    p.add_argument("--diff-depths", metavar="LIST", default="")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("human", "csv"), default="csv")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("cache-verify", help="re-derive every cache entry with the base algorithm")
    p.add_argument("cache")
    p.set_defaults(fn=cmd_cache_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    sys.setrecursionlimit(100_000)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except CliError as err:
        print("error: %s" % err, file=sys.stderr)
        return err.code


if __name__ == "__main__":
    sys.exit(main())
