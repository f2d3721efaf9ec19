"""increty: make the *usage* of standard typing algorithms incremental.

The engine caches per-subterm typing results keyed on the terms themselves;
re-typing a changed program reuses every cached result whose environment is
still compatible and recomputes only the affected region. Three instances
are provided: type checking and type inference for a small functional
language, and information-flow security typing for an imperative one.
"""

from .engine import (
    AnnotatedAST,
    Cache,
    EngineStats,
    LanguageInstance,
    TypingError,
    annotate,
    build_cache,
    incremental_type,
    lookup,
    merge,
    miss,
    restrict,
    verify_cache,
)
from .parser import ParseError, parse_fun, parse_type, parse_while
from .terms import erase, free_vars, pretty

__all__ = [
    "AnnotatedAST",
    "Cache",
    "EngineStats",
    "LanguageInstance",
    "ParseError",
    "TypingError",
    "annotate",
    "build_cache",
    "erase",
    "free_vars",
    "incremental_type",
    "lookup",
    "merge",
    "miss",
    "parse_fun",
    "parse_type",
    "parse_while",
    "pretty",
    "restrict",
    "verify_cache",
]
