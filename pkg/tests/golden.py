"""The factorial program, its constant-specialized variant, and the expected
cache contents used by the golden tests."""

from increty.parser import parse_fun
from increty.types import Arrow, INT

FACT_SRC = ("let fact = fun fact (n : int) -> "
            "(if n >= 1 then n * fact (n - 1) else n : int) in fact 7")
# specializing the recursion threshold after applying fact to 7
FACT_OPT_SRC = ("let fact = fun fact (n : int) -> "
                "(if n >= 3 then n * fact (n - 1) else n : int) in fact 7")

FACT = parse_fun(FACT_SRC)
FACT_OPT = parse_fun(FACT_OPT_SRC)

INT_TO_INT = Arrow(INT, INT)

_NO_ENV = ()
_N = (("n", "int"),)
_FACT = (("fact", "int -> int"),)
_BOTH = (("fact", "int -> int"), ("n", "int"))

# every (pretty(term), sorted env, pretty(result)) triple the cache holds
EXPECTED_CACHE = {
    (FACT_SRC, _NO_ENV, "int"),
    ("1", _NO_ENV, "int"),
    ("7", _NO_ENV, "int"),
    ("fun fact (n : int) -> (if n >= 1 then n * fact (n - 1) else n : int)",
     _NO_ENV, "int -> int"),
    ("n", _N, "int"),
    ("n - 1", _N, "int"),
    ("n >= 1", _N, "bool"),
    ("fact 7", _FACT, "int"),
    ("fact", _FACT, "int -> int"),
    ("if n >= 1 then n * fact (n - 1) else n", _BOTH, "int"),
    ("n * fact (n - 1)", _BOTH, "int"),
    ("fact (n - 1)", _BOTH, "int"),
}


def cache_as_pretty_set(cache):
    from increty.types import pretty_type

    out = set()
    for term, env, result in cache:
        env_key = tuple(sorted((n, pretty_type(t)) for n, t in env.items()))
        out.add((str(term), env_key, pretty_type(result)))
    return out
