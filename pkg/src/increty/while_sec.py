"""Information-flow security typing for the imperative language.

Variables are classified low (L) or high (H). A command is well typed when
low-classified storage never depends on high-classified data, neither
directly (assignment) nor through control flow (guards). Subtyping lets an
expression's level rise (L below H) and a command's level fall
(contravariance: an H cmd touches only high variables, so it is also a
valid L cmd); variable slot types relate only to themselves.

``security_check`` is algorithmic and returns principal types: the least
level for expressions (join of the parts, constants L) and the greatest
level for commands (meet over branches/assignment targets, with guard
levels as lower bounds). A judgement "p has type s" is derivable exactly
when ``subtype(security_check(env, p), s)``.
"""

from __future__ import annotations

from . import engine
from .engine import Cache, EngineStats, IdAlloc, LanguageInstance, TypeEnv, TypingError
from .parser import parse_while
from .terms import (
    ABin, Assign, BConst, Leq, Not, Num, Or, Seq, Skip, Term, WIf, While, WVar, WhilePhrase,
)
from .types import (
    HIGH, LOW, SecBase, SecCmd, SecType, SecVar,
    level_join, level_leq, level_meet, parse_sec, pretty_sec, sec_base, sec_cmd, sec_var,
)


def subtype(left: SecType, right: SecType) -> bool:
    """The reflexive-transitive subtype order on security types."""
    if left == right:
        return True
    if isinstance(left, SecBase) and isinstance(right, SecBase):
        return level_leq(left.level, right.level)
    if isinstance(left, SecCmd) and isinstance(right, SecCmd):
        return level_leq(right.level, left.level)
    return False


def _expr_level(phrase: WhilePhrase, result: SecType) -> str:
    """Read a subexpression's result at its base level; a variable read in
    expression position contributes its slot's level."""
    if isinstance(result, SecBase):
        return result.level
    if isinstance(result, SecVar):
        return result.level
    raise TypingError(phrase, "a command cannot appear in an expression position")


def _cmd_level(phrase: WhilePhrase, result: SecType) -> str:
    if isinstance(result, SecCmd):
        return result.level
    raise TypingError(phrase, "an expression cannot appear in a command position")


def security_check(env: TypeEnv, phrase: WhilePhrase) -> SecType:
    """Principal security type of ``phrase`` under ``env`` (vars to slots)."""
    if isinstance(phrase, (Num, BConst)):
        return sec_base(LOW)
    if isinstance(phrase, WVar):
        ty = env.get(phrase.name)
        if ty is None:
            raise TypingError(phrase, "no security level declared for %r" % phrase.name)
        if not isinstance(ty, SecVar):
            raise TypingError(phrase, "environment must map %r to a variable slot type" % phrase.name)
        return ty
    if isinstance(phrase, (ABin, Leq, Or)):
        left = security_check(env, phrase.left)
        right = security_check(env, phrase.right)
        return _join_binary(phrase, left, right)
    if isinstance(phrase, Not):
        return _join_not(phrase, security_check(env, phrase.operand))
    if isinstance(phrase, Skip):
        return sec_cmd(HIGH)
    if isinstance(phrase, Assign):
        target = security_check(env, WVar(phrase.target))
        value = security_check(env, phrase.value)
        return _join_assign(phrase, target, value)
    if isinstance(phrase, Seq):
        first = security_check(env, phrase.first)
        second = security_check(env, phrase.second)
        return _join_seq(phrase, first, second)
    if isinstance(phrase, WIf):
        cond = security_check(env, phrase.cond)
        then = security_check(env, phrase.then)
        orelse = security_check(env, phrase.orelse)
        return _join_if(phrase, cond, then, orelse)
    assert isinstance(phrase, While)
    cond = security_check(env, phrase.cond)
    body = security_check(env, phrase.body)
    return _join_while(phrase, cond, body)


def _join_binary(phrase: WhilePhrase, left: SecType, right: SecType) -> SecType:
    return sec_base(level_join(_expr_level(phrase, left), _expr_level(phrase, right)))


def _join_not(phrase: Not, operand: SecType) -> SecType:
    return sec_base(_expr_level(phrase, operand))


def _join_assign(phrase: Assign, target: SecType, value: SecType) -> SecType:
    if not isinstance(target, SecVar):
        raise TypingError(phrase, "assignment target must be a declared variable")
    value_level = _expr_level(phrase, value)
    if not level_leq(value_level, target.level):
        raise TypingError(phrase, "explicit flow: %s data assigned to %s variable %r"
                          % (value_level, target.level, phrase.target))
    return sec_cmd(target.level)


def _join_seq(phrase: Seq, first: SecType, second: SecType) -> SecType:
    return sec_cmd(level_meet(_cmd_level(phrase, first), _cmd_level(phrase, second)))


def _join_if(phrase: WIf, cond: SecType, then: SecType, orelse: SecType) -> SecType:
    guard = _expr_level(phrase, cond)
    level = level_meet(_cmd_level(phrase, then), _cmd_level(phrase, orelse))
    if not level_leq(guard, level):
        raise TypingError(phrase, "implicit flow: %s guard over a branch writing %s data" % (guard, level))
    return sec_cmd(level)


def _join_while(phrase: While, cond: SecType, body: SecType) -> SecType:
    guard = _expr_level(phrase, cond)
    level = _cmd_level(phrase, body)
    if not level_leq(guard, level):
        raise TypingError(phrase, "implicit flow: %s guard over a loop body writing %s data" % (guard, level))
    return sec_cmd(level)


def compatible(env: TypeEnv, other: TypeEnv, phrase: Term) -> bool:
    """Pointwise equality of security types on the phrase's variables."""
    for name in phrase.fv:
        if name not in env or name not in other:
            return False
        if env[name] != other[name]:
            return False
    return True


class WhileSecurity(LanguageInstance):
    """Engine instance wrapping the security checker."""

    name = "while-sec"

    def base(self, env: TypeEnv, term: Term) -> SecType:
        return security_check(env, term)

    def subterms(self, term: Term) -> tuple[Term, ...]:
        if isinstance(term, (ABin, Leq, Or)):
            return (term.left, term.right)
        if isinstance(term, Not):
            return (term.operand,)
        if isinstance(term, Assign):
            # the target is typed as a variable phrase of its own
            return (WVar(term.target), term.value)
        if isinstance(term, Seq):
            return (term.first, term.second)
        if isinstance(term, WIf):
            return (term.cond, term.then, term.orelse)
        if isinstance(term, While):
            return (term.cond, term.body)
        return ()

    def join(self, term: Term, env: TypeEnv, results, scratch) -> SecType:
        if isinstance(term, (ABin, Leq, Or)):
            return _join_binary(term, results[0], results[1])
        if isinstance(term, Not):
            return _join_not(term, results[0])
        if isinstance(term, Assign):
            return _join_assign(term, results[0], results[1])
        if isinstance(term, Seq):
            return _join_seq(term, results[0], results[1])
        if isinstance(term, WIf):
            return _join_if(term, results[0], results[1], results[2])
        assert isinstance(term, While)
        return _join_while(term, results[0], results[1])

    def compat(self, env: TypeEnv, cached_env: TypeEnv, term: Term) -> bool:
        return compatible(env, cached_env, term)

    # textual cache format
    def parse_term(self, text: str) -> Term:
        return parse_while(text)

    def pretty_entry(self, term: Term, env: TypeEnv, result: SecType) -> tuple[str, str, str]:
        env_s = "".join("%s:%s," % (n, pretty_sec(env[n])) for n in sorted(env))
        return str(term), env_s, pretty_sec(result)

    def parse_entry(self, term_s: str, env_s: str, result_s: str, alloc: IdAlloc):
        env = {}
        for item in filter(None, env_s.split(",")):
            name, _, ty = item.partition(":")
            env[name] = parse_sec(ty)
        return parse_while(term_s), env, parse_sec(result_s)


SECURITY = WhileSecurity()


def security_check_incremental(env: TypeEnv, cache: Cache, phrase: WhilePhrase,
                               record_trace: bool = False) -> tuple[SecType, Cache, EngineStats]:
    """Incremental counterpart of ``security_check``."""
    return engine.incremental_type(env, cache, phrase, SECURITY, record_trace=record_trace)


def parse_levels(text: str) -> TypeEnv:
    """Levels file: one ``name=L`` or ``name=H`` per line; # starts a comment."""
    env: TypeEnv = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, level = line.partition("=")
        name = name.strip()
        level = level.strip()
        if not sep or not name or level not in (LOW, HIGH):
            raise ValueError("line %d: expected 'name=L' or 'name=H', got %r" % (lineno, raw))
        env[name] = sec_var(level)
    return env


def undeclared_variables(env: TypeEnv, phrase: WhilePhrase) -> list[str]:
    return sorted(name for name in phrase.fv if name not in env)
