"""Type representations for the two object languages.

Functional types are int, bool and right-associative arrows, optionally
augmented with numbered type variables for inference. Imperative security
types are the two-point lattice L < H in three kinds: bare level, variable
slot (``tau var``) and command (``tau cmd``).
"""

from __future__ import annotations

from dataclasses import dataclass

from .fingerprint import Fingerprinted, mix, mix_str

# ---------------------------------------------------------------------------
# Functional types


class Type(Fingerprinted):
    __slots__ = ()


@dataclass(frozen=True, eq=False)
class BaseType(Type):
    name: str

    _fields = ("name",)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", mix(0x01, mix_str(self.name)))

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True, eq=False)
class Arrow(Type):
    domain: Type
    codomain: Type

    _fields = ("domain", "codomain")

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", mix(0x02, self.domain._hash, self.codomain._hash))

    def __repr__(self) -> str:
        return pretty_type(self)


@dataclass(frozen=True, eq=False)
class TypeVar(Type):
    """A numbered inference variable; ids come from a monotone supply."""

    id: int

    _fields = ("id",)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", mix(0x03, self.id))

    def __repr__(self) -> str:
        return pretty_type(self)


INT = BaseType("int")
BOOL = BaseType("bool")


def pretty_type(ty: Type) -> str:
    """Render a type in concrete syntax; arrows are right-associative."""
    if isinstance(ty, BaseType):
        return ty.name
    if isinstance(ty, TypeVar):
        return "'t%d" % ty.id
    assert isinstance(ty, Arrow)
    dom = pretty_type(ty.domain)
    if isinstance(ty.domain, Arrow):
        dom = "(%s)" % dom
    return "%s -> %s" % (dom, pretty_type(ty.codomain))


def type_vars(ty: Type, acc: set[int] | None = None) -> set[int]:
    """All type-variable ids occurring in ``ty``."""
    if acc is None:
        acc = set()
    if isinstance(ty, TypeVar):
        acc.add(ty.id)
    elif isinstance(ty, Arrow):
        type_vars(ty.domain, acc)
        type_vars(ty.codomain, acc)
    return acc


# ---------------------------------------------------------------------------
# Security types


LOW = "L"
HIGH = "H"

_LEVELS = (LOW, HIGH)


class SecType(Fingerprinted):
    __slots__ = ()

    level: str


@dataclass(frozen=True, eq=False)
class SecBase(SecType):
    level: str

    _fields = ("level",)

    def __post_init__(self) -> None:
        if self.level not in _LEVELS:
            raise ValueError("security level must be L or H, got %r" % self.level)
        object.__setattr__(self, "_hash", mix(0x11, mix_str(self.level)))

    def __repr__(self) -> str:
        return self.level


@dataclass(frozen=True, eq=False)
class SecVar(SecType):
    level: str

    _fields = ("level",)

    def __post_init__(self) -> None:
        if self.level not in _LEVELS:
            raise ValueError("security level must be L or H, got %r" % self.level)
        object.__setattr__(self, "_hash", mix(0x12, mix_str(self.level)))

    def __repr__(self) -> str:
        return "%s var" % self.level


@dataclass(frozen=True, eq=False)
class SecCmd(SecType):
    level: str

    _fields = ("level",)

    def __post_init__(self) -> None:
        if self.level not in _LEVELS:
            raise ValueError("security level must be L or H, got %r" % self.level)
        object.__setattr__(self, "_hash", mix(0x13, mix_str(self.level)))

    def __repr__(self) -> str:
        return "%s cmd" % self.level


L = SecBase(LOW)
H = SecBase(HIGH)
L_VAR = SecVar(LOW)
H_VAR = SecVar(HIGH)
L_CMD = SecCmd(LOW)
H_CMD = SecCmd(HIGH)


def level_join(a: str, b: str) -> str:
    return HIGH if HIGH in (a, b) else LOW


def level_meet(a: str, b: str) -> str:
    return LOW if LOW in (a, b) else HIGH


def level_leq(a: str, b: str) -> bool:
    return a == LOW or b == HIGH


def sec_base(level: str) -> SecBase:
    return H if level == HIGH else L


def sec_var(level: str) -> SecVar:
    return H_VAR if level == HIGH else L_VAR


def sec_cmd(level: str) -> SecCmd:
    return H_CMD if level == HIGH else L_CMD


def pretty_sec(ty: SecType) -> str:
    return repr(ty)


def parse_sec(text: str) -> SecType:
    parts = text.split()
    if len(parts) == 1 and parts[0] in _LEVELS:
        return sec_base(parts[0])
    if len(parts) == 2 and parts[0] in _LEVELS:
        if parts[1] == "var":
            return sec_var(parts[0])
        if parts[1] == "cmd":
            return sec_cmd(parts[0])
    raise ValueError("not a security type: %r" % text)
