"""Deterministic 64-bit structural fingerprints.

Python's built-in string hashing is salted per process, so terms and types
compute their own FNV-1a based fingerprint instead. The fingerprint doubles
as ``__hash__`` (dict lookups stay O(1)) and as the stable key written to
cache dumps; hash collisions are harmless because dict probing confirms
candidates with structural equality.
"""

from __future__ import annotations

_MASK = 0xFFFFFFFFFFFFFFFF
_OFFSET = 0xCBF29CE484222325
_PRIME = 0x100000001B3


def mix(*parts: int) -> int:
    h = _OFFSET
    for p in parts:
        h ^= p & _MASK
        h = (h * _PRIME) & _MASK
    return h


def mix_str(s: str) -> int:
    h = _OFFSET
    for b in s.encode("utf-8"):
        h ^= b
        h = (h * _PRIME) & _MASK
    return h


class Fingerprinted:
    """Base for immutable nodes carrying a precomputed structural hash.

    Subclasses store the fingerprint in ``_hash`` at construction time.
    Equality short-circuits on identity and on fingerprint mismatch before
    falling back to a structural field comparison.
    """

    __slots__ = ()

    _hash: int
    _fields: tuple[str, ...] = ()

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if other.__class__ is not self.__class__:
            return False
        if self._hash != other._hash:  # type: ignore[attr-defined]
            return False
        for name in self._fields:
            if getattr(self, name) != getattr(other, name):
                return False
        return True

    def __ne__(self, other: object) -> bool:
        return not self.__eq__(other)
