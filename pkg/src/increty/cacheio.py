"""Line-oriented textual cache format.

Header: ``increty-cache v1 <instance-name> fresh=<counter>``. Then one
entry per line, tab separated::

    KEYHEX <TAB> pretty(term) <TAB> env-as-sorted(name:type,)* <TAB> pretty(result)

KEYHEX is the term's structural fingerprint. Entries are emitted in sorted
order and inference entries are displayed with per-entry canonical variable
names, so dumping is deterministic and dump(load(text)) == text.
"""

from __future__ import annotations

from .engine import Cache, IdAlloc, LanguageInstance

MAGIC = "increty-cache"
VERSION = "v1"


class CacheFormatError(Exception):
    pass


def dump_cache(cache: Cache, inst: LanguageInstance) -> str:
    lines = ["%s %s %s fresh=%d" % (MAGIC, VERSION, inst.name, cache.fresh_counter)]
    rows = []
    for term, env, result in cache:
        term_s, env_s, result_s = inst.pretty_entry(term, env, result)
        rows.append("%016x\t%s\t%s\t%s" % (term._hash, term_s, env_s, result_s))
    rows.sort()
    lines.extend(rows)
    return "\n".join(lines) + "\n"


def load_cache(text: str, inst: LanguageInstance) -> Cache:
    lines = text.splitlines()
    if not lines:
        raise CacheFormatError("empty cache file")
    fields = lines[0].split()
    if len(fields) != 4 or fields[0] != MAGIC or fields[1] != VERSION or not fields[3].startswith("fresh="):
        raise CacheFormatError("bad header: %r" % lines[0])
    if fields[2] != inst.name:
        raise CacheFormatError("cache is for instance %r, expected %r" % (fields[2], inst.name))
    try:
        fresh = int(fields[3][len("fresh="):])
    except ValueError:
        raise CacheFormatError("bad fresh counter in %r" % lines[0]) from None
    cache = Cache()
    alloc = IdAlloc()
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise CacheFormatError("line %d: expected 4 tab-separated fields" % lineno)
        key_s, term_s, env_s, result_s = parts
        try:
            term, env, result = inst.parse_entry(term_s, env_s, result_s, alloc)
        except Exception as err:
            raise CacheFormatError("line %d: %s" % (lineno, err)) from None
        if "%016x" % term._hash != key_s:
            raise CacheFormatError("line %d: key %s does not match term %r" % (lineno, key_s, term_s))
        cache.insert(term, env, result)
    cache.fresh_counter = max(fresh, alloc.next)
    return cache


def peek_instance_name(text: str) -> str:
    """Instance tag from a cache file header, without loading entries."""
    header = text.splitlines()[0] if text else ""
    fields = header.split()
    if len(fields) != 4 or fields[0] != MAGIC or fields[1] != VERSION:
        raise CacheFormatError("bad header: %r" % header)
    return fields[2]
