"""Byte-level regular expressions with Brzozowski derivatives.

The node set is closed under intersection and complement (needed to make
lexer rules disjoint by construction) and every constructor canonicalizes
up to the usual weak similarity laws: associativity, commutativity and
idempotence of alternation/intersection, unit and annihilator elements,
double complement, and star collapsing.  Canonical nodes are hash-consed,
so structurally equal expressions are the *same* object and per-node
derivative caches stay hot.  With these laws the set of iterated
derivatives of any expression is finite, which is what the scanner and
the compiled automaton rely on.
"""

from __future__ import annotations

from typing import Iterable

FULL_MASK = (1 << 256) - 1

_INTERN: dict[tuple, "Regex"] = {}


class Regex:
    """A canonical regular-expression node. Build via the module functions."""

    __slots__ = ("nullable", "_skey", "_dcache", "_classes", "_hash")

    kind = "?"

    def __init__(self, skey, nullable):
        self._skey = skey
        self.nullable = nullable
        self._dcache: dict[int, Regex] = {}
        self._classes: tuple[int, ...] | None = None
        self._hash = hash(skey)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other or (isinstance(other, Regex) and self._skey == other._skey)

    def __repr__(self):
        return f"<regex {show(self)!r}>"

    def __str__(self):
        return show(self)


class _Bot(Regex):
    kind = "bot"


class _Eps(Regex):
    kind = "eps"


class ByteClass(Regex):
    """A single byte drawn from a set, stored as a 256-bit mask."""

    __slots__ = ("mask",)
    kind = "class"

    def __init__(self, skey, mask):
        super().__init__(skey, False)
        self.mask = mask

    def members(self):
        m = self.mask
        return frozenset(i for i in range(256) if (m >> i) & 1)


class Seq(Regex):
    __slots__ = ("first", "second")
    kind = "seq"

    def __init__(self, skey, first, second):
        super().__init__(skey, first.nullable and second.nullable)
        self.first = first
        self.second = second


class Alt(Regex):
    __slots__ = ("items",)
    kind = "alt"

    def __init__(self, skey, items):
        super().__init__(skey, any(i.nullable for i in items))
        self.items = items


class And(Regex):
    __slots__ = ("items",)
    kind = "and"

    def __init__(self, skey, items):
        super().__init__(skey, all(i.nullable for i in items))
        self.items = items


class Star(Regex):
    __slots__ = ("inner",)
    kind = "star"

    def __init__(self, skey, inner):
        super().__init__(skey, True)
        self.inner = inner


class Not(Regex):
    __slots__ = ("inner",)
    kind = "not"

    def __init__(self, skey, inner):
        super().__init__(skey, not inner.nullable)
        self.inner = inner


def _intern(node):
    return _INTERN.setdefault(node._skey, node)


BOT: Regex = _intern(_Bot((0,), False))
EPS: Regex = _intern(_Eps((1,), True))


def byte_class(members: Iterable[int] | int) -> Regex:
    """One byte from `members` (an iterable of byte values, or a raw mask)."""
    if isinstance(members, int):
        mask = members
    else:
        mask = 0
        for b in members:
            if not 0 <= b <= 255:
                raise ValueError(f"byte value out of range: {b}")
            mask |= 1 << b
    if mask == 0:
        return BOT
    key = (2, mask)
    got = _INTERN.get(key)
    if got is None:
        got = _intern(ByteClass(key, mask))
    return got


def literal(data: bytes) -> Regex:
    """The exact byte string `data` (b"" gives epsilon)."""
    r = EPS
    for b in reversed(data):
        r = seq(byte_class((b,)), r)
    return r


def seq(a: Regex, b: Regex) -> Regex:
    if a is BOT or b is BOT:
        return BOT
    if a is EPS:
        return b
    if b is EPS:
        return a
    if isinstance(a, Seq):  # keep sequences right-nested
        return seq(a.first, seq(a.second, b))
    key = (3, a._skey, b._skey)
    got = _INTERN.get(key)
    if got is None:
        got = _intern(Seq(key, a, b))
    return got


def _flatten(items, cls):
    out = []
    for r in items:
        if isinstance(r, cls):
            out.extend(r.items)
        else:
            out.append(r)
    return out


def alt(*items: Regex) -> Regex:
    flat = _flatten(items, Alt)
    mask = 0
    rest = []
    for r in flat:
        if r is BOT:
            continue
        if isinstance(r, Not) and r.inner is BOT:
            return r  # anything | complement(nothing) accepts everything
        if isinstance(r, ByteClass):
            mask |= r.mask
        else:
            rest.append(r)
    if mask:
        rest.append(byte_class(mask))
    rest = sorted(set(rest), key=lambda r: r._skey)
    if not rest:
        return BOT
    if len(rest) == 1:
        return rest[0]
    key = (4,) + tuple(r._skey for r in rest)
    got = _INTERN.get(key)
    if got is None:
        got = _intern(Alt(key, tuple(rest)))
    return got


def and_(*items: Regex) -> Regex:
    flat = _flatten(items, And)
    mask = FULL_MASK
    have_class = False
    rest = []
    for r in flat:
        if r is BOT:
            return BOT
        if isinstance(r, Not) and r.inner is BOT:
            continue  # intersection with the universal language is a no-op
        if isinstance(r, ByteClass):
            have_class = True
            mask &= r.mask
        else:
            rest.append(r)
    if have_class:
        cl = byte_class(mask)
        if cl is BOT:
            return BOT
        rest.append(cl)
    rest = sorted(set(rest), key=lambda r: r._skey)
    if not rest:
        return not_(BOT)
    if len(rest) == 1:
        return rest[0]
    key = (5,) + tuple(r._skey for r in rest)
    got = _INTERN.get(key)
    if got is None:
        got = _intern(And(key, tuple(rest)))
    return got


def star(r: Regex) -> Regex:
    if r is BOT or r is EPS:
        return EPS
    if isinstance(r, Star):
        return r
    key = (6, r._skey)
    got = _INTERN.get(key)
    if got is None:
        got = _intern(Star(key, r))
    return got


def not_(r: Regex) -> Regex:
    if isinstance(r, Not):
        return r.inner
    key = (7, r._skey)
    got = _INTERN.get(key)
    if got is None:
        got = _intern(Not(key, r))
    return got


def plus(r: Regex) -> Regex:
    return seq(r, star(r))


def opt(r: Regex) -> Regex:
    return alt(EPS, r)


def nullable(r: Regex) -> bool:
    """Does the language of `r` contain the empty string?"""
    return r.nullable


def deriv(r: Regex, c: int) -> Regex:
    """Brzozowski derivative of `r` with respect to byte value `c`."""
    d = r._dcache.get(c)
    if d is not None:
        return d
    k = r.kind
    if k == "class":
        d = EPS if (r.mask >> c) & 1 else BOT
    elif k == "seq":
        d = seq(deriv(r.first, c), r.second)
        if r.first.nullable:
            d = alt(d, deriv(r.second, c))
    elif k == "alt":
        d = alt(*[deriv(i, c) for i in r.items])
    elif k == "and":
        d = and_(*[deriv(i, c) for i in r.items])
    elif k == "star":
        d = seq(deriv(r.inner, c), r)
    elif k == "not":
        d = not_(deriv(r.inner, c))
    else:  # bot, eps
        d = BOT
    r._dcache[c] = d
    return d


def _meet(ps, qs):
    out = []
    for p in ps:
        for q in qs:
            m = p & q
            if m:
                out.append(m)
    return tuple(out)


def _classes(r) -> tuple[int, ...]:
    """Partition of 0..255 (as masks) such that bytes sharing a part share
    the derivative of `r`.  Approximate in the usual way: precise enough to
    be sound, coarse only where it cannot matter."""
    got = r._classes
    if got is not None:
        return got
    k = r.kind
    if k == "class":
        out = [r.mask]
        comp = FULL_MASK & ~r.mask
        if comp:
            out.append(comp)
        out = tuple(out)
    elif k == "seq":
        if r.first.nullable:
            out = _meet(_classes(r.first), _classes(r.second))
        else:
            out = _classes(r.first)
    elif k in ("alt", "and"):
        out = _classes(r.items[0])
        for i in r.items[1:]:
            out = _meet(out, _classes(i))
    elif k in ("star", "not"):
        out = _classes(r.inner)
    else:
        out = (FULL_MASK,)
    r._classes = out
    return out


def class_partition(rs: Iterable[Regex]) -> list[frozenset[int]]:
    """Partition byte values 0..255 so that all regexes in `rs` derive
    identically within each part.  Returns the parts as frozensets, ordered
    by smallest member."""
    return [frozenset(_mask_bytes(m)) for m in partition_masks(rs)]


def partition_masks(rs: Iterable[Regex]) -> list[int]:
    """Same partition as `class_partition`, as 256-bit masks."""
    acc: tuple[int, ...] = (FULL_MASK,)
    for r in rs:
        acc = _meet(acc, _classes(r))
    return sorted(acc, key=_lowest_bit)


def _lowest_bit(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def _mask_bytes(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class RegexStateLimit(Exception):
    """Raised when a derivative-closure walk exceeds its state budget."""


def is_empty_language(r: Regex, state_limit: int = 100_000) -> bool:
    """True iff `r` matches no string at all.

    Walks the derivative closure, one representative byte per derivative
    class; any nullable state is a witness.  Fails loudly (RegexStateLimit)
    rather than returning a wrong answer if the closure exceeds the budget.
    """
    if r.nullable:
        return False
    seen = {r}
    todo = [r]
    while todo:
        q = todo.pop()
        for mask in _classes(q):
            d = deriv(q, _lowest_bit(mask))
            if d.nullable:
                return False
            if d not in seen:
                seen.add(d)
                if len(seen) > state_limit:
                    raise RegexStateLimit(
                        f"derivative closure exceeded {state_limit} states")
                todo.append(d)
    return True


# ---------------------------------------------------------------------------
# concrete syntax
# ---------------------------------------------------------------------------

class RegexSyntaxError(ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


_ESCAPES = {ord("n"): 0x0A, ord("t"): 0x09, ord("r"): 0x0D,
            ord("\\"): 0x5C, ord('"'): 0x22}


class _Parser:
    """Recursive descent over the textual syntax.

    Precedence, tightest first: postfix * + ?, then prefix !, then
    juxtaposition, then &, then |.  Atoms are "quoted literals",
    [character classes] (with ranges and ^ negation), and (groups).
    """

    def __init__(self, text: str):
        self.data = text.encode("utf-8", errors="surrogateescape")
        self.i = 0

    def error(self, msg):
        raise RegexSyntaxError(msg, self.i)

    def peek(self):
        return self.data[self.i] if self.i < len(self.data) else -1

    def skip_ws(self):
        while self.i < len(self.data) and self.data[self.i] in b" \t\r\n":
            self.i += 1

    def parse(self) -> Regex:
        self.skip_ws()
        r = self.alt()
        self.skip_ws()
        if self.i != len(self.data):
            self.error("trailing input after regex")
        return r

    def alt(self) -> Regex:
        parts = [self.conj()]
        self.skip_ws()
        while self.peek() == ord("|"):
            self.i += 1
            parts.append(self.conj())
            self.skip_ws()
        return alt(*parts)

    def conj(self) -> Regex:
        parts = [self.cat()]
        self.skip_ws()
        while self.peek() == ord("&"):
            self.i += 1
            parts.append(self.cat())
            self.skip_ws()
        return and_(*parts)

    _ATOM_STARTS = frozenset(b'"([!')

    def cat(self) -> Regex:
        self.skip_ws()
        if self.peek() not in self._ATOM_STARTS:
            self.error("expected a regex atom")
        r = self.prefixed()
        while True:
            self.skip_ws()
            if self.peek() in self._ATOM_STARTS:
                r = seq(r, self.prefixed())
            else:
                return r

    def prefixed(self) -> Regex:
        self.skip_ws()
        if self.peek() == ord("!"):
            self.i += 1
            return not_(self.prefixed())
        return self.postfixed()

    def postfixed(self) -> Regex:
        r = self.atom()
        while True:
            c = self.peek()
            if c == ord("*"):
                r = star(r)
            elif c == ord("+"):
                r = plus(r)
            elif c == ord("?"):
                r = opt(r)
            else:
                return r
            self.i += 1

    def atom(self) -> Regex:
        self.skip_ws()
        c = self.peek()
        if c == ord("("):
            self.i += 1
            r = self.alt()
            self.skip_ws()
            if self.peek() != ord(")"):
                self.error("expected ')'")
            self.i += 1
            return r
        if c == ord('"'):
            return literal(self.quoted())
        if c == ord("["):
            return self.char_class()
        self.error("expected a regex atom")

    def escape(self) -> int:
        # caller consumed the backslash
        if self.i >= len(self.data):
            self.error("dangling escape")
        c = self.data[self.i]
        self.i += 1
        if c in _ESCAPES:
            return _ESCAPES[c]
        if c == ord("x"):
            h = self.data[self.i:self.i + 2].decode("ascii", "replace")
            if len(h) != 2 or any(ch not in "0123456789abcdefABCDEF" for ch in h):
                self.error("\\x needs two hex digits")
            self.i += 2
            return int(h, 16)
        if c in b"]-^[":
            return c
        self.error(f"unknown escape \\{chr(c)}")

    def quoted(self) -> bytes:
        self.i += 1  # opening quote
        out = bytearray()
        while True:
            if self.i >= len(self.data):
                self.error("unterminated string literal")
            c = self.data[self.i]
            if c == ord('"'):
                self.i += 1
                return bytes(out)
            self.i += 1
            if c == ord("\\"):
                out.append(self.escape())
            else:
                out.append(c)

    def char_class(self) -> Regex:
        self.i += 1  # opening bracket
        negate = False
        if self.peek() == ord("^"):
            negate = True
            self.i += 1
        mask = 0

        def next_member():
            c = self.data[self.i]
            self.i += 1
            if c == ord("\\"):
                return self.escape()
            return c

        while True:
            if self.i >= len(self.data):
                self.error("unterminated character class")
            if self.peek() == ord("]"):
                self.i += 1
                break
            lo = next_member()
            if self.peek() == ord("-") and self.i + 1 < len(self.data) \
                    and self.data[self.i + 1] != ord("]"):
                self.i += 1
                hi = next_member()
                if hi < lo:
                    self.error("reversed range in character class")
                mask |= ((1 << (hi - lo + 1)) - 1) << lo
            else:
                mask |= 1 << lo
        if negate:
            mask = FULL_MASK & ~mask
        if mask == 0:
            self.error("empty character class")
        return byte_class(mask)


def parse_regex(text: str) -> Regex:
    """Parse the concrete regex syntax; raises RegexSyntaxError with a byte
    offset on malformed input."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# display
# ---------------------------------------------------------------------------

def _show_byte(b, in_class=False):
    if b == 0x0A:
        return "\\n"
    if b == 0x09:
        return "\\t"
    if b == 0x0D:
        return "\\r"
    if b == 0x5C:
        return "\\\\"
    if in_class and b in b']-^[':
        return "\\" + chr(b)
    if not in_class and b == 0x22:
        return '\\"'
    if 0x21 <= b <= 0x7E:
        return chr(b)
    return f"\\x{b:02x}"


def _show_class(mask):
    comp = FULL_MASK & ~mask
    if comp and bin(comp).count("1") < bin(mask).count("1"):
        return "[^" + _show_members(comp) + "]"
    return "[" + _show_members(mask) + "]"


def _show_members(mask):
    runs = []
    bs = list(_mask_bytes(mask))
    start = prev = bs[0]
    for b in bs[1:]:
        if b == prev + 1:
            prev = b
            continue
        runs.append((start, prev))
        start = prev = b
    runs.append((start, prev))
    out = []
    for lo, hi in runs:
        if hi == lo:
            out.append(_show_byte(lo, in_class=True))
        elif hi == lo + 1:
            out.append(_show_byte(lo, True) + _show_byte(hi, True))
        else:
            out.append(_show_byte(lo, True) + "-" + _show_byte(hi, True))
    return "".join(out)


_LEVEL = {"alt": 0, "and": 1, "seq": 2, "not": 3}


def _singleton(r):
    return isinstance(r, ByteClass) and r.mask & (r.mask - 1) == 0


def show(r: Regex, level: int = 0) -> str:
    """Render `r` in the concrete syntax (modulo the bot/eps pseudo-forms)."""
    k = r.kind
    if k == "bot":
        return "\\0"
    if k == "eps":
        return '""'
    if k == "class":
        if _singleton(r):
            b = _lowest_bit(r.mask)
            if 0x20 <= b <= 0x7E:
                return '"' + _show_byte(b) + '"'
        return _show_class(r.mask)
    if k == "seq":
        # fold runs of single-byte classes back into quoted literals
        parts = []
        run = bytearray()
        node: Regex | None = r
        flat = []
        while isinstance(node, Seq):
            flat.append(node.first)
            node = node.second
        flat.append(node)
        for item in flat:
            if _singleton(item) and 0x20 <= _lowest_bit(item.mask) <= 0x7E:
                run.append(_lowest_bit(item.mask))
            else:
                if run:
                    parts.append('"' + "".join(_show_byte(b) for b in run) + '"')
                    run = bytearray()
                parts.append(show(item, 3))
        if run:
            parts.append('"' + "".join(_show_byte(b) for b in run) + '"')
        body = " ".join(parts) if len(parts) > 1 else parts[0]
        return f"({body})" if level > 2 and len(parts) > 1 else body
    if k == "alt":
        items = r.items
        if len(items) == 2 and EPS in items:
            other = items[0] if items[1] is EPS else items[1]
            return show(other, 4) + "?"
        body = " | ".join(show(i, 1) for i in items)
        return f"({body})" if level > 0 else body
    if k == "and":
        body = " & ".join(show(i, 2) for i in r.items)
        return f"({body})" if level > 1 else body
    if k == "star":
        return show(r.inner, 4) + "*"
    if k == "not":
        body = "!" + show(r.inner, 4)
        # prefix ! binds looser than postfix */+/?, so under those it
        # needs parentheses
        return f"({body})" if level > 3 else body
    raise AssertionError(k)
