"""Token-level parsing of deterministic normal grammars.

`parse_tokens` is the plain stack machine over an already-lexed token
list: look at the head token; if the focused nonterminal has a
production starting with it, consume the token and push the production
tail; otherwise take the ε-production if there is one (consuming
nothing); otherwise fail.  Determinism of the grammar makes every step
forced, so there is no backtracking and the parse is linear.

`parse_prefix` runs the same machine against a lexer directly, pulling
one token at a time.  Pulling lazily matters at the edges: a lexing
error *after* the parser's stopping point must not surface, and the
consumed-byte count must reflect skipped trailing whitespace the lexer
has already moved past.  This is the reference the fused engines are
compared against byte-for-byte.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lexer import Lexer, pull
from .normalize import EPS_P, NormalGrammar, TokP


class TokenParseError(ValueError):
    def __init__(self, index: int, nonterminal: int,
                 expected: frozenset[int], allows_empty: bool):
        what = f"expected one of tokens {sorted(expected)}"
        if allows_empty:
            what += " (or nothing)"
        super().__init__(f"at token {index}: {what}")
        self.index = index
        self.nonterminal = nonterminal
        self.expected = expected
        self.allows_empty = allows_empty


def _head_tables(g: NormalGrammar):
    heads: dict[int, dict[int, tuple[int, ...]]] = {}
    empties: set[int] = set()
    for nt, ps in g.prods.items():
        table: dict[int, tuple[int, ...]] = {}
        for p in ps:
            if p is EPS_P:
                empties.add(nt)
            elif isinstance(p, TokP):
                if p.token in table:
                    raise ValueError(
                        f"grammar is not deterministic: {g.name(nt)} has two "
                        f"productions starting with token {p.token}")
                table[p.token] = p.tail
            else:
                raise ValueError(
                    f"unresolved placeholder production in {g.name(nt)}")
        heads[nt] = table
    return heads, empties


def parse_tokens(g: NormalGrammar, tokens, start: int | None = None,
                 stats: dict | None = None) -> int:
    """Parse a (token-id, start, end) list (bare token-id lists work too).

    Returns the index of the first unconsumed token; acceptance of the
    whole stream means the return value equals len(tokens).  Raises
    TokenParseError when the machine gets stuck.
    """
    if start is None:
        start = g.start
    heads, empties = _head_tables(g)
    stack = [start]
    i = 0
    n = len(tokens)
    steps = 0
    while stack:
        steps += 1
        nt = stack.pop()
        table = heads[nt]
        if i < n:
            t = tokens[i]
            tid = t[0] if isinstance(t, tuple) else t
            tail = table.get(tid)
            if tail is not None:
                i += 1
                stack.extend(reversed(tail))
                continue
        if nt in empties:
            continue
        if stats is not None:
            stats["steps"] = steps
        raise TokenParseError(i, nt, frozenset(table), False)
    if stats is not None:
        stats["steps"] = steps
    return i


@dataclass(frozen=True)
class PrefixResult:
    accepted: bool
    consumed: int
    failure_offset: int | None = None
    stuck_nonterminal: int | None = None


def parse_prefix(lexer: Lexer, g: NormalGrammar, data: bytes,
                 start: int | None = None) -> PrefixResult:
    """Lex-and-parse with on-demand token pulls.

    `consumed` is the byte frontier the machine actually moved past:
    the end of the last consumed token, extended over trailing skipped
    bytes when the final pull had to scan them to find out the input
    was exhausted (or unlexable -- which, beyond the stopping point, is
    indistinguishable from exhaustion here).
    """
    if start is None:
        start = g.start
    heads, empties = _head_tables(g)
    stack = [start]
    pos = 0        # end of the last consumed token
    frontier = 0   # pos, plus any skipped bytes the last pull scanned over
    look = None    # pending pull result not yet consumed
    while stack:
        if look is None:
            look = pull(lexer, data, pos)
            frontier = look[2] if look[0] == "tok" else look[1]
        nt = stack[-1]
        if look[0] == "tok":
            _, tid, _, end = look
            tail = heads[nt].get(tid)
            if tail is not None:
                stack.pop()
                stack.extend(reversed(tail))
                pos = end
                frontier = end
                look = None
                continue
        if nt in empties:
            stack.pop()
            continue
        return PrefixResult(False, frontier, frontier, nt)
    return PrefixResult(True, frontier)
