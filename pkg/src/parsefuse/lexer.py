"""Derivative-driven lexing: longest match, earliest rule on ties.

A lexer is an ordered list of rules, each a regex paired with either a
token id or a skip marker.  `canonicalize_lexer` rewrites a rule list so
the rule languages are pairwise disjoint (priority = list order, earlier
wins) using intersection-with-complement; after that the scanner never
has to break a tie.

Scanning keeps the classic pair of cursors: the position of the best
committed match so far and the current probe position.  When the live
set of rule derivatives dies (or input ends) the scanner falls back to
the committed match; no committed match on non-empty input is a lex
error at the scan start.  A trailing run of skipped bytes before EOF is
fine.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .regex import BOT, Regex, alt, and_, deriv, is_empty_language, not_


@dataclass(frozen=True)
class LexRule:
    """One lexing rule: `token` is a token id, or None to skip the match."""
    pattern: Regex
    token: int | None


@dataclass(frozen=True)
class Lexer:
    rules: tuple[LexRule, ...]
    token_names: dict[int, str]

    @property
    def skip_regex(self) -> Regex:
        for rule in self.rules:
            if rule.token is None:
                return rule.pattern
        return BOT

    def token_regex(self, token: int) -> Regex | None:
        for rule in self.rules:
            if rule.token == token:
                return rule.pattern
        return None


class LexerError(ValueError):
    """A rule set that cannot be canonicalized (nullable or shadowed rule)."""


class LexError(ValueError):
    """Input that matches no rule at `offset`."""

    def __init__(self, offset: int):
        super().__init__(f"no lexer rule matches at offset {offset}")
        self.offset = offset


def canonicalize_lexer(rules, token_names=None, strict: bool = False) -> Lexer:
    """Merge duplicate actions and make rule languages pairwise disjoint.

    Rules for the same token (and all skip rules) are merged by
    alternation at the first occurrence.  Then every rule is intersected
    with the complement of the union of the rules before it, so an
    earlier rule wins any overlap.  Rules that end up denoting the empty
    language are dropped with a warning, or rejected if `strict`.
    Patterns that match the empty string are always rejected.
    """
    merged: list[tuple[Regex, int | None]] = []
    slot: dict[int | None, int] = {}
    for idx, rule in enumerate(rules):
        if rule.pattern.nullable:
            name = "skip" if rule.token is None else _tok_name(rule.token, token_names)
            raise LexerError(f"rule {idx} ({name}) may match the empty string")
        if rule.token in slot:
            at = slot[rule.token]
            merged[at] = (alt(merged[at][0], rule.pattern), rule.token)
        else:
            slot[rule.token] = len(merged)
            merged.append((rule.pattern, rule.token))

    out: list[LexRule] = []
    union_before = BOT
    for pattern, token in merged:
        carved = pattern if union_before is BOT else and_(pattern, not_(union_before))
        union_before = alt(union_before, pattern)
        if is_empty_language(carved):
            name = "skip" if token is None else _tok_name(token, token_names)
            msg = f"rule for {name} is entirely shadowed by earlier rules"
            if strict:
                raise LexerError(msg)
            warnings.warn(msg)
            continue
        out.append(LexRule(carved, token))
    return Lexer(tuple(out), dict(token_names or {}))


def _tok_name(token, token_names):
    if token_names and token in token_names:
        return token_names[token]
    return f"token {token}"


_NO_MATCH = object()


def _scan(rules, data: bytes, start: int):
    """One maximal-munch attempt at `start`.

    Returns (action, end): action is the winning rule's token id (or None
    for a skip rule), or _NO_MATCH when no rule matches any prefix.
    """
    vec = [(rule.pattern, rule.token) for rule in rules]
    best = _NO_MATCH
    best_end = start
    j = start
    n = len(data)
    while j < n:
        c = data[j]
        nvec = []
        committed = _NO_MATCH
        for r, action in vec:
            d = deriv(r, c)
            if d is not BOT:
                nvec.append((d, action))
                if d.nullable and committed is _NO_MATCH:
                    committed = action
        if not nvec:
            break
        j += 1
        vec = nvec
        if committed is not _NO_MATCH:
            best = committed
            best_end = j
    return best, best_end


def pull(lexer: Lexer, data: bytes, pos: int):
    """Produce the next token at or after `pos`, consuming skips.

    Returns one of:
      ("tok", token_id, start, end)  -- next token with its span
      ("eof", scan_pos)              -- end of input (after trailing skips)
      ("fail", scan_pos)             -- no rule matches at scan_pos
    """
    rules = lexer.rules
    n = len(data)
    while True:
        if pos >= n:
            return ("eof", pos)
        action, end = _scan(rules, data, pos)
        if action is _NO_MATCH:
            return ("fail", pos)
        if action is None:
            pos = end
            continue
        return ("tok", action, pos, end)


def lex(lexer: Lexer, data: bytes) -> list[tuple[int, int, int]]:
    """Tokenize all of `data` into (token-id, start, end) triples.

    Raises LexError at the first position where no rule matches; empty
    input gives an empty list.
    """
    out = []
    pos = 0
    while True:
        got = pull(lexer, data, pos)
        if got[0] == "eof":
            return out
        if got[0] == "fail":
            raise LexError(got[1])
        _, tid, start, end = got
        out.append((tid, start, end))
        pos = end
