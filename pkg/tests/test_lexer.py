from __future__ import annotations

import random

import pytest

from oracles import naive_match
from parsefuse.lexer import (LexError, LexRule, LexerError, canonicalize_lexer,
                             lex, pull)
from parsefuse.regex import (alt, and_, byte_class, literal, not_,
                             parse_regex, plus, star)

LPAR, RPAR, ATOM = 0, 1, 2
SEXP_NAMES = {LPAR: "LPAR", RPAR: "RPAR", ATOM: "ATOM"}


def _sexp_lexer():
    return canonicalize_lexer([
        LexRule(literal(b"("), LPAR),
        LexRule(literal(b")"), RPAR),
        LexRule(plus(byte_class(range(ord("a"), ord("z") + 1))), ATOM),
        LexRule(byte_class(b" \n"), None),
    ], SEXP_NAMES)


def test_tokenize_atoms_with_gap():
    assert lex(_sexp_lexer(), b"ab cd") == [(ATOM, 0, 2), (ATOM, 3, 5)]


def test_tokenize_parenthesized():
    assert lex(_sexp_lexer(), b"(ab c)") == [
        (LPAR, 0, 1), (ATOM, 1, 3), (ATOM, 4, 5), (RPAR, 5, 6)]


def test_empty_input():
    assert lex(_sexp_lexer(), b"") == []


def test_trailing_skip_is_fine():
    assert lex(_sexp_lexer(), b"ab \n ") == [(ATOM, 0, 2)]


def test_leading_skips():
    assert lex(_sexp_lexer(), b"  \nab") == [(ATOM, 3, 5)]


def test_lex_error_offset():
    with pytest.raises(LexError) as exc:
        lex(_sexp_lexer(), b"ab @cd")
    assert exc.value.offset == 3


def test_lex_error_offset_at_start():
    with pytest.raises(LexError) as exc:
        lex(_sexp_lexer(), b"@")
    assert exc.value.offset == 0


def test_pull_states():
    lx = _sexp_lexer()
    data = b" ab )@"
    assert pull(lx, data, 0) == ("tok", ATOM, 1, 3)
    assert pull(lx, data, 3) == ("tok", RPAR, 4, 5)
    assert pull(lx, data, 5) == ("fail", 5)
    assert pull(lx, b" ab  ", 3) == ("eof", 5)
    assert pull(lx, b"", 0) == ("eof", 0)


def test_nul_bytes_are_just_bytes():
    lx = canonicalize_lexer([LexRule(plus(byte_class(b"\x00\x01")), 7)], {})
    assert lex(lx, b"\x00\x01\x00") == [(7, 0, 3)]
    with pytest.raises(LexError) as exc:
        lex(_sexp_lexer(), b"ab\x00")
    assert exc.value.offset == 2


# ---------------------------------------------------------------------------
# longest match / tie-breaking
# ---------------------------------------------------------------------------

KW, ID = 0, 1


def _kw_lexer():
    return canonicalize_lexer([
        LexRule(literal(b"if"), KW),
        LexRule(plus(byte_class(range(ord("a"), ord("z") + 1))), ID),
        LexRule(byte_class(b" "), None),
    ], {KW: "KW", ID: "ID"})


def test_keyword_vs_identifier():
    lx = _kw_lexer()
    assert lex(lx, b"if x") == [(KW, 0, 2), (ID, 3, 4)]
    # longest match beats the earlier keyword rule
    assert lex(lx, b"iffy") == [(ID, 0, 4)]
    assert lex(lx, b"i") == [(ID, 0, 1)]
    assert lex(lx, b"ifif") == [(ID, 0, 4)]


def test_canonicalize_carves_keyword_out_of_identifier():
    lx = _kw_lexer()
    ident = plus(byte_class(range(ord("a"), ord("z") + 1)))
    assert lx.rules[0].pattern is literal(b"if")
    assert lx.rules[1].pattern is and_(ident, not_(literal(b"if")))
    assert [r.token for r in lx.rules] == [KW, ID, None]


def test_canonicalize_merges_rules_for_same_token():
    lx = canonicalize_lexer([
        LexRule(literal(b"aa"), 0),
        LexRule(literal(b"b"), 1),
        LexRule(literal(b"cc"), 0),
    ], {})
    assert [r.token for r in lx.rules] == [0, 1]
    merged = alt(literal(b"aa"), literal(b"cc"))
    assert lx.rules[0].pattern is merged
    # the later rule is carved against the merged earlier language
    assert lx.rules[1].pattern is and_(literal(b"b"), not_(merged))


def test_canonicalize_rejects_nullable_rule():
    with pytest.raises(LexerError, match="empty string"):
        canonicalize_lexer([LexRule(star(literal(b"a")), 0)], {0: "A"})


def test_canonicalize_drops_shadowed_rule_with_warning():
    rules = [
        LexRule(plus(byte_class(b"ab")), 0),
        LexRule(literal(b"ab"), 1),
    ]
    with pytest.warns(UserWarning, match="shadowed"):
        lx = canonicalize_lexer(rules, {0: "WORD", 1: "AB"})
    assert [r.token for r in lx.rules] == [0]
    with pytest.raises(LexerError, match="shadowed"):
        canonicalize_lexer(rules, {0: "WORD", 1: "AB"}, strict=True)


def test_canonical_rules_are_pairwise_disjoint():
    lx = _sexp_lexer()
    rng = random.Random(21)
    alphabet = b"abz() \n@"
    for _ in range(400):
        w = bytes(rng.choice(alphabet)
                  for _ in range(rng.randint(1, 5)))
        matches = [r.token for r in lx.rules if naive_match(r.pattern, w)]
        assert len(matches) <= 1, w


def test_scan_agrees_with_naive_longest_match():
    lx = _sexp_lexer()
    rng = random.Random(22)
    alphabet = b"ab() \n@"
    for _ in range(300):
        data = bytes(rng.choice(alphabet) for _ in range(rng.randint(0, 6)))
        got = pull(lx, data, 0)
        # oracle: longest prefix matched by any rule, earliest rule on ties,
        # iterated over skips
        pos = 0
        expect = ("eof", len(data))
        while pos <= len(data):
            if pos == len(data):
                expect = ("eof", pos)
                break
            best = None
            for end in range(len(data), pos, -1):
                for rule in lx.rules:
                    if naive_match(rule.pattern, data[pos:end]):
                        best = (rule.token, end)
                        break
                if best:
                    break
            if best is None:
                expect = ("fail", pos)
                break
            if best[0] is None:
                pos = best[1]
                continue
            expect = ("tok", best[0], pos, best[1])
            break
        assert got == expect, data


def test_skip_regex_and_token_regex_accessors():
    lx = _sexp_lexer()
    assert lx.skip_regex is not None
    assert naive_match(lx.token_regex(LPAR), b"(")
    assert lx.token_regex(99) is None
    no_skip = canonicalize_lexer([LexRule(literal(b"x"), 0)], {})
    from parsefuse.regex import BOT
    assert no_skip.skip_regex is BOT
