from __future__ import annotations

import dataclasses
import random
import tracemalloc

import pytest

from parsefuse.engine import (Failure, ParseOutcome, StateBudgetExceeded,
                              compile_automaton, dump_automaton, emit_source,
                              fparse_interp, run_automaton)
from parsefuse.fusion import fuse
from parsefuse.lexer import LexRule, canonicalize_lexer
from parsefuse.normalize import parse_dgnf
from parsefuse.regex import is_empty_language, literal

from oracles import naive_match, random_regex

# (input, accepted, consumed-or-failure-offset) against the shipped sexp
# grammar; NUL bytes kill every scan, so they behave like hard stops.
SEXP_CASES = [
    (b"(ab c)", True, 6),
    (b"(ab c)\n", True, 6),
    (b"(a))", True, 3),
    (b"ab cd", True, 2),
    (b"( )", True, 3),
    (b"", False, 0),
    (b"))", False, 0),
    (b"(9", False, 1),
    (b"(ab", False, 3),
    (b"ab\x00cd", True, 2),
    (b"(\x00", False, 1),
    (b"((a) (b c))", True, 11),
]


def _nt(pipeline, name):
    return {v: k for k, v in pipeline.fused.nt_names.items()}[name]


def test_interp_hand_cases(sexp):
    for data, ok, n in SEXP_CASES:
        out = fparse_interp(sexp.fused, data)
        assert (out.accepted, out.consumed) == (ok, n), data


def test_interp_failure_details(sexp):
    out = fparse_interp(sexp.fused, b"(9")
    assert not out.accepted
    # sexps backs off through its empty production, so the nonterminal
    # left holding the bad byte is the pending close-paren one
    assert out.failure == Failure(1, _nt(sexp, "n9"))
    assert fparse_interp(sexp.fused, b"").failure == \
        Failure(0, sexp.fused.start)


def test_interp_start_override(sexp):
    inner = dataclasses.replace(sexp.fused, start=_nt(sexp, "sexps"))
    for data, ok, n in [(b")", True, 0), (b" )", True, 1), (b" ", True, 1),
                        (b"a b", True, 3), (b"", True, 0)]:
        out = fparse_interp(inner, data)
        assert (out.accepted, out.consumed) == (ok, n), data


def test_events_golden(sexp):
    out = fparse_interp(sexp.fused, b"(ab c)", emit_events=True)
    named = [(sexp.fused.name(nt), o, s, e) for nt, o, s, e in out.events]
    assert named == [
        ("sexp", 0, 0, 1),    # LPAR
        ("sexps", 1, 1, 3),   # ATOM "ab"
        ("sexps", 2, 3, 4),   # skip self-loop over the blank
        ("sexps", 1, 4, 5),   # ATOM "c"
        ("n9", 0, 5, 6),      # RPAR
    ]
    auto = run_automaton(sexp.automaton, b"(ab c)", emit_events=True)
    assert auto.events == out.events


def test_events_recorded_up_to_failure(sexp):
    out = fparse_interp(sexp.fused, b"(a 9", emit_events=True)
    assert not out.accepted
    assert out.events[-1][3] == 3  # last commit ends before the bad byte
    assert run_automaton(sexp.automaton, b"(a 9", emit_events=True) == out


def test_automaton_state_count_and_determinism(sexp):
    assert sexp.automaton.state_count() == 11
    again = compile_automaton(sexp.fused)
    assert dump_automaton(again) == dump_automaton(sexp.automaton)


def test_automaton_hand_cases(sexp):
    for data, ok, n in SEXP_CASES:
        out = run_automaton(sexp.automaton, data)
        assert (out.accepted, out.consumed) == (ok, n), data


def test_interp_and_automaton_agree_on_random_soup(pipelines):
    rng = random.Random(0xE16)
    pool = b"()ab \n\x00\xff,\"0123"
    for p in pipelines.values():
        for _ in range(600):
            data = bytes(rng.choice(pool) for _ in range(rng.randrange(25)))
            i = fparse_interp(p.fused, data, emit_events=True)
            a = run_automaton(p.automaton, data, emit_events=True)
            assert i == a, (p.name, data)


def test_state_budget_is_enforced(sexp):
    with pytest.raises(StateBudgetExceeded):
        compile_automaton(sexp.fused, state_budget=3)
    compile_automaton(sexp.fused, state_budget=11)  # exactly enough


def test_epsilon_grammar_accepts_empty_prefix_everywhere():
    g = parse_dgnf("n\nn -> <eps>\n", {"X": 0})
    lx = canonicalize_lexer([LexRule(literal(b"x"), 0)], {0: "X"})
    f = fuse(lx, g)
    a = compile_automaton(f)
    for data in [b"", b"x", b"\x00", b"yy"]:
        assert fparse_interp(f, data) == ParseOutcome(True, 0)
        assert run_automaton(a, data) == ParseOutcome(True, 0)


def test_emitted_python_matches_automaton(sexp):
    src = emit_source(sexp.automaton, sexp.fused, backend="python")
    ns: dict = {}
    exec(compile(src, "<emitted>", "exec"), ns)
    parse = ns["parse"]
    for data, ok, n in SEXP_CASES:
        assert parse(data) == (ok, n), data
    rng = random.Random(7)
    pool = b"()ab \n\x00"
    for _ in range(300):
        data = bytes(rng.choice(pool) for _ in range(rng.randrange(33)))
        out = run_automaton(sexp.automaton, data)
        assert parse(data) == (out.accepted, out.consumed), data


def test_emitted_function_count(sexp):
    src = emit_source(sexp.automaton, sexp.fused, backend="python")
    defs = [ln for ln in src.splitlines() if ln.startswith("def f")]
    assert len(defs) == 11


def test_emitted_pseudo_backend_shape(sexp):
    src = emit_source(sexp.automaton, sexp.fused, backend="pseudo")
    assert src == emit_source(sexp.automaton, sexp.fused, backend="pseudo")
    assert "fun f" in src and "case s[i] of" in src
    assert "def " not in src
    assert "fun parse(s, n)" in src
    with pytest.raises(ValueError):
        emit_source(sexp.automaton, sexp.fused, backend="c")


def test_single_token_longest_match_vs_oracle():
    g = parse_dgnf("n\nn -> T\n", {"T": 0})
    rng = random.Random(0x10ac)
    alphabet = b"ab"
    checked = 0
    while checked < 50:
        r = random_regex(rng, alphabet, 3)
        if r.nullable or is_empty_language(r):
            continue
        checked += 1
        lx = canonicalize_lexer([LexRule(r, 0)], {0: "T"})
        f = fuse(lx, g)
        a = compile_automaton(f, state_budget=10_000)
        memo: dict = {}
        for _ in range(30):
            w = bytes(rng.choice(b"aabc") for _ in range(rng.randrange(13)))
            best = 0
            for k in range(1, len(w) + 1):
                if naive_match(r, w[:k], memo):
                    best = k
            want = (True, best) if best else (False, 0)
            for out in (fparse_interp(f, w), run_automaton(a, w)):
                assert (out.accepted, out.consumed) == want, (r, w)


class CountingBytes:
    def __init__(self, data: bytes):
        self.data = data
        self.reads = 0

    def __len__(self):
        return len(self.data)

    def __getitem__(self, i):
        self.reads += 1
        return self.data[i]


def test_interp_inspects_linearly_many_bytes(sexp):
    # Every scan rereads at most one byte past its commit point and every
    # empty-production pop peeks one byte, so the total is bounded by a
    # small constant per input byte (worst observed ~2.3 on paren soup).
    for data in [b"(" + b"ab cd " * 20 + b")",
                 b"(" + b"(a) " * 100 + b")"]:
        cb = CountingBytes(data)
        out = fparse_interp(sexp.fused, cb)
        assert out.accepted
        assert cb.reads <= 3 * len(data) + 8, (len(data), cb.reads)


def test_interp_does_not_materialize_tokens(sexp):
    data = b"(" + b"abc " * 50_000 + b")"
    fparse_interp(sexp.fused, data[:64])  # warm the derivative caches
    tracemalloc.start()
    out = fparse_interp(sexp.fused, data)
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    assert out == ParseOutcome(True, len(data))
    assert peak < 64_000, peak


def test_dump_automaton_smoke(sexp):
    text = dump_automaton(sexp.automaton)
    assert text.count("state ") >= 11
    assert "commit" in text and "exhaust" in text
    assert "entry sexp" in text
