"""Shared fixtures: the shipped grammars compiled once per session."""

from __future__ import annotations

from dataclasses import dataclass

import pytest

from parsefuse import shipped_grammar_path
from parsefuse.engine import (CompiledAutomaton, EXHAUST, compile_automaton,
                              fparse_interp, run_automaton)
from parsefuse.fusion import FusedGrammar, Match, fuse
from parsefuse.grammar_file import GrammarSpec, load_grammar_file
from parsefuse.normalize import NormalGrammar, normalize, trim_unreachable
from parsefuse.token_parser import parse_prefix

SHIPPED = ("sexp", "csv", "json")


@dataclass
class Pipeline:
    name: str
    spec: GrammarSpec
    grammar: NormalGrammar
    fused: FusedGrammar
    automaton: CompiledAutomaton

    def outcomes(self, data: bytes):
        """(accepted, consumed) from all three engines, in the order
        unfused-composite, interpreted, compiled."""
        u = parse_prefix(self.spec.lexer, self.grammar, data)
        i = fparse_interp(self.fused, data)
        a = run_automaton(self.automaton, data)
        return ((u.accepted, u.consumed), (i.accepted, i.consumed),
                (a.accepted, a.consumed))

    def alphabet(self) -> tuple[bytes, bytes]:
        """(live, dead): one representative byte per byte class the
        automaton can consume anywhere, plus up to two never-consumed
        bytes."""
        live: set[int] = set()
        consumable: set[int] = set()
        for sid in range(self.automaton.state_count()):
            acts = self.automaton.actions[sid]
            cmap = self.automaton.class_of[sid]
            reps: dict[int, int] = {}
            for b in range(256):
                ci = cmap[b]
                if acts[ci][0] != EXHAUST:
                    consumable.add(b)
                    if ci not in reps:
                        reps[ci] = b
            live.update(b for ci, b in reps.items())
        # Collapse to one representative per global equivalence: two live
        # bytes are interchangeable if every state treats them alike.
        sig: dict[tuple, int] = {}
        for b in sorted(live):
            key = tuple(self.automaton.class_of[s][b]
                        for s in range(self.automaton.state_count()))
            sig.setdefault(key, b)
        live_reps = bytes(sorted(sig.values()))
        dead = [b for b in range(256) if b not in consumable]
        return live_reps, bytes(dead[:2])


def _build(name: str) -> Pipeline:
    spec = load_grammar_file(shipped_grammar_path(name))
    grammar = trim_unreachable(normalize(spec.expr))
    fused = fuse(spec.lexer, grammar)
    return Pipeline(name, spec, grammar, fused, compile_automaton(fused))


@pytest.fixture(scope="session")
def pipelines() -> dict[str, Pipeline]:
    return {name: _build(name) for name in SHIPPED}


@pytest.fixture(scope="session")
def sexp(pipelines) -> Pipeline:
    return pipelines["sexp"]


@pytest.fixture(scope="session")
def csvp(pipelines) -> Pipeline:
    return pipelines["csv"]


@pytest.fixture(scope="session")
def jsonp(pipelines) -> Pipeline:
    return pipelines["json"]
