"""parsefuse: deterministic grammars compiled into lexer-free byte parsers.

The pipeline, end to end:

    grammar text -> typed expression -> deterministic Greibach normal
    form -> lexer fused in (token boundaries become regex commits) ->
    byte-class automaton.

`compile_grammar` runs the whole thing and hands back an object that
can parse bytes with either engine; the individual stages live in their
own modules for direct use and inspection.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .cfe import CfeType, type_of
from .engine import (CompiledAutomaton, ParseOutcome, compile_automaton,
                     fparse_interp, run_automaton)
from .fusion import FusedGrammar, fuse
from .grammar_file import GrammarSpec, load_grammar, load_grammar_file
from .lexer import Lexer, LexError, lex
from .normalize import (NormalGrammar, check_dgnf, normalize,
                        trim_unreachable)
from .token_parser import PrefixResult, parse_prefix, parse_tokens

__version__ = "0.1.0"

__all__ = [
    "CfeType", "CompiledAutomaton", "CompiledGrammar", "FusedGrammar",
    "GrammarSpec", "LexError", "Lexer", "NormalGrammar", "ParseOutcome",
    "PrefixResult", "__version__", "check_dgnf", "compile_automaton",
    "compile_grammar", "fparse_interp", "fuse", "lex", "load_grammar",
    "load_grammar_file", "normalize", "parse_prefix", "parse_tokens",
    "run_automaton", "shipped_grammar_path", "trim_unreachable", "type_of",
]


def shipped_grammar_path(name: str) -> Path | None:
    """Path of a grammar bundled with the package (sexp/csv/json), or
    None if `name` is not one of them."""
    candidate = Path(__file__).parent / "grammars" / f"{name}.g"
    if name.isidentifier() and candidate.exists():
        return candidate
    return None


@dataclass
class CompiledGrammar:
    spec: GrammarSpec
    expr_type: CfeType
    grammar: NormalGrammar
    fused: FusedGrammar
    automaton: CompiledAutomaton

    def parse(self, data: bytes, backend: str = "auto",
              emit_events: bool = False) -> ParseOutcome:
        if backend == "auto":
            return run_automaton(self.automaton, data, emit_events)
        if backend == "interp":
            return fparse_interp(self.fused, data, emit_events)
        raise ValueError(f"unknown backend {backend!r}")

    def parse_unfused(self, data: bytes) -> PrefixResult:
        return parse_prefix(self.spec.lexer, self.grammar, data)


def compile_grammar(text: str) -> CompiledGrammar:
    """Full pipeline over grammar-file text; raises on any failed stage."""
    spec = load_grammar(text)
    ty = type_of(spec.expr)
    grammar = trim_unreachable(normalize(spec.expr))
    violations = check_dgnf(grammar)
    if violations:
        raise ValueError("grammar is not deterministic: "
                         + "; ".join(v.message for v in violations))
    fused = fuse(spec.lexer, grammar)
    automaton = compile_automaton(fused)
    return CompiledGrammar(spec, ty, grammar, fused, automaton)
