"""Fusing a canonical lexer into a deterministic normal grammar.

Three rewrites, per nonterminal:

  1. every token-headed production `n -> t tail` becomes a byte-level
     production `n -> r tail`, where r is the lexer rule returning t --
     the lexer is effectively specialized to the tokens each
     nonterminal can actually start with;
  2. if the lexer skips anything (whitespace, comments), every
     nonterminal gets the self-loop `n -> skip n`, which is how skipped
     bytes disappear without a token ever existing;
  3. an ε-production becomes a negative lookahead over the union of the
     nonterminal's match regexes: "accept emptily exactly when no match
     could begin here".

The result never mentions tokens, only regexes over bytes, and within a
nonterminal the match regexes stay pairwise disjoint (grammar
determinism plus lexer disjointness), which is what keeps the byte-level
engines deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lexer import Lexer
from .normalize import EPS_P, NormalGrammar, TokP
from .regex import BOT, Regex, alt, not_, show


@dataclass(frozen=True)
class Match:
    """Scan `regex`; on commit, continue with the nonterminals in `then`."""
    regex: Regex
    then: tuple[int, ...]
    token: int | None = None  # provenance (token id / None for skip), for dumps


@dataclass(frozen=True)
class Lookahead:
    """Succeed without consuming anything iff `regex` is viable here.

    Engines never scan this regex: it is by construction the complement
    of the nonterminal's match union, so "no match commits" is the same
    test.  It is carried for dumps and cross-checks.
    """
    regex: Regex


@dataclass
class FusedGrammar:
    start: int
    prods: dict[int, tuple]
    skip: Regex = BOT
    nt_names: dict[int, str] = field(default_factory=dict)

    def name(self, nt: int) -> str:
        return self.nt_names.get(nt, f"n{nt}")

    def count_productions(self) -> int:
        return sum(len(ps) for ps in self.prods.values())


class MissingTokenRule(ValueError):
    def __init__(self, token: int, name: str):
        super().__init__(f"grammar uses token {name} but the lexer has no "
                         f"rule returning it")
        self.token = token


def fuse(lexer: Lexer, g: NormalGrammar, start: int | None = None) -> FusedGrammar:
    """Build the byte-level grammar.  Within each nonterminal the order
    is: matches in grammar production order, then the skip self-loop,
    then the lookahead -- engines rely on this ordering for stable
    production ordinals."""
    if start is None:
        start = g.start
    token_re: dict[int, Regex] = {}
    for rule in lexer.rules:
        if rule.token is not None and rule.token not in token_re:
            token_re[rule.token] = rule.pattern
    skip = lexer.skip_regex
    prods: dict[int, tuple] = {}
    for nt, ps in g.prods.items():
        out: list = []
        has_eps = False
        for p in ps:
            if p is EPS_P:
                has_eps = True
                continue
            assert isinstance(p, TokP)
            r = token_re.get(p.token)
            if r is None:
                name = lexer.token_names.get(p.token, f"token {p.token}")
                raise MissingTokenRule(p.token, name)
            out.append(Match(r, p.tail, p.token))
        if skip is not BOT:
            out.append(Match(skip, (nt,), None))
        if has_eps:
            out.append(Lookahead(not_(alt(*(m.regex for m in out)))))
        prods[nt] = tuple(out)
    return FusedGrammar(start, prods, skip, dict(g.nt_names))


def dump_fused(f: FusedGrammar) -> str:
    """Stable text form: start symbol first, `?!` marks the lookahead."""
    lines = [f.name(f.start)]
    order = [f.start] + sorted(n for n in f.prods if n != f.start)
    for nt in order:
        for p in f.prods[nt]:
            if isinstance(p, Match):
                parts = [show(p.regex)] + [f.name(m) for m in p.then]
                lines.append(f"{f.name(nt)} -> {' '.join(parts)}")
            else:
                lines.append(f"{f.name(nt)} -> ?! {show(p.regex)}")
    return "\n".join(lines) + "\n"
