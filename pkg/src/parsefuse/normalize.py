"""Turning typed grammar expressions into deterministic Greibach form.

Every production in the normal form starts with a token (`TokP`) or is
the empty word (`EpsP`); tails are nonterminal references only.  The
transformation is compositional: each expression node allocates a fresh
nonterminal and combines the sub-grammars —

  * eps / token / bottom build one-production (or empty) grammars;
  * seq appends the right start nonterminal to every production of the
    left start;
  * alt merges the two starts' productions under a fresh start;
  * a variable becomes a placeholder production (`VarP`) resolved by its
    binder: the binder copies its body start's productions onto the
    variable's own nonterminal, then replaces every VarP-headed
    production by those productions with the old tail appended.

Placeholders never survive normalization of a closed expression; if one
does, `InternalFormLeak` reports a scoping bug rather than returning a
broken grammar.

By default, a sequence whose right operand is a bare variable reference
appends the variable's nonterminal directly instead of going through a
single-production indirection.  `literal=True` keeps the indirection,
which leaves a harmless duplicate of each repetition nonterminal in the
reachable grammar — useful for golden tests of the unoptimized rules.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .cfe import (Alt, Bot, Eps, Expr, Fix, Seq, Tok, UnboundVar, Var)


class EpsP:
    """The empty-word production."""
    __slots__ = ()
    _instance: "EpsP | None" = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "EpsP()"


EPS_P = EpsP()


@dataclass(frozen=True)
class TokP:
    """`token` followed by the nonterminals in `tail`, in order."""
    token: int
    tail: tuple[int, ...]


@dataclass(frozen=True)
class VarP:
    """Placeholder: a still-unresolved variable followed by `tail`."""
    name: str
    tail: tuple[int, ...]


Production = "EpsP | TokP | VarP"


@dataclass
class NormalGrammar:
    start: int
    prods: dict[int, tuple]
    nt_names: dict[int, str] = field(default_factory=dict)
    var_nts: dict[str, int] = field(default_factory=dict)

    def name(self, nt: int) -> str:
        return self.nt_names.get(nt, f"n{nt}")

    def count_productions(self) -> int:
        return sum(len(ps) for ps in self.prods.values())


class InternalFormLeak(AssertionError):
    """A variable placeholder survived normalization of a closed expression."""


class NormalizeError(ValueError):
    """Structurally impossible input (e.g. a nullable left sequence operand)."""


def _prod_key(p):
    if isinstance(p, TokP):
        return (0, p.token, p.tail)
    if isinstance(p, VarP):
        return (1, p.name, p.tail)
    return (2,)


def _append(p, nt: int):
    """Extend production `p` with trailing nonterminal `nt` (the seq rule)."""
    if p is EPS_P:
        raise NormalizeError(
            "cannot append to an empty-word production; "
            "the left operand of a sequence must not be nullable")
    if isinstance(p, TokP):
        return TokP(p.token, p.tail + (nt,))
    return VarP(p.name, p.tail + (nt,))


def _join(p, tail: tuple[int, ...]):
    """Extend production `p` with a whole tail (variable resolution)."""
    if not tail:
        return p
    if p is EPS_P:
        raise NormalizeError(
            "cannot append to an empty-word production during "
            "variable resolution")
    if isinstance(p, TokP):
        return TokP(p.token, p.tail + tail)
    return VarP(p.name, p.tail + tail)


def _alpha_rename(e: Expr) -> Expr:
    """Give every binder a distinct name (free variables untouched)."""
    used: set[str] = set()

    def collect(node):
        if isinstance(node, Fix):
            used.add(node.var)
            collect(node.body)
        elif isinstance(node, (Seq, Alt)):
            collect(node.left)
            collect(node.right)

    collect(e)

    # Track which names have been bound once already, so the second
    # binder of the same name gets a suffixed copy.
    seen: set[str] = set()

    def go2(node, env):
        if isinstance(node, (Bot, Eps, Tok)):
            return node
        if isinstance(node, Var):
            return Var(env.get(node.name, node.name))
        if isinstance(node, Seq):
            return Seq(go2(node.left, env), go2(node.right, env))
        if isinstance(node, Alt):
            return Alt(go2(node.left, env), go2(node.right, env))
        if isinstance(node, Fix):
            name = node.var
            if name in seen:
                k = 2
                while f"{name}_{k}" in used or f"{name}_{k}" in seen:
                    k += 1
                fresh = f"{name}_{k}"
            else:
                fresh = name
            seen.add(fresh)
            used.add(fresh)
            return Fix(fresh, go2(node.body, {**env, node.var: fresh}))
        raise TypeError(f"not a grammar expression: {node!r}")

    return go2(e, {})


def normalize(e: Expr, *, literal: bool = False) -> NormalGrammar:
    """Normalize closed, well-typed `e`.  The result is untrimmed; run
    `trim_unreachable` to drop the junk nonterminals the compositional
    rules leave behind."""
    e = _alpha_rename(e)
    prods: dict[int, list] = {}
    names: dict[int, str] = {}
    var_nts: dict[str, int] = {}
    counter = itertools.count()

    def fresh(name: str | None = None) -> int:
        i = next(counter)
        names[i] = name if name is not None else f"n{i}"
        prods[i] = []
        return i

    def add(nt: int, p) -> None:
        if p not in prods[nt]:
            prods[nt].append(p)

    def go(node: Expr, bound: set[str]) -> int:
        if isinstance(node, Eps):
            n = fresh()
            add(n, EPS_P)
            return n
        if isinstance(node, Bot):
            return fresh()
        if isinstance(node, Tok):
            n = fresh()
            add(n, TokP(node.token, ()))
            return n
        if isinstance(node, Var):
            if node.name not in bound:
                raise UnboundVar(f"unbound variable {node.name!r}", ())
            n = fresh()
            add(n, VarP(node.name, ()))
            return n
        if isinstance(node, Seq):
            s1 = go(node.left, bound)
            s2 = go(node.right, bound)
            target = s2
            if not literal and len(prods[s2]) == 1:
                only = prods[s2][0]
                if isinstance(only, VarP) and not only.tail:
                    target = var_nts[only.name]
            n = fresh()
            for p in prods[s1]:
                add(n, _append(p, target))
            return n
        if isinstance(node, Alt):
            s1 = go(node.left, bound)
            s2 = go(node.right, bound)
            n = fresh()
            for p in prods[s1]:
                add(n, p)
            for p in prods[s2]:
                add(n, p)
            return n
        if isinstance(node, Fix):
            # The variable's nonterminal exists before the body is
            # processed so bare references can point at it directly.
            a_nt = fresh(node.var)
            var_nts[node.var] = a_nt
            s = go(node.body, bound | {node.var})
            replacement = list(prods[s])
            for q in replacement:
                if isinstance(q, VarP) and q.name == node.var:
                    raise NormalizeError(
                        f"start productions of a binder body may not begin "
                        f"with the bound variable {node.var!r}")
            for p in replacement:
                add(a_nt, p)
            for nt in prods:
                old = prods[nt]
                if any(isinstance(p, VarP) and p.name == node.var for p in old):
                    new: list = []
                    for p in old:
                        if isinstance(p, VarP) and p.name == node.var:
                            for q in replacement:
                                r = _join(q, p.tail)
                                if r not in new:
                                    new.append(r)
                        elif p not in new:
                            new.append(p)
                    prods[nt] = new
            return a_nt
        raise TypeError(f"not a grammar expression: {node!r}")

    start = go(e, set())
    for nt, ps in prods.items():
        for p in ps:
            if isinstance(p, VarP):
                raise InternalFormLeak(
                    f"placeholder for {p.name!r} survived in nonterminal "
                    f"{names[nt]}")
    out = {nt: tuple(sorted(ps, key=_prod_key)) for nt, ps in prods.items()}
    return NormalGrammar(start, out, names, dict(var_nts))


def trim_unreachable(g: NormalGrammar) -> NormalGrammar:
    reach = {g.start}
    work = [g.start]
    while work:
        nt = work.pop()
        for p in g.prods.get(nt, ()):
            tail = p.tail if isinstance(p, (TokP, VarP)) else ()
            for m in tail:
                if m not in reach:
                    reach.add(m)
                    work.append(m)
            if isinstance(p, VarP) and p.name in g.var_nts:
                m = g.var_nts[p.name]
                if m not in reach:
                    reach.add(m)
                    work.append(m)
    prods = {nt: g.prods[nt] for nt in g.prods if nt in reach}
    names = {nt: g.nt_names[nt] for nt in prods if nt in g.nt_names}
    var_nts = {v: nt for v, nt in g.var_nts.items() if nt in reach}
    return NormalGrammar(g.start, prods, names, var_nts)


@dataclass(frozen=True)
class DgnfViolation:
    kind: str  # "determinism" | "guarded-eps"
    nonterminals: tuple[int, ...]
    tokens: frozenset[int]
    message: str


def first_set(g: NormalGrammar, nt: int) -> frozenset[int]:
    return frozenset(p.token for p in g.prods.get(nt, ())
                     if isinstance(p, TokP))


def _adjacent_pairs(g: NormalGrammar) -> set[tuple[int, int]]:
    """Over-approximate which nonterminal can be expanded directly before
    which other one, starting from any reachable production body."""
    adj: set[tuple[int, int]] = set()
    has_eps = {nt for nt, ps in g.prods.items() if any(p is EPS_P for p in ps)}
    for ps in g.prods.values():
        for p in ps:
            if isinstance(p, TokP):
                for a, b in zip(p.tail, p.tail[1:]):
                    adj.add((a, b))
    changed = True
    while changed:
        changed = False
        for (a, b) in list(adj):
            # Expanding a's leading token production puts its last tail
            # nonterminal right before b.
            for p in g.prods.get(a, ()):
                if isinstance(p, TokP) and p.tail:
                    pair = (p.tail[-1], b)
                    if pair not in adj:
                        adj.add(pair)
                        changed = True
            # If a can vanish, whatever preceded a now precedes b.
            if a in has_eps:
                for (x, y) in list(adj):
                    if y == a and (x, b) not in adj:
                        adj.add((x, b))
                        changed = True
    return adj


def check_dgnf(g: NormalGrammar) -> list[DgnfViolation]:
    """Empty list when `g` satisfies determinism and guarded-ε."""
    out: list[DgnfViolation] = []
    for nt, ps in g.prods.items():
        seen: dict[int, int] = {}
        for p in ps:
            if isinstance(p, VarP):
                raise InternalFormLeak(
                    f"placeholder production in nonterminal {g.name(nt)}")
            if isinstance(p, TokP):
                seen[p.token] = seen.get(p.token, 0) + 1
        for t, k in seen.items():
            if k > 1:
                out.append(DgnfViolation(
                    "determinism", (nt,), frozenset((t,)),
                    f"{g.name(nt)} has {k} productions starting with "
                    f"token {t}"))
    rg = trim_unreachable(g)
    has_eps = {nt for nt, ps in rg.prods.items() if any(p is EPS_P for p in ps)}
    reported = set()
    for (a, b) in sorted(_adjacent_pairs(rg)):
        if a in has_eps:
            common = first_set(rg, a) & first_set(rg, b)
            if common and (a, b) not in reported:
                reported.add((a, b))
                out.append(DgnfViolation(
                    "guarded-eps", (a, b), frozenset(common),
                    f"{rg.name(a)} may vanish in front of {rg.name(b)} but "
                    f"both can start with token(s) {sorted(common)}"))
    return out


def expand_enumerate(g: NormalGrammar, nt: int | None = None,
                     max_len: int = 8) -> frozenset:
    """All token words of length <= max_len derivable from `nt` (default:
    the start symbol) by expanding productions."""
    if nt is None:
        nt = g.start
    words_memo: dict[tuple[int, int], frozenset] = {}
    tails_memo: dict[tuple[tuple[int, ...], int], frozenset] = {}

    def words(n: int, budget: int) -> frozenset:
        key = (n, budget)
        got = words_memo.get(key)
        if got is not None:
            return got
        out: set = set()
        for p in g.prods.get(n, ()):
            if p is EPS_P:
                out.add(())
            elif isinstance(p, TokP):
                if budget >= 1:
                    for rest in tail_words(p.tail, budget - 1):
                        out.add((p.token,) + rest)
            else:
                raise InternalFormLeak(
                    f"placeholder production in nonterminal {g.name(n)}")
        result = frozenset(out)
        words_memo[key] = result
        return result

    def tail_words(tail: tuple[int, ...], budget: int) -> frozenset:
        if not tail:
            return frozenset({()})
        key = (tail, budget)
        got = tails_memo.get(key)
        if got is not None:
            return got
        out: set = set()
        for w in words(tail[0], budget):
            for rest in tail_words(tail[1:], budget - len(w)):
                out.add(w + rest)
        result = frozenset(out)
        tails_memo[key] = result
        return result

    return words(nt, max_len)


class DgnfShapeError(ValueError):
    """Text that is not in normal shape (e.g. a token in a tail position)."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def dump_dgnf(g: NormalGrammar, token_names: dict[int, str] | None = None) -> str:
    """Stable text form: start symbol alone on the first line, then one
    production per line in deterministic order."""
    token_names = token_names or {}

    def tok(t: int) -> str:
        return token_names.get(t, f"T{t}")

    lines = [g.name(g.start)]
    order = [g.start] + sorted(n for n in g.prods if n != g.start)
    for nt in order:
        for p in sorted(g.prods[nt], key=_prod_key):
            if p is EPS_P:
                lines.append(f"{g.name(nt)} -> <eps>")
            elif isinstance(p, TokP):
                parts = [tok(p.token)] + [g.name(m) for m in p.tail]
                lines.append(f"{g.name(nt)} -> {' '.join(parts)}")
            else:
                parts = [p.name] + [g.name(m) for m in p.tail]
                lines.append(f"{g.name(nt)} -> {' '.join(parts)}")
    return "\n".join(lines) + "\n"


def parse_dgnf(text: str, token_ids: dict[str, int]) -> NormalGrammar:
    """Inverse of `dump_dgnf` for hand-written normal grammars.

    Every production body must be `<eps>` or a token name followed by
    nonterminal names; anything else raises DgnfShapeError.
    """
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(no, ln) for no, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise DgnfShapeError("empty grammar text", 1)
    start_line, start_name = lines[0]
    if "->" in start_name:
        raise DgnfShapeError("first line must name the start symbol", start_line)
    entries = []
    nt_ids: dict[str, int] = {}

    def intern(name: str) -> int:
        if name not in nt_ids:
            nt_ids[name] = len(nt_ids)
        return nt_ids[name]

    intern(start_name)
    for no, ln in lines[1:]:
        if "->" not in ln:
            raise DgnfShapeError("expected `name -> body`", no)
        head, body = ln.split("->", 1)
        head = head.strip()
        if not head:
            raise DgnfShapeError("missing head nonterminal", no)
        entries.append((no, intern(head), body.split()))
    prods: dict[int, list] = {nt: [] for nt in nt_ids.values()}
    for no, head, body in entries:
        if body == ["<eps>"] or not body:
            if EPS_P not in prods[head]:
                prods[head].append(EPS_P)
            continue
        lead, *tail = body
        if lead not in token_ids:
            raise DgnfShapeError(
                f"production body must start with a token, got {lead!r}", no)
        tail_ids = []
        for sym in tail:
            if sym in token_ids and sym not in nt_ids:
                raise DgnfShapeError(
                    f"token {sym!r} in tail position (only the first symbol "
                    f"may be a token)", no)
            if sym not in nt_ids:
                raise DgnfShapeError(f"unknown nonterminal {sym!r}", no)
            tail_ids.append(nt_ids[sym])
        p = TokP(token_ids[lead], tuple(tail_ids))
        if p not in prods[head]:
            prods[head].append(p)
    names = {i: n for n, i in nt_ids.items()}
    out = {nt: tuple(sorted(ps, key=_prod_key)) for nt, ps in prods.items()}
    return NormalGrammar(nt_ids[start_name], out, names, {})
