"""The `.g` grammar file format.

A grammar file declares a lexer and a set of rules:

    # s-expressions
    token LPAR = "(" ;
    token RPAR = ")" ;
    token ATOM = [a-z]+ ;
    skip = [ \\n] ;
    start sexp ;
    sexp  ::= LPAR sexps RPAR | ATOM ;
    sexps ::= sexp sexps | ;

Statements end with `;`.  Token and skip right-hand sides use the regex
syntax of `parse_regex`; rule bodies are just symbol names, with `|`
between alternatives and an empty alternative meaning the empty word.
`#` comments run to end of line (except inside quotes or classes).

Rules are lowered to one expression by inlining: a reference to a rule
currently being inlined becomes a bound variable, and the rule then
wraps itself in a binder.  Inlining duplicates shared rules, which is
fine for small grammars but exponential for large mutually recursive
clusters — a cluster of more than 8 rules is rejected, and a lowered
expression over 50k nodes draws a warning.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .cfe import Alt, Eps, Expr, Fix, Seq, Tok, Var
from .lexer import Lexer, LexRule, canonicalize_lexer
from .regex import Regex, RegexSyntaxError, parse_regex


class GrammarFileError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


MAX_RECURSION_CLUSTER = 8
NODE_BLOWUP_WARNING = 50_000


@dataclass
class GrammarSpec:
    token_ids: dict[str, int]
    token_names: dict[int, str]
    lexer: Lexer
    start: str
    expr: Expr
    rule_names: tuple[str, ...]


def _statements(text: str):
    """Split into `;`-terminated statements, respecting quotes, classes
    and comments.  Yields (line-number, statement-text)."""
    out = []
    buf: list[str] = []
    line = 1
    stmt_line = None
    mode = "normal"  # | "quote" | "class" | "comment"
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
        if mode == "comment":
            if ch == "\n":
                mode = "normal"
            i += 1
            continue
        if mode == "quote":
            buf.append(ch)
            if ch == "\\" and i + 1 < n:
                buf.append(text[i + 1])
                i += 2
                continue
            if ch == '"':
                mode = "normal"
            i += 1
            continue
        if mode == "class":
            buf.append(ch)
            if ch == "\\" and i + 1 < n:
                buf.append(text[i + 1])
                i += 2
                continue
            if ch == "]":
                mode = "normal"
            i += 1
            continue
        # normal mode
        if ch == "#":
            mode = "comment"
            i += 1
            continue
        if ch == ";":
            stmt = "".join(buf).strip()
            if stmt:
                out.append((stmt_line or line, stmt))
            buf = []
            stmt_line = None
            i += 1
            continue
        if not ch.isspace() and stmt_line is None:
            stmt_line = line
        if ch == '"':
            mode = "quote"
        elif ch == "[":
            mode = "class"
        buf.append(ch)
        i += 1
    tail = "".join(buf).strip()
    if tail:
        raise GrammarFileError("unterminated statement (missing ';')",
                               stmt_line or line)
    if mode == "quote":
        raise GrammarFileError("unterminated string literal", line)
    if mode == "class":
        raise GrammarFileError("unterminated character class", line)
    return out


def _is_name(s: str) -> bool:
    return s.isidentifier()


def _free_vars(e: Expr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, (Seq, Alt)):
        return _free_vars(e.left) | _free_vars(e.right)
    if isinstance(e, Fix):
        return _free_vars(e.body) - {e.var}
    return frozenset()


def _node_count(e: Expr) -> int:
    if isinstance(e, (Seq, Alt)):
        return 1 + _node_count(e.left) + _node_count(e.right)
    if isinstance(e, Fix):
        return 1 + _node_count(e.body)
    return 1


def _sccs(graph: dict[str, set[str]]) -> list[set[str]]:
    """Tarjan's strongly connected components, iteratively."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on: set[str] = set()
    stack: list[str] = []
    out: list[set[str]] = []
    counter = [0]

    def visit(root: str):
        work = [(root, iter(sorted(graph.get(root, ()))))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in graph:
                    continue
                if nxt not in index:
                    index[nxt] = low[nxt] = counter[0]
                    counter[0] += 1
                    stack.append(nxt)
                    on.add(nxt)
                    work.append((nxt, iter(sorted(graph.get(nxt, ())))))
                    advanced = True
                    break
                if nxt in on:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = set()
                while True:
                    m = stack.pop()
                    on.discard(m)
                    comp.add(m)
                    if m == node:
                        break
                out.append(comp)

    for v in sorted(graph):
        if v not in index:
            visit(v)
    return out


def load_grammar(text: str) -> GrammarSpec:
    token_ids: dict[str, int] = {}
    token_lines: dict[str, int] = {}
    lex_rules: list[LexRule] = []
    rules: dict[str, list[list[str]]] = {}
    rule_lines: dict[str, int] = {}
    start: str | None = None
    start_line = None

    for line, stmt in _statements(text):
        head = stmt.split(None, 1)[0]
        if head == "token":
            rest = stmt[len("token"):].strip()
            if "=" not in rest:
                raise GrammarFileError("expected `token NAME = regex`", line)
            name, rx = rest.split("=", 1)
            name = name.strip()
            if not _is_name(name):
                raise GrammarFileError(f"bad token name {name!r}", line)
            if name in token_ids:
                raise GrammarFileError(f"duplicate token {name}", line)
            try:
                pattern = parse_regex(rx.strip())
            except RegexSyntaxError as e:
                raise GrammarFileError(f"in token {name}: {e}", line) from e
            token_ids[name] = len(token_ids)
            token_lines[name] = line
            lex_rules.append(LexRule(pattern, token_ids[name]))
        elif stmt.startswith("skip") and stmt[len("skip"):].lstrip().startswith("="):
            rx = stmt.split("=", 1)[1].strip()
            try:
                pattern = parse_regex(rx)
            except RegexSyntaxError as e:
                raise GrammarFileError(f"in skip: {e}", line) from e
            lex_rules.append(LexRule(pattern, None))
        elif head == "start":
            name = stmt[len("start"):].strip()
            if not _is_name(name):
                raise GrammarFileError(f"bad start symbol {name!r}", line)
            if start is not None:
                raise GrammarFileError("duplicate start declaration", line)
            start = name
            start_line = line
        elif "::=" in stmt:
            name, body = stmt.split("::=", 1)
            name = name.strip()
            if not _is_name(name):
                raise GrammarFileError(f"bad rule name {name!r}", line)
            if name in rules:
                raise GrammarFileError(f"duplicate rule {name}", line)
            if name in token_ids:
                raise GrammarFileError(
                    f"{name} is already a token name", line)
            alts = []
            for alt_text in body.split("|"):
                syms = alt_text.split()
                for s in syms:
                    if not _is_name(s):
                        raise GrammarFileError(
                            f"bad symbol {s!r} in rule {name}", line)
                alts.append(syms)
            rules[name] = alts
            rule_lines[name] = line
        else:
            raise GrammarFileError(f"cannot parse statement {stmt!r}", line)

    if start is None:
        raise GrammarFileError("missing `start NAME ;` declaration")
    if start not in rules:
        raise GrammarFileError(f"start rule {start!r} is not defined",
                               start_line)
    for name, alts in rules.items():
        for syms in alts:
            for s in syms:
                if s not in token_ids and s not in rules:
                    raise GrammarFileError(
                        f"unknown symbol {s!r} in rule {name}",
                        rule_lines[name])

    graph = {name: {s for syms in alts for s in syms if s in rules}
             for name, alts in rules.items()}
    for comp in _sccs(graph):
        if len(comp) > MAX_RECURSION_CLUSTER:
            raise GrammarFileError(
                f"mutual recursion cluster {sorted(comp)} has "
                f"{len(comp)} rules (limit {MAX_RECURSION_CLUSTER}); "
                f"inlining would explode")

    building: list[str] = []

    def lower_rule(name: str) -> Expr:
        building.append(name)
        body: Expr | None = None
        for syms in rules[name]:
            arm: Expr | None = None
            for s in syms:
                atom = (Tok(token_ids[s]) if s in token_ids
                        else lower_ref(s))
                arm = atom if arm is None else Seq(arm, atom)
            if arm is None:
                arm = Eps()
            body = arm if body is None else Alt(body, arm)
        building.pop()
        assert body is not None  # rules always have >= 1 alternative
        if name in _free_vars(body):
            return Fix(name, body)
        return body

    def lower_ref(name: str) -> Expr:
        if name in building:
            return Var(name)
        return lower_rule(name)

    expr = lower_rule(start)
    count = _node_count(expr)
    if count > NODE_BLOWUP_WARNING:
        warnings.warn(
            f"lowered grammar has {count} nodes; rule inlining is "
            f"duplicating heavily")

    token_names = {i: n for n, i in token_ids.items()}
    lexer = canonicalize_lexer(lex_rules, token_names)
    return GrammarSpec(token_ids, token_names, lexer, start, expr,
                       tuple(rules))


def load_grammar_file(path) -> GrammarSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return load_grammar(fh.read())
