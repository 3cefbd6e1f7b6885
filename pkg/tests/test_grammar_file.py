from __future__ import annotations

import pytest

from parsefuse.cfe import Alt, Eps, Fix, Seq, Tok, Var
from parsefuse.grammar_file import (GrammarFileError, MAX_RECURSION_CLUSTER,
                                    load_grammar, load_grammar_file)
from parsefuse.normalize import dump_dgnf, normalize, trim_unreachable
from parsefuse.regex import literal

SEXP_G = "src/parsefuse/grammars/sexp.g"

LPAR, RPAR, ATOM = 0, 1, 2


def test_shipped_sexp_matches_hand_built_expression():
    spec = load_grammar_file(SEXP_G)
    assert spec.token_ids == {"LPAR": 0, "RPAR": 1, "ATOM": 2}
    assert spec.token_names[2] == "ATOM"
    assert spec.start == "sexp"
    assert spec.rule_names == ("sexp", "sexps")
    sexps = Fix("sexps", Alt(Eps(), Seq(Var("sexp"), Var("sexps"))))
    hand = Fix("sexp", Alt(Seq(Seq(Tok(LPAR), sexps), Tok(RPAR)),
                           Tok(ATOM)))
    assert spec.expr == hand


def test_token_ids_follow_declaration_order():
    spec = load_grammar(
        'token Z = "z" ; token A = "a" ; start s ; s ::= Z A ;')
    assert spec.token_ids == {"Z": 0, "A": 1}


def test_quoted_semicolon_does_not_end_the_statement():
    spec = load_grammar('token SEMI = ";" ; start s ; s ::= SEMI ;')
    assert spec.lexer.token_regex(0) is literal(b";")


def test_comments_and_blank_statements_are_ignored():
    spec = load_grammar(
        "# heading; with a semicolon\n"
        'token A = "a" ; # trailing note\n'
        ";;\n"
        "start s ;\n"
        "s ::= A ;\n")
    assert spec.rule_names == ("s",)


def test_mutually_recursive_rules_load_and_normalize():
    spec = load_grammar(
        'token A = "a" ; token B = "b" ; start row ;\n'
        "row ::= A after ;\n"
        "after ::= B row | ;\n")
    assert spec.rule_names == ("row", "after")
    g = trim_unreachable(normalize(spec.expr))
    text = dump_dgnf(g, spec.token_names)
    assert text.splitlines()[0] == "row"
    assert "A" in text and "B" in text


def test_recursion_cluster_limit():
    n = MAX_RECURSION_CLUSTER + 1
    lines = ['token A = "a" ;', "start r0 ;"]
    for i in range(n):
        lines.append(f"r{i} ::= A r{(i + 1) % n} | A ;")
    with pytest.raises(GrammarFileError) as exc:
        load_grammar("\n".join(lines))
    assert f"{n} rules" in str(exc.value)
    assert "limit 8" in str(exc.value)


def test_node_blowup_warning():
    depth = 17  # ~2**18 nodes once the diamond chain is inlined
    lines = ['token A = "a" ;', "start d0 ;"]
    for i in range(depth):
        lines.append(f"d{i} ::= d{i + 1} d{i + 1} ;")
    lines.append(f"d{depth} ::= A A ;")
    with pytest.warns(UserWarning, match="nodes"):
        load_grammar("\n".join(lines))


@pytest.mark.parametrize("text, line, needle", [
    ('token A = "a" ; s ::= A ;', None, "missing `start"),
    ('token A = "a" ; start t ; s ::= A ;', 1, "start rule 't' is not"),
    ('token A = "a" ;\nstart s ;\ns ::= A q ;', 3, "unknown symbol 'q'"),
    ('token A = "a" ;\ntoken A = "b" ;\nstart s ; s ::= A ;', 2,
     "duplicate token A"),
    ('token A = "a" ;\nstart s ;\ns ::= A ;\ns ::= A A ;', 4,
     "duplicate rule s"),
    ('token A = "a" ;\nstart A ;\nA ::= A ;', 3, "already a token name"),
    ('token A = [z-a] ;\nstart s ; s ::= A ;', 1, "in token A:"),
    ('skip = [z-a] ;\nstart s ; s ::= A ;', 1, "in skip:"),
    ('token A = "a" ;\nwibble wobble ;\nstart s ; s ::= A ;', 2,
     "cannot parse statement"),
    ('token A = "a" ;\nstart s ;\ns ::= A', 3, "missing ';'"),
    ('token A = "a" ;\nstart s ;\ns ::= 3x ;', 3, "bad symbol '3x'"),
    ('token 9A = "a" ;\nstart s ; s ::= A ;', 1, "bad token name"),
])
def test_error_reporting(text, line, needle):
    with pytest.raises(GrammarFileError) as exc:
        load_grammar(text)
    assert needle in str(exc.value)
    assert exc.value.line == line
    if line is not None:
        assert f"line {line}:" in str(exc.value)


def test_unterminated_quote_is_an_unterminated_statement():
    # the open quote swallows the `;`, so the statement never closes
    with pytest.raises(GrammarFileError, match="missing ';'"):
        load_grammar('token A = "a ;\nstart s ; s ::= A ;')


def test_loader_rejects_missing_file():
    with pytest.raises(OSError):
        load_grammar_file("src/parsefuse/grammars/nope.g")
