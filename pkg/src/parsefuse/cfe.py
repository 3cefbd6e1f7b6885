"""Grammar expressions with deterministic-parsing types.

Expressions are built from the empty word, the empty language, single
tokens, alternation, concatenation, variables, and binding (`Fix`) for
recursion.  Each expression gets a three-part type:

  * null  -- can it produce the empty word?
  * first -- tokens that can start one of its words
  * flast -- tokens that can follow a nonempty proper prefix that is
             itself a complete word (the "follow-last" set)

Two side conditions make parsing deterministic and are enforced here:
a sequence requires the left part's flast set to be disjoint from the
right part's first set and the left part to be non-nullable; an
alternation requires disjoint first sets and at most one nullable arm.
Recursive types are found by iterating from the bottom type; inside the
iteration the side conditions are deferred (a pre-fixpoint may be
briefly too small to satisfy them) and re-checked once stable.

Variables come in two flavours at typing time: those bound in an
enclosing context that has already "made progress" (a guarded
occurrence) and those that have not.  Using a variable in unguarded
position -- e.g. immediately at the start of its own binder -- is
rejected, which rules out left recursion.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Bot(Expr):
    """The empty language."""
    __slots__ = ()


@dataclass(frozen=True)
class Eps(Expr):
    """The language containing only the empty word."""
    __slots__ = ()


@dataclass(frozen=True)
class Tok(Expr):
    token: int


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Seq(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Alt(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Fix(Expr):
    var: str
    body: Expr


@dataclass(frozen=True)
class CfeType:
    null: bool
    first: frozenset[int]
    flast: frozenset[int]


_BOTTOM = CfeType(False, frozenset(), frozenset())


class CfeTypeError(ValueError):
    """Base class for typing failures; `path` locates the offending node."""

    def __init__(self, message: str, path: tuple[str, ...]):
        at = "/".join(path) if path else "(root)"
        super().__init__(f"{message} at {at}")
        self.path = path


class ApartnessViolation(CfeTypeError):
    """Alternation arms that overlap: shared first tokens or two nullables."""


class SeparabilityViolation(CfeTypeError):
    """A sequence whose split point is ambiguous (or whose left part is nullable)."""


class GuardedVarUse(CfeTypeError):
    """A variable used before its binder has consumed any token."""


class UnboundVar(CfeTypeError):
    pass


class FixpointDivergence(CfeTypeError):
    """Type iteration for a binder failed to stabilize within the step bound."""


def seq_type(a: CfeType, b: CfeType) -> CfeType:
    first = a.first | b.first if a.null else a.first
    flast = b.flast | (b.first | a.flast) if b.null else b.flast
    return CfeType(a.null and b.null, first, flast)


def alt_type(a: CfeType, b: CfeType) -> CfeType:
    return CfeType(a.null or b.null, a.first | b.first, a.flast | b.flast)


def separable(a: CfeType, b: CfeType) -> bool:
    return not (a.flast & b.first) and not a.null


def apart(a: CfeType, b: CfeType) -> bool:
    return not (a.first & b.first) and not (a.null and b.null)


def tokens_of(e: Expr) -> frozenset[int]:
    out: set[int] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Tok):
            out.add(node.token)
        elif isinstance(node, (Seq, Alt)):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, Fix):
            stack.append(node.body)
    return frozenset(out)


def type_of(e: Expr, env: dict[str, CfeType] | None = None,
            max_fix_steps: int | None = None) -> CfeType:
    """Type `e`, raising a CfeTypeError subclass if a side condition fails.

    `env` types free variables (they are treated as guarded).  A bound
    variable contributes its candidate type only once the binder's body
    has consumed a token in front of it; unguarded uses raise.
    `max_fix_steps` caps the iteration count per binder (mostly for
    asserting convergence speed in tests).
    """
    guarded = dict(env) if env else {}
    universe = tokens_of(e) | frozenset(
        t for ty in guarded.values() for t in ty.first | ty.flast)
    if max_fix_steps is None:
        max_fix_steps = 2 * len(universe) + 8

    def go(node: Expr, guarded_env, pending_env, strict: bool,
           path: tuple[str, ...]) -> CfeType:
        if isinstance(node, Bot):
            return _BOTTOM
        if isinstance(node, Eps):
            return CfeType(True, frozenset(), frozenset())
        if isinstance(node, Tok):
            return CfeType(False, frozenset((node.token,)), frozenset())
        if isinstance(node, Var):
            if node.name in guarded_env:
                return guarded_env[node.name]
            if node.name in pending_env:
                raise GuardedVarUse(
                    f"variable {node.name!r} used in unguarded position", path)
            raise UnboundVar(f"unbound variable {node.name!r}", path)
        if isinstance(node, Seq):
            ta = go(node.left, guarded_env, pending_env, strict, path + ("seq.left",))
            # Once the left part is behind us, every pending variable is
            # guarded: promote the whole pending context for the right part.
            promoted = {**guarded_env, **pending_env}
            tb = go(node.right, promoted, {}, strict, path + ("seq.right",))
            if strict and not separable(ta, tb):
                clash = sorted(ta.flast & tb.first)
                why = ("left part may match the empty word" if ta.null
                       else f"follow-last/first overlap on tokens {clash}")
                raise SeparabilityViolation(f"ambiguous sequence split: {why}", path)
            return seq_type(ta, tb)
        if isinstance(node, Alt):
            ta = go(node.left, guarded_env, pending_env, strict, path + ("alt.left",))
            tb = go(node.right, guarded_env, pending_env, strict, path + ("alt.right",))
            if strict and not apart(ta, tb):
                if ta.null and tb.null:
                    why = "both arms may match the empty word"
                else:
                    why = f"first sets overlap on tokens {sorted(ta.first & tb.first)}"
                raise ApartnessViolation(f"ambiguous alternation: {why}", path)
            return alt_type(ta, tb)
        if isinstance(node, Fix):
            candidate = _BOTTOM
            steps = 0
            while True:
                pend = {**pending_env, node.var: candidate}
                nxt = go(node.body, guarded_env, pend, False, path + (f"fix {node.var}",))
                steps += 1
                if nxt == candidate:
                    break
                if steps > max_fix_steps:
                    raise FixpointDivergence(
                        f"type iteration for {node.var!r} exceeded "
                        f"{max_fix_steps} steps", path)
                candidate = nxt
            if strict:
                pend = {**pending_env, node.var: candidate}
                go(node.body, guarded_env, pend, True, path + (f"fix {node.var}",))
            return candidate
        raise TypeError(f"not a grammar expression: {node!r}")

    return go(e, guarded, {}, True, ())


def star(e: Expr, var: str = "_star") -> Expr:
    """Zero-or-more repetition, as the usual least fixed point."""
    fresh = var
    taken = _names(e)
    while fresh in taken:
        fresh += "_"
    return Fix(fresh, Alt(Seq(e, Var(fresh)), Eps()))


def _names(e: Expr) -> set[str]:
    out: set[str] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add(node.name)
        elif isinstance(node, (Seq, Alt)):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, Fix):
            out.add(node.var)
            stack.append(node.body)
    return out


def denote_enumerate(e: Expr, max_len: int,
                     env: dict[str, frozenset] | None = None) -> frozenset:
    """All token sequences of length <= max_len in the language of `e`.

    A reference semantics by brute force: binders are unfolded by
    iterating language approximations until the bounded language is
    stable.  Exponential in general -- for tests and small bounds only.
    """
    env = dict(env) if env else {}

    def go(node: Expr, env) -> frozenset:
        if isinstance(node, Bot):
            return frozenset()
        if isinstance(node, Eps):
            return frozenset({()})
        if isinstance(node, Tok):
            return frozenset({(node.token,)}) if max_len >= 1 else frozenset()
        if isinstance(node, Var):
            if node.name not in env:
                raise UnboundVar(f"unbound variable {node.name!r}", ())
            return env[node.name]
        if isinstance(node, Seq):
            lhs = go(node.left, env)
            rhs = go(node.right, env)
            out = set()
            for a in lhs:
                room = max_len - len(a)
                for b in rhs:
                    if len(b) <= room:
                        out.add(a + b)
            return frozenset(out)
        if isinstance(node, Alt):
            return go(node.left, env) | go(node.right, env)
        if isinstance(node, Fix):
            lang: frozenset = frozenset()
            while True:
                nxt = go(node.body, {**env, node.var: lang})
                if nxt == lang:
                    return lang
                lang = nxt
        raise TypeError(f"not a grammar expression: {node!r}")

    return go(e, env)
