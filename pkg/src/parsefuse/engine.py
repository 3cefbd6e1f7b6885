"""Byte-level execution of fused grammars.

Two runtime strategies share one semantics:

  * `fparse_interp` recomputes regex derivatives per input byte -- the
    direct, slow reference.
  * `compile_automaton` + `run_automaton` precompute every reachable
    derivative vector once, keyed by byte class, so the hot loop is a
    couple of table lookups per byte ("specialize first, then run").

Both maintain the same two cursors per nonterminal scan: the probe
position and the last committed match end.  A scan walks forward until
its live regex vector dies or input ends, remembering the most recent
position where some production's regex turned nullable (a commit); it
then resumes from that commit, pushing the production's tail
nonterminals — or, if nothing committed, takes the nonterminal's
ε-lookahead (consume nothing) or fails.  A commit further right always
wins: longest match, same as the standalone lexer.

`emit_source` renders the automaton as mutually recursive functions,
one per (state, pending-continuation) pair, with byte-range match arms
— a readable picture of what specialization buys, and runnable when the
python backend is selected.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fusion import FusedGrammar, Lookahead, Match
from .regex import BOT, deriv, partition_masks


@dataclass(frozen=True)
class Failure:
    offset: int
    nonterminal: int


@dataclass(frozen=True)
class ParseOutcome:
    accepted: bool
    consumed: int
    failure: Failure | None = None
    events: tuple | None = None


def _match_vector(ps) -> tuple:
    return tuple((p.regex, p.then, i) for i, p in enumerate(ps)
                 if isinstance(p, Match))


def _has_lookahead(ps) -> bool:
    return any(isinstance(p, Lookahead) for p in ps)


def fparse_interp(f: FusedGrammar, data: bytes,
                  emit_events: bool = False) -> ParseOutcome:
    """Direct interpretation: derivatives taken per byte, nothing cached
    beyond what the regex layer itself memoizes."""
    init = {nt: _match_vector(ps) for nt, ps in f.prods.items()}
    back = {nt: _has_lookahead(ps) for nt, ps in f.prods.items()}
    stack = [f.start]
    pos = 0
    n = len(data)
    events = [] if emit_events else None
    while stack:
        nt = stack.pop()
        vec = init[nt]
        tok_start = pos
        best_then = None
        best_ord = -1
        best_pos = tok_start
        committed = False
        cur = tok_start
        while cur < n and vec:
            c = data[cur]
            nvec = []
            commit_then = None
            commit_ord = -1
            for e in vec:
                r = e[0]
                d = r._dcache.get(c)
                if d is None:
                    d = deriv(r, c)
                if d is not BOT:
                    nvec.append(e if d is r else (d, e[1], e[2]))
                    if commit_then is None and d.nullable:
                        commit_then = e[1]
                        commit_ord = e[2]
            if not nvec:
                break
            cur += 1
            vec = nvec
            if commit_then is not None:
                committed = True
                best_then = commit_then
                best_ord = commit_ord
                best_pos = cur
        if committed:
            pos = best_pos
            if events is not None:
                events.append((nt, best_ord, tok_start, best_pos))
            stack.extend(reversed(best_then))
        elif back[nt]:
            pos = tok_start
        else:
            ev = tuple(events) if events is not None else None
            return ParseOutcome(False, tok_start, Failure(tok_start, nt), ev)
    ev = tuple(events) if events is not None else None
    return ParseOutcome(True, pos, None, ev)


class StateBudgetExceeded(RuntimeError):
    pass


# Action tuples: (GOTO, state) | (COMMIT, state, ordinal, reversed-tail)
# | (EXHAUST,)
GOTO, COMMIT, EXHAUST = 0, 1, 2


@dataclass
class CompiledAutomaton:
    start: int
    entry: dict[int, int]
    init_back: dict[int, bool]
    class_of: list[bytes]           # state -> byte -> class id
    actions: list[tuple]            # state -> class id -> action tuple
    by_byte: list[tuple]            # state -> byte -> action tuple (hot path)
    state_meta: list[tuple]         # state -> (nonterminal, regex-vector)
    nt_names: dict[int, str]

    def name(self, nt: int) -> str:
        return self.nt_names.get(nt, f"n{nt}")

    def state_count(self) -> int:
        return len(self.actions)


def compile_automaton(f: FusedGrammar,
                      state_budget: int = 1_000_000) -> CompiledAutomaton:
    """Close the derivative-vector space per nonterminal into a table.

    States are memoized by (nonterminal, derivative vector); the vector
    keeps production order, so construction and numbering are
    deterministic.  Per state, bytes are grouped into classes that every
    live regex treats uniformly; each class gets one precomputed action.
    """
    index: dict[tuple, int] = {}
    vectors: list[tuple] = []
    owners: list[int] = []
    work: list[int] = []

    def intern(nt: int, vec: tuple) -> int:
        key = (nt, vec)
        sid = index.get(key)
        if sid is None:
            sid = len(vectors)
            if sid >= state_budget:
                raise StateBudgetExceeded(
                    f"automaton construction exceeded {state_budget} states")
            index[key] = sid
            vectors.append(vec)
            owners.append(nt)
            work.append(sid)
        return sid

    entry = {}
    init_back = {}
    for nt in sorted(f.prods):
        entry[nt] = intern(nt, _match_vector(f.prods[nt]))
        init_back[nt] = _has_lookahead(f.prods[nt])

    class_of: dict[int, bytes] = {}
    actions: dict[int, tuple] = {}
    while work:
        sid = work.pop(0)
        vec = vectors[sid]
        nt = owners[sid]
        masks = partition_masks([e[0] for e in vec])
        cmap = bytearray(256)
        acts = []
        for ci, mask in enumerate(masks):
            rep = (mask & -mask).bit_length() - 1
            derived = []
            commit = None
            for e in vec:
                d = deriv(e[0], rep)
                if d is not BOT:
                    derived.append(e if d is e[0] else (d, e[1], e[2]))
                    if commit is None and d.nullable:
                        commit = e
            if not derived:
                acts.append((EXHAUST,))
            else:
                tgt = intern(nt, tuple(derived))
                if commit is not None:
                    acts.append((COMMIT, tgt, commit[2],
                                 tuple(reversed(commit[1]))))
                else:
                    acts.append((GOTO, tgt))
            m = mask
            while m:
                b = (m & -m).bit_length() - 1
                cmap[b] = ci
                m &= m - 1
        class_of[sid] = bytes(cmap)
        actions[sid] = tuple(acts)

    count = len(vectors)
    class_list = [class_of[s] for s in range(count)]
    act_list = [actions[s] for s in range(count)]
    by_byte = [tuple(act_list[s][class_list[s][b]] for b in range(256))
               for s in range(count)]
    meta = [(owners[s], vectors[s]) for s in range(count)]
    return CompiledAutomaton(f.start, entry, init_back, class_list, act_list,
                             by_byte, meta, dict(f.nt_names))


def run_automaton(a: CompiledAutomaton, data: bytes,
                  emit_events: bool = False) -> ParseOutcome:
    """Table-driven twin of fparse_interp (same outcomes, same offsets)."""
    entry = a.entry
    init_back = a.init_back
    tables = a.by_byte
    stack = [a.start]
    pos = 0
    n = len(data)
    events = [] if emit_events else None
    while stack:
        nt = stack.pop()
        table = tables[entry[nt]]
        tok_start = pos
        best = 1 if init_back[nt] else 0   # 0 = fail, 1 = back, 2 = commit
        best_pos = tok_start
        best_rev = None
        best_ord = -1
        cur = tok_start
        while cur < n:
            act = table[data[cur]]
            k = act[0]
            if k == GOTO:
                table = tables[act[1]]
                cur += 1
            elif k == COMMIT:
                table = tables[act[1]]
                cur += 1
                best = 2
                best_ord = act[2]
                best_rev = act[3]
                best_pos = cur
            else:
                break
        if best == 2:
            pos = best_pos
            if events is not None:
                events.append((nt, best_ord, tok_start, best_pos))
            stack.extend(best_rev)
        elif best == 1:
            pos = tok_start
        else:
            ev = tuple(events) if events is not None else None
            return ParseOutcome(False, tok_start, Failure(tok_start, nt), ev)
    ev = tuple(events) if events is not None else None
    return ParseOutcome(True, pos, None, ev)


def dump_automaton(a: CompiledAutomaton) -> str:
    """Diagnostic listing: per state, each byte-class range and action."""
    lines = []
    for sid in range(a.state_count()):
        nt, vec = a.state_meta[sid]
        marks = [f"entry {a.name(nt)}" if a.entry.get(nt) == sid else a.name(nt)]
        lines.append(f"state {sid} ({marks[0]}, {len(vec)} live)")
        for ci, act in enumerate(a.actions[sid]):
            bs = [b for b in range(256) if a.class_of[sid][b] == ci]
            rng = _ranges_text(bs)
            if act[0] == GOTO:
                what = f"goto {act[1]}"
            elif act[0] == COMMIT:
                tail = " ".join(a.name(m) for m in reversed(act[3]))
                what = f"commit #{act[2]} [{tail}] goto {act[1]}"
            else:
                what = "exhaust"
            lines.append(f"  {rng}: {what}")
    return "\n".join(lines) + "\n"


def _ranges(bs):
    out = []
    for b in bs:
        if out and out[-1][1] == b - 1:
            out[-1][1] = b
        else:
            out.append([b, b])
    return out


def _byte_text(b: int) -> str:
    if 0x21 <= b <= 0x7E and chr(b) not in "'\\":
        return f"'{chr(b)}'"
    return f"\\x{b:02x}"


def _ranges_text(bs) -> str:
    parts = []
    for lo, hi in _ranges(bs):
        if lo == hi:
            parts.append(_byte_text(lo))
        else:
            parts.append(f"{_byte_text(lo)}..{_byte_text(hi)}")
    return " ".join(parts) if parts else "(none)"


def emit_source(a: CompiledAutomaton, f: FusedGrammar,
                backend: str = "pseudo") -> str:
    """One function per reachable (state, continuation) pair.

    The continuation is what the function does when its scan stops:
    fail, return the rewind cursor (ε via lookahead), or enter the
    committed production's tail nonterminals.  Each function dispatches
    on the current byte with range arms; a NUL arm doubles as the
    possible-end-of-input check, guarded by an explicit length test so
    real NUL bytes in the input keep parsing.
    """
    if backend not in ("pseudo", "python"):
        raise ValueError(f"unknown backend {backend!r}")

    nodes: dict[tuple, int] = {}
    order: list[tuple] = []

    def intern(state: int, k: tuple) -> int:
        key = (state, k)
        idx = nodes.get(key)
        if idx is None:
            idx = len(order)
            nodes[key] = idx
            order.append(key)
        return idx

    entry_node: dict[int, int] = {}
    for nt in sorted(f.prods):
        k = ("back",) if _has_lookahead(f.prods[nt]) else ("no",)
        entry_node[nt] = intern(a.entry[nt], k)

    i = 0
    while i < len(order):
        state, k = order[i]
        i += 1
        for act in a.actions[state]:
            if act[0] == GOTO:
                intern(act[1], k)
            elif act[0] == COMMIT:
                then = tuple(reversed(act[3]))
                intern(act[1], ("on", then))

    py = backend == "python"

    def step_code(k: tuple, indent: str) -> list[str]:
        if k[0] == "no":
            return [f"{indent}raise ParseFailure(r)" if py
                    else f"{indent}fail at r"]
        if k[0] == "back":
            return [f"{indent}return r"]
        then = k[1]
        if not then:
            return [f"{indent}return r"]
        out = []
        cursor = "r"
        for j, m in enumerate(then):
            fn = f"f{entry_node[m]}"
            if j == len(then) - 1:
                out.append(f"{indent}return {fn}({cursor}, {cursor})")
            else:
                nxt = f"p{j + 1}"
                out.append(f"{indent}{nxt} = {fn}({cursor}, {cursor})"
                           if py else
                           f"{indent}let {nxt} = {fn}({cursor}, {cursor})")
                cursor = nxt
        return out

    lines: list[str] = []
    if py:
        lines += [
            "# Generated specialized parser; entry point: parse(data: bytes).",
            "# Functions are one-per-(state, continuation); CPython does not",
            "# eliminate tail calls, so recursion depth grows with input size.",
            "import sys",
            "",
            "s = b\"\\x00\"",
            "n = 0",
            "",
            "",
            "class ParseFailure(Exception):",
            "    def __init__(self, offset):",
            "        super().__init__(f\"no viable match at byte {offset}\")",
            "        self.offset = offset",
            "",
            "",
        ]
    else:
        lines += [
            "-- Generated specialized parser: one function per",
            "-- (scanner state, pending continuation).",
            "-- Conventions: r = last committed position, i = probe position;",
            "-- s is the input padded with one NUL, n the true length.",
            "",
        ]

    for idx, (state, k) in enumerate(order):
        nt, _vec = a.state_meta[state]
        if k[0] == "no":
            stop_text = "fail"
        elif k[0] == "back":
            stop_text = "epsilon"
        else:
            stop_text = "enter " + " ".join(a.name(m) for m in k[1])
        head_comment = f"state {state} of {a.name(nt)}, {stop_text} on stop"
        arms: list[tuple[str, list[str]]] = []  # (condition text, body lines)
        per_byte = a.by_byte[state]

        def act_body(act, indent: str) -> list[str]:
            if act[0] == GOTO:
                tgt = intern(act[1], k)
                return [f"{indent}return f{tgt}(r, i + 1)"]
            if act[0] == COMMIT:
                then = tuple(reversed(act[3]))
                tgt = intern(act[1], ("on", then))
                return [f"{indent}return f{tgt}(i + 1, i + 1)"]
            return step_code(k, indent)

        # Group maximal byte ranges sharing an action.
        groups: list[tuple[int, int, tuple]] = []
        for b in range(256):
            act = per_byte[b]
            if groups and groups[-1][2] == act and groups[-1][1] == b - 1:
                groups[-1] = (groups[-1][0], b, act)
            else:
                groups.append((b, b, act))

        if py:
            lines.append(f"def f{idx}(r, i):")
            lines.append(f"    # {head_comment}")
            lines.append("    c = s[i]")
            lines.append("    if c == 0:")
            lines.append("        if i == n:")
            lines += step_code(k, "            ")
            nul_act = per_byte[0]
            lines += act_body(nul_act, "        ")
            for lo, hi, act in groups:
                if act[0] == EXHAUST:
                    continue
                if lo == 0 and hi == 0:
                    continue  # already handled by the NUL arm
                cond = (f"c == {lo}" if lo == hi else
                        f"{lo} <= c <= {hi}")
                lines.append(f"    if {cond}:")
                lines += act_body(act, "        ")
            lines += step_code(k, "    ")
            lines.append("")
            lines.append("")
        else:
            lines.append(f"fun f{idx}(r, i) =  -- {head_comment}")
            lines.append("  case s[i] of")
            lines.append("  | '\\x00' when i == n ->")
            for ln in step_code(k, "      "):
                lines.append(ln)
            for lo, hi, act in groups:
                if act[0] == EXHAUST:
                    continue
                pat = (_byte_text(lo) if lo == hi
                       else f"{_byte_text(lo)}..{_byte_text(hi)}")
                body = act_body(act, "      ")
                lines.append(f"  | {pat} ->")
                lines += body
            lines.append("  | _ ->")
            for ln in step_code(k, "      "):
                lines.append(ln)
            lines.append("")

    start_fn = f"f{entry_node[f.start]}"
    if py:
        lines += [
            "def parse(data):",
            "    \"\"\"Returns (accepted, consumed_or_failure_offset).\"\"\"",
            "    global s, n",
            "    s = bytes(data) + b\"\\x00\"",
            "    n = len(data)",
            "    sys.setrecursionlimit(10000 + 16 * n)",
            "    try:",
            f"        return (True, {start_fn}(0, 0))",
            "    except ParseFailure as e:",
            "        return (False, e.offset)",
        ]
    else:
        lines += [
            f"fun parse(s, n) = f_start where f_start = {start_fn}(0, 0)",
        ]
    return "\n".join(lines) + "\n"
