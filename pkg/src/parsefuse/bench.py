"""Throughput and linearity measurements for the three engines.

Pipelines measured per grammar:

  * unfused -- materialize the full token list with the standalone
    lexer, then run the token-level parser over it;
  * interp  -- the derivative-recomputing fused interpreter;
  * auto    -- the compiled byte-class automaton.

One-time costs (grammar compilation, corpus generation) stay outside
the timed region; timing is a median over repetitions with gc off.
Every pipeline must accept every corpus before anything is timed —
benchmarking a rejecting parser measures nothing.

Output: a delimited table (`pipeline,bytes,seconds,mbps`, decimal
megabytes) plus two rendered figures, throughput at the largest size
and runtime-vs-size linearity.
"""

from __future__ import annotations

import gc
import random
import time
from dataclasses import dataclass
from pathlib import Path

from .engine import compile_automaton, fparse_interp, run_automaton
from .fusion import fuse
from .grammar_file import GrammarSpec
from .lexer import lex
from .normalize import check_dgnf, normalize, trim_unreachable
from .token_parser import parse_tokens

PIPELINES = ("unfused", "interp", "auto")


@dataclass(frozen=True)
class BenchRow:
    grammar: str
    pipeline: str
    nbytes: int
    seconds: float

    @property
    def mbps(self) -> float:
        return (self.nbytes / 1e6) / self.seconds if self.seconds > 0 else 0.0


class BenchRefused(RuntimeError):
    """A pipeline rejected a generated corpus; results would be garbage."""


# ---------------------------------------------------------------------------
# corpus generators
# ---------------------------------------------------------------------------

_SEXP_ATOMS = (b"ab", b"cde", b"fghi", b"jk", b"lmnopq", b"r", b"stu")


def gen_sexp(target: int, seed: int = 0) -> bytes:
    """One parenthesized tree of roughly `target` bytes, no trailing
    whitespace, nesting bounded so parser stacks stay shallow."""
    rng = random.Random(seed)
    parts = [b"("]
    size = 1
    depth = 1
    prev_atom = False
    while size + depth < target:
        r = rng.random()
        if r < 0.18 and depth < 50:
            parts.append(b"(")
            size += 1
            depth += 1
            prev_atom = False
        elif r < 0.28 and depth > 1:
            parts.append(b")")
            size += 1
            depth -= 1
            prev_atom = False
        else:
            a = _SEXP_ATOMS[rng.randrange(len(_SEXP_ATOMS))]
            if prev_atom:
                parts.append(b" " if rng.random() < 0.8 else b"\n")
                size += 1
            parts.append(a)
            size += len(a)
            prev_atom = True
    parts.append(b")" * depth)
    return b"".join(parts)


_CSV_WORDS = (b"alpha", b"beta", b"gamma", b"delta", b"x", b"yz",
              b"longervalue", b"n42")


def gen_csv(target: int, seed: int = 0) -> bytes:
    """CRLF-terminated rows with plain, empty and quoted fields."""
    rng = random.Random(seed)
    parts: list[bytes] = []
    size = 0
    while size < target:
        fields = []
        for _ in range(rng.randrange(2, 7)):
            r = rng.random()
            if r < 0.1:
                fields.append(b"")
            elif r < 0.25:
                inner = rng.choice(_CSV_WORDS)
                quoted = b'"' + inner + b'""q"" ,\r\n tail"'
                fields.append(quoted)
            else:
                fields.append(rng.choice(_CSV_WORDS))
        row = b",".join(fields) + b"\r\n"
        parts.append(row)
        size += len(row)
    return b"".join(parts)


def gen_json(target: int, seed: int = 0) -> bytes:
    """A single top-level array filled with mixed small values."""
    rng = random.Random(seed)
    parts = [b"["]
    size = 1
    first = True

    def atom() -> bytes:
        r = rng.random()
        if r < 0.3:
            return b'"s' + rng.choice(_CSV_WORDS) + b'\\n"'
        if r < 0.6:
            return str(rng.randrange(-1000, 1000)).encode()
        if r < 0.7:
            return str(rng.randrange(1, 100)).encode() + b"." + \
                str(rng.randrange(0, 100)).encode() + b"e" + \
                str(rng.randrange(1, 9)).encode()
        return rng.choice((b"true", b"false", b"null"))

    def value(depth: int) -> bytes:
        r = rng.random()
        if depth < 6 and r < 0.18:
            inner = [b'"k' + rng.choice(_CSV_WORDS) + b'": ' + value(depth + 1)
                     for _ in range(rng.randrange(1, 4))]
            return b"{" + b", ".join(inner) + b"}"
        if depth < 6 and r < 0.33:
            inner = [value(depth + 1) for _ in range(rng.randrange(1, 5))]
            return b"[" + b",".join(inner) + b"]"
        return atom()

    while size < target:
        v = value(0)
        if not first:
            parts.append(b",")
            size += 1
        sep = b" " if rng.random() < 0.3 else b""
        parts.append(sep + v)
        size += len(sep) + len(v)
        first = False
    parts.append(b"]")
    return b"".join(parts)


GENERATORS = {"sexp": gen_sexp, "csv": gen_csv, "json": gen_json}


# ---------------------------------------------------------------------------
# pipelines
# ---------------------------------------------------------------------------

@dataclass
class CompiledPipelines:
    name: str
    unfused: object
    interp: object
    auto: object

    def all(self):
        return {"unfused": self.unfused, "interp": self.interp,
                "auto": self.auto}


def build_pipelines(name: str, spec: GrammarSpec) -> CompiledPipelines:
    grammar = trim_unreachable(normalize(spec.expr))
    violations = check_dgnf(grammar)
    if violations:
        raise BenchRefused(f"{name}: grammar is not deterministic: "
                           f"{violations[0].message}")
    fused = fuse(spec.lexer, grammar)
    automaton = compile_automaton(fused)
    lexer = spec.lexer

    def run_unfused(data: bytes) -> bool:
        tokens = lex(lexer, data)
        return parse_tokens(grammar, tokens) == len(tokens)

    def run_interp(data: bytes) -> bool:
        out = fparse_interp(fused, data)
        return out.accepted and out.consumed == len(data)

    def run_auto(data: bytes) -> bool:
        out = run_automaton(automaton, data)
        return out.accepted and out.consumed == len(data)

    return CompiledPipelines(name, run_unfused, run_interp, run_auto)


def time_once(fn, data: bytes) -> float:
    gc_was_on = gc.isenabled()
    gc.disable()
    try:
        t0 = time.perf_counter()
        ok = fn(data)
        elapsed = time.perf_counter() - t0
    finally:
        if gc_was_on:
            gc.enable()
    if not ok:
        raise BenchRefused("pipeline rejected its input during timing")
    return elapsed


def time_median(fn, data: bytes, reps: int) -> float:
    times = sorted(time_once(fn, data) for _ in range(max(1, reps)))
    return times[len(times) // 2]


def run_bench(specs: dict[str, GrammarSpec], sizes_bytes: list[int],
              reps: int = 5, seed: int = 0) -> list[BenchRow]:
    """Measure every (grammar, pipeline, size) cell; every pipeline must
    accept every corpus (checked on the smallest size first)."""
    rows: list[BenchRow] = []
    for name, spec in specs.items():
        gen = GENERATORS.get(name)
        if gen is None:
            raise BenchRefused(f"no corpus generator for grammar {name!r}")
        pipes = build_pipelines(name, spec)
        smallest = gen(min(sizes_bytes), seed)
        for pname, fn in pipes.all().items():
            if not fn(smallest):
                raise BenchRefused(
                    f"{name}/{pname} rejects its own generated corpus")
        for size in sizes_bytes:
            data = gen(size, seed)
            for pname, fn in pipes.all().items():
                seconds = time_median(fn, data, reps)
                rows.append(BenchRow(name, pname, len(data), seconds))
    return rows


def rows_to_csv(rows: list[BenchRow]) -> str:
    lines = ["grammar,pipeline,bytes,seconds,mbps"]
    for r in rows:
        lines.append(f"{r.grammar},{r.pipeline},{r.nbytes},"
                     f"{r.seconds:.6f},{r.mbps:.3f}")
    return "\n".join(lines) + "\n"


def render_figures(rows: list[BenchRow], out_dir) -> list[str]:
    """Write throughput.png and linearity.png next to the CSV."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grammars = sorted({r.grammar for r in rows})
    written = []

    # Throughput at the largest measured size, grouped bars.
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    width = 0.8 / len(PIPELINES)
    for pi, pname in enumerate(PIPELINES):
        xs, ys = [], []
        for gi, g in enumerate(grammars):
            sub = [r for r in rows if r.grammar == g and r.pipeline == pname]
            if not sub:
                continue
            best = max(sub, key=lambda r: r.nbytes)
            xs.append(gi + (pi - (len(PIPELINES) - 1) / 2) * width)
            ys.append(best.mbps)
        ax.bar(xs, ys, width=width, label=pname)
    ax.set_xticks(range(len(grammars)))
    ax.set_xticklabels(grammars)
    ax.set_ylabel("MB/s")
    ax.set_title("throughput at largest input")
    ax.legend(frameon=False)
    fig.tight_layout()
    path = out_dir / "throughput.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(str(path))

    # Runtime against input size, one panel per grammar.
    fig, axes = plt.subplots(1, len(grammars),
                             figsize=(3.6 * len(grammars), 3.2),
                             squeeze=False)
    for gi, g in enumerate(grammars):
        ax = axes[0][gi]
        for pname in PIPELINES:
            sub = sorted((r for r in rows
                          if r.grammar == g and r.pipeline == pname),
                         key=lambda r: r.nbytes)
            if not sub:
                continue
            ax.plot([r.nbytes / 1e6 for r in sub],
                    [r.seconds for r in sub],
                    marker="o", markersize=3, label=pname)
        ax.set_title(g)
        ax.set_xlabel("input (MB)")
        if gi == 0:
            ax.set_ylabel("seconds")
            ax.legend(frameon=False)
    fig.tight_layout()
    path = out_dir / "linearity.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(str(path))
    return written
