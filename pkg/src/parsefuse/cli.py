"""Command-line interface.

Subcommands walk the same pipeline the library exposes: load a grammar
file, type it, normalize to deterministic Greibach form, fuse the lexer
in, compile the automaton, run inputs.  `sexp`, `csv` and `json` name
the grammars shipped inside the package; anything else is a path.

Exit codes: 0 success; 1 the grammar or input failed a check (type
error, determinism violation, rejected/partial parse); 2 bad usage or
unreadable/unparsable grammar file.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, shipped_grammar_path
from .bench import (BenchRefused, GENERATORS, render_figures, rows_to_csv,
                    run_bench)
from .cfe import CfeTypeError, denote_enumerate, type_of
from .engine import (compile_automaton, dump_automaton, emit_source,
                     fparse_interp, run_automaton)
from .fusion import dump_fused, fuse
from .grammar_file import GrammarFileError, GrammarSpec, load_grammar_file
from .normalize import (check_dgnf, dump_dgnf, expand_enumerate, normalize,
                        trim_unreachable)


def _load(arg: str) -> GrammarSpec:
    path = shipped_grammar_path(arg)
    if path is None:
        path = Path(arg)
    if not Path(path).exists():
        raise GrammarFileError(f"no such grammar: {arg}")
    return load_grammar_file(path)


def _grammar(spec: GrammarSpec, literal: bool = False):
    return trim_unreachable(normalize(spec.expr, literal=literal))


def cmd_check(args) -> int:
    spec = _load(args.grammar)
    try:
        ty = type_of(spec.expr)
    except CfeTypeError as e:
        print(f"type error: {e}", file=sys.stderr)
        return 1
    g = _grammar(spec)
    violations = check_dgnf(g)
    names = spec.token_names
    print(f"start: {spec.start}")
    print(f"tokens: {len(spec.token_ids)}")
    print(f"nullable: {str(ty.null).lower()}")
    print(f"first: {{{', '.join(sorted(names[t] for t in ty.first))}}}")
    print(f"follow-last: {{{', '.join(sorted(names[t] for t in ty.flast))}}}")
    print(f"nonterminals: {len(g.prods)}")
    print(f"productions: {g.count_productions()}")
    if violations:
        for v in violations:
            print(f"violation ({v.kind}): {v.message}", file=sys.stderr)
        return 1
    print("grammar is deterministic")
    return 0


def cmd_normalize(args) -> int:
    spec = _load(args.grammar)
    type_of(spec.expr)
    g = _grammar(spec, literal=args.no_trim)
    sys.stdout.write(dump_dgnf(g, spec.token_names))
    return 0


def cmd_fuse(args) -> int:
    spec = _load(args.grammar)
    type_of(spec.expr)
    g = _grammar(spec)
    bad = check_dgnf(g)
    if bad:
        for v in bad:
            print(f"violation ({v.kind}): {v.message}", file=sys.stderr)
        return 1
    sys.stdout.write(dump_fused(fuse(spec.lexer, g)))
    return 0


def cmd_compile(args) -> int:
    spec = _load(args.grammar)
    type_of(spec.expr)
    g = _grammar(spec)
    fused = fuse(spec.lexer, g)
    auto = compile_automaton(fused)
    if args.emit_source:
        sys.stdout.write(emit_source(auto, fused, backend=args.backend))
    elif args.dump:
        sys.stdout.write(dump_automaton(auto))
    else:
        print(f"nonterminals: {len(g.prods)}")
        print(f"productions: {g.count_productions()}")
        print(f"fused productions: {fused.count_productions()}")
        print(f"automaton states: {auto.state_count()}")
    return 0


def cmd_run(args) -> int:
    spec = _load(args.grammar)
    type_of(spec.expr)
    g = _grammar(spec)
    fused = fuse(spec.lexer, g)
    if args.input == "-":
        data = sys.stdin.buffer.read()
    else:
        data = Path(args.input).read_bytes()
    if args.backend == "interp":
        out = fparse_interp(fused, data, emit_events=args.events)
    else:
        out = run_automaton(compile_automaton(fused), data,
                            emit_events=args.events)
    if args.events and out.events:
        for nt, ordinal, start, end in out.events:
            text = data[start:end]
            shown = text.decode("utf-8", "replace") if len(text) <= 40 \
                else text[:37].decode("utf-8", "replace") + "..."
            print(f"{fused.name(nt)}[{ordinal}] {start}..{end} {shown!r}")
    if not out.accepted:
        print(f"rejected at byte {out.failure.offset} "
              f"(while parsing {fused.name(out.failure.nonterminal)})")
        return 1
    if out.consumed != len(data):
        print(f"accepted a prefix: {out.consumed} of {len(data)} bytes "
              f"(trailing input starts at {out.consumed})")
        return 1
    print(f"accepted: {out.consumed} bytes")
    return 0


def cmd_enumerate(args) -> int:
    spec = _load(args.grammar)
    type_of(spec.expr)
    if args.side == "cfe":
        words = denote_enumerate(spec.expr, args.max_len)
    else:
        words = expand_enumerate(_grammar(spec), max_len=args.max_len)
    names = spec.token_names
    for w in sorted(words, key=lambda w: (len(w), w)):
        print(" ".join(names[t] for t in w) if w else "<empty>")
    print(f"# {len(words)} words of length <= {args.max_len}", file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    specs = {}
    for name in args.grammars.split(","):
        name = name.strip()
        if name not in GENERATORS:
            print(f"no corpus generator for {name!r} "
                  f"(choose from {sorted(GENERATORS)})", file=sys.stderr)
            return 2
        specs[name] = _load(name)
    sizes = [int(float(s) * 1_000_000) for s in args.sizes.split(",")]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.generate:
        for name in specs:
            for size in sizes:
                corpus = GENERATORS[name](size, args.seed)
                p = out_dir / f"{name}_{size}.bytes"
                p.write_bytes(corpus)
                print(f"wrote {p} ({len(corpus)} bytes)")
        return 0
    try:
        rows = run_bench(specs, sizes, reps=args.reps, seed=args.seed)
    except BenchRefused as e:
        print(f"refusing to benchmark: {e}", file=sys.stderr)
        return 1
    csv_text = rows_to_csv(rows)
    csv_path = out_dir / "results.csv"
    csv_path.write_text(csv_text)
    sys.stdout.write(csv_text)
    print(f"wrote {csv_path}")
    if not args.no_plot:
        for p in render_figures(rows, out_dir):
            print(f"wrote {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="parsefuse",
        description="Deterministic grammars compiled to fused "
                    "lexer-free byte parsers.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(fn=fn)
        return p

    p = add("check", cmd_check, "type-check and validate a grammar")
    p.add_argument("grammar")

    p = add("normalize", cmd_normalize, "print the normalized grammar")
    p.add_argument("grammar")
    p.add_argument("--no-trim", action="store_true",
                   help="keep the unsimplified derivation (redundant "
                        "repetition nonterminals and all)")

    p = add("fuse", cmd_fuse, "print the fused byte-level grammar")
    p.add_argument("grammar")

    p = add("compile", cmd_compile, "compile and inspect the automaton")
    p.add_argument("grammar")
    p.add_argument("--emit-source", action="store_true")
    p.add_argument("--backend", choices=("pseudo", "python"),
                   default="pseudo")
    p.add_argument("--dump", action="store_true",
                   help="print the state/action table")

    p = add("run", cmd_run, "parse an input file (or - for stdin)")
    p.add_argument("grammar")
    p.add_argument("input")
    p.add_argument("--events", action="store_true",
                   help="print every committed span")
    p.add_argument("--backend", choices=("auto", "interp"), default="auto")

    p = add("enumerate", cmd_enumerate,
            "list all token words up to a length bound")
    p.add_argument("grammar")
    p.add_argument("--max-len", type=int, default=4)
    p.add_argument("--side", choices=("dgnf", "cfe"), default="dgnf",
                   help="enumerate from the normalized grammar or from "
                        "the expression semantics")

    p = add("bench", cmd_bench, "measure pipeline throughput")
    p.add_argument("--grammars", default="sexp,csv,json")
    p.add_argument("--sizes", default="1,2,4",
                   help="comma-separated corpus sizes in MB")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--out-dir", default="bench_out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-plot", action="store_true")
    p.add_argument("--generate", action="store_true",
                   help="only write the corpora, don't time anything")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (GrammarFileError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except CfeTypeError as e:
        print(f"type error: {e}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
