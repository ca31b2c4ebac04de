"""Command-line interface.

Exit codes: 0 success (found / equivalent), 2 negative verdict (not found
within the depth bound, not equivalent, threshold not reached), 1 error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Any, Sequence

import numpy as np

from .circuit import Circuit, format_circuit, looks_like_unitary, parse_circuit, parse_unitary
from .cnf import CnfParseError, read_wcnf
from .counter import CounterTimeout, count, default_threads, max_count
from .encoder import Basis, EncodingError
from .equivalence import EqEncoding, check_equiv, fidelity_count
from .synthesis import GateSetSpec, Mode, gen_random_benchmark, parse_rules, synthesize
from .weights import Weight, render_weight

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2

log = logging.getLogger("maxsyn")


class UsageError(Exception):
    pass


def _weight_json(w: Weight) -> dict:
    z = complex(w)
    return {"text": render_weight(w), "re": z.real, "im": z.imag}


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def load_operands(paths: Sequence[str]) -> list:
    """Circuits and unitaries; circuits are widened to the largest width."""
    texts = [_read(p) for p in paths]
    ops: list = []
    for t in texts:
        ops.append(parse_unitary(t) if looks_like_unitary(t) else parse_circuit(t))
    widths = [o.n if isinstance(o, Circuit) else o.shape[0].bit_length() - 1 for o in ops]
    n = max(widths)
    out = []
    for t, o in zip(texts, ops):
        if isinstance(o, Circuit) and o.n != n:
            o = parse_circuit(t, n)
        out.append(o)
    return out


def _resolve_basis(arg: str | None, enc: EqEncoding, has_unitary: bool) -> Basis:
    if arg is None:
        if enc is not EqEncoding.CYCLIC:
            return Basis.PB
        return Basis.CB if has_unitary else Basis.PB
    basis = Basis(arg)
    if enc is not EqEncoding.CYCLIC and basis is not Basis.PB:
        raise UsageError("--encoding %s requires --basis pb" % enc.value)
    return basis


# -- commands ---------------------------------------------------------------------


def cmd_synth(args) -> tuple[int, dict, str]:
    (spec,) = load_operands([args.spec])
    enc = EqEncoding.parse(args.encoding)
    is_unitary = not isinstance(spec, Circuit)
    basis = _resolve_basis(args.basis, enc, is_unitary)
    if is_unitary and basis is not Basis.CB:
        raise UsageError("unitary specifications require --basis cb")
    mode = Mode(args.mode)
    if mode is Mode.APPROX and args.eps is None:
        raise UsageError("--mode approx needs --eps")
    gs = GateSetSpec.parse(args.gates)

    def progress(entry):
        log.info("depth %d: %s", entry.depth, json.dumps(entry.as_dict()))

    res = synthesize(
        spec,
        gs,
        basis,
        enc,
        mode,
        eps=args.eps,
        max_depth=args.max_depth,
        rules=parse_rules(args.rules),
        threads=args.threads,
        time_limit=args.time_limit,
        dump_cnf=args.dump_cnf,
        min_depth=args.min_depth,
        r2_general=args.r2_general,
        on_depth=progress,
    )
    doc = {
        "command": "synth",
        "found": res.found,
        "timed_out": res.timed_out,
        "depth": res.depth,
        "circuit": format_circuit(res.circuit) if res.circuit else None,
        "score_norm": res.score,
        "raw": _weight_json(res.raw) if res.raw is not None else None,
        "fidelity": res.fidelity,
        "basis": basis.value,
        "encoding": enc.value,
        "mode": mode.value,
        "log": [e.as_dict() for e in res.log],
    }
    lines = []
    if res.found:
        lines.append(format_circuit(res.circuit).rstrip("\n"))
        lines.append("depth: %d" % res.depth)
        lines.append("score: %.6f" % res.score)
        lines.append("fidelity: %.6f" % res.fidelity)
    elif res.timed_out:
        lines.append("time limit reached")
    else:
        lines.append("no circuit found up to depth %d (best score %.6f)" % (args.max_depth, res.score))
    for e in res.log:
        lines.append("# " + json.dumps(e.as_dict()))
    if res.timed_out:
        return EXIT_ERROR, doc, "\n".join(lines)
    return (EXIT_OK if res.found else EXIT_NEGATIVE), doc, "\n".join(lines)


def cmd_check_eq(args) -> tuple[int, dict, str]:
    a, b = load_operands([args.first, args.second])
    enc = EqEncoding.parse(args.encoding)
    has_unitary = not (isinstance(a, Circuit) and isinstance(b, Circuit))
    basis = _resolve_basis(args.basis, enc, has_unitary)
    v = check_equiv(a, b, enc, basis)
    doc = {
        "command": "check-eq",
        "equivalent": v.equivalent,
        "score": v.score,
        "raw": _weight_json(v.raw),
        "abs_raw": abs(complex(v.raw)),
        "global_phase_note": v.global_phase_note,
        "exact": v.exact,
        "basis": basis.value,
        "encoding": enc.value,
    }
    text = "%s\nscore: %.6f\nraw: %s\n|raw|: %.6f" % (
        "equivalent" if v.equivalent else "not equivalent",
        v.score,
        render_weight(v.raw),
        abs(complex(v.raw)),
    )
    return (EXIT_OK if v.equivalent else EXIT_NEGATIVE), doc, text


def cmd_fidelity(args) -> tuple[int, dict, str]:
    a, b = load_operands([args.first, args.second])
    has_unitary = not (isinstance(a, Circuit) and isinstance(b, Circuit))
    basis = _resolve_basis(args.basis, EqEncoding.CYCLIC, has_unitary)
    fid, raw = fidelity_count(a, b, basis)
    doc = {"command": "fidelity", "fidelity": fid, "raw": _weight_json(raw), "basis": basis.value}
    return EXIT_OK, doc, "fidelity: %.9f\nraw: %s" % (fid, render_weight(raw))


def cmd_count(args) -> tuple[int, dict, str]:
    f = read_wcnf(args.cnf) if args.cnf != "-" else read_wcnf(sys.stdin)
    if not args.max:
        if args.threshold is not None:
            raise UsageError("--threshold needs --max")
        res = count(f, time_limit=args.time_limit)
        doc = {"command": "count", "count": _weight_json(res.count), "stats": res.stats.as_dict()}
        return EXIT_OK, doc, "count: %s\nvalue: %r" % (render_weight(res.count), complex(res.count))
    res = max_count(f, args.objective, args.threshold, threads=args.threads, time_limit=args.time_limit)
    doc = {
        "command": "count",
        "count": _weight_json(res.best_count),
        "objective": res.objective,
        "threshold_hit": res.threshold_hit,
        "best_assignment": {str(k): v for k, v in sorted(res.best_assignment.items())},
        "stats": res.stats.as_dict(),
    }
    true_sel = " ".join(str(v if b else -v) for v, b in sorted(res.best_assignment.items()))
    text = "count: %s\nobjective: %.9g\nthreshold_hit: %s\nassignment: %s" % (
        render_weight(res.best_count),
        res.objective,
        str(res.threshold_hit).lower(),
        true_sel,
    )
    code = EXIT_OK
    if args.threshold is not None and not res.threshold_hit:
        code = EXIT_NEGATIVE
    return code, doc, text


def cmd_bench_gen(args) -> tuple[int, dict, str]:
    gs = GateSetSpec.parse(args.gates)
    c = gen_random_benchmark(args.n, args.d, gs, args.seed, irreducible=args.irreducible)
    text = format_circuit(c)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    doc = {
        "command": "bench gen",
        "n": args.n,
        "d": args.d,
        "seed": args.seed,
        "irreducible": args.irreducible,
        "circuit": text,
    }
    return EXIT_OK, doc, text.rstrip("\n")


# -- parser -------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", choices=("text", "json"), default="text")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maxsyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a depth-optimal circuit")
    p.add_argument("--spec", required=True, help="circuit or unitary file")
    p.add_argument("--mode", choices=("exact", "approx"), default="exact")
    p.add_argument("--eps", type=float)
    p.add_argument("--basis", choices=("cb", "pb"))
    p.add_argument("--encoding", default="cyclic", choices=("cyclic", "lc"))
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--min-depth", type=int, default=1)
    p.add_argument("--gates", default="I,H,T,TDG,CX")
    p.add_argument("--rules", default="all", help="all, none or a list such as R1,R3")
    p.add_argument("--r2-general", action="store_true", help="also prune T/TDG windows of net power 0 mod 8")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--time-limit", type=float, default=None, help="seconds")
    p.add_argument("--dump-cnf", help="write each depth's formula; '{depth}' is substituted")
    _common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("check-eq", help="check equivalence up to global phase")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--encoding", default="cyclic", choices=("linear", "cyclic", "lc"))
    p.add_argument("--basis", choices=("cb", "pb"))
    _common(p)
    p.set_defaults(func=cmd_check_eq)

    p = sub.add_parser("fidelity", help="Jamiolkowski fidelity of two operators")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--basis", choices=("cb", "pb"))
    _common(p)
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("count", help="(maximum) weighted model count of a formula file")
    p.add_argument("cnf")
    p.add_argument("--max", action="store_true", help="maximize over select variables")
    p.add_argument("--objective", choices=("real", "normsq"), default="real")
    p.add_argument("--threshold", type=float)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--time-limit", type=float, default=None)
    _common(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("bench", help="benchmark utilities")
    bsub = p.add_subparsers(dest="bench_command", required=True)
    g = bsub.add_parser("gen", help="generate a random benchmark circuit")
    g.add_argument("-n", type=int, required=True)
    g.add_argument("-d", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--irreducible", action="store_true")
    g.add_argument("--gates", default="I,H,T,TDG,CX")
    g.add_argument("--out")
    _common(g)
    g.set_defaults(func=cmd_bench_gen)
    return parser


def _emit(args, doc: dict[str, Any], text: str) -> None:
    if args.output == "json":
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        print(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    if hasattr(args, "threads") and args.threads is None:
        args.threads = default_threads()
    command = args.command if args.command != "bench" else "bench gen"
    try:
        code, doc, text = args.func(args)
    except (OSError, ValueError, UsageError, EncodingError, CnfParseError, CounterTimeout) as exc:
        msg = str(exc) or exc.__class__.__name__
        if args.output == "json":
            _emit(args, {"command": command, "error": msg}, "")
        print("maxsyn: error: %s" % msg, file=sys.stderr)
        return EXIT_ERROR
    _emit(args, doc, text)
    return code


if __name__ == "__main__":
    sys.exit(main())
