"""Command-line front end.

    cacheleak simulate --policy lru:2 --trace ABACBACBA
    cacheleak ratio --p lru:2 --q fifo:2 --max-len 17
    cacheleak classify --p lru:2 --q flru:2:7
    cacheleak witness --p lru:2 --q fifo:2 --t1 ABACACBBB --t2 ABACBACBA
    cacheleak pump --p lru:2 --q fifo:2 --m 5
    cacheleak figure1 --out results/

Exit status: 0 on success, 1 on bad input, 2 when a budget is exhausted.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import congruence, leak, witness
from .core import (
    POLICY_KINDS,
    BudgetExceeded,
    PolicyError,
    format_content,
    format_trace,
    make_policy,
    parse_trace,
)
from .sim import count_misses, steps

FIGURE1 = {
    "figure1a.csv": ("lru:2", "fifo:2"),
    "figure1b.csv": ("lru:2", "flru:2:7"),
}
FIGURE1_MAX_LEN = 17


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _policy(text):
    try:
        return make_policy(text)
    except PolicyError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _trace(text):
    try:
        return parse_trace(text)
    except PolicyError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _verification(p, q, traces) -> str:
    rows = [f"{'trace':<24} {p.descriptor:>10} {q.descriptor:>10}"]
    for t in traces:
        rows.append(f"{format_trace(t):<24} {count_misses(p, t):>10} {count_misses(q, t):>10}")
    return "\n".join(rows) + "\n"


def cmd_simulate(args):
    for alg in args.policy:
        prefix = f"{alg.descriptor} " if len(args.policy) > 1 else ""
        if args.steps:
            for block, config, hit in steps(alg, args.trace):
                print(f"{prefix}{format_trace([block])} {'hit ' if hit else 'miss'} {format_content(config.content)}")
        print(f"{prefix}misses={count_misses(alg, args.trace)}")


def cmd_ratio(args):
    if args.pairs:
        if args.engine == "brute":
            pairs = leak.bruteforce_pairs(args.p, args.q, args.max_len, args.alphabet, args.budget)
        else:
            pairs = leak.quotient_pairs(args.p, args.q, args.max_len, ceiling=args.ceiling)
        _emit(leak.pairs_csv(pairs), args.out)
        return
    forward, backward = leak.ratio_tables(args.p, args.q, args.max_len, args.engine, args.alphabet,
                                          args.budget, args.ceiling)
    _emit(leak.ratio_csv(forward, backward), args.out)


def cmd_classify(args):
    graph = congruence.quotient_explore(args.p, args.q, args.ceiling)
    verdict = congruence.detect_unbounded(args.p, args.q, graph)
    if not verdict.linear:
        print("CONSTANT")
        print(f"classes={verdict.node_count}")
        print(f"max_gap={verdict.max_gap}")
        return
    family = congruence.find_pump_family(args.p, args.q, verdict)
    print("LINEAR")
    print(f"classes={verdict.node_count}")
    print(f"base={format_trace(family.base)}")
    print(f"cycle={format_trace(family.cycle)}")
    print(f"gain={family.gain}")
    print(f"leader={args.p.descriptor if family.sign > 0 else args.q.descriptor}")
    print(f"rate={family.rate}")
    print(f"threshold={family.threshold}")


def cmd_witness(args):
    p, q = args.p, args.q
    modes = [args.trace is not None, args.t1 is not None or args.t2 is not None, args.max_len is not None]
    if sum(modes) != 1:
        raise UsageError("witness: give exactly one of --trace, --t1/--t2, --max-len")
    if args.trace is not None:
        result = witness.build_equalizing_trace(p, q, args.trace)
        print(format_trace(result))
        sys.stdout.write(_verification(p, q, [args.trace, result]))
    elif args.max_len is not None:
        trace, gap = witness.max_gap_search(p, q, args.max_len, args.alphabet, args.budget)
        print(format_trace(trace))
        print(f"gap={gap}")
        sys.stdout.write(_verification(p, q, [trace]))
    else:
        if args.t1 is None or args.t2 is None:
            raise UsageError("witness: --t1 and --t2 go together")
        if args.k is not None:
            traces = [witness.interpolate_trace(p, q, args.t1, args.t2, args.k)]
        else:
            traces = [row[0] for row in witness.dense_set_report(p, q, witness.build_dense_set(p, q, args.t1, args.t2))]
        for t in traces:
            print(format_trace(t))
        sys.stdout.write(_verification(p, q, traces))


def cmd_pump(args):
    family = congruence.find_pump_family(args.p, args.q, ceiling=args.ceiling)
    if family is None:
        print(f"{args.p.descriptor} and {args.q.descriptor} have a bounded miss difference; nothing to pump",
              file=sys.stderr)
        raise PolicyError("no pump family")
    tau = congruence.pump(args.p, args.q, family, args.m)
    print(format_trace(tau))
    sys.stdout.write(_verification(args.p, args.q, [tau]))


def write_figure1(out_dir) -> list:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, (a, b) in FIGURE1.items():
        forward, backward = leak.ratio_tables(make_policy(a), make_policy(b), FIGURE1_MAX_LEN)
        path = out_dir / name
        path.write_text(leak.ratio_csv(forward, backward))
        written.append(path)
    return written


def cmd_figure1(args):
    for path in write_figure1(args.out or "."):
        print(path)


POLICY_HELP = {
    "lru": ("lru:<n>", "least recently used"),
    "fifo": ("fifo:<n>", "first in, first out"),
    "plru": ("plru:<n>", "tree pseudo-LRU, n a power of two"),
    "mru": ("mru:<n>", "not-most-recently-used bits"),
    "flru": ("flru:<n>:<k>", "FIFO for the first k accesses, LRU afterwards"),
}


def cmd_policies(args):
    for kind in POLICY_KINDS:
        grammar, text = POLICY_HELP[kind]
        print(f"{grammar:<14}{text}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cacheleak", description="Leak ratios and miss-difference analysis of cache policies.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def pair(p):
        p.add_argument("--p", type=_policy, required=True, help="first policy, e.g. lru:2")
        p.add_argument("--q", type=_policy, required=True, help="second policy, e.g. fifo:2")

    def enumeration(p):
        p.add_argument("--alphabet", type=int, default=None, help="blocks to enumerate over (default n_P + n_Q)")
        p.add_argument("--budget", type=int, default=leak.DEFAULT_BUDGET, help="maximum number of traces")

    def ceiling(p):
        p.add_argument("--ceiling", type=int, default=congruence.DEFAULT_CLASS_CEILING,
                       help="maximum number of congruence classes")

    s = sub.add_parser("simulate", help="count misses of a trace")
    s.add_argument("--policy", type=_policy, action="append", required=True)
    s.add_argument("--trace", type=_trace, required=True)
    s.add_argument("--steps", action="store_true", help="print every access")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("ratio", help="leak ratio table as CSV")
    pair(s)
    s.add_argument("--max-len", type=int, required=True)
    s.add_argument("--engine", choices=("quotient", "brute"), default="quotient")
    s.add_argument("--pairs", action="store_true", help="emit achievable miss pairs instead of ratios")
    s.add_argument("--out", default=None)
    enumeration(s)
    ceiling(s)
    s.set_defaults(func=cmd_ratio)

    s = sub.add_parser("classify", help="constant or linear leak ratio")
    pair(s)
    ceiling(s)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("witness", help="construct witness traces")
    pair(s)
    s.add_argument("--trace", type=_trace, help="build a trace with P = Q = Q(trace) misses")
    s.add_argument("--t1", type=_trace, help="Q-equivalent endpoint with fewer P misses")
    s.add_argument("--t2", type=_trace, help="Q-equivalent endpoint with more P misses")
    s.add_argument("--k", type=int, help="only the interpolated trace with k P-misses")
    s.add_argument("--max-len", type=int, help="search a trace of this length maximizing |P - Q|")
    enumeration(s)
    s.set_defaults(func=cmd_witness)

    s = sub.add_parser("pump", help="emit a pumped trace")
    pair(s)
    s.add_argument("--m", type=int, required=True, help="cycle repetitions")
    ceiling(s)
    s.set_defaults(func=cmd_pump)

    s = sub.add_parser("figure1", help="write figure1a.csv and figure1b.csv")
    s.add_argument("--out", default=None, help="output directory (default .)")
    s.set_defaults(func=cmd_figure1)

    s = sub.add_parser("policies", help="list policy descriptors")
    s.set_defaults(func=cmd_policies)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except BudgetExceeded as exc:
        print(f"cacheleak: {exc}", file=sys.stderr)
        return 2
    except (PolicyError, ValueError) as exc:
        print(f"cacheleak: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
