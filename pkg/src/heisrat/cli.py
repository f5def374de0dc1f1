"""Batch command line interface.

Commands: reduce, decide, knapsack, classify, selftest.  Verdicts map to exit
codes 0 (yes), 1 (no), 2 (unknown); parse errors exit 3 and enumeration caps
exit 4 so shell pipelines can branch on the three-valued answer.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from .automata import GAutomaton, automaton_from_json, cycle_language_at, decompose_to_cycle_languages, trim
from .bounded import bounded_language_to_json
from .config import RunConfig
from .errors import CapExceeded, HeisratError, ParseError
from .gilman import compute_gilman_general
from .heis import evaluate, format_element, parse_element, parse_word
from .knapsack import decide, decide_bounded_membership, instance_from_json
from .reduction import reduce_automaton
from .spanclass import classify_positive_span

EXIT_YES, EXIT_NO, EXIT_UNKNOWN, EXIT_PARSE, EXIT_CAP = 0, 1, 2, 3, 4


def _load_automaton(path: str) -> GAutomaton:
    with open(path) as fh:
        return automaton_from_json(json.load(fh))


def _print_verdict(dec, out=sys.stdout):
    doc = {"verdict": dec.verdict}
    if dec.witness is not None:
        doc["witness_exponents"] = list(dec.witness)
    if dec.witness_word is not None:
        doc["witness_word"] = ";".join(format_element(g) for g in dec.witness_word)
    json.dump(doc, out)
    out.write("\n")
    return {"yes": EXIT_YES, "no": EXIT_NO, "unknown": EXIT_UNKNOWN}[dec.verdict]


def cmd_reduce(args, cfg) -> int:
    bl = reduce_automaton(_load_automaton(args.automaton), cfg)
    json.dump(bounded_language_to_json(bl), sys.stdout)
    sys.stdout.write("\n")
    return EXIT_YES


def cmd_decide(args, cfg) -> int:
    m = _load_automaton(args.automaton)
    target = evaluate(parse_word(args.element)) if ";" in args.element else parse_element(args.element)
    bl = reduce_automaton(m, cfg)
    return _print_verdict(decide_bounded_membership(target, bl, cfg))


def cmd_knapsack(args, cfg) -> int:
    with open(args.instance) as fh:
        inst = instance_from_json(json.load(fh))
    return _print_verdict(decide(inst, cfg))


def cmd_classify(args, cfg) -> int:
    m = trim(_load_automaton(args.automaton))
    report = {"empty": m.is_empty, "cycle_languages": []}
    if not m.is_empty:
        seen = set()
        for _, states in decompose_to_cycle_languages(m, cfg.enumeration_cap):
            for v in states:
                if v in seen:
                    continue
                seen.add(v)
                gd = compute_gilman_general(cycle_language_at(m, v), cfg.enumeration_cap)
                hats = sorted({e.value.hat for e in gd.x_entries})
                cls = classify_positive_span(hats)
                report["cycle_languages"].append({
                    "state": str(v),
                    "x_hats": [list(h) for h in hats],
                    "span": cls.tag,
                })
    json.dump(report, sys.stdout)
    sys.stdout.write("\n")
    return EXIT_YES


def cmd_selftest(args, cfg) -> int:
    from . import selftest

    report = selftest.run(cfg, corrupt=args.corrupt)
    for name, ok, detail in report:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    failures = sum(1 for _, ok, _ in report if not ok)
    print(f"{len(report) - failures}/{len(report)} suites passed (seed={cfg.seed})")
    return EXIT_YES if failures == 0 else EXIT_NO


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heisrat",
                                     description="Rational subset membership in H3(Z)")
    parser.add_argument("--search-bound", type=int, default=64, metavar="N")
    parser.add_argument("--cap", type=int, default=10**6, metavar="N",
                        help="enumeration cap for paths, cycles and products")
    parser.add_argument("--trace", type=int, default=0, choices=(0, 1, 2), metavar="L")
    parser.add_argument("--seed", type=int, default=0, metavar="S")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", help="print the bounded language of an automaton")
    p.add_argument("automaton")
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("decide", help="decide membership of an element")
    p.add_argument("automaton")
    p.add_argument("element")
    p.set_defaults(fn=cmd_decide)

    p = sub.add_parser("knapsack", help="decide a knapsack instance file")
    p.add_argument("instance")
    p.set_defaults(fn=cmd_knapsack)

    p = sub.add_parser("classify", help="report span classes of the cycle languages")
    p.add_argument("automaton")
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("selftest", help="run the built-in oracle suites")
    p.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(fn=cmd_selftest)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(search_bound=args.search_bound, enumeration_cap=args.cap,
                    trace=args.trace, seed=args.seed)
    try:
        return args.fn(args, cfg)
    except (ParseError, FileNotFoundError, json.JSONDecodeError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except CapExceeded as e:
        print(f"cap exceeded: {e}", file=sys.stderr)
        return EXIT_CAP
    except HeisratError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
