"""Built-in oracle suites behind `heisrat selftest`.

Light versions of the checks the test suite runs in full; each suite returns
a pass/fail flag plus a one-line detail.  The hidden corrupt flag perturbs
one law on purpose so the harness can prove it detects failures.
"""

from __future__ import annotations

import random

from .automata import GAutomaton
from .config import RunConfig
from .heis import HeisElement, X, Y, canonical_word, det_form, evaluate, mirror, multi_area2, path_area2
from .knapsack import KnapsackInstance, brute_force_decide, decide
from .reduction import reduce_automaton
from .knapsack import decide_bounded_membership


def _random_element(rng, span=10**3):
    return HeisElement(rng.randint(-span, span), rng.randint(-span, span),
                       rng.randint(-span, span))


def suite_area_law(cfg, corrupt=False):
    rng = random.Random(cfg.seed)
    for _ in range(2000):
        g, h = _random_element(rng), _random_element(rng)
        expected = g.area2 + h.area2 + det_form(g, h)
        got = (g * h).area2 + (1 if corrupt else 0)
        if got != expected:
            return False, f"area law failed at {g}, {h}"
    return True, "2000 random pairs"


def suite_words(cfg, corrupt=False):
    rng = random.Random(cfg.seed + 1)
    gens = [X, X.inverse(), Y, Y.inverse()]
    for _ in range(300):
        word = tuple(rng.choice(gens) for _ in range(rng.randint(0, 30)))
        if path_area2(word) != evaluate(word).area2:
            return False, "path area disagreed with evaluation"
        g = _random_element(rng, span=40)
        if evaluate(canonical_word(g)) != g:
            return False, f"canonical word failed at {g}"
        seq = [_random_element(rng, span=50) for _ in range(rng.randint(0, 12))]
        if multi_area2(seq) != evaluate(seq).area2:
            return False, "multi-factor area disagreed"
        if mirror(mirror(g)) != g or mirror(g).area2 != -g.area2:
            return False, "mirror automorphism law failed"
    return True, "300 random words and elements"


def suite_knapsack(cfg, corrupt=False):
    rng = random.Random(cfg.seed + 2)
    mismatches = 0
    for _ in range(150):
        k = rng.randint(0, 3)
        blocks = tuple(
            (_random_element(rng, span=3), _random_element(rng, span=3))
            for _ in range(k)
        )
        inst = KnapsackInstance(_random_element(rng, span=3), blocks,
                                _random_element(rng, span=6))
        fast = decide(inst, cfg)
        slow = brute_force_decide(inst, 8)
        if slow.verdict == "yes" and fast.verdict != "yes":
            mismatches += 1
        if fast.verdict == "no" and fast.exact and slow.verdict == "yes":
            mismatches += 1
    return mismatches == 0, f"150 random instances, {mismatches} disagreements"


def suite_reduction(cfg, corrupt=False):
    from .heis import Z, parse_element

    loops = [X, Y]
    m = GAutomaton(("v",), tuple(("v", g, "v") for g in loops), "v", ("v",))
    bl = reduce_automaton(m, cfg)
    words = [(X, Y), (X, X, Y), (Y, X), (X, Y, X, Y)]
    for word in words:
        target = evaluate(word)
        if decide_bounded_membership(target, bl, cfg).verdict != "yes":
            return False, f"lost accepted element {target}"
    z = HeisElement(0, 0, 1)
    if decide_bounded_membership(z, bl, cfg).verdict == "yes":
        return False, "claimed the commutator without a witness"
    return True, "single-state {x,y} submonoid checks"


SUITES = [
    ("area-composition", suite_area_law),
    ("word-interpretations", suite_words),
    ("knapsack-vs-brute-force", suite_knapsack),
    ("reduction-smoke", suite_reduction),
]


def run(cfg: RunConfig, corrupt: bool = False):
    report = []
    for name, fn in SUITES:
        try:
            ok, detail = fn(cfg, corrupt=corrupt)
        except Exception as e:  # a suite crash is a failure, not an abort
            ok, detail = False, f"crashed: {e!r}"
        report.append((name, ok, detail))
    return report
