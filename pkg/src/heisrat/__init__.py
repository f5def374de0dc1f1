"""Rational subset membership in the discrete Heisenberg group.

Pipeline: parse a group-labeled automaton, rewrite it into a bounded regular
language with the same evaluation image, and decide membership questions by
solving the resulting exponent equations exactly.
"""

from .heis import (
    HeisElement,
    IDENTITY,
    X,
    Y,
    Z,
    canonical_word,
    det_form,
    dilation_embed,
    evaluate,
    inv,
    mirror,
    mul,
    multi_area2,
    parse_element,
    parse_word,
    path_area2,
)
from .automata import GAutomaton, automaton_from_json, determinize, trim
from .bounded import BoundedLanguage, Fixed, Star, Template
from .reduction import reduce_automaton, reduce_submonoid
from .knapsack import (
    KnapsackDecision,
    KnapsackInstance,
    brute_force_decide,
    decide,
    decide_bounded_membership,
    rsmp_decide,
)
from .config import RunConfig

__all__ = [
    "HeisElement", "IDENTITY", "X", "Y", "Z",
    "canonical_word", "det_form", "dilation_embed", "evaluate", "inv",
    "mirror", "mul", "multi_area2", "parse_element", "parse_word",
    "path_area2",
    "GAutomaton", "automaton_from_json", "determinize", "trim",
    "BoundedLanguage", "Fixed", "Star", "Template",
    "reduce_automaton", "reduce_submonoid",
    "KnapsackDecision", "KnapsackInstance", "brute_force_decide", "decide",
    "decide_bounded_membership", "rsmp_decide",
    "RunConfig",
]

__version__ = "0.1.0"
