"""Semilinear sets over Z^k and Parikh images of regular languages.

A linear set is base + N-combinations of finitely many period vectors; a
semilinear set is a finite union of linear sets.  Parikh images are computed
by state elimination to a regular expression which is then evaluated in the
commutative (union, sum, star) algebra.  Membership is decided exactly: a
lattice pre-check, a residual walk when every period is non-negative, and a
Contejean-Devie minimal-solution search in general.
"""

from __future__ import annotations

from dataclasses import dataclass

from .automata import GAutomaton, label_key, trim
from .bounded import BoundedLanguage, Fixed, Star, Template
from .errors import CapExceeded, DimensionMismatch, NotAbelian
from .heis import det_form, evaluate, word_inverse, word_power
from .intlinalg import integer_solve

COMPONENT_CAP = 200_000


def _vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


@dataclass(frozen=True)
class LinearSet:
    base: tuple
    periods: frozenset

    @staticmethod
    def of(base, periods=()) -> "LinearSet":
        base = tuple(base)
        periods = frozenset(tuple(p) for p in periods if any(p))
        return LinearSet(base, periods)

    @property
    def dim(self) -> int:
        return len(self.base)

    def shifted(self, v) -> "LinearSet":
        return LinearSet(_vec_add(self.base, v), self.periods)

    def sort_key(self):
        return (self.base, tuple(sorted(self.periods)))


@dataclass(frozen=True)
class SemilinearSet:
    dim: int
    components: tuple

    @staticmethod
    def of(dim, components) -> "SemilinearSet":
        seen = {}
        for c in components:
            if c.dim != dim:
                raise DimensionMismatch(f"component dim {c.dim} != {dim}")
            seen.setdefault(c.sort_key(), c)
        if len(seen) > COMPONENT_CAP:
            raise CapExceeded("semilinear component cap hit")
        return SemilinearSet(dim, tuple(seen[k] for k in sorted(seen)))

    @staticmethod
    def empty(dim) -> "SemilinearSet":
        return SemilinearSet(dim, ())

    @staticmethod
    def zero(dim) -> "SemilinearSet":
        return SemilinearSet.of(dim, [LinearSet.of((0,) * dim)])

    @property
    def is_empty(self) -> bool:
        return not self.components


def sl_union(s1: SemilinearSet, s2: SemilinearSet) -> SemilinearSet:
    if s1.dim != s2.dim:
        raise DimensionMismatch(f"{s1.dim} != {s2.dim}")
    return SemilinearSet.of(s1.dim, s1.components + s2.components)


def sl_sum(s1: SemilinearSet, s2: SemilinearSet) -> SemilinearSet:
    if s1.dim != s2.dim:
        raise DimensionMismatch(f"{s1.dim} != {s2.dim}")
    comps = [
        LinearSet(_vec_add(c1.base, c2.base), c1.periods | c2.periods)
        for c1 in s1.components
        for c2 in s2.components
    ]
    return SemilinearSet.of(s1.dim, comps)


def sl_star(s: SemilinearSet) -> SemilinearSet:
    """Kleene star in the commutative monoid.

    star of a union is the Minkowski sum of the individual stars.  Base-only
    components collapse in one shot: star of a finite set of bases is the
    single linear set of all their non-negative combinations, which avoids
    the exponential blowup on letter unions.
    """
    dim = s.dim
    simple = [c for c in s.components if not c.periods and any(c.base)]
    rich = [c for c in s.components if c.periods]
    result = SemilinearSet.zero(dim)
    if simple:
        bases = frozenset(c.base for c in simple)
        result = sl_sum(result, SemilinearSet.of(
            dim, [LinearSet((0,) * dim, bases)]))
    for c in rich:
        starred = SemilinearSet.of(
            dim,
            [LinearSet.of((0,) * dim), LinearSet(c.base, c.periods | frozenset([c.base]))],
        )
        result = sl_sum(result, starred)
    return simplify(result)


def simplify(s: SemilinearSet) -> SemilinearSet:
    """Drop components absorbed by another component (denotation unchanged).

    C' is absorbed by C when periods(C') is a subset of periods(C) and the
    base difference is a non-negative-period combination; only the cheap
    all-non-negative-period case is attempted.
    """
    comps = sorted(s.components, key=lambda c: (len(c.periods), c.sort_key()), reverse=True)
    kept = []
    for c in comps:
        absorbed = False
        for big in kept:
            if not (c.periods <= big.periods):
                continue
            diff = tuple(a - b for a, b in zip(c.base, big.base))
            periods = sorted(big.periods)
            if all(x == 0 for x in diff):
                absorbed = True
                break
            if periods and all(all(x >= 0 for x in p) for p in periods) \
                    and all(x >= 0 for x in diff) \
                    and _member_nonneg(diff, periods) is not None:
                absorbed = True
                break
        if not absorbed:
            kept.append(c)
    return SemilinearSet.of(s.dim, kept)


# ---------------------------------------------------------------------------
# Regular expressions over an abstract alphabet, for state elimination.

class Rx:
    pass


@dataclass(frozen=True)
class RxEmpty(Rx):
    pass


@dataclass(frozen=True)
class RxEps(Rx):
    pass


@dataclass(frozen=True)
class RxSym(Rx):
    index: int


@dataclass(frozen=True)
class RxUnion(Rx):
    parts: tuple


@dataclass(frozen=True)
class RxCat(Rx):
    parts: tuple


@dataclass(frozen=True)
class RxStar(Rx):
    inner: Rx


_EMPTY = RxEmpty()
_EPS = RxEps()


def rx_union(a: Rx, b: Rx) -> Rx:
    if isinstance(a, RxEmpty):
        return b
    if isinstance(b, RxEmpty):
        return a
    pa = a.parts if isinstance(a, RxUnion) else (a,)
    pb = b.parts if isinstance(b, RxUnion) else (b,)
    return RxUnion(pa + pb)


def rx_cat(a: Rx, b: Rx) -> Rx:
    if isinstance(a, RxEmpty) or isinstance(b, RxEmpty):
        return _EMPTY
    if isinstance(a, RxEps):
        return b
    if isinstance(b, RxEps):
        return a
    pa = a.parts if isinstance(a, RxCat) else (a,)
    pb = b.parts if isinstance(b, RxCat) else (b,)
    return RxCat(pa + pb)


def rx_star(a: Rx) -> Rx:
    if isinstance(a, (RxEmpty, RxEps)):
        return _EPS
    if isinstance(a, RxStar):
        return a
    return RxStar(a)


def rx_to_semilinear(rx: Rx, dim: int) -> SemilinearSet:
    if isinstance(rx, RxEmpty):
        return SemilinearSet.empty(dim)
    if isinstance(rx, RxEps):
        return SemilinearSet.zero(dim)
    if isinstance(rx, RxSym):
        base = tuple(1 if i == rx.index else 0 for i in range(dim))
        return SemilinearSet.of(dim, [LinearSet.of(base)])
    if isinstance(rx, RxUnion):
        out = SemilinearSet.empty(dim)
        for p in rx.parts:
            out = sl_union(out, rx_to_semilinear(p, dim))
        return out
    if isinstance(rx, RxCat):
        out = SemilinearSet.zero(dim)
        for p in rx.parts:
            out = sl_sum(out, rx_to_semilinear(p, dim))
        return out
    if isinstance(rx, RxStar):
        return sl_star(rx_to_semilinear(rx.inner, dim))
    raise TypeError(f"unknown regex node {rx!r}")


def automaton_to_regex(m: GAutomaton, alphabet) -> Rx:
    """State elimination; states removed by ascending degree product, ties by
    identifier, so the output is deterministic."""
    index_of = {label_key(lab): i for i, lab in enumerate(alphabet)}
    src, snk = object(), object()
    nodes = list(m.states) + [src, snk]
    rx = {}

    def get(u, v):
        return rx.get((u, v), _EMPTY)

    def put(u, v, r):
        if isinstance(r, RxEmpty):
            rx.pop((u, v), None)
        else:
            rx[(u, v)] = r

    put(src, m.start, _EPS)
    for q in m.accepts:
        put(q, snk, _EPS)
    for q1, lab, q2 in m.edges:
        put(q1, q2, rx_union(get(q1, q2), RxSym(index_of[label_key(lab)])))

    remaining = list(m.states)
    while remaining:
        def degree(s):
            ins = sum(1 for (u, v) in rx if v == s and u != s)
            outs = sum(1 for (u, v) in rx if u == s and v != s)
            return (ins * outs, str(s))

        s = min(remaining, key=degree)
        remaining.remove(s)
        loop = rx_star(get(s, s))
        ins = [(u, r) for (u, v), r in rx.items() if v == s and u != s]
        outs = [(v, r) for (u, v), r in rx.items() if u == s and v != s]
        for u, _ in ins:
            rx.pop((u, s), None)
        for v, _ in outs:
            rx.pop((s, v), None)
        rx.pop((s, s), None)
        for u, r_in in ins:
            for v, r_out in outs:
                put(u, v, rx_union(get(u, v), rx_cat(r_in, rx_cat(loop, r_out))))
    return get(src, snk)


def parikh_image(m: GAutomaton, alphabet=None) -> SemilinearSet:
    """Letter-count vectors of the accepted words, as a semilinear set."""
    if alphabet is None:
        alphabet = m.labels()
    alphabet = list(alphabet)
    m = trim(m)
    if m.is_empty:
        return SemilinearSet.empty(len(alphabet))
    return simplify(rx_to_semilinear(automaton_to_regex(m, alphabet), len(alphabet)))


# ---------------------------------------------------------------------------
# Exact membership.

def _member_nonneg(u, periods):
    """Residual walk when all periods are componentwise >= 0 and nonzero."""
    if any(x < 0 for x in u):
        return None
    seen = set()
    stack = [(u, ())]
    while stack:
        v, lam = stack.pop()
        if not any(v):
            counts = [0] * len(periods)
            for i in lam:
                counts[i] += 1
            return counts
        if v in seen:
            continue
        seen.add(v)
        for i, p in enumerate(periods):
            if all(x >= y for x, y in zip(v, p)):
                stack.append((tuple(x - y for x, y in zip(v, p)), lam + (i,)))
    return None


def _member_contejean_devie(u, periods, cap=2_000_000):
    """Minimal non-negative solutions of sum(lam_i p_i) = u via the
    Contejean-Devie frontier search; the homogenizing variable is capped at
    one, which is complete for the feasibility question."""
    cols = [tuple(p) for p in periods] + [tuple(-x for x in u)]
    n = len(cols)

    def defect(t):
        return tuple(sum(t[i] * cols[i][r] for i in range(n)) for r in range(len(u)))

    def dot(a, b):
        return sum(x * y for x, y in zip(a, b))

    frontier = {}
    for i in range(n):
        t = tuple(1 if j == i else 0 for j in range(n))
        frontier[t] = defect(t)
    solutions = []
    steps = 0
    while frontier:
        next_frontier = {}
        for t, d in frontier.items():
            if not any(d):
                solutions.append(t)
                continue
            for i in range(n):
                if dot(d, cols[i]) >= 0:
                    continue
                t2 = tuple(v + (1 if j == i else 0) for j, v in enumerate(t))
                if t2[-1] > 1 or t2 in next_frontier:
                    continue
                if any(all(x >= y for x, y in zip(t2, s)) for s in solutions):
                    continue
                next_frontier[t2] = defect(t2)
            steps += 1
            if steps > cap:
                raise CapExceeded("Contejean-Devie cap hit")
        frontier = next_frontier
    for t in solutions:
        if t[-1] == 1:
            return list(t[:-1])
    return None


def sl_member(v, s: SemilinearSet):
    """Exact membership with witness: (component index, coefficients) or None."""
    v = tuple(v)
    if len(v) != s.dim:
        raise DimensionMismatch(f"vector dim {len(v)} != {s.dim}")
    for ci, comp in enumerate(s.components):
        u = tuple(x - b for x, b in zip(v, comp.base))
        periods = sorted(comp.periods)
        if not any(u):
            return ci, [0] * len(periods)
        if not periods:
            continue
        rows = [[p[r] for p in periods] for r in range(s.dim)]
        if integer_solve(rows, list(u)) is None:
            continue
        if all(all(x >= 0 for x in p) for p in periods):
            lam = _member_nonneg(u, periods)
        else:
            lam = _member_contejean_devie(u, periods)
        if lam is not None:
            return ci, lam
    return None


def bounded_language_from_semilinear(s: SemilinearSet, letter_words) -> BoundedLanguage:
    """Realize a semilinear set of letter counts as a bounded word language.

    letter_words[i] is the group word substituted for letter i.  The letters'
    evaluations must commute pairwise (checked), which makes the evaluation
    image of the output equal to the evaluation image of any language with
    this Parikh image.
    """
    letter_words = [tuple(w) for w in letter_words]
    values = [evaluate(w) for w in letter_words]
    for i, g in enumerate(values):
        for j in range(i + 1, len(values)):
            if det_form(g, values[j]):
                raise NotAbelian(f"letters {i} and {j} do not commute")

    def word_for(vec):
        out = []
        for i, k in enumerate(vec):
            if k >= 0:
                out.extend(letter_words[i] * k)
            else:
                out.extend(word_power(word_inverse(letter_words[i]), -k))
        return tuple(out)

    templates = []
    for comp in s.components:
        items = [Fixed(word_for(comp.base))]
        for p in sorted(comp.periods):
            items.append(Star(word_for(p)))
        templates.append(Template(tuple(items)))
    return BoundedLanguage.of(templates)


def semilinear_to_json(s: SemilinearSet) -> dict:
    return {
        "components": [
            {"base": list(c.base), "periods": [list(p) for p in sorted(c.periods)]}
            for c in s.components
        ]
    }
