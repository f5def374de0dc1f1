"""Finite quotients of H3(Z) by normal finite-index subgroups.

The subgroups arriving here are generated by powers a^d, b^d, (c^d,) z^d and
are normal because conjugation in H3(Z) only multiplies by central elements
z^(d*det).  Cosets are identified by a canonical representative computed from
the canonical subgroup basis: reduce the hat into the Hermite fundamental
domain, then reduce the central coordinate modulo the central depth.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .automata import GAutomaton, label_key, label_value, trim
from .errors import NotFiniteIndex
from .heis import HeisElement
from .subgroup import CanonicalSubgroup, subgroup_canonical_basis


@dataclass
class CosetSystem:
    subgroup: CanonicalSubgroup
    reps: tuple
    mul_table: dict = field(repr=False)
    identity_rep: HeisElement = HeisElement(0, 0, 0)

    @property
    def index(self) -> int:
        return len(self.reps)

    def project(self, g: HeisElement) -> HeisElement:
        """Canonical representative of the coset N*g."""
        (g1, _), (g2, _) = self.subgroup.basis
        a1, b2 = g1.a, g2.b
        ra = g.a % a1
        p = (g.a - ra) // a1
        rest = g.b - p * g1.b
        rb = rest % b2
        q = (rest - rb) // b2
        n = g1 ** p * g2 ** q
        reduced = n.inverse() * g
        d = self.subgroup.central_depth
        return HeisElement(ra, rb, reduced.c % d)

    def same_coset(self, g: HeisElement, h: HeisElement) -> bool:
        return self.project(g) == self.project(h)

    def mul(self, rep: HeisElement, g: HeisElement) -> HeisElement:
        key = (rep, g)
        hit = self.mul_table.get(key)
        if hit is None:
            hit = self.project(rep * g)
            self.mul_table[key] = hit
        return hit


def build_quotient(n_generators, ambient_generators) -> CosetSystem:
    """Coset system for N = <n_generators>, tabulated over the ambient
    generators.  Raises NotFiniteIndex when the quotient is infinite."""
    sub = subgroup_canonical_basis(n_generators)
    if sub.hat_rank < 2 or sub.central_depth == 0:
        raise NotFiniteIndex(
            f"subgroup has hat rank {sub.hat_rank} and central depth {sub.central_depth}"
        )
    (g1, _), (g2, _) = sub.basis
    d = sub.central_depth
    reps = tuple(
        HeisElement(ra, rb, rc)
        for ra in range(g1.a)
        for rb in range(g2.b)
        for rc in range(d)
    )
    cs = CosetSystem(sub, reps, {})
    for rep in reps:
        for g in sorted(set(ambient_generators), key=HeisElement.sort_key):
            cs.mul_table[(rep, g)] = cs.project(rep * g)
            cs.mul_table[(rep, g.inverse())] = cs.project(rep * g.inverse())
    return cs


def intersect_with_coset(m: GAutomaton, cs: CosetSystem, target_rep: HeisElement) -> GAutomaton:
    """Product automaton recognizing the accepted words evaluating into the
    coset of target_rep."""
    start = (cs.identity_rep, m.start)
    states = [(rep, q) for rep in cs.reps for q in m.states]
    edges = []
    for rep, q in states:
        for _, lab, dst in m.out[q]:
            edges.append(((rep, q), lab, (cs.mul(rep, label_value(lab)), dst)))
    accepts = {(target_rep, q) for q in m.accepts}
    return trim(GAutomaton(states, edges, start, accepts))


def coset_hitting_representatives(m: GAutomaton, cs: CosetSystem) -> dict:
    """Shortest accepted word per coset met by the evaluation image.

    BFS over the (coset, state) product; ties broken by sorted label order,
    so the result is deterministic.  Keys are canonical representatives,
    values are label words of m.
    """
    def word_key(word):
        return tuple(label_key(lab) for lab in word)

    start = (cs.identity_rep, m.start)
    seen = {start: ()}
    queue = [start]
    found = {}
    while queue:
        queue.sort(key=lambda node: word_key(seen[node]))
        next_queue = []
        for node in queue:
            rep, q = node
            word = seen[node]
            if q in m.accepts and rep not in found:
                found[rep] = word
            for _, lab, dst in m.out[q]:
                nxt = (cs.mul(rep, label_value(lab)), dst)
                if nxt not in seen:
                    seen[nxt] = word + (lab,)
                    next_queue.append(nxt)
        queue = next_queue
    return found
