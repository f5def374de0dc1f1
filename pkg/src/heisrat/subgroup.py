"""Canonical generating data for finitely generated subgroups of H3(Z).

Integer row reduction on the hat vectors, carrying the group elements (and
word realizations over the input generators) along.  The result is a basis of
at most two elements whose hats form a Hermite-reduced lattice basis, plus
the minimal central depth d with z^d in the subgroup; d accumulates the
central leftovers of the reduction and the commutator of the basis pair.
Membership then reduces to a triangular lattice solve and a divisibility
check on the central remainder.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .heis import HeisElement, Word, central, word_inverse, word_power


def _ext_gcd(a: int, b: int):
    """(g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


class _Row:
    __slots__ = ("elem", "word")

    def __init__(self, elem: HeisElement, word: Word):
        self.elem = elem
        self.word = word

    def inverse(self):
        return _Row(self.elem.inverse(), word_inverse(self.word))

    def mul_pow(self, other: "_Row", k: int):
        """Row replacement r <- r * other^k."""
        return _Row(self.elem * other.elem ** k, self.word + word_power(other.word, k))


@dataclass(frozen=True)
class CanonicalSubgroup:
    generators: tuple
    basis: tuple            # 0..2 of (HeisElement, realization word)
    central_depth: int      # d >= 0; z^d is in the subgroup, minimal
    central_word: Word      # realizes z^d when d > 0

    @property
    def hat_rank(self) -> int:
        return len(self.basis)

    def hat_determinant(self) -> int:
        if len(self.basis) != 2:
            return 0
        (g1, _), (g2, _) = self.basis
        return g1.a * g2.b - g2.a * g1.b

    def hat_coords(self, g: HeisElement):
        """Integer coordinates of hat(g) over the basis hats, or None."""
        if len(self.basis) == 2:
            (g1, _), (g2, _) = self.basis
            # Hermite shape: hat(g1) = (a1, b1), hat(g2) = (0, b2)
            if g.a % g1.a:
                return None
            p = g.a // g1.a
            rest = g.b - p * g1.b
            if rest % g2.b:
                return None
            return (p, rest // g2.b)
        if len(self.basis) == 1:
            (g1, _), = self.basis
            if g1.a:
                if g.a % g1.a:
                    return None
                p = g.a // g1.a
            else:
                if g.a:
                    return None
                p = g.b // g1.b if g1.b else 0
            if (g.a, g.b) != (p * g1.a, p * g1.b):
                return None
            return (p,)
        return () if (g.a, g.b) == (0, 0) else None

    def central_remainder(self, g: HeisElement):
        """z-exponent left after removing the basis part, or None."""
        coords = self.hat_coords(g)
        if coords is None:
            return None
        h = HeisElement(0, 0, 0)
        for (b, _), k in zip(self.basis, coords):
            h = h * b ** k
        return (h.inverse() * g).c

    def contains(self, g: HeisElement) -> bool:
        k = self.central_remainder(g)
        if k is None:
            return False
        return k % self.central_depth == 0 if self.central_depth else k == 0


def subgroup_canonical_basis(generators) -> CanonicalSubgroup:
    gens = tuple(generators)
    rows = [_Row(g, (g,)) for g in gens]

    # Eliminate on the first hat coordinate.
    def eliminate(rows, coord):
        """One pivot on hat coordinate `coord`; returns (pivot, others)."""
        work = [r for r in rows]
        while True:
            nonzero = [r for r in work if r.elem.hat[coord] != 0]
            if not nonzero:
                return None, work
            pivot = min(nonzero, key=lambda r: (abs(r.elem.hat[coord]), r.elem.sort_key()))
            rest = [r for r in work if r is not pivot]
            changed = False
            new_rest = []
            for r in rest:
                v = r.elem.hat[coord]
                if v:
                    q = v // pivot.elem.hat[coord]
                    r = r.mul_pow(pivot, -q)
                    if r.elem.hat[coord]:
                        changed = True
                new_rest.append(r)
            work = [pivot] + new_rest
            if not changed:
                return pivot, new_rest

    pivot_a, rest = eliminate(rows, 0)
    pivot_b, rest = eliminate(rest, 1)

    central_rows = [r for r in rest if not r.elem.is_identity()]
    assert all(r.elem.is_central() for r in central_rows)

    basis_rows = []
    if pivot_a is not None:
        if pivot_a.elem.a < 0:
            pivot_a = pivot_a.inverse()
        basis_rows.append(pivot_a)
    if pivot_b is not None:
        if pivot_b.elem.b < 0:
            pivot_b = pivot_b.inverse()
        basis_rows.append(pivot_b)
    if len(basis_rows) == 2:
        # Hermite-reduce the off-diagonal entry: 0 <= b1 < b2.
        g1, g2 = basis_rows
        q = g1.elem.b // g2.elem.b
        basis_rows[0] = g1.mul_pow(g2, -q)

    # Central depth: gcd of leftover z-exponents and the basis commutator.
    d = 0
    d_word: Word = ()
    for r in central_rows:
        k = r.elem.c
        w = r.word if k >= 0 else word_inverse(r.word)
        d, s, t = _ext_gcd(d, abs(k))
        d_word = word_power(d_word, s) + word_power(w, t)
    if len(basis_rows) == 2:
        g1, g2 = basis_rows
        det = g1.elem.a * g2.elem.b - g2.elem.a * g1.elem.b
        comm_word = g1.word + g2.word + word_inverse(g1.word) + word_inverse(g2.word)
        if det < 0:
            comm_word = word_inverse(comm_word)
        d, s, t = _ext_gcd(d, abs(det))
        d_word = word_power(d_word, s) + word_power(comm_word, t)
    if d == 0:
        d_word = ()

    return CanonicalSubgroup(
        gens,
        tuple((r.elem, r.word) for r in basis_rows),
        d,
        d_word,
    )
