"""Exact certificates for the cone-case thresholds.

The completeness threshold K of the cone rewriting is found by scanning
upward until a set of sufficient polynomial inequalities (in the two frame
coordinates of the target) is certified non-negative on the quadrant
[K, inf)^2.  Certification substitutes alpha = K + u, beta = K + v and checks
that every coefficient of the expanded polynomial is non-negative, which is
sound (though not tight) and fully exact.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

from .errors import CapExceeded


class Poly2:
    """Polynomial in two variables (alpha, beta) with Fraction coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for mono, c in terms.items():
                self.add(mono, c)

    def add(self, mono, coeff):
        coeff = Fraction(coeff)
        if not coeff:
            return
        cur = self.terms.get(mono, Fraction(0)) + coeff
        if cur:
            self.terms[mono] = cur
        else:
            self.terms.pop(mono, None)

    @staticmethod
    def const(c):
        p = Poly2()
        p.add((0, 0), c)
        return p

    @staticmethod
    def affine(c0, ca, cb):
        p = Poly2()
        p.add((0, 0), c0)
        p.add((1, 0), ca)
        p.add((0, 1), cb)
        return p

    def __add__(self, other):
        out = Poly2(dict(self.terms))
        for mono, c in other.terms.items():
            out.add(mono, c)
        return out

    def __sub__(self, other):
        out = Poly2(dict(self.terms))
        for mono, c in other.terms.items():
            out.add(mono, -c)
        return out

    def scale(self, c):
        out = Poly2()
        for mono, coeff in self.terms.items():
            out.add(mono, coeff * c)
        return out

    def __mul__(self, other):
        out = Poly2()
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                out.add((i1 + i2, j1 + j2), c1 * c2)
        return out

    def eval(self, a, b):
        return sum(c * Fraction(a) ** i * Fraction(b) ** j for (i, j), c in self.terms.items())

    def nonneg_from(self, k) -> bool:
        """True if certified >= 0 whenever alpha, beta >= k (sound test)."""
        shifted = {}
        for (i, j), c in self.terms.items():
            for i2 in range(i + 1):
                for j2 in range(j + 1):
                    co = c * comb(i, i2) * comb(j, j2) * Fraction(k) ** (i - i2 + j - j2)
                    mono = (i2, j2)
                    shifted[mono] = shifted.get(mono, Fraction(0)) + co
        return all(v >= 0 for v in shifted.values())


def qpoly_to_poly2(qpoly, subs):
    """Substitute solver variables of an integer QPoly with affine Poly2
    expressions (given as (c0, c_alpha, c_beta) Fractions)."""
    polys = [Poly2.affine(*s) for s in subs]
    out = Poly2()
    for mono, c in qpoly.terms.items():
        if len(mono) == 0:
            out.add((0, 0), c)
        elif len(mono) == 1:
            out = out + polys[mono[0]].scale(c)
        else:
            out = out + (polys[mono[0]] * polys[mono[1]]).scale(c)
    return out


def scan_threshold(floor_value, condition_polys, cap: int = 100_000) -> int:
    """Least integer K >= floor_value with every polynomial certified
    non-negative on [K, inf)^2."""
    k = max(1, floor_value)
    for _ in range(cap):
        if all(p.nonneg_from(k) for p in condition_polys):
            return k
        k += 1
    raise CapExceeded("cone threshold scan cap hit")
