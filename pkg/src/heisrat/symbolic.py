"""Symbolic hat/area tracking for products with unknown exponents.

A product h0 * g1^n1 * h1 * ... * gk^nk * hk has a hat that is affine in the
exponents and a doubled area that is a polynomial of total degree at most
two (powers of a fixed element contribute linearly; cross terms come from
the det pairing of an affine hat prefix with a block hat).  Both are kept
with exact integer coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

from .heis import HeisElement


class Affine:
    """const + sum coeff[i] * n_i with integer coefficients."""

    __slots__ = ("const", "coeffs")

    def __init__(self, const=0, coeffs=()):
        self.const = const
        self.coeffs = tuple(coeffs)

    @staticmethod
    def zero(k):
        return Affine(0, (0,) * k)

    def add_const(self, c):
        return Affine(self.const + c, self.coeffs)

    def add_var(self, i, c):
        coeffs = list(self.coeffs)
        coeffs[i] += c
        return Affine(self.const, coeffs)

    def __add__(self, other):
        return Affine(self.const + other.const,
                      tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def scale(self, c):
        return Affine(self.const * c, tuple(c * a for a in self.coeffs))

    def eval(self, ns):
        return self.const + sum(c * n for c, n in zip(self.coeffs, ns))

    def __repr__(self):
        return f"Affine({self.const}, {self.coeffs})"


class QPoly:
    """Integer polynomial of total degree <= 2 in n_0..n_{k-1}.

    Keys: () for the constant, (i,) for n_i, (i, j) with i <= j for n_i n_j.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = dict(terms or {})

    def copy(self):
        return QPoly(self.terms)

    def add_term(self, mono, coeff):
        if not coeff:
            return
        mono = tuple(sorted(mono))
        new = self.terms.get(mono, 0) + coeff
        if new:
            self.terms[mono] = new
        else:
            self.terms.pop(mono, None)

    def add_const(self, c):
        self.add_term((), c)

    def add_affine(self, aff: Affine, scale=1):
        self.add_const(aff.const * scale)
        for i, c in enumerate(aff.coeffs):
            self.add_term((i,), c * scale)

    def add_affine_times_var(self, aff: Affine, var: int, scale=1):
        self.add_term((var,), aff.const * scale)
        for i, c in enumerate(aff.coeffs):
            self.add_term((i, var), c * scale)

    def eval(self, ns):
        total = 0
        for mono, c in self.terms.items():
            v = c
            for i in mono:
                v *= ns[i]
            total += v
        return total

    def coeff(self, mono):
        return self.terms.get(tuple(sorted(mono)), 0)

    def substitute_affine(self, subs):
        """Substitute n_i = subs[i] (Affine over new variables); exact."""
        k_new = len(subs[0].coeffs) if subs else 0
        out = QPoly()
        for mono, c in self.terms.items():
            if len(mono) == 0:
                out.add_const(c)
            elif len(mono) == 1:
                out.add_affine(subs[mono[0]], scale=c)
            else:
                a, b = subs[mono[0]], subs[mono[1]]
                out.add_const(c * a.const * b.const)
                for i, ca in enumerate(a.coeffs):
                    out.add_term((i,), c * ca * b.const)
                for j, cb in enumerate(b.coeffs):
                    out.add_term((j,), c * a.const * cb)
                for i, ca in enumerate(a.coeffs):
                    if not ca:
                        continue
                    for j, cb in enumerate(b.coeffs):
                        if cb:
                            out.add_term((i, j), c * ca * cb)
        return out

    def __repr__(self):
        return f"QPoly({self.terms})"


@dataclass
class SymbolicProduct:
    """Hat pair (affine) and doubled area (quadratic) of a star product."""

    k: int
    hat_a: Affine
    hat_b: Affine
    area2: QPoly

    def eval(self, ns):
        return (self.hat_a.eval(ns), self.hat_b.eval(ns)), self.area2.eval(ns)


class ProductBuilder:
    def __init__(self, k: int):
        self.k = k
        self.hat_a = Affine.zero(k)
        self.hat_b = Affine.zero(k)
        self.area2 = QPoly()

    def absorb_fixed(self, h: HeisElement):
        # area2(WH) = area2(W) + area2(h) + det(hat W, hat h)
        self.area2.add_const(h.area2)
        self.area2.add_affine(self.hat_a, scale=h.b)
        self.area2.add_affine(self.hat_b, scale=-h.a)
        self.hat_a = self.hat_a.add_const(h.a)
        self.hat_b = self.hat_b.add_const(h.b)
        return self

    def absorb_block(self, var: int, g: HeisElement):
        # g^n contributes n*area2(g) and the det pairing with the prefix hat.
        self.area2.add_term((var,), g.area2)
        self.area2.add_affine_times_var(self.hat_a, var, scale=g.b)
        self.area2.add_affine_times_var(self.hat_b, var, scale=-g.a)
        self.hat_a = self.hat_a.add_var(var, g.a)
        self.hat_b = self.hat_b.add_var(var, g.b)
        return self

    def done(self) -> SymbolicProduct:
        return SymbolicProduct(self.k, self.hat_a, self.hat_b, self.area2)
