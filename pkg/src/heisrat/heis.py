"""Exact arithmetic in the discrete Heisenberg group.

Elements are upper unitriangular integer matrices

    [1 a c]
    [0 1 b]
    [0 0 1]

stored as the triple (a, b, c).  Alongside the matrix coordinates we keep two
derived quantities: the abelianization image hat(g) = (a, b) and the doubled
area coordinate area2(g) = 2c - a*b.  The area itself (a half-integer) never
appears in the hot path; every formula that would carry a 1/2 factor is used
in doubled form so all arithmetic stays in plain ints.

Words are tuples of elements; the alphabet of a word is the group itself.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

from .errors import ParseError

Vec = tuple[int, int]


@dataclass(frozen=True, eq=False)
class HeisElement:
    a: int
    b: int
    c: int

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.a, self.b, self.c)))

    def __eq__(self, other):
        if not isinstance(other, HeisElement):
            return NotImplemented
        return self.a == other.a and self.b == other.b and self.c == other.c

    def __hash__(self):
        return self._hash

    @property
    def hat(self) -> Vec:
        return (self.a, self.b)

    @property
    def area2(self) -> int:
        """Doubled signed area: 2c - ab."""
        return 2 * self.c - self.a * self.b

    def __mul__(self, other: "HeisElement") -> "HeisElement":
        return HeisElement(
            self.a + other.a,
            self.b + other.b,
            self.c + other.c + self.a * other.b,
        )

    def inverse(self) -> "HeisElement":
        return HeisElement(-self.a, -self.b, self.a * self.b - self.c)

    def __pow__(self, n: int) -> "HeisElement":
        if n < 0:
            return self.inverse() ** (-n)
        # c part of g^n is n*c + C(n,2)*a*b
        return HeisElement(n * self.a, n * self.b, n * self.c + (n * (n - 1) // 2) * self.a * self.b)

    def is_identity(self) -> bool:
        return self.a == 0 and self.b == 0 and self.c == 0

    def is_central(self) -> bool:
        return self.a == 0 and self.b == 0

    def sort_key(self) -> tuple:
        return (self.a, self.b, self.c)

    def __repr__(self):
        return f"H({self.a},{self.b},{self.c})"


IDENTITY = HeisElement(0, 0, 0)
X = HeisElement(1, 0, 0)
Y = HeisElement(0, 1, 0)
Z = HeisElement(0, 0, 1)  # z = [x, y]

Word = tuple[HeisElement, ...]


def mul(g: HeisElement, h: HeisElement) -> HeisElement:
    return g * h


def inv(g: HeisElement) -> HeisElement:
    return g.inverse()


def det_form(g: HeisElement, h: HeisElement) -> int:
    """det of the hat vectors; the commutator [g;h] equals z**det_form(g,h)."""
    return g.a * h.b - h.a * g.b


def det2(u: Vec, v: Vec) -> int:
    return u[0] * v[1] - v[0] * u[1]


def commutator(g: HeisElement, h: HeisElement) -> HeisElement:
    return g * h * g.inverse() * h.inverse()


def central(k: int) -> HeisElement:
    return HeisElement(0, 0, k)


def mirror(g: HeisElement) -> HeisElement:
    """The automorphism (a,b,c) -> (b,a,ab-c); swaps hat coords, negates area2."""
    return HeisElement(g.b, g.a, g.a * g.b - g.c)


def evaluate(word) -> HeisElement:
    """Left-to-right product of the letters; empty word gives the identity."""
    g = IDENTITY
    for letter in word:
        g = g * letter
    return g


def word_inverse(word) -> Word:
    return tuple(letter.inverse() for letter in reversed(word))


def word_power(word, n: int) -> Word:
    if n < 0:
        return word_inverse(word_power(word, -n))
    return tuple(word) * n


def mirror_word(word) -> Word:
    return tuple(mirror(letter) for letter in word)


def multi_area2(gs) -> int:
    """Doubled area of a product from the factors alone.

    area2(g1...gn) = sum_{i<j} det_form(gi,gj) + sum_i area2(gi).
    """
    gs = list(gs)
    total = sum(g.area2 for g in gs)
    hx = hy = 0  # running hat sum of g1..g_{i-1}
    for g in gs:
        total += hx * g.b - g.a * hy
        hx += g.a
        hy += g.b
    return total


_GENERATOR_STEPS = {
    X: (1, 0),
    X.inverse(): (-1, 0),
    Y: (0, 1),
    Y.inverse(): (0, -1),
}


def path_area2(word) -> int:
    """Doubled algebraic area of the lattice path of a word over x,y,x^-1,y^-1.

    The path starts at the origin and is closed by the straight chord back to
    it; counter-clockwise enclosures count positively.  Equals
    area2(evaluate(word)).
    """
    px = py = 0
    total = 0
    for letter in word:
        step = _GENERATOR_STEPS.get(letter)
        if step is None:
            raise ParseError(f"path interpretation needs unit generator letters, got {letter!r}")
        qx, qy = px + step[0], py + step[1]
        total += px * qy - qx * py
        px, py = qx, qy
    return total


def canonical_word(g: HeisElement) -> Word:
    """A word x^a y^b z^(c-ab) evaluating to g, with negative exponents
    realized by inverse letters."""
    return word_power((X,), g.a) + word_power((Y,), g.b) + word_power((Z,), g.c - g.a * g.b)


def dilation_embed(matrices):
    """Embed rational unitriangular matrices into H3(Z) by the least dilation.

    Input triples may contain ints or Fractions.  Returns (N, elements) where
    N >= 1 is minimal with N*a, N*b, N^2*c all integral for every input and
    each output is (N*a, N*b, N^2*c).
    """
    triples = [tuple(Fraction(v) for v in m) for m in matrices]
    n_hat = 1
    for a, b, _ in triples:
        n_hat = lcm(n_hat, a.denominator, b.denominator)
    n_sq = 1
    for _, _, c in triples:
        d = c.denominator
        f = 1
        p = 2
        while p * p <= d:
            e = 0
            while d % p == 0:
                d //= p
                e += 1
            f *= p ** ((e + 1) // 2)
            p += 1
        if d > 1:
            f *= d
        n_sq = lcm(n_sq, f)
    n = lcm(n_hat, n_sq)
    out = []
    for a, b, c in triples:
        na, nb, nc = n * a, n * b, n * n * c
        assert na.denominator == nb.denominator == nc.denominator == 1
        out.append(HeisElement(int(na), int(nb), int(nc)))
    return n, out


# ---------------------------------------------------------------------------
# Textual syntax.  An element string is either a coordinate triple "(a,b,c)"
# or a whitespace-separated word in tokens x, y, z with optional integer
# exponents, e.g. "x^5 y^-2 z^3".  A word string joins element strings with
# semicolons.

_TOKEN_RE = re.compile(r"([xyz])(?:\^(-?\d+))?$")
_COORD_RE = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\)$")

_GENS = {"x": X, "y": Y, "z": Z}


def parse_element(text: str) -> HeisElement:
    text = text.strip()
    if not text:
        return IDENTITY
    m = _COORD_RE.match(text)
    if m:
        return HeisElement(int(m.group(1)), int(m.group(2)), int(m.group(3)))
    g = IDENTITY
    for token in text.split():
        m = _TOKEN_RE.match(token)
        if not m:
            raise ParseError(f"bad element token {token!r}")
        exp = int(m.group(2)) if m.group(2) is not None else 1
        g = g * (_GENS[m.group(1)] ** exp)
    return g


def parse_word(text: str) -> Word:
    text = text.strip()
    if not text:
        return ()
    return tuple(parse_element(part) for part in text.split(";"))


def format_element(g: HeisElement) -> str:
    return f"({g.a},{g.b},{g.c})"


def format_word(word) -> str:
    return ";".join(format_element(g) for g in word)
