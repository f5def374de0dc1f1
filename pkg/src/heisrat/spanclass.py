"""Classification of the positive span of a finite set of vectors in Z^2.

The span {sum lambda_i v_i : lambda_i >= 0} of finitely many integer vectors
is one of: the origin, a ray, a line, a closed half-plane, a salient
two-dimensional cone, or the whole plane.  Everything here is exact integer
or rational arithmetic; no floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

Vec = tuple[int, int]


def det2(u: Vec, v: Vec) -> int:
    return u[0] * v[1] - v[0] * u[1]


def dot2(u: Vec, v: Vec) -> int:
    return u[0] * v[0] + u[1] * v[1]


def primitive(v: Vec) -> Vec:
    g = gcd(abs(v[0]), abs(v[1]))
    return (v[0] // g, v[1] // g)


def perp(v: Vec) -> Vec:
    return (-v[1], v[0])


@dataclass(frozen=True)
class SpanClass:
    tag: str                     # Zero | Ray | Line | HalfPlane | Plane | Cone
    direction: Vec | None = None     # Ray/Line direction, HalfPlane boundary
    interior: Vec | None = None      # HalfPlane: a vector off the boundary
    cone_low: Vec | None = None      # Cone: primitive edges, counter-clockwise
    cone_high: Vec | None = None

    def __str__(self):
        parts = [self.tag]
        if self.direction is not None:
            parts.append(f"dir={self.direction}")
        if self.cone_low is not None:
            parts.append(f"edges={self.cone_low}->{self.cone_high}")
        return " ".join(parts)


def classify_positive_span(vectors) -> SpanClass:
    dirs = sorted({primitive(v) for v in vectors if v != (0, 0)})
    if not dirs:
        return SpanClass("Zero")
    if len(dirs) == 1:
        return SpanClass("Ray", direction=dirs[0])
    on_line = all(det2(dirs[0], d) == 0 for d in dirs)
    if on_line:
        return SpanClass("Line", direction=max(dirs[0], primitive((-dirs[0][0], -dirs[0][1]))))

    # Two-dimensional: look for a closed half-plane containing every vector.
    # A minimal containing half-plane touches an input direction, so testing
    # the perpendiculars of the inputs is exhaustive.
    normal = None
    for d in dirs:
        for n in (perp(d), perp((-d[0], -d[1]))):
            if all(dot2(n, e) >= 0 for e in dirs):
                normal = n
                break
        if normal:
            break
    if normal is None:
        return SpanClass("Plane")

    antipodal = None
    dir_set = set(dirs)
    for d in dirs:
        if (-d[0], -d[1]) in dir_set:
            antipodal = d
            break
    if antipodal is not None:
        boundary = max(antipodal, (-antipodal[0], -antipodal[1]))
        interior = next(d for d in dirs if det2(boundary, d) != 0)
        return SpanClass("HalfPlane", direction=boundary, interior=interior)

    # Salient cone: the edges are the directions with all others weakly on
    # one side.
    low = [d for d in dirs if all(det2(d, e) >= 0 for e in dirs)]
    high = [d for d in dirs if all(det2(d, e) <= 0 for e in dirs)]
    assert low and high, "salient cone must have extreme rays among inputs"
    return SpanClass("Cone", cone_low=low[0], cone_high=high[0])


def is_full_positive_span(vectors) -> bool:
    return classify_positive_span(vectors).tag == "Plane"


@dataclass(frozen=True)
class AlphaBetaFrame:
    """Decomposition v = alpha(v)*a + beta(v)*b for independent a, b."""

    a: Vec
    b: Vec

    def __post_init__(self):
        if det2(self.a, self.b) == 0:
            raise ValueError("frame vectors must be linearly independent")

    @property
    def determinant(self) -> int:
        return det2(self.a, self.b)

    def alpha_beta(self, v: Vec) -> tuple[Fraction, Fraction]:
        d = self.determinant
        return (Fraction(det2(v, self.b), d), Fraction(det2(self.a, v), d))

    def alpha(self, v: Vec) -> Fraction:
        return Fraction(det2(v, self.b), self.determinant)

    def beta(self, v: Vec) -> Fraction:
        return Fraction(det2(self.a, v), self.determinant)

    def in_cone(self, v: Vec) -> bool:
        al, be = self.alpha_beta(v)
        return al >= 0 and be >= 0


def alpha_beta(frame: AlphaBetaFrame, v: Vec):
    return frame.alpha_beta(v)


def in_positive_span(vectors, target: Vec) -> bool:
    """Exact membership of `target` in the positive span (test oracle).

    In the plane, Caratheodory for cones: a member is a non-negative
    combination of at most two of the generators.
    """
    vs = [v for v in vectors if v != (0, 0)]
    if target == (0, 0):
        return True
    for v in vs:
        if det2(v, target) == 0 and dot2(v, target) > 0:
            return True
    for i, u in enumerate(vs):
        for v in vs[i + 1:]:
            d = det2(u, v)
            if d == 0:
                continue
            lam = Fraction(det2(target, v), d)
            mu = Fraction(det2(u, target), d)
            if lam >= 0 and mu >= 0:
                return True
    return False
