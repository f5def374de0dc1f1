"""Deciding membership in h0 g1* h1 ... gk* hk over H3(Z).

The hat of the product is affine in the exponents and the doubled area is a
quadratic polynomial, so membership reduces to two linear equations plus one
quadratic over non-negative integers.  After parametrizing the integer
solutions of the linear part, the quadratic is solved exactly whenever at
most two free variables remain (or whenever the constraint polytope is
bounded and small); with three or more free variables a bounded search is
used and failure is reported as an honest Unknown.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iter_product
from math import gcd, isqrt

from .bounded import BoundedLanguage, Fixed, Star, Template
from .errors import CapExceeded, ParseError
from .heis import HeisElement, IDENTITY, evaluate, format_word, parse_word
from .intlinalg import ext_gcd, integer_solve
from .symbolic import Affine, ProductBuilder, QPoly, SymbolicProduct
from .config import RunConfig, DEFAULT


@dataclass(frozen=True)
class KnapsackInstance:
    prefix: HeisElement
    blocks: tuple          # pairs (base, separator following the block)
    target: HeisElement

    def evaluate_at(self, exponents) -> HeisElement:
        g = self.prefix
        for (base, sep), n in zip(self.blocks, exponents):
            g = g * base ** n * sep
        return g


@dataclass
class KnapsackDecision:
    verdict: str                  # "yes" | "no" | "unknown"
    witness: tuple | None = None  # exponents for "yes"
    exact: bool = True            # False only for search-based outcomes
    free_vars: int = 0
    tier: str = ""
    witness_word: tuple | None = None

    @property
    def is_yes(self):
        return self.verdict == "yes"


def symbolic_product(inst: KnapsackInstance) -> SymbolicProduct:
    k = len(inst.blocks)
    builder = ProductBuilder(k)
    builder.absorb_fixed(inst.prefix)
    for i, (base, sep) in enumerate(inst.blocks):
        builder.absorb_block(i, base)
        builder.absorb_fixed(sep)
    return builder.done()


def solve_linear(sp: SymbolicProduct, target_hat):
    """Integer solutions of the two hat equations: (x0, kernel) or None."""
    rows = [list(sp.hat_a.coeffs), list(sp.hat_b.coeffs)]
    rhs = [target_hat[0] - sp.hat_a.const, target_hat[1] - sp.hat_b.const]
    return integer_solve(rows, rhs)


# ---------------------------------------------------------------------------
# Constraint systems (affine forms required to be >= 0 over the free vars).

def _fm_eliminate(cons, var):
    pos, neg, rest = [], [], []
    for c in cons:
        a = c[1][var]
        if a > 0:
            pos.append(c)
        elif a < 0:
            neg.append(c)
        else:
            rest.append(c)
    out = list(rest)
    for cp in pos:
        ap = cp[1][var]
        for cn in neg:
            an = -cn[1][var]
            const = an * cp[0] + ap * cn[0]
            coeffs = tuple(an * x + ap * y for x, y in zip(cp[1], cn[1]))
            g = gcd(abs(const), *(abs(v) for v in coeffs)) or 1
            out.append((const // g, tuple(v // g for v in coeffs)))
    return out


def fm_bounds(constraints, f, row_cap=4000):
    """Per-variable rational bounds from Fourier-Motzkin elimination.

    Returns None when the rational polytope is empty.  A variable's bound is
    None when unbounded on that side (or when elimination blew past row_cap,
    which is treated conservatively as unbounded).
    """
    cons = [(a.const, a.coeffs) for a in constraints]
    for const, coeffs in cons:
        if not any(coeffs) and const < 0:
            return None
    bounds = []
    for j in range(f):
        sub = list(cons)
        ok = True
        for i in range(f):
            if i == j:
                continue
            sub = _fm_eliminate(sub, i)
            sub = list({c for c in sub})
            if len(sub) > row_cap:
                ok = False
                break
        if not ok:
            bounds.append((None, None))
            continue
        lo, hi = None, None
        for const, coeffs in sub:
            a = coeffs[j]
            if a == 0:
                if const < 0:
                    return None
            elif a > 0:
                v = Fraction(-const, a)
                lo = v if lo is None else max(lo, v)
            else:
                v = Fraction(const, -a)
                hi = v if hi is None else min(hi, v)
        if lo is not None and hi is not None and lo > hi:
            return None
        bounds.append((lo, hi))
    return bounds


def _ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


def _constraints_ok(constraints, t):
    return all(a.eval(t) >= 0 for a in constraints)


def _solve_in_box(fp: QPoly, cons, ranges, cfg, budget=None):
    """Search a box for a root of fp meeting the constraints.

    One pivot coordinate (the widest range) is solved exactly as a univariate
    quadratic instead of being scanned, so the work is the product of the
    remaining ranges.  Returns (hit_or_None, scanned_all)."""
    if budget is None:
        budget = cfg.enum_cells
    f = len(ranges)
    if any(len(r) == 0 for r in ranges):
        return None, True
    pivot = max(range(f), key=lambda j: len(ranges[j]))
    outer = [r for j, r in enumerate(ranges) if j != pivot]
    cells = 1
    for r in outer:
        cells *= len(r)
    if cells > budget:
        return None, False
    others = [j for j in range(f) if j != pivot]
    c2 = fp.coeff((pivot, pivot))
    lin_cross = [(j, fp.coeff(tuple(sorted((j, pivot))))) for j in others]
    c1_base = fp.coeff((pivot,))
    lo_p, hi_p = ranges[pivot][0], ranges[pivot][-1]
    point = [0] * f
    for combo in iter_product(*outer):
        for j, v in zip(others, combo):
            point[j] = v
        point[pivot] = 0
        c0 = fp.eval(point)
        c1 = c1_base + sum(c * v for (_, c), v in zip(lin_cross, combo))
        roots = []
        if c2 == 0:
            if c1 == 0:
                if c0 == 0:
                    roots = range(lo_p, hi_p + 1)
            elif c0 % c1 == 0:
                roots = [-c0 // c1]
        else:
            disc = c1 * c1 - 4 * c2 * c0
            s = _is_square(disc)
            if s is not None:
                roots = [num // (2 * c2) for num in (-c1 + s, -c1 - s)
                         if num % (2 * c2) == 0]
        for t_p in roots:
            if lo_p <= t_p <= hi_p:
                point[pivot] = t_p
                if _constraints_ok(cons, point):
                    return tuple(point), True
    return None, True


# ---------------------------------------------------------------------------
# Pell machinery for the hyperbolic tier.

def _is_square(n: int):
    if n < 0:
        return None
    r = isqrt(n)
    return r if r * r == n else None


def pell_fundamental(d: int):
    """Least (u, v) with u^2 - d v^2 = 1, v > 0; d positive nonsquare."""
    a0 = isqrt(d)
    m, den, a = 0, 1, a0
    num1, num = 1, a0
    den1, den_c = 0, 1
    for _ in range(10**6):
        if num * num - d * den_c * den_c == 1:
            return num, den_c
        m = den * a - m
        den = (d - m * m) // den
        a = (a0 + m) // den
        num1, num = num, a * num + num1
        den1, den_c = den_c, a * den_c + den1
    raise CapExceeded("Pell fundamental solution iteration cap")


def _pqa_class_search(p0: int, q0: int, d: int, target: int):
    """Continued-fraction scan of (p0 + sqrt(d))/q0 collecting (G, B) pairs
    with G^2 - d B^2 = target.  Two full periods are scanned, which contains
    a representative of every solvable class for this (p0, q0)."""
    s = isqrt(d)
    p, q = p0, q0
    g_prev, g_cur = -p0, q0
    b_prev, b_cur = 1, 0
    seen = {}
    out = []
    for step in range(200_000):
        state = (p, q)
        count = seen.get(state, 0)
        if count >= 2:
            break
        seen[state] = count + 1
        if q > 0:
            a = (p + s) // q
        else:
            a = (p + s + 1) // q
        g_prev, g_cur = g_cur, a * g_cur + g_prev
        b_prev, b_cur = b_cur, a * b_cur + b_prev
        p = a * q - p
        q = (d - p * p) // q
        if g_cur * g_cur - d * b_cur * b_cur == target:
            out.append((g_cur, b_cur))
    else:
        raise CapExceeded("PQa period scan cap")
    return out


def pell_representatives(d: int, n: int):
    """Family representatives of x^2 - d y^2 = n (d positive nonsquare,
    n != 0), by the classical divisor/square-root-class reduction to
    continued fractions.  Every solution is an automorphism power of a
    returned pair up to the sign closure applied by the family walker."""
    from .numtheory import sqrts_mod, square_divisors

    reps = set()
    x = _is_square(n)
    if x is not None:
        reps.add((x, 0))
        reps.add((-x, 0))
    for f in square_divisors(n):
        m = n // (f * f)
        am = abs(m)
        for z in sqrts_mod(d, am):
            zz = z if 2 * z <= am else z - am
            for gx, by in _pqa_class_search(zz, am, d, m):
                reps.add((f * gx, f * by))
                reps.add((-f * gx, f * by))
    return sorted(reps)


# ---------------------------------------------------------------------------
# Core equation solvers over the free variables.

def _solve_f1(fpoly: QPoly, constraints, cfg):
    c2 = fpoly.coeff((0, 0))
    c1 = fpoly.coeff((0,))
    c0 = fpoly.coeff(())
    roots = []
    if c2 == 0 and c1 == 0:
        if c0 != 0:
            return "no", None
        # Equation trivially true: need any integer in the interval.
        b = fm_bounds(constraints, 1)
        if b is None:
            return "no", None
        lo, hi = b[0]
        t = _ceil_frac(lo) if lo is not None else (min(0, _floor_frac(hi)) if hi is not None else 0)
        if hi is not None and t > _floor_frac(hi):
            return "no", None
        return "yes", (t,)
    if c2 == 0:
        if c0 % c1 == 0:
            roots = [-c0 // c1]
    else:
        disc = c1 * c1 - 4 * c2 * c0
        s = _is_square(disc)
        if s is not None:
            for num in (-c1 + s, -c1 - s):
                if num % (2 * c2) == 0:
                    roots.append(num // (2 * c2))
    for t in sorted(set(roots)):
        if _constraints_ok(constraints, (t,)):
            return "yes", (t,)
    return "no", None


def _interval_candidates(constraints, var_count, fixed, free_index):
    """Integer interval for one remaining variable after fixing the others."""
    lo, hi = None, None
    for a in constraints:
        coef = a.coeffs[free_index]
        rest = a.const + sum(c * v for i, (c, v) in enumerate(zip(a.coeffs, fixed)) if i != free_index)
        if coef == 0:
            if rest < 0:
                return None
        elif coef > 0:
            v = Fraction(-rest, coef)
            lo = v if lo is None else max(lo, v)
        else:
            v = Fraction(rest, -coef)
            hi = v if hi is None else min(hi, v)
    return lo, hi


def _line_solutions(a: int, b: int, c: int):
    """Integer solutions of a t1 + b t2 + c = 0 as point + direction."""
    if a == 0 and b == 0:
        return None
    g, s, t = ext_gcd(a, b)
    if (-c) % g:
        return None
    mult = (-c) // g
    base = (s * mult, t * mult)
    direction = (b // g, -a // g)
    return base, direction


def _scan_line(base, direction, fpoly, constraints, check_equation=True):
    """Integer points base + s*direction meeting constraints (and F=0).

    The restriction of F to the line is a univariate polynomial; constraints
    give rational intervals for s."""
    bx, by = base
    dx, dy = direction
    # F(s) coefficients.
    def f_of(s):
        return fpoly.eval((bx + s * dx, by + s * dy))

    c2 = (fpoly.coeff((0, 0)) * dx * dx + fpoly.coeff((0, 1)) * dx * dy +
          fpoly.coeff((1, 1)) * dy * dy)
    f0 = f_of(0)
    f1 = f_of(1)
    fm1 = f_of(-1)
    c1 = (f1 - fm1) // 2
    c0 = f0
    lo, hi = None, None
    for a in constraints:
        coef = a.coeffs[0] * dx + a.coeffs[1] * dy
        rest = a.const + a.coeffs[0] * bx + a.coeffs[1] * by
        if coef == 0:
            if rest < 0:
                return "no", None
        elif coef > 0:
            v = Fraction(-rest, coef)
            lo = v if lo is None else max(lo, v)
        else:
            v = Fraction(rest, -coef)
            hi = v if hi is None else min(hi, v)
    if lo is not None and hi is not None and lo > hi:
        return "no", None
    if not check_equation:
        if lo is not None:
            s = _ceil_frac(lo)
        elif hi is not None:
            s = min(0, _floor_frac(hi))
        else:
            s = 0
        if hi is not None and s > _floor_frac(hi):
            return "no", None
        return "yes", (bx + s * dx, by + s * dy)
    candidates = []
    if c2 == 0 and c1 == 0:
        if c0 != 0:
            return "no", None
        return _scan_line(base, direction, fpoly, constraints, check_equation=False)
    if c2 == 0:
        if c0 % c1 == 0:
            candidates.append(-c0 // c1)
    else:
        disc = c1 * c1 - 4 * c2 * c0
        sq = _is_square(disc)
        if sq is not None:
            for num in (-c1 + sq, -c1 - sq):
                if num % (2 * c2) == 0:
                    candidates.append(num // (2 * c2))
    for s in sorted(set(candidates)):
        if (lo is None or s >= lo) and (hi is None or s <= hi):
            return "yes", (bx + s * dx, by + s * dy)
    return "no", None


def _integer_point_in_polygon(constraints, cfg):
    """Exact integer feasibility for a 2-var affine system."""
    b = fm_bounds(constraints, 2)
    if b is None:
        return "no", None
    (lo1, hi1), _ = b

    def t2_interval(t1):
        lo, hi = None, None
        for a in constraints:
            coef = a.coeffs[1]
            rest = a.const + a.coeffs[0] * t1
            if coef == 0:
                if rest < 0:
                    return None
            elif coef > 0:
                v = Fraction(-rest, coef)
                lo = v if lo is None else max(lo, v)
            else:
                v = Fraction(rest, -coef)
                hi = v if hi is None else min(hi, v)
        return lo, hi

    def try_t1(t1):
        iv = t2_interval(t1)
        if iv is None:
            return None
        lo, hi = iv
        if lo is not None and hi is not None and lo > hi:
            return None
        t2 = _ceil_frac(lo) if lo is not None else (min(0, _floor_frac(hi)) if hi is not None else 0)
        if hi is not None and t2 > _floor_frac(hi):
            return None
        return (t1, t2)

    if lo1 is not None and hi1 is not None:
        a, bq = _ceil_frac(lo1), _floor_frac(hi1)
        if bq - a > cfg.enum_cells:
            bq = a + cfg.enum_cells
        for t1 in range(a, bq + 1):
            hit = try_t1(t1)
            if hit:
                return "yes", hit
        return "no", None
    # Unbounded t1 range: periodic scan.  The interval endpoints are affine
    # with denominators dividing the lcm of the t2 coefficients, so scanning
    # one full period beyond the last constraint crossing is exact.
    period = 1
    for a in constraints:
        if a.coeffs[1]:
            period = period * abs(a.coeffs[1]) // gcd(period, abs(a.coeffs[1]))
    crossings = [Fraction(0)]
    for i, a in enumerate(constraints):
        for bb in constraints[i + 1:]:
            den = a.coeffs[0] * bb.coeffs[1] - bb.coeffs[0] * a.coeffs[1]
            if den:
                num = -(a.const * bb.coeffs[1] - bb.const * a.coeffs[1])
                crossings.append(Fraction(num, den))
    start_hi = max(_ceil_frac(max(crossings)) + 1, _ceil_frac(lo1) if lo1 is not None else 0)
    start_lo = min(_floor_frac(min(crossings)) - 1, _floor_frac(hi1) if hi1 is not None else 0)
    scan = []
    if lo1 is not None:
        scan = range(max(_ceil_frac(lo1), start_lo - period), start_hi + period + 1)
    elif hi1 is not None:
        scan = range(start_lo - period, min(_floor_frac(hi1), start_hi + period) + 1)
    else:
        scan = range(start_lo - period, start_hi + period + 1)
    for t1 in scan:
        hit = try_t1(t1)
        if hit:
            return "yes", hit
    return "no", None


def _solve_f2(fpoly: QPoly, constraints, cfg):
    q20 = fpoly.coeff((0, 0))
    q11 = fpoly.coeff((0, 1))
    q02 = fpoly.coeff((1, 1))
    q10 = fpoly.coeff((0,))
    q01 = fpoly.coeff((1,))
    q00 = fpoly.coeff(())

    if q20 == 0 and q11 == 0 and q02 == 0:
        if q10 == 0 and q01 == 0:
            if q00 != 0:
                return "no", None
            return _integer_point_in_polygon(constraints, cfg)
        line = _line_solutions(q10, q01, q00)
        if line is None:
            return "no", None
        return _scan_line(line[0], line[1], fpoly, constraints, check_equation=False)

    disc = q11 * q11 - 4 * q20 * q02

    if q20 == 0 and q02 != 0:
        swapped = QPoly()
        for mono, c in fpoly.terms.items():
            swapped.add_term(tuple(1 - i for i in mono), c)
        cons2 = [Affine(a.const, (a.coeffs[1], a.coeffs[0])) for a in constraints]
        verdict, wit = _solve_f2(swapped, cons2, cfg)
        if wit is not None:
            wit = (wit[1], wit[0])
        return verdict, wit

    if disc < 0:
        return _solve_elliptic(q20, q11, q02, q10, q01, q00, fpoly, constraints)
    if disc == 0:
        return _solve_parabolic(q20, q11, q02, q10, q01, q00, fpoly, constraints, cfg)
    return _solve_hyperbolic(q20, q11, q02, q10, q01, q00, fpoly, constraints, cfg)


def _solve_elliptic(q20, q11, q02, q10, q01, q00, fpoly, constraints):
    # Definite quadratic part: the solution set is bounded.
    sign = 1 if q20 > 0 else -1
    a, b, c = sign * q20, sign * q11, sign * q02
    lam = Fraction(4 * a * c - b * b, 4 * (a + c))  # q(t) >= lam |t|^2
    lin = max(abs(q10), abs(q01))
    const = abs(q00)
    # lam r^2 - 2 lin r - const <= 0 for any solution radius r.
    r_hi = (Fraction(2 * lin) + Fraction(isqrt(4 * lin * lin + 4 * _ceil_frac(lam * const)) + 1)) / (2 * lam)
    bound = _floor_frac(r_hi) + 1
    for t1 in range(-bound, bound + 1):
        # Univariate in t2.
        c2 = q02
        c1 = q11 * t1 + q01
        c0 = q20 * t1 * t1 + q10 * t1 + q00
        cands = []
        if c2 == 0:
            if c1 == 0:
                if c0 == 0:
                    iv = _interval_candidates(constraints, 2, (t1, 0), 1)
                    if iv is not None:
                        lo, hi = iv
                        if not (lo is not None and hi is not None and lo > hi):
                            t2 = _ceil_frac(lo) if lo is not None else (
                                min(0, _floor_frac(hi)) if hi is not None else 0)
                            if hi is None or t2 <= _floor_frac(hi):
                                cands.append(t2)
            elif c0 % c1 == 0:
                cands.append(-c0 // c1)
        else:
            d2 = c1 * c1 - 4 * c2 * c0
            s = _is_square(d2)
            if s is not None:
                for num in (-c1 + s, -c1 - s):
                    if num % (2 * c2) == 0:
                        cands.append(num // (2 * c2))
        for t2 in cands:
            if _constraints_ok(constraints, (t1, t2)):
                return "yes", (t1, t2)
    return "no", None


def _quad_interval_union(quads):
    """Feasible u-set for a system of quadratic inequalities qu(u) >= 0.

    Each quad is (a, b, c) meaning a u^2 + b u + c >= 0.  Returns a list of
    closed rational intervals (lo, hi) with None for infinity, whose union,
    intersected over all quads, is exact."""
    intervals = [(None, None)]

    def intersect(ivs, new):
        out = []
        for lo, hi in ivs:
            for nlo, nhi in new:
                lo2 = nlo if lo is None else (lo if nlo is None else max(lo, nlo))
                hi2 = nhi if hi is None else (hi if nhi is None else min(hi, nhi))
                if lo2 is not None and hi2 is not None and lo2 > hi2:
                    continue
                out.append((lo2, hi2))
        return out

    for a, b, c in quads:
        if a == 0 and b == 0:
            if c < 0:
                return []
            continue
        if a == 0:
            root = Fraction(-c, b)
            new = [(root, None)] if b > 0 else [(None, root)]
        else:
            disc = b * b - 4 * a * c
            if disc < 0:
                if a > 0:
                    continue
                return []
            # Rational enclosures must contain the true feasible set, so the
            # root approximations are rounded outward.
            sq_lo = isqrt(disc)
            sq_hi = sq_lo + (0 if sq_lo * sq_lo == disc else 1)
            if a > 0:
                # satisfied outside the roots
                new = [(None, Fraction(-b - sq_lo, 2 * a)),
                       (Fraction(-b + sq_lo, 2 * a), None)]
            else:
                new = [(Fraction(-b + sq_hi, 2 * a), Fraction(-b - sq_hi, 2 * a))]
        intervals = intersect(intervals, new)
        if not intervals:
            return []
    return intervals


def _solve_parabolic(q20, q11, q02, q10, q01, q00, fpoly, constraints, cfg):
    # q20 != 0 here (zero case was swapped earlier); rank-one quadratic part.
    # Multiply F=0 by 4*q20 and substitute u = 2*q20*t1 + q11*t2:
    #   u^2 + 2*q10*u + e*t2 + f0 = 0
    e = 4 * q20 * q01 - 2 * q10 * q11
    f0 = 4 * q20 * q00

    def back(u, t2):
        num = u - q11 * t2
        if num % (2 * q20):
            return None
        return (num // (2 * q20), t2)

    if e == 0:
        # Univariate in u, then a line per root.
        disc = 4 * q10 * q10 - 4 * f0
        s = _is_square(disc)
        if s is None:
            return "no", None
        for num in (-2 * q10 + s, -2 * q10 - s):
            if num % 2:
                continue
            u = num // 2
            line = _line_solutions(2 * q20, q11, -u)
            if line is None:
                continue
            verdict, wit = _scan_line(line[0], line[1], fpoly, constraints, check_equation=False)
            if verdict == "yes":
                return verdict, wit
        return "no", None

    # t2 = -(u^2 + 2 q10 u + f0)/e with u = 2 q20 t1 + q11 t2.
    modulus = abs(e) * 2 * abs(q20)

    # Constraints become quadratics in u: substitute
    #   t2(u) = -(u^2 + 2 q10 u + f0)/e,  t1(u) = (u - q11 t2)/(2 q20)
    # into  c0 + c1 t1 + c2 t2 >= 0  and multiply by 2*q20*e (sign-tracked).
    quads = []
    for a in constraints:
        c0, (c1, c2) = a.const, a.coeffs
        mult = 2 * q20 * e
        coef_t2 = 2 * q20 * c2 - c1 * q11   # coefficient of t2 after *2q20
        # expr*mult = c0*mult + c1*e*u + coef_t2 * (e*t2)
        #           = c0*mult + c1*e*u - coef_t2*(u^2 + 2 q10 u + f0)
        qa = -coef_t2
        qb = c1 * e - coef_t2 * 2 * q10
        qc = c0 * mult - coef_t2 * f0
        if mult < 0:
            qa, qb, qc = -qa, -qb, -qc
        quads.append((qa, qb, qc))
    intervals = _quad_interval_union(quads)
    if not intervals:
        return "no", None

    def candidates_in(lo, hi):
        span_cap = cfg.enum_cells
        if lo is None and hi is None:
            return None  # handled by caller
        if lo is None or hi is None:
            return None
        a, b = _ceil_frac(lo), _floor_frac(hi)
        if b - a > span_cap:
            return None
        return range(a, b + 1)

    def check_u(u):
        val = u * u + 2 * q10 * u + f0
        if val % e:
            return None
        t2 = -val // e
        pt = back(u, t2)
        if pt is None:
            return None
        if _constraints_ok(constraints, pt):
            return pt
        return None

    unbounded = []
    for lo, hi in intervals:
        rng = candidates_in(lo, hi)
        if rng is None:
            unbounded.append((lo, hi))
            continue
        for u in rng:
            pt = check_u(u)
            if pt:
                return "yes", pt
    # Unbounded (or huge) intervals: scan residue classes; the parabola side
    # constraints are eventually satisfied throughout such an interval, so the
    # first integrality hit decides.
    for lo, hi in unbounded:
        if lo is None and hi is None:
            starts = [0, -1]
            steps = [1, -1]
        elif lo is None:
            starts, steps = [_floor_frac(hi)], [-1]
        else:
            starts, steps = [_ceil_frac(lo)], [1]
        for start, step in zip(starts, steps):
            u = start
            for _ in range(modulus * 4 + 64):
                inside = (lo is None or u >= lo) and (hi is None or u <= hi)
                if inside:
                    pt = check_u(u)
                    if pt:
                        return "yes", pt
                u += step
            # No integrality hit in four whole residue periods: none exists
            # on this arm.
    return "no", None


def _solve_hyperbolic(q20, q11, q02, q10, q01, q00, fpoly, constraints, cfg):
    if q20 == 0 and q02 == 0:
        # q11 t1 t2 + q10 t1 + q01 t2 + q00 = 0 factors over the axes:
        # (q11 t1 + q01)(q11 t2 + q10) = q01 q10 - q11 q00
        rhs = q01 * q10 - q11 * q00
        if rhs == 0:
            for coef, const, idx in ((q11, q01, 0), (q11, q10, 1)):
                if const % coef == 0:
                    val = -const // coef
                    base = (val, 0) if idx == 0 else (0, val)
                    direction = (0, 1) if idx == 0 else (1, 0)
                    verdict, wit = _scan_line(base, direction, fpoly, constraints)
                    if verdict == "yes":
                        return verdict, wit
            return "no", None
        for d1 in _signed_divisors(rhs):
            d2 = rhs // d1
            if (d1 - q01) % q11 or (d2 - q10) % q11:
                continue
            t1 = (d1 - q01) // q11
            t2 = (d2 - q10) // q11
            if fpoly.eval((t1, t2)) == 0 and _constraints_ok(constraints, (t1, t2)):
                return "yes", (t1, t2)
        return "no", None

    # q20 != 0: complete squares into x^2 - D y^2 = N with
    # x = 2D t2 - e, y = 2u + 2 q10, u = 2 q20 t1 + q11 t2.
    d_coef = q11 * q11 - 4 * q20 * q02
    e = 4 * q20 * q01 - 2 * q10 * q11
    f0 = 4 * q20 * q00
    n_val = 4 * d_coef * q10 * q10 - e * e - 4 * d_coef * f0

    def back(x, y):
        if (x + e) % (2 * d_coef):
            return None
        t2 = (x + e) // (2 * d_coef)
        if (y - 2 * q10) % 2:
            return None
        u = (y - 2 * q10) // 2
        if (u - q11 * t2) % (2 * q20):
            return None
        t1 = (u - q11 * t2) // (2 * q20)
        return (t1, t2)

    def accept(xy):
        pt = back(*xy)
        if pt is None:
            return None
        if fpoly.eval(pt) != 0:
            return None
        if _constraints_ok(constraints, pt):
            return pt
        return None

    s = _is_square(d_coef)
    if s is not None:
        # (x - s y)(x + s y) = N
        if n_val == 0:
            for sign in (1, -1):
                # x = sign * s * y : one-parameter family over y
                # walk y over a line in (t1, t2)?  Convert via back() lazily.
                hits = _scan_factor_line(s, sign, e, d_coef, q10, q11, q20, fpoly, constraints, cfg)
                if hits:
                    return "yes", hits
            return "no", None
        for d1 in _signed_divisors(n_val):
            d2 = n_val // d1
            # x - s y = d1, x + s y = d2
            if (d1 + d2) % 2 or (d2 - d1) % (2 * s):
                continue
            x = (d1 + d2) // 2
            y = (d2 - d1) // (2 * s)
            pt = accept((x, y))
            if pt:
                return "yes", pt
        return "no", None

    if n_val == 0:
        # x^2 = D y^2 with D nonsquare: only x = y = 0.
        pt = accept((0, 0))
        return ("yes", pt) if pt else ("no", None)

    reps = pell_representatives(d_coef, n_val)
    if not reps:
        return "no", None
    u_f, v_f = pell_fundamental(d_coef)
    # Constraints composed with the back map, scaled to integer linear forms
    # px*x + py*y + gamma >= 0.
    den = 4 * d_coef * q20
    scaled = []
    for a in constraints:
        c0, (c1, c2) = a.const, a.coeffs
        px = -c1 * q11 + 2 * c2 * q20
        py = c1 * d_coef
        gamma = c0 * den - 2 * c1 * d_coef * q10 - c1 * q11 * e + 2 * c2 * q20 * e
        if den < 0:
            px, py, gamma = -px, -py, -gamma
        scaled.append((px, py, gamma))
    modulus = 4 * abs(d_coef * q20)

    def integral_mod(x, y):
        if (x + e) % (2 * d_coef) or (y - 2 * q10) % 2:
            return False
        t2r = (x + e) // (2 * d_coef)
        ur = (y - 2 * q10) // 2
        return (ur - q11 * t2r) % (2 * q20) == 0

    seen_states = set()
    for rep in reps:
        for sx in (1, -1):
            for sy in (1, -1):
                start = (sx * rep[0], sy * rep[1])
                if start in seen_states:
                    continue
                seen_states.add(start)
                for direction in (1, -1):
                    hit = _walk_pell_family(start, direction, d_coef, u_f, v_f,
                                            accept, scaled, modulus, integral_mod)
                    if hit:
                        return "yes", hit
    return "no", None


def _scan_factor_line(s, sign, e, d_coef, q10, q11, q20, fpoly, constraints, cfg):
    """Solutions with x = sign*s*y when the Pell form degenerates (D square,
    N = 0).  Integrality maps y to (t1, t2) on an arithmetic progression."""
    # x = sign*s*y; find all y making back() integral: the conditions are
    # congruences with modulus lcm(2D, 2, 2q20-ish); scan one modulus window
    # and then extend by the progression while constraints hold.
    modulus = abs(2 * d_coef) * 2 * abs(2 * q20)
    good = []
    for y in range(-modulus, modulus + 1):
        x = sign * s * y
        if (x + e) % (2 * d_coef):
            continue
        t2 = (x + e) // (2 * d_coef)
        if (y - 2 * q10) % 2:
            continue
        u = (y - 2 * q10) // 2
        if (u - q11 * t2) % (2 * q20):
            continue
        t1 = (u - q11 * t2) // (2 * q20)
        good.append((y, (t1, t2)))
    if not good:
        return None
    # Points along y differ by the modulus period; each family is a line in
    # (t1, t2).  Check each base point's progression with the line scanner.
    for y0, pt0 in good:
        y1 = y0 + modulus
        x1 = sign * s * y1
        t2b = (x1 + e) // (2 * d_coef)
        ub = (y1 - 2 * q10) // 2
        t1b = (ub - q11 * t2b) // (2 * q20)
        direction = (t1b - pt0[0], t2b - pt0[1])
        if direction == (0, 0):
            if _constraints_ok(constraints, pt0):
                return pt0
            continue
        verdict, wit = _scan_line(pt0, direction, QPoly(), constraints, check_equation=False)
        if verdict == "yes":
            return wit
    return None


def _walk_pell_family(start, direction, d, u_f, v_f, accept, scaled, modulus, integral_mod):
    """Walk one automorphism orbit in one direction.

    The scaled constraint value along the orbit is gamma plus a linear form
    l_n in (x_n, y_n), and l satisfies l_{n+2} = 2*u_f*l_{n+1} - l_n.  Once
    l_{n+1} < min(l_n, 0) with the full value negative, the value stays
    negative forever, so the branch is provably dead.  Before committing to a
    long feasible walk we check on the finite orbit mod `modulus` whether the
    integrality conditions can hold at all.
    """
    if direction == 1:
        def step(x, y):
            return (u_f * x + d * v_f * y, v_f * x + u_f * y)
    else:
        def step(x, y):
            return (u_f * x - d * v_f * y, -v_f * x + u_f * y)

    x, y = start
    prev_l = None
    checked_residues = False
    for n in range(10**6):
        pt = accept((x, y))
        if pt:
            return pt
        cur_l = tuple(px * x + py * y for px, py, _ in scaled)
        if prev_l is not None:
            for (px, py, gamma), l_prev, l_cur in zip(scaled, prev_l, cur_l):
                if l_cur < l_prev and l_cur < 0 and l_cur + gamma < 0:
                    return None
        prev_l = cur_l
        if n == 64 and not checked_residues:
            checked_residues = True
            if not _orbit_integral_exists(start, step, modulus, integral_mod):
                return None
        x, y = step(x, y)
    raise CapExceeded("Pell family walk cap")


def _orbit_integral_exists(start, step, modulus, integral_mod, cap=500_000):
    x0, y0 = start[0] % modulus, start[1] % modulus
    x, y = x0, y0
    for _ in range(cap):
        if integral_mod(x, y):
            return True
        x, y = step(x, y)
        x, y = x % modulus, y % modulus
        if (x, y) == (x0, y0):
            return False
    raise CapExceeded("Pell residue cycle cap")


def _signed_divisors(n: int):
    n = abs(n)
    out = []
    for d in range(1, isqrt(n) + 1):
        if n % d == 0:
            out.extend((d, -d, n // d, -(n // d)))
    return sorted(set(out))


# ---------------------------------------------------------------------------
# The decision pipeline.

@dataclass
class ExponentSystem:
    """Hat/area polynomials over solver variables plus affine constraints."""

    sp: SymbolicProduct
    constraints: list            # Affine forms over the solver variables, >= 0
    to_exponents: object         # solution vector -> star exponent tuple
    instance: KnapsackInstance | None = None


def system_from_instance(inst: KnapsackInstance) -> ExponentSystem:
    k = len(inst.blocks)
    sp = symbolic_product(inst)
    cons = [Affine(0, tuple(1 if j == i else 0 for j in range(k))) for i in range(k)]
    return ExponentSystem(sp, cons, lambda ns: tuple(ns), inst)


def decide_system(system: ExponentSystem, target: HeisElement, cfg: RunConfig = DEFAULT) -> KnapsackDecision:
    sp = system.sp
    k = sp.k
    lin = solve_linear(sp, (target.a, target.b))
    if lin is None:
        return KnapsackDecision("no", free_vars=k, tier="hat")
    x0, kernel = lin
    f = len(kernel)
    subs = [Affine(x0[i], tuple(kv[i] for kv in kernel)) for i in range(k)]
    fp = sp.area2.substitute_affine(subs)
    fp.add_const(-target.area2)
    cons = []
    for a in system.constraints:
        const = a.const + sum(c * x for c, x in zip(a.coeffs, x0))
        coeffs = tuple(sum(c * kv[i] for i, c in enumerate(a.coeffs)) for kv in kernel)
        cons.append(Affine(const, coeffs))

    def result(verdict, t=None, tier="", exact=True):
        if verdict == "yes":
            ns = tuple(aff.eval(t) for aff in subs)
            return KnapsackDecision("yes", witness=system.to_exponents(ns),
                                    free_vars=f, tier=tier)
        return KnapsackDecision(verdict, free_vars=f, tier=tier, exact=exact)

    if f == 0:
        ok = all(a.const >= 0 for a in cons) and fp.coeff(()) == 0
        return result("yes" if ok else "no", t=(), tier="f0")

    bounds = fm_bounds(cons, f)
    if bounds is None:
        return result("no", tier="polytope-empty")
    if all(lo is not None and hi is not None for lo, hi in bounds):
        ranges = [range(_ceil_frac(lo), _floor_frac(hi) + 1) for lo, hi in bounds]
        hit, scanned_all = _solve_in_box(fp, cons, ranges, cfg)
        if hit is not None:
            return result("yes", t=hit, tier="enum")
        if scanned_all:
            return result("no", tier="enum")

    if f == 1:
        verdict, t = _solve_f1(fp, cons, cfg)
        return result(verdict, t=t, tier="f1")
    if f == 2:
        verdict, t = _solve_f2(fp, cons, cfg)
        return result(verdict, t=t, tier="f2")

    # f >= 3 without a small bounded polytope: bounded search, honest Unknown.
    b = cfg.search_bound
    while True:
        ranges = []
        for lo, hi in bounds:
            lo_i = -b if lo is None else max(-b, _ceil_frac(lo))
            hi_i = b if hi is None else min(b, _floor_frac(hi))
            ranges.append(range(lo_i, hi_i + 1))
        cells = 1
        for r in ranges:
            cells *= max(0, len(r))
        if cells <= cfg.enum_cells * 8 or b <= 1:
            break
        b //= 2
    hit, _ = _solve_in_box(fp, cons, ranges, cfg, budget=cfg.enum_cells * 8)
    if hit is not None:
        return result("yes", t=hit, tier="search")
    return result("unknown", tier="search", exact=False)


def decide(inst: KnapsackInstance, cfg: RunConfig = DEFAULT) -> KnapsackDecision:
    dec = decide_system(system_from_instance(inst), inst.target, cfg)
    if dec.is_yes:
        assert inst.evaluate_at(dec.witness) == inst.target
    return dec


def brute_force_decide(inst: KnapsackInstance, bound: int):
    """Exhaustive scan of exponents in [0, bound]^k; a test oracle."""
    k = len(inst.blocks)
    for ns in iter_product(range(bound + 1), repeat=k):
        if inst.evaluate_at(ns) == inst.target:
            return KnapsackDecision("yes", witness=ns, tier="brute")
    return KnapsackDecision("no", exact=False, tier=f"brute<= {bound}")


# ---------------------------------------------------------------------------
# Templates -> systems (with aggregation of repeated star runs).

def _template_system(template: Template, target: HeisElement):
    """Build an ExponentSystem for one template.

    Runs Star(w) (Fix(sep) Star(w))^j with equal evaluations are aggregated
    into a mass variable P plus a displacement variable W with
    0 <= W <= j * P; the displacement enters the doubled area linearly with
    coefficient -2*det(sep_hat, base_hat).  This keeps the free-variable
    count low for the separator-run templates the rewriting engine emits.
    """
    items = template.normalized().items
    star_slots = []          # metadata to rebuild per-star exponents
    pieces = []              # ("fix", g) | ("block", var, g) | parallel W info
    evs = []
    i = 0
    var_count = 0
    extra_cons = []          # (kind) assembled after var_count known
    area_w_terms = []        # (var_w, coeff)
    n_items = len(items)
    star_eval = {}

    def ev_of(word):
        if word not in star_eval:
            star_eval[word] = evaluate(word)
        return star_eval[word]

    while i < n_items:
        item = items[i]
        if isinstance(item, Fixed):
            pieces.append(("fix", evaluate(item.word)))
            i += 1
            continue
        base = ev_of(item.word)
        run_len = 1
        j = i + 1
        sep_val = None
        while j + 1 < n_items and isinstance(items[j], Fixed) and isinstance(items[j + 1], Star):
            nxt_sep = evaluate(items[j].word)
            nxt_base = ev_of(items[j + 1].word)
            if nxt_base != base:
                break
            if sep_val is None:
                sep_val = nxt_sep
            elif nxt_sep != sep_val:
                break
            run_len += 1
            j += 2
        if run_len >= 2:
            det = sep_val.a * base.b - base.a * sep_val.b
            var_p = var_count
            var_count += 1
            for _ in range(run_len - 1):
                pieces.append(("fix", sep_val))
            pieces.append(("block", var_p, base))
            if det != 0:
                var_w = var_count
                var_count += 1
                area_w_terms.append((var_w, -2 * det))
                extra_cons.append(("w", var_w, var_p, run_len - 1))
            else:
                var_w = None
            star_slots.append(("run", var_p, var_w, run_len))
            i = j
        else:
            var_p = var_count
            var_count += 1
            pieces.append(("block", var_p, base))
            star_slots.append(("plain", var_p))
            i += 1

    builder = ProductBuilder(var_count)
    for piece in pieces:
        if piece[0] == "fix":
            builder.absorb_fixed(piece[1])
        else:
            builder.absorb_block(piece[1], piece[2])
    sp = builder.done()
    for var_w, coef in area_w_terms:
        sp.area2.add_term((var_w,), coef)

    cons = [Affine(0, tuple(1 if j == v else 0 for j in range(var_count)))
            for v in range(var_count)]
    for kind, var_w, var_p, max_slots in extra_cons:
        # (run_len-1) * P - W >= 0
        coeffs = [0] * var_count
        coeffs[var_p] = max_slots
        coeffs[var_w] = -1
        cons.append(Affine(0, tuple(coeffs)))

    def to_exponents(ns):
        out = []
        for slot in star_slots:
            if slot[0] == "plain":
                out.append(ns[slot[1]])
            else:
                _, var_p, var_w, run_len = slot
                total = ns[var_p]
                w = ns[var_w] if var_w is not None else 0
                ps = [0] * run_len
                left = w
                for _ in range(total):
                    shift = min(left, run_len - 1)
                    ps[run_len - 1 - shift] += 1
                    left -= shift
                out.extend(ps)
        return tuple(out)

    return ExponentSystem(sp, cons, to_exponents)


_SYSTEM_CACHE: dict = {}


def decide_template(template: Template, target: HeisElement, cfg: RunConfig = DEFAULT) -> KnapsackDecision:
    system = _SYSTEM_CACHE.get(template)
    if system is None:
        if len(_SYSTEM_CACHE) > 100_000:
            _SYSTEM_CACHE.clear()
        system = _template_system(template, target)
        _SYSTEM_CACHE[template] = system
    dec = decide_system(system, target, cfg)
    if dec.is_yes:
        word = template.instantiate(dec.witness)
        assert evaluate(word) == target, "witness failed re-verification"
        dec.witness_word = word
    return dec


def decide_bounded_membership(target: HeisElement, bl: BoundedLanguage, cfg: RunConfig = DEFAULT) -> KnapsackDecision:
    """Yes if any template matches; exact No only when every template is an
    exact No; Unknown otherwise."""
    saw_unknown = False
    for template in bl.templates:
        dec = decide_template(template, target, cfg)
        if dec.is_yes:
            return dec
        if dec.verdict == "unknown":
            saw_unknown = True
    if saw_unknown:
        return KnapsackDecision("unknown", exact=False, tier="aggregate")
    return KnapsackDecision("no", tier="aggregate")


def rsmp_decide(target: HeisElement, m, cfg: RunConfig = DEFAULT) -> KnapsackDecision:
    from .reduction import reduce_automaton

    return decide_bounded_membership(target, reduce_automaton(m, cfg), cfg)


# ---------------------------------------------------------------------------
# Instance JSON:
# { "prefix": word-string, "blocks": [ {"base":..., "separator":...} ... ],
#   "target": word-string }

def instance_from_json(doc) -> KnapsackInstance:
    if isinstance(doc, str):
        doc = json.loads(doc)
    if not isinstance(doc, dict) or set(doc) - {"prefix", "blocks", "target"}:
        raise ParseError("instance document must have prefix/blocks/target")
    try:
        prefix = evaluate(parse_word(doc["prefix"]))
        target = evaluate(parse_word(doc["target"]))
        blocks = []
        for b in doc["blocks"]:
            if set(b) - {"base", "separator"}:
                raise ParseError(f"unknown block fields in {b!r}")
            blocks.append((evaluate(parse_word(b["base"])),
                           evaluate(parse_word(b.get("separator", "")))))
    except KeyError as e:
        raise ParseError(f"missing instance field {e.args[0]!r}") from None
    return KnapsackInstance(prefix, tuple(blocks), target)
