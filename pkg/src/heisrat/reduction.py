"""Rewriting group-labeled automata into evaluation-equal bounded languages.

Pipeline: trim, decompose along simple accepted paths into cycle languages
(one submonoid automaton per visited state), rewrite each submonoid by a case
analysis on the positive span of the hats of its conjugated-loop letters, and
concatenate back.

Cases for a submonoid automaton M = (V, delta, v, {v}) with letter set X:
  * span in a line: the letters commute; Parikh image + commutative algebra.
  * span the whole plane: the monoid is a subgroup; emit its normal form.
  * half-plane: one family of templates plus a threshold split; words whose
    frame coordinate stays under a computable K recurse into line cases.
  * salient cone: positive-area half via templates with a computable K and a
    pair-count bound L, negative-area half via the mirror automorphism.

Soundness of every emitted template is structural: each template instantiates
to a product of accepted cycle words, hence evaluates into the monoid.
Completeness of the threshold constants is certified by exact polynomial
inequalities (see conebounds) and exercised by the acceptance suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iter_product
from math import ceil, gcd

from .automata import (
    GAutomaton,
    CompositeLetter,
    cycle_language_at,
    decompose_to_cycle_languages,
    enumerate_simple,
    eval_labels,
    label_key,
    label_value,
    label_word,
    mirror_automaton,
    trim,
    word_of_labels,
)
from .bounded import BoundedLanguage, Fixed, Star, Template
from .conebounds import Poly2, qpoly_to_poly2, scan_threshold
from .config import RunConfig, DEFAULT
from .cosets import CosetSystem, build_quotient, coset_hitting_representatives
from .errors import (
    CapExceeded,
    MNotFound,
    MonotonicityViolated,
    NotAbelian,
    SelectionEmpty,
)
from .gilman import GilmanData, compute_gilman_general
from .heis import HeisElement, IDENTITY, canonical_word, central, evaluate, word_inverse
from .semilinear import bounded_language_from_semilinear, parikh_image
from .spanclass import AlphaBetaFrame, SpanClass, classify_positive_span, det2, primitive
from .subgroup import subgroup_canonical_basis
from .symbolic import ProductBuilder


# ---------------------------------------------------------------------------
# Threshold splits of the rewritten (tilde) automaton.

def threshold_split(tilde: GAutomaton, functionals, counters, cap: int = 10**6):
    """Split the tilde language by saturating letterwise-monotone statistics.

    functionals: list of (value_fn, threshold): value_fn maps a letter to a
    non-negative Fraction; a word is over threshold when the sum of its
    letters' values reaches it.  counters: list of ((trigger_fn, read_fn),
    bound L[, trigger_cap]): tracks pairs (i < j) with trigger(letter_i) and
    read(letter_j), saturated at L+1; the running trigger count saturates at
    trigger_cap (default L+1; a cap of 1 turns the count into a coarser
    "reads after the first trigger" statistic).  Returns (regular, abnormal):
    regular accepts exactly the words meeting every threshold and counter
    bound; abnormal is the complement within the tilde language.
    """
    thresholds = [Fraction(t) for _, t in functionals]
    counters = [c if len(c) == 3 else (c[0], c[1], c[1] + 1) for c in counters]
    caps = [L + 1 for _, L, _ in counters]
    b_caps = [bc for _, _, bc in counters]

    start = (tilde.start,
             tuple(Fraction(0) for _ in functionals),
             tuple((0, 0) for _ in counters))
    seen = {start}
    queue = [start]
    edges = []
    while queue:
        state = queue.pop()
        q, vals, counts = state
        for _, lab, dst in tilde.out[q]:
            new_vals = []
            for (fn, _), threshold, acc in zip(functionals, thresholds, vals):
                v = fn(lab)
                if v < 0:
                    raise MonotonicityViolated(f"negative functional value {v} on {lab!r}")
                new_vals.append(min(acc + v, threshold))
            new_counts = []
            for ((trig, read), _, _), capv, bcap, (b, n) in zip(counters, caps, b_caps, counts):
                n2 = min(n + b, capv) if read(lab) else n
                b2 = min(b + 1, bcap) if trig(lab) else b
                new_counts.append((b2, n2))
            nxt = (dst, tuple(new_vals), tuple(new_counts))
            edges.append((state, lab, nxt))
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
                if len(seen) > cap:
                    raise CapExceeded("threshold split product cap hit")

    def is_full(state):
        _, vals, counts = state
        return (all(v >= t for v, t in zip(vals, thresholds))
                and all(n >= c for (_, n), c in zip(counts, caps)))

    states = sorted(seen, key=str)
    accepts = {s for s in seen if s[0] in tilde.accepts}
    reg = trim(GAutomaton(states, edges, start, {s for s in accepts if is_full(s)}))
    abn = trim(GAutomaton(states, edges, start, {s for s in accepts if not is_full(s)}))
    return reg, abn


def shortfall_pieces(tilde: GAutomaton, functionals, counters, cap: int = 10**6):
    """The abnormal language as a union of one automaton per condition.

    The complement of the regular part is the union over single conditions of
    "this threshold is not met", and tracking one condition at a time keeps
    each product automaton small.  Every piece still has the property that
    its cycles only carry letters with zero value for the tracked statistic.
    """
    pieces = []
    for fn, threshold in functionals:
        _, abn = threshold_split(tilde, [(fn, threshold)], [], cap)
        if not abn.is_empty:
            pieces.append(abn)
    for preds, bound in counters:
        # The pair count dominates the "reads after the first trigger" count,
        # so bounding the latter gives a superset of the pair-bounded words
        # with a far smaller product; its cycles still sit on edge lines.
        _, abn = threshold_split(tilde, [], [(preds, bound, 1)], cap)
        if not abn.is_empty:
            pieces.append(abn)
    return pieces


# ---------------------------------------------------------------------------
# Selections shared by the half-plane and cone cases.

def _shortest_path_labels(m: GAutomaton, frm, to):
    """Label word of a shortest path frm -> to (deterministic tie-break)."""
    if frm == to:
        return ()
    seen = {frm: ()}
    queue = [frm]
    while queue:
        nxt_queue = []
        for q in sorted(queue, key=lambda s: tuple(label_key(l) for l in seen[s])):
            for _, lab, dst in m.out[q]:
                if dst not in seen:
                    seen[dst] = seen[q] + (lab,)
                    if dst == to:
                        return seen[dst]
                    nxt_queue.append(dst)
        queue = nxt_queue
    raise SelectionEmpty(f"no path from {frm!r} to {to!r}")


def _entry_key(entry):
    return (len(entry.u_labels), len(entry.t_labels), entry.sort_key())


def _on_ray(vec, direction):
    return det2(vec, direction) == 0 and (vec[0] * direction[0] + vec[1] * direction[1]) > 0


@dataclass
class EdgeLoop:
    """A loop on a cone edge together with approach and return paths."""

    go: tuple        # labels v -> p
    loop: tuple      # labels of the cycle at p
    back: tuple      # labels p -> v
    value: HeisElement = None
    conj_ratio: Fraction = None  # maximized area per primitive edge unit

    def __post_init__(self):
        if self.value is None:
            self.value = eval_labels(self.loop)


def _select_lower_edge(gd: GilmanData, m: GAutomaton, direction):
    best = None
    for e in gd.x_entries:
        hat = e.value.hat
        if not _on_ray(hat, direction):
            continue
        scale = max(abs(hat[0]), abs(hat[1])) // max(abs(direction[0]), abs(direction[1]))
        ratio = Fraction(e.value.area2, 2 * scale)
        key = (-ratio,) + _entry_key(e)
        if best is None or key < best[0]:
            best = (key, e, ratio)
    if best is None:
        raise SelectionEmpty(f"no loop on cone edge {direction}")
    e = best[1]
    back = _shortest_path_labels(m, e.t_states[-1], m.start)
    return EdgeLoop(e.t_labels, e.u_labels, back, eval_labels(e.u_labels), best[2])


def _select_upper_edge(gd: GilmanData, m: GAutomaton, direction, cap):
    best = None
    for q in m.states:
        cycles = enumerate_simple(m, q, "cycles", cap=cap)
        returns = None
        for u_labels, _ in cycles:
            val = eval_labels(u_labels)
            hat = val.hat
            if not _on_ray(hat, direction):
                continue
            if returns is None:
                returns = enumerate_simple(m, q, "paths", targets={m.start}, cap=cap)
            scale = max(abs(hat[0]), abs(hat[1])) // max(abs(direction[0]), abs(direction[1]))
            for s_labels, _ in returns:
                s_val = eval_labels(s_labels)
                conj = s_val.inverse() * val * s_val
                ratio = Fraction(conj.area2, 2 * scale)
                key = (-ratio, len(u_labels), len(s_labels),
                       tuple(label_key(l) for l in u_labels),
                       tuple(label_key(l) for l in s_labels))
                if best is None or key < best[0]:
                    best = (key, q, u_labels, s_labels, val, ratio)
    if best is None:
        raise SelectionEmpty(f"no loop on cone edge {direction}")
    _, q, u_labels, s_labels, val, ratio = best
    go = _shortest_path_labels(m, m.start, q)
    return EdgeLoop(go, u_labels, s_labels, val, ratio)


# ---------------------------------------------------------------------------
# Case: hats inside one line (the letters commute).

def case_line(gd: GilmanData, cfg: RunConfig = DEFAULT) -> BoundedLanguage:
    alphabet = gd.tilde.labels()
    values = [label_value(lab) for lab in alphabet]
    for i, g in enumerate(values):
        for j in range(i + 1, len(values)):
            if g.a * values[j].b - values[j].a * g.b:
                raise NotAbelian("line case dispatched on non-commuting letters")
    image = parikh_image(gd.tilde, alphabet)
    words = [label_word(lab) for lab in alphabet]
    return _abelian_bounded(image, words, values)


def _abelian_bounded(image, letter_words, letter_values) -> BoundedLanguage:
    """Templates for a Parikh image of commuting letters.

    On commuting letters evaluation is linear in the coordinates of the
    abelian subgroup the letters generate, so components are projected to
    those coordinates (dimension at most two) and deduplicated there; this
    collapses representations that count letters differently but evaluate
    identically.  Each projected period keeps one realizing word.
    """
    sub = subgroup_canonical_basis([g for g in letter_values if not g.is_identity()])

    def coords(g: HeisElement):
        rem = sub.central_remainder(g)
        assert rem is not None, "letter outside its own abelian hull"
        hat_part = sub.hat_coords(g)
        hat_part = tuple(hat_part) if sub.hat_rank else ()
        if sub.central_depth:
            assert rem % sub.central_depth == 0
            return hat_part + (rem // sub.central_depth,)
        assert rem == 0
        return hat_part

    letter_coords = [coords(g) for g in letter_values]
    dim = len(letter_coords[0]) if letter_coords else 0

    def project(vec):
        out = (0,) * dim
        for i, n in enumerate(vec):
            if n:
                out = tuple(o + n * c for o, c in zip(out, letter_coords[i]))
        return out

    def word_for(vec):
        out = []
        for i, n in enumerate(vec):
            out.extend(letter_words[i] * n)
        return tuple(out)

    projected = {}
    for comp in image.components:
        base_p = project(comp.base)
        per = {}
        for p in sorted(comp.periods):
            cp = project(p)
            if any(cp):
                per.setdefault(cp, p)
        key = (base_p, frozenset(per))
        if key not in projected:
            projected[key] = (comp.base, per)

    # Absorption between projected components.
    entries = sorted(projected.items(),
                     key=lambda kv: (len(kv[0][1]), kv[0]), reverse=True)
    kept = []
    for (base_p, per_set), payload in entries:
        absorbed = False
        for (big_base, big_per), _ in kept:
            if per_set <= big_per and _nonneg_combination(
                    tuple(a - b for a, b in zip(base_p, big_base)), sorted(big_per)):
                absorbed = True
                break
        if not absorbed:
            kept.append(((base_p, per_set), payload))

    templates = []
    for (_, _), (base_vec, per) in kept:
        items = [Fixed(word_for(base_vec))]
        for cp in sorted(per):
            items.append(Star(word_for(per[cp])))
        templates.append(Template(tuple(items)))
    return BoundedLanguage.of(templates)


def _nonneg_combination(target, periods) -> bool:
    """Is target a non-negative integer combination of the period vectors?"""
    if not any(target):
        return True
    if not periods:
        return False
    from .semilinear import _member_contejean_devie, _member_nonneg

    if all(all(x >= 0 for x in p) for p in periods):
        if any(x < 0 for x in target):
            return False
        return _member_nonneg(tuple(target), list(periods)) is not None
    try:
        return _member_contejean_devie(tuple(target), list(periods)) is not None
    except CapExceeded:
        return False


# ---------------------------------------------------------------------------
# Case: hats span the plane (the monoid is a subgroup).

def case_plane(gd: GilmanData, cfg: RunConfig = DEFAULT) -> BoundedLanguage:
    sub = subgroup_canonical_basis([e.value for e in gd.x_entries])
    assert sub.hat_rank == 2 and sub.central_depth >= 1, "plane case needs a full lattice"
    g1, g2 = sub.basis[0][0], sub.basis[1][0]
    zd = central(sub.central_depth)
    templates = []
    for s1 in (1, -1):
        for s2 in (1, -1):
            for s3 in (1, -1):
                templates.append(Template((
                    Star((g1 ** s1,)),
                    Star((g2 ** s2,)),
                    Star((zd ** s3,)),
                )))
    return BoundedLanguage.of(templates)


# ---------------------------------------------------------------------------
# Case: hats span a half-plane.

@dataclass
class HalfPlaneConstants:
    s_go: tuple
    a_loop: tuple
    s_back: tuple
    t_go: tuple
    c_loop: tuple
    t_back: tuple
    b_word: tuple
    frame: AlphaBetaFrame
    p: int
    q: int
    m: int
    d_plus: int
    d_minus: int
    d: int
    cosets: CosetSystem
    reps: dict
    K: Fraction


def half_plane_constants(gd: GilmanData, m_aut: GAutomaton, cls: SpanClass,
                         cfg: RunConfig = DEFAULT) -> HalfPlaneConstants:
    boundary = cls.direction
    plus_dir = boundary
    minus_dir = (-boundary[0], -boundary[1])
    a_cands = [e for e in gd.x_entries if _on_ray(e.value.hat, plus_dir)]
    c_cands = [e for e in gd.x_entries if _on_ray(e.value.hat, minus_dir)]
    off_cands = [e for e in gd.x_entries if det2(boundary, e.value.hat) != 0]
    if not a_cands or not c_cands or not off_cands:
        raise SelectionEmpty("half-plane case misses a boundary or interior loop")
    a_entry = min(a_cands, key=_entry_key)
    c_entry = min(c_cands, key=_entry_key)
    b_entry = min(off_cands, key=_entry_key)

    s_go, a_loop = a_entry.t_labels, a_entry.u_labels
    s_back = _shortest_path_labels(m_aut, a_entry.t_states[-1], m_aut.start)
    t_go, c_loop = c_entry.t_labels, c_entry.u_labels
    t_back = _shortest_path_labels(m_aut, c_entry.t_states[-1], m_aut.start)
    b_back = _shortest_path_labels(m_aut, b_entry.t_states[-1], m_aut.start)
    b_word = b_entry.t_labels + b_entry.u_labels + b_back

    a_val = eval_labels(a_loop)
    c_val = eval_labels(c_loop)
    b_val = eval_labels(b_word)
    frame = AlphaBetaFrame(a_val.hat, b_val.hat)
    for e in gd.x_entries:
        if frame.beta(e.value.hat) < 0:
            raise MonotonicityViolated("letter below the half-plane boundary")

    prim = primitive(a_val.hat)
    lam = a_val.hat[0] // prim[0] if prim[0] else a_val.hat[1] // prim[1]
    mu_vec = c_val.hat
    mu = -(mu_vec[0] // prim[0]) if prim[0] else -(mu_vec[1] // prim[1])
    assert lam > 0 and mu > 0 and (mu_vec[0] * prim[1] == mu_vec[1] * prim[0])
    g = gcd(lam, mu)
    p, q = mu // g, lam // g

    s_el, sb_el = eval_labels(s_go), eval_labels(s_back)
    t_el, tb_el = eval_labels(t_go), eval_labels(t_back)

    def h_eval(n1, n2, n3, n4, m_exp):
        return (s_el * a_val ** n1 * sb_el
                * b_val ** m_exp
                * t_el * c_val ** n2 * tb_el
                * b_val ** m_exp
                * s_el * a_val ** n3 * sb_el
                * b_val ** n4)

    m_exp = None
    d_plus = d_minus = 0
    for cand in range(0, 256):
        h0 = h_eval(0, 0, 0, 0, cand)
        delta_plus = h_eval(p, q, 0, 0, cand).area2 - h0.area2
        delta_minus = h_eval(0, q, p, 0, cand).area2 - h0.area2
        assert delta_plus % 2 == 0 and delta_minus % 2 == 0
        d_plus, d_minus = delta_plus // 2, delta_minus // 2
        if d_plus * d_minus < 0:
            m_exp = cand
            break
    if m_exp is None:
        raise MNotFound("no separator exponent with opposite-sign area drifts")
    d = gcd(abs(d_plus), abs(d_minus))

    n_gens = [a_val ** d, b_val ** d, c_val ** d, central(d)]
    ambient = sorted({label_value(lab) for _, lab, _ in m_aut.edges}, key=HeisElement.sort_key)
    cosets = build_quotient(n_gens, ambient)
    assert cosets.subgroup.central_depth == d, "coset system depth mismatch"
    reps = coset_hitting_representatives(m_aut, cosets)

    h0 = h_eval(0, 0, 0, 0, m_exp)
    k_val = frame.beta(h0.hat) + max(frame.beta(eval_labels(w).hat) for w in reps.values())
    return HalfPlaneConstants(
        s_go, a_loop, s_back, t_go, c_loop, t_back, b_word, frame,
        p, q, m_exp, d_plus, d_minus, d, cosets, reps, max(Fraction(0), k_val),
    )


def case_half_plane(gd: GilmanData, m_aut: GAutomaton, cls: SpanClass,
                    cfg: RunConfig = DEFAULT) -> BoundedLanguage:
    hp = half_plane_constants(gd, m_aut, cls, cfg)
    b_rep = word_of_labels(hp.b_word) * hp.m
    templates = []
    for w in sorted(hp.reps.values(), key=lambda w: tuple(label_key(l) for l in w)):
        templates.append(Template((
            Fixed(word_of_labels(hp.s_go)),
            Star(word_of_labels(hp.a_loop)),
            Fixed(word_of_labels(hp.s_back) + b_rep + word_of_labels(hp.t_go)),
            Star(word_of_labels(hp.c_loop)),
            Fixed(word_of_labels(hp.t_back) + b_rep + word_of_labels(hp.s_go)),
            Star(word_of_labels(hp.a_loop)),
            Fixed(word_of_labels(hp.s_back)),
            Star(word_of_labels(hp.b_word)),
            Fixed(word_of_labels(w)),
        )))
    beta_fn = lambda lab: hp.frame.beta(label_value(lab).hat)
    out = BoundedLanguage.of(templates)
    for piece in shortfall_pieces(gd.tilde, [(beta_fn, hp.K)], [], cfg.enumeration_cap):
        out = out.union(reduce_automaton(piece, cfg, _expect_degenerate=True))
    return out


# ---------------------------------------------------------------------------
# Case: hats span a salient cone.

@dataclass
class ConeConstants:
    lower: EdgeLoop
    upper: EdgeLoop
    frame: AlphaBetaFrame
    det_ab: int
    d: int
    m: int
    cosets: CosetSystem
    reps: dict
    K: int
    L: int | None = None
    delta: Fraction | None = None      # min nonzero frame coordinate
    area_max: Fraction | None = None   # max positive letter area
    central_loop: EdgeLoop | None = None   # cone-ii only
    central_d: int | None = None


def _tail_element(co, w_labels):
    """Evaluation of the all-zero template instance for a given coset word."""
    t_el = eval_labels(co.lower.go)
    tb_el = eval_labels(co.lower.back)
    s_el = eval_labels(co.upper.back)
    sg_el = eval_labels(co.upper.go)
    a_val = co.lower.value
    unit = sg_el * s_el * t_el * a_val * tb_el
    return (t_el * tb_el * sg_el * s_el * t_el * tb_el * eval_labels(w_labels)
            * unit ** (co.m - 1) * sg_el * s_el)


def _cone_template(co: ConeConstants, w_labels) -> Template:
    t_w = word_of_labels(co.lower.go)
    tb_w = word_of_labels(co.lower.back)
    a_w = word_of_labels(co.lower.loop)
    sg_w = word_of_labels(co.upper.go)
    s_w = word_of_labels(co.upper.back)
    b_w = word_of_labels(co.upper.loop)
    items = [
        Fixed(t_w), Star(a_w), Fixed(tb_w + sg_w), Star(b_w),
        Fixed(s_w + t_w), Star(a_w), Fixed(tb_w + word_of_labels(w_labels)),
    ]
    for _ in range(co.m - 1):
        items.append(Fixed(sg_w))
        items.append(Star(b_w))
        items.append(Fixed(s_w + t_w + a_w + tb_w))
    items.append(Fixed(sg_w))
    items.append(Star(b_w))
    items.append(Fixed(s_w))
    return Template(tuple(items))


THETA = Fraction(3, 5)
_M_FACTORS = (1, 2, 3, 5, 8)


def cone_i_constants(gd: GilmanData, m_aut: GAutomaton, cls: SpanClass,
                     cfg: RunConfig = DEFAULT) -> ConeConstants:
    lower = _select_lower_edge(gd, m_aut, cls.cone_low)
    upper = _select_upper_edge(gd, m_aut, cls.cone_high, cfg.enumeration_cap)
    a_val, b_val = lower.value, upper.value
    frame = AlphaBetaFrame(a_val.hat, b_val.hat)
    det_ab = frame.determinant
    assert det_ab > 0, "cone frame must be positively oriented"
    for e in gd.x_entries:
        al, be = frame.alpha_beta(e.value.hat)
        if al < 0 or be < 0:
            raise MonotonicityViolated("letter outside the cone frame")

    t_el, tb_el = eval_labels(lower.go), eval_labels(lower.back)
    sg_el, s_el = eval_labels(upper.go), eval_labels(upper.back)
    tau_hat = tuple(x + y for x, y in zip((t_el * tb_el).hat, (sg_el * s_el).hat))
    d = det_ab + det2(tau_hat, b_val.hat)
    assert d >= det_ab > 0

    ambient = sorted({label_value(lab) for _, lab, _ in m_aut.edges}, key=HeisElement.sort_key)
    cosets = build_quotient([a_val ** d, b_val ** d, central(d)], ambient)
    assert cosets.subgroup.central_depth == d, "coset system depth mismatch"
    reps = coset_hitting_representatives(m_aut, cosets)

    r_a = Fraction((t_el * a_val * t_el.inverse()).area2, 2)
    r_b = Fraction((s_el.inverse() * b_val * s_el).area2, 2)
    beta_tau = frame.beta(tau_hat)

    best = None
    for factor in _M_FACTORS:
        m_exp = 2 * d * factor + 1
        co = ConeConstants(lower, upper, frame, det_ab, d, m_exp, cosets, reps, 0)
        try:
            k_val = _certify_cone_i(co, r_a, r_b, beta_tau, cfg)
        except CapExceeded:
            continue
        if best is None or (k_val, m_exp) < (best[0], best[1]):
            best = (k_val, m_exp)
    if best is None:
        raise CapExceeded("no certified threshold for the cone case")
    k_val, m_exp = best
    co = ConeConstants(lower, upper, frame, det_ab, d, m_exp, cosets, reps, k_val)

    # Pair-count bound: once a word has more than L pairs (interior letter
    # before interior letter in the det-positive order), its area drops below
    # the template maximum for every matched coset word, so the templates can
    # reach it.  L only has to beat the largest template-maximum offset.
    values = gd.x_values
    area_max = max([Fraction(0)] + [Fraction(x.area2, 2) for x in values])
    nonzero = []
    for x in values:
        al, be = frame.alpha_beta(x.hat)
        nonzero.extend(v for v in (al, be) if v)
    delta = min(nonzero)
    c_max = Fraction(0)
    for w in co.reps.values():
        _, _, _, c_w = _cone_w_data(co, w, r_a, r_b)
        c_max = max(c_max, c_w)
    dd = Fraction(det_ab) * delta * delta

    def m_of(n):
        # largest M with M*(M-1)/2 <= n
        m_v = 0
        while (m_v + 1) * m_v // 2 <= n:
            m_v += 1
        return m_v

    def g_of(n):
        return Fraction(m_of(n)) * area_max - dd * n / 2

    n_hi = 1 + int(max(Fraction(32) * area_max * area_max / (dd * dd),
                       8 * area_max / dd, 4 * c_max / dd, 1))
    l_val = 0
    for n in range(n_hi + 1):
        if g_of(n) > -c_max:
            l_val = n
    co.L = l_val
    co.delta = delta
    co.area_max = area_max
    return co


def _cone_w_data(co: ConeConstants, w, r_a, r_b):
    """Per-coset-word constants: the all-zero instance, its frame
    coordinates, and the template-maximum offset."""
    frame, det_ab = co.frame, co.det_ab
    h0 = _tail_element(co, w)
    al0, be0 = frame.alpha_beta(h0.hat)
    c_w = (Fraction(det_ab, 2) * al0 * be0 + r_a * al0 + r_b * be0
           - Fraction(h0.area2, 2))
    return h0, al0, be0, c_w


def _certify_cone_i(co: ConeConstants, r_a, r_b, beta_tau, cfg) -> int:
    """Least certified completeness threshold for one choice of m."""
    frame, d, det_ab, m_exp = co.frame, co.d, co.det_ab, co.m
    t_el = eval_labels(co.lower.go)
    tb_el = eval_labels(co.lower.back)
    sg_el = eval_labels(co.upper.go)
    s_el = eval_labels(co.upper.back)
    a_val, b_val = co.lower.value, co.upper.value

    floor = 1
    conds = []
    for w in co.reps.values():
        w_el = eval_labels(w)
        h0, al0, be0, c_w = _cone_w_data(co, w, r_a, r_b)
        # Constancy check of the template maximum at a probe point.
        probe = (t_el * a_val ** d * tb_el * sg_el * s_el * t_el * tb_el * w_el
                 * (sg_el * s_el * t_el * a_val * tb_el) ** (m_exp - 1)
                 * sg_el * b_val ** d * s_el)
        alp, bep = frame.alpha_beta(probe.hat)
        c_probe = (Fraction(det_ab, 2) * alp * bep + r_a * alp + r_b * bep
                   - Fraction(probe.area2, 2))
        assert c_probe == c_w, "template maximum is not affine-compatible"

        # Reference polynomial in (n1, n2, n3, P): the displaced runs are
        # accounted by an exact -d per unit left shift (verified below).
        tail_fixed = tb_el * w_el * (sg_el * s_el * t_el * a_val * tb_el) ** (m_exp - 1) * sg_el
        builder = ProductBuilder(4)
        builder.absorb_fixed(t_el)
        builder.absorb_block(0, a_val)
        builder.absorb_fixed(tb_el * sg_el)
        builder.absorb_block(1, b_val)
        builder.absorb_fixed(s_el * t_el)
        builder.absorb_block(2, a_val)
        builder.absorb_fixed(tail_fixed)
        builder.absorb_block(3, b_val)
        builder.absorb_fixed(s_el)
        ref = builder.done()
        probe_ns = (1, 2, 3, 2)
        direct = (t_el * a_val ** 1 * tb_el * sg_el * b_val ** 2 * s_el
                  * t_el * a_val ** 3 * tb_el * w_el
                  * (sg_el * s_el * t_el * a_val * tb_el) ** (m_exp - 1)
                  * sg_el * b_val ** 2 * s_el)
        assert ref.area2.eval(probe_ns) == direct.area2, "reference polynomial mismatch"

        # Exact area drop of one unit left-shift of the trailing mass.
        tmpl = _cone_template(co, w)
        zeros = [0] * tmpl.star_count
        last = list(zeros)
        last[-1] = 1
        prev = list(zeros)
        prev[-2] = 1
        shift_drop = tmpl.evaluate_at(last).area2 - tmpl.evaluate_at(prev).area2
        assert shift_drop == 2 * d, "left-shift drop disagrees with d"

        # Area drop of moving d units of trailing mass into the early block.
        def area_at(n1, n2, n3, pp):
            return Fraction(ref.area2.eval((n1, n2, n3, pp)), 2)

        delta2 = area_at(0, 0, 0, 2 * d) - area_at(0, d, 0, d)
        delta2_probe = area_at(0, 0, 0, 3 * d) - area_at(0, d, 0, 2 * d)
        assert delta2 == delta2_probe, "early-shift drop is not constant"
        assert delta2 > 0, "early-shift drop must be positive"

        floor = max(floor,
                    ceil(al0), ceil(be0),
                    ceil(be0 + Fraction(d, 1 - THETA)))

        tb_aff = Poly2.affine(-be0, 0, 1)          # beta - beta0
        budget = tb_aff.scale(Fraction(1 - THETA)) - Poly2.const(2 * d)
        conds.append(budget.scale((m_exp - 1) * d) - Poly2.const(delta2))
        n2max = tb_aff.scale(THETA) + Poly2.const(d)
        jump = (n2max + Poly2.const(beta_tau)).scale(det_ab)
        avail = (tb_aff - n2max).scale(m_exp - 1)
        conds.append(avail - jump)
        for nu1 in (0, d):
            for nu2 in (0, d):
                n1_aff = (Fraction(nu1), Fraction(0), Fraction(0))
                n2_aff = (-THETA * be0 + nu2, Fraction(0), THETA)
                n3_aff = (-al0 - nu1, Fraction(1), Fraction(0))
                p_aff = ((THETA - 1) * be0 - nu2, Fraction(0), 1 - THETA)
                a_ext = qpoly_to_poly2(ref.area2, [n1_aff, n2_aff, n3_aff, p_aff]).scale(Fraction(1, 2))
                shift_total = Poly2.affine(p_aff[0], p_aff[1], p_aff[2]).scale(Fraction(d * (m_exp - 1)))
                conds.append(shift_total - a_ext)
    return scan_threshold(floor, conds)


def cone_ii_constants(gd: GilmanData, m_aut: GAutomaton, cls: SpanClass,
                      cfg: RunConfig = DEFAULT) -> ConeConstants:
    lower = _select_lower_edge(gd, m_aut, cls.cone_low)
    upper = _select_upper_edge(gd, m_aut, cls.cone_high, cfg.enumeration_cap)
    a_val, b_val = lower.value, upper.value
    frame = AlphaBetaFrame(a_val.hat, b_val.hat)
    det_ab = frame.determinant
    assert det_ab > 0
    for e in gd.x_entries:
        al, be = frame.alpha_beta(e.value.hat)
        if al < 0 or be < 0:
            raise MonotonicityViolated("letter outside the cone frame")

    centrals = [e for e in gd.x_entries if e.value.is_central() and e.value.c > 0]
    if not centrals:
        raise SelectionEmpty("no positive central loop for this cone case")
    c_entry = min(centrals, key=lambda e: (e.value.c,) + _entry_key(e))
    c_back = _shortest_path_labels(m_aut, c_entry.t_states[-1], m_aut.start)
    central_loop = EdgeLoop(c_entry.t_labels, c_entry.u_labels, c_back, c_entry.value)
    d = c_entry.value.c

    ambient = sorted({label_value(lab) for _, lab, _ in m_aut.edges}, key=HeisElement.sort_key)
    cosets = build_quotient([a_val ** d, b_val ** d, central(d)], ambient)
    assert cosets.subgroup.central_depth == d, "coset system depth mismatch"
    reps = coset_hitting_representatives(m_aut, cosets)

    t_el, tb_el = eval_labels(lower.go), eval_labels(lower.back)
    sg_el, s_el = eval_labels(upper.go), eval_labels(upper.back)
    r_el, rb_el = eval_labels(central_loop.go), eval_labels(central_loop.back)

    floor = 1
    conds = []
    for w in reps.values():
        w_el = eval_labels(w)
        h0w = sg_el * s_el * t_el * tb_el * r_el * rb_el * w_el
        c1 = max(ceil(frame.alpha(h0w.hat)), ceil(frame.beta(h0w.hat)), 0)
        floor = max(floor, c1 + 1)
        builder = ProductBuilder(2)
        builder.absorb_fixed(sg_el)
        builder.absorb_block(0, b_val)
        builder.absorb_fixed(s_el * t_el)
        builder.absorb_block(1, a_val)
        builder.absorb_fixed(tb_el * r_el * rb_el * w_el)
        ref = builder.done()
        probe = sg_el * b_val ** 2 * s_el * t_el * a_val ** 3 * tb_el * r_el * rb_el * w_el
        assert ref.area2.eval((2, 3)) == probe.area2, "reference polynomial mismatch"
        # Need area(h(n1, n2, 0) w) <= 0 whenever both exponents are >= K - c1.
        subs = [(Fraction(-c1), Fraction(1), Fraction(0)),
                (Fraction(-c1), Fraction(0), Fraction(1))]
        conds.append(qpoly_to_poly2(ref.area2, subs).scale(Fraction(-1, 2)))
    k_val = scan_threshold(floor, conds)
    co = ConeConstants(lower, upper, frame, det_ab, d, 1, cosets, reps, k_val)
    co.central_loop = central_loop
    co.central_d = d
    return co


def _cone_half(gd: GilmanData, m_aut: GAutomaton, cls: SpanClass,
               cfg: RunConfig) -> BoundedLanguage:
    """Bounded language covering the non-negative-area part of one cone."""
    has_positive_central = any(e.value.is_central() and e.value.c > 0 for e in gd.x_entries)
    alpha_fn = None
    if has_positive_central:
        co = cone_ii_constants(gd, m_aut, cls, cfg)
        templates = []
        sg_w = word_of_labels(co.upper.go)
        s_w = word_of_labels(co.upper.back)
        b_w = word_of_labels(co.upper.loop)
        t_w = word_of_labels(co.lower.go)
        tb_w = word_of_labels(co.lower.back)
        a_w = word_of_labels(co.lower.loop)
        r_w = word_of_labels(co.central_loop.go)
        rb_w = word_of_labels(co.central_loop.back)
        c_w = word_of_labels(co.central_loop.loop)
        for w in sorted(co.reps.values(), key=lambda w: tuple(label_key(l) for l in w)):
            templates.append(Template((
                Fixed(sg_w), Star(b_w), Fixed(s_w + t_w), Star(a_w),
                Fixed(tb_w + r_w), Star(c_w), Fixed(rb_w + word_of_labels(w)),
            )))
        counters = []
    else:
        co = cone_i_constants(gd, m_aut, cls, cfg)
        templates = [_cone_template(co, w)
                     for w in sorted(co.reps.values(),
                                     key=lambda w: tuple(label_key(l) for l in w))]
        counters = [((lambda lab: co.frame.beta(label_value(lab).hat) > 0,
                      lambda lab: co.frame.alpha(label_value(lab).hat) > 0), co.L)]

    frame = co.frame
    functionals = [
        (lambda lab: frame.alpha(label_value(lab).hat), Fraction(co.K)),
        (lambda lab: frame.beta(label_value(lab).hat), Fraction(co.K)),
    ]
    out = BoundedLanguage.of(templates)
    for piece in shortfall_pieces(gd.tilde, functionals, counters, cfg.enumeration_cap):
        out = out.union(reduce_automaton(piece, cfg, _expect_degenerate=True))
    return out


def case_cone(gd: GilmanData, m_aut: GAutomaton, cls: SpanClass,
              cfg: RunConfig = DEFAULT) -> BoundedLanguage:
    positive = _cone_half(gd, m_aut, cls, cfg)
    mirrored = mirror_automaton(m_aut)
    mirrored = trim(mirrored)
    gd2 = compute_gilman_general(mirrored, cfg.enumeration_cap)
    cls2 = classify_positive_span([e.value.hat for e in gd2.x_entries])
    assert cls2.tag == "Cone", "mirror image of a cone must be a cone"
    negative = _cone_half(gd2, mirrored, cls2, cfg)
    return positive.union(negative.mirrored())


# ---------------------------------------------------------------------------
# Top-level rewriting.

def reduce_submonoid(m: GAutomaton, cfg: RunConfig = DEFAULT,
                     _expect_degenerate: bool = False) -> BoundedLanguage:
    """Bounded language with the same evaluation image as a submonoid
    automaton (start state = unique accept state)."""
    if m.accepts != frozenset([m.start]):
        raise ValueError("reduce_submonoid needs start == accepts == {v}")
    m = trim(m)
    if m.is_empty or not m.edges:
        return BoundedLanguage.of([Template()])
    gd = compute_gilman_general(m, cfg.enumeration_cap)
    if not gd.x_entries:
        return BoundedLanguage.of([Template()])
    cls = classify_positive_span([e.value.hat for e in gd.x_entries])
    if _expect_degenerate and cls.tag not in ("Zero", "Ray", "Line"):
        raise AssertionError(f"recursive reduction saw class {cls.tag}")
    if cls.tag in ("Zero", "Ray", "Line"):
        return case_line(gd, cfg)
    if cls.tag == "Plane":
        return case_plane(gd, cfg)
    if cls.tag == "HalfPlane":
        return case_half_plane(gd, m, cls, cfg)
    return case_cone(gd, m, cls, cfg)


def template_normal_form(template: Template):
    """Compact evaluation-level form: a tuple of ("F", g) / ("S", g) ops.

    The evaluation set only depends on the item evaluations, so templates
    that differ in word spelling but agree element-wise collapse.  Stars of
    the identity vanish and consecutive equal stars merge.
    """
    return _nf_append((), template)


def _nf_append(prefix, template: Template):
    out = list(prefix)
    for item in template.items:
        g = evaluate(item.word)
        if isinstance(item, Fixed):
            if g.is_identity():
                continue
            if out and out[-1][0] == "F":
                out[-1] = ("F", out[-1][1] * g)
            else:
                out.append(("F", g))
        else:
            if g.is_identity():
                continue
            if out and out[-1] == ("S", g):
                continue
            out.append(("S", g))
    return tuple(out)


def _nf_to_template(nf) -> Template:
    items = []
    for kind, g in nf:
        word = canonical_word(g)
        items.append(Fixed(word) if kind == "F" else Star(word))
    return Template(tuple(items)).normalized()


def ev_normalize(template: Template) -> Template:
    return _nf_to_template(template_normal_form(template))


def reduce_automaton(m: GAutomaton, cfg: RunConfig = DEFAULT,
                     _expect_degenerate: bool = False) -> BoundedLanguage:
    """Bounded language with the same evaluation image as the automaton."""
    mt = trim(m)
    if mt.is_empty:
        return BoundedLanguage(())
    spines = decompose_to_cycle_languages(mt, cfg.enumeration_cap)
    cache = {}

    def _nf_key(nf):
        return tuple((kind, g.sort_key()) for kind, g in nf)

    def sub(v):
        if v not in cache:
            bl = reduce_submonoid(cycle_language_at(mt, v), cfg, _expect_degenerate)
            cache[v] = sorted({template_normal_form(t) for t in bl.templates}, key=_nf_key)
        return cache[v]

    out_forms = set()
    for labels, states in spines:
        # Concatenate the per-state languages, deduplicating the evaluation
        # normal forms after every step; interleavings that agree collapse
        # early instead of multiplying out.
        prefixes = {()}
        width_cap = max(1024, cfg.template_cap // 8)
        for i, v in enumerate(states):
            tail = Template((Fixed(word_of_labels((labels[i],))),)) if i < len(labels) else Template()
            new_prefixes = set()
            for p in prefixes:
                for t_nf in sub(v):
                    nf = _nf_append(_nf_concat(p, t_nf), tail)
                    new_prefixes.add(nf)
                if len(new_prefixes) > width_cap:
                    raise CapExceeded("prefix width cap hit while assembling spines")
            prefixes = new_prefixes
            if not prefixes:
                break
        out_forms |= prefixes
        if len(out_forms) > cfg.template_cap:
            raise CapExceeded("template cap hit while assembling spines")
    forms = sorted(out_forms, key=lambda nf: tuple((kind, g.sort_key()) for kind, g in nf))
    return BoundedLanguage.of(_nf_to_template(nf) for nf in forms)


def _nf_concat(prefix, nf):
    if not nf:
        return prefix
    out = list(prefix)
    for op in nf:
        kind, g = op
        if kind == "F" and out and out[-1][0] == "F":
            out[-1] = ("F", out[-1][1] * g)
        elif kind == "S" and out and out[-1] == op:
            continue
        else:
            out.append(op)
    return tuple(out)
