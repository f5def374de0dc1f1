"""Group-labeled finite automata.

A GAutomaton is a finite directed multigraph with labeled edges, one start
state and a set of accept states.  Labels are usually HeisElement values; the
rewriting pipeline also runs these automata over composite letters (objects
carrying a group value plus a realization word), so every operation here
treats labels as opaque hashable symbols and only consults the group value
through `label_value` where needed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import CapExceeded, NotAccepted, ParseError
from .heis import HeisElement, evaluate, format_element, parse_element


@dataclass(frozen=True)
class CompositeLetter:
    """An opaque alphabet symbol with a group value and a word realization."""

    tag: tuple
    value: HeisElement
    word: tuple

    def sort_key(self):
        return (1, self.tag)

    def __repr__(self):
        return f"Letter{self.tag}"


def label_value(label) -> HeisElement:
    return label if isinstance(label, HeisElement) else label.value


def label_word(label) -> tuple:
    return (label,) if isinstance(label, HeisElement) else label.word


def label_key(label):
    if isinstance(label, HeisElement):
        return (0,) + label.sort_key()
    return label.sort_key()


def word_of_labels(labels) -> tuple:
    out = []
    for lab in labels:
        out.extend(label_word(lab))
    return tuple(out)


def eval_labels(labels) -> HeisElement:
    return evaluate(label_value(lab) for lab in labels)


class GAutomaton:
    """Immutable after construction; adjacency maps are precomputed."""

    def __init__(self, states, edges, start, accepts):
        self.states = tuple(states)
        self.edges = tuple(edges)
        self.start = start
        self.accepts = frozenset(accepts)
        state_set = set(self.states)
        if start not in state_set:
            raise ParseError(f"start state {start!r} not among states")
        if not self.accepts <= state_set:
            raise ParseError("accept states must be a subset of states")
        self.out = {q: [] for q in self.states}
        self.inc = {q: [] for q in self.states}
        for e in self.edges:
            src, lab, dst = e
            if src not in state_set or dst not in state_set:
                raise ParseError(f"edge endpoint missing from states: {e!r}")
            self.out[src].append(e)
            self.inc[dst].append(e)
        for q in self.states:
            self.out[q].sort(key=lambda e: (label_key(e[1]), str(e[2])))
            self.inc[q].sort(key=lambda e: (label_key(e[1]), str(e[0])))

    @property
    def is_empty(self) -> bool:
        return not self.accepts

    def labels(self):
        seen = {}
        for _, lab, _ in self.edges:
            seen.setdefault(label_key(lab), lab)
        return [seen[k] for k in sorted(seen)]

    def accepts_word(self, word) -> bool:
        current = {self.start}
        for letter in word:
            current = {dst for q in current for (_, lab, dst) in self.out[q] if lab == letter}
            if not current:
                return False
        return bool(current & self.accepts)

    def accepted_words(self, max_len: int, cap: int = 10**6):
        """All label words of length <= max_len, in BFS order."""
        out = []
        frontier = [((), frozenset([self.start]))]
        for _ in range(max_len + 1):
            next_frontier = []
            for word, states in frontier:
                if states & self.accepts:
                    out.append(word)
                    if len(out) > cap:
                        raise CapExceeded("accepted_words cap hit")
                by_label = {}
                for q in states:
                    for _, lab, dst in self.out[q]:
                        by_label.setdefault(label_key(lab), (lab, set()))[1].add(dst)
                for k in sorted(by_label):
                    lab, dsts = by_label[k]
                    next_frontier.append((word + (lab,), frozenset(dsts)))
            frontier = next_frontier
        return out

    def __repr__(self):
        return (f"GAutomaton({len(self.states)} states, {len(self.edges)} edges, "
                f"start={self.start!r}, accepts={sorted(map(str, self.accepts))})")


def empty_marker(start="q0") -> GAutomaton:
    return GAutomaton((start,), (), start, frozenset())


def _reachable(m: GAutomaton, seeds, adjacency):
    seen = set(seeds)
    stack = list(seeds)
    while stack:
        q = stack.pop()
        for e in adjacency[q]:
            nxt = e[2] if adjacency is m.out else e[0]
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def trim(m: GAutomaton) -> GAutomaton:
    """Restrict to states on some path start -> accept.

    If the language is empty the result is an explicit empty marker (start
    state only, no accepts).
    """
    fwd = _reachable(m, [m.start], m.out)
    bwd = _reachable(m, list(m.accepts), m.inc)
    keep = fwd & bwd
    if not keep:
        return empty_marker(m.start)
    edges = [e for e in m.edges if e[0] in keep and e[2] in keep]
    states = [q for q in m.states if q in keep]
    return GAutomaton(states, edges, m.start, m.accepts & keep)


def is_deterministic(m: GAutomaton) -> bool:
    for q in m.states:
        seen = set()
        for _, lab, _ in m.out[q]:
            k = label_key(lab)
            if k in seen:
                return False
            seen.add(k)
    return True


def determinize(m: GAutomaton) -> GAutomaton:
    """Subset construction over the label alphabet, then trim.

    Two edge labels are the same letter iff equal as labels (group-element
    equality for HeisElement labels).
    """
    m = trim(m)
    if m.is_empty:
        return m
    start = frozenset([m.start])
    names = {start: "d0"}
    order = [start]
    edges = []
    i = 0
    while i < len(order):
        cur = order[i]
        i += 1
        by_label = {}
        for q in cur:
            for _, lab, dst in m.out[q]:
                by_label.setdefault(label_key(lab), (lab, set()))[1].add(dst)
        for k in sorted(by_label):
            lab, dsts = by_label[k]
            dsts = frozenset(dsts)
            if dsts not in names:
                names[dsts] = f"d{len(names)}"
                order.append(dsts)
            edges.append((names[cur], lab, names[dsts]))
    states = [names[s] for s in order]
    accepts = {names[s] for s in order if s & m.accepts}
    return trim(GAutomaton(states, edges, "d0", accepts))


def scc_decompose(m: GAutomaton):
    """Strongly connected components in topological order of the condensation."""
    index = {}
    low = {}
    on_stack = set()
    stack = []
    components = []
    counter = [0]

    for root in m.states:
        if root in index:
            continue
        work = [(root, iter(m.out[root]))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            q, it = work[-1]
            advanced = False
            for e in it:
                nxt = e[2]
                if nxt not in index:
                    index[nxt] = low[nxt] = counter[0]
                    counter[0] += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(m.out[nxt])))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[q] = min(low[q], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[q])
            if low[q] == index[q]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == q:
                        break
                components.append(frozenset(comp))
    # Tarjan emits components in reverse topological order.
    components.reverse()
    return components


def enumerate_simple(m: GAutomaton, frm, kind: str, targets=None, cap: int = 10**6):
    """All simple paths from `frm` to a target set, or all simple cycles at
    `frm` (no repeated intermediate states).

    Returns a list of (labels, states) pairs; states includes both endpoints.
    Raises CapExceeded when more than `cap` objects would be produced.
    """
    results = []
    if kind == "paths":
        targets = frozenset(targets)
        if frm in targets:
            results.append(((), (frm,)))
        stack = [((), (frm,), frozenset([frm]))]
        while stack:
            word, path, seen = stack.pop()
            for e in reversed(m.out[path[-1]]):
                _, lab, dst = e
                if dst in seen:
                    continue
                w2, p2 = word + (lab,), path + (dst,)
                if dst in targets:
                    results.append((w2, p2))
                    if len(results) > cap:
                        raise CapExceeded("simple path cap hit")
                stack.append((w2, p2, seen | {dst}))
    elif kind == "cycles":
        stack = [((), (frm,), frozenset())]
        while stack:
            word, path, seen = stack.pop()
            for e in reversed(m.out[path[-1]]):
                _, lab, dst = e
                if dst == frm:
                    results.append((word + (lab,), path + (dst,)))
                    if len(results) > cap:
                        raise CapExceeded("simple cycle cap hit")
                elif dst not in seen:
                    stack.append((word + (lab,), path + (dst,), seen | {dst}))
    else:
        raise ValueError(f"unknown kind {kind!r}")
    results.sort(key=lambda r: (len(r[0]), tuple(label_key(x) for x in r[0]), tuple(map(str, r[1]))))
    return results


def find_accepting_path(m: GAutomaton, word):
    """One accepting state sequence for `word`, or None."""
    word = tuple(word)
    frontier = {m.start: (m.start,)}
    for letter in word:
        nxt = {}
        for q, path in sorted(frontier.items(), key=lambda kv: str(kv[0])):
            for _, lab, dst in m.out[q]:
                if lab == letter and dst not in nxt:
                    nxt[dst] = path + (dst,)
        if not nxt:
            return None
        frontier = nxt
    for q in sorted(frontier, key=str):
        if q in m.accepts:
            return frontier[q]
    return None


def loop_erase_decompose(m: GAutomaton, word):
    """Loop-erasure of an accepted word.

    Returns (spine_labels, spine_states, cycles) where cycles maps each spine
    state to the word of the cycle bypassed at its last visit (possibly the
    empty tuple).  Reassembling cycle words at their spine positions gives the
    original word back.
    """
    word = tuple(word)
    path = find_accepting_path(m, word)
    if path is None:
        raise NotAccepted("word is not accepted")
    spine_labels = []
    spine_states = []
    cycles = {}
    pos = 0
    n = len(word)
    while True:
        state = path[pos]
        last = max(j for j in range(pos, n + 1) if path[j] == state)
        spine_states.append(state)
        cycles[state] = word[pos:last]
        if last == n:
            break
        spine_labels.append(word[last])
        pos = last + 1
    return tuple(spine_labels), tuple(spine_states), cycles


def decompose_to_cycle_languages(m: GAutomaton, cap: int = 10**6):
    """Simple accepted paths of a trim automaton, as (labels, states) pairs.

    The language is the union over these spines of
    L_{v0->v0} s1 L_{v1->v1} ... s_l L_{vl->vl}, each cycle language being the
    automaton (V, delta, v, {v}).
    """
    return enumerate_simple(m, m.start, "paths", targets=m.accepts, cap=cap)


def cycle_language_at(m: GAutomaton, state) -> GAutomaton:
    return GAutomaton(m.states, m.edges, state, frozenset([state]))


def mirror_automaton(m: GAutomaton) -> GAutomaton:
    """Apply the mirror automorphism to every (HeisElement) label."""
    from .heis import mirror

    edges = [(src, mirror(lab), dst) for src, lab, dst in m.edges]
    return GAutomaton(m.states, edges, m.start, m.accepts)


# ---------------------------------------------------------------------------
# JSON automaton format:
# { "states": [...], "start": s, "accepts": [...],
#   "edges": [ {"from": ..., "to": ..., "label": element-string}, ... ] }

def automaton_from_json(doc) -> GAutomaton:
    if isinstance(doc, str):
        doc = json.loads(doc)
    if not isinstance(doc, dict):
        raise ParseError("automaton document must be a JSON object")
    unknown = set(doc) - {"states", "start", "accepts", "edges"}
    if unknown:
        raise ParseError(f"unknown automaton fields: {sorted(unknown)}")
    try:
        states = list(doc["states"])
        start = doc["start"]
        accepts = list(doc["accepts"])
        edges_doc = list(doc["edges"])
    except KeyError as e:
        raise ParseError(f"missing automaton field {e.args[0]!r}") from None
    edges = []
    for ed in edges_doc:
        if not isinstance(ed, dict):
            raise ParseError("each edge must be a JSON object")
        unknown = set(ed) - {"from", "to", "label"}
        if unknown:
            raise ParseError(f"unknown edge fields: {sorted(unknown)}")
        try:
            edges.append((ed["from"], parse_element(ed["label"]), ed["to"]))
        except KeyError as e:
            raise ParseError(f"missing edge field {e.args[0]!r}") from None
    return GAutomaton(states, edges, start, accepts)


def automaton_to_json(m: GAutomaton) -> dict:
    return {
        "states": list(m.states),
        "start": m.start,
        "accepts": sorted(m.accepts, key=str),
        "edges": [
            {"from": src, "to": dst, "label": format_element(label_value(lab))}
            for src, lab, dst in m.edges
        ],
    }
