"""Rewriting a deterministic trim automaton over conjugated simple loops.

For a deterministic trim automaton M the letters are

  X = { t u t^-1 : t labels a simple path start->p, u a simple cycle at p,
        the two paths meeting only at p }
  Y = { y : y labels a simple path start->accept }

and the rewritten automaton accepts exactly the sequences x_1...x_l y whose
underlying simple paths chain up by the prefix conditions.  Every accepted
word of M loop-erases to such a sequence with the same evaluation, and every
accepted sequence reassembles to an accepted word of M.  Prefix tests are
done on state sequences, which is equivalent to word prefixes since M is
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

from .automata import (
    GAutomaton,
    enumerate_simple,
    eval_labels,
    is_deterministic,
    label_key,
    label_word,
    word_of_labels,
)
from .errors import NotAccepted
from .heis import HeisElement, word_inverse


@dataclass(frozen=True)
class XLetter:
    t_states: tuple
    t_labels: tuple
    u_states: tuple
    u_labels: tuple
    value: HeisElement

    @property
    def word(self) -> tuple:
        t = word_of_labels(self.t_labels)
        return t + word_of_labels(self.u_labels) + word_inverse(t)

    def sort_key(self):
        return (2, len(self.t_labels), len(self.u_labels),
                tuple(label_key(l) for l in self.t_labels),
                tuple(label_key(l) for l in self.u_labels))

    def __repr__(self):
        return f"XLetter(t={self.t_labels}, u={self.u_labels})"


@dataclass(frozen=True)
class YLetter:
    states: tuple
    labels: tuple
    value: HeisElement

    @property
    def word(self) -> tuple:
        return word_of_labels(self.labels)

    def sort_key(self):
        return (3, len(self.labels), tuple(label_key(l) for l in self.labels))

    def __repr__(self):
        return f"YLetter({self.labels})"


@dataclass(frozen=True)
class GilmanData:
    automaton: GAutomaton
    x_entries: tuple
    y_entries: tuple
    tilde: GAutomaton

    @property
    def x_values(self):
        return [e.value for e in self.x_entries]


def _is_prefix(a, b):
    return len(a) <= len(b) and tuple(b[: len(a)]) == tuple(a)


def compute_gilman(m: GAutomaton, cap: int = 10**6) -> GilmanData:
    """X/Y letters and the rewritten automaton of a deterministic trim M."""
    if not is_deterministic(m):
        raise ValueError("compute_gilman needs a deterministic automaton")
    return compute_gilman_general(m, cap)


def compute_gilman_general(m: GAutomaton, cap: int = 10**6) -> GilmanData:
    """As compute_gilman but without the determinism requirement.

    The prefix conditions are on state sequences, so evaluation equality with
    the source language holds for any trim automaton; determinism is only
    needed when the rewriting must be unambiguous, which the pipeline never
    relies on.
    """
    paths = enumerate_simple(m, m.start, "paths", targets=set(m.states), cap=cap)
    cycles_at = {}
    x_entries = []
    for t_labels, t_states in paths:
        p = t_states[-1]
        if p not in cycles_at:
            cycles_at[p] = enumerate_simple(m, p, "cycles", cap=cap)
        t_interior = set(t_states[:-1])
        for u_labels, u_states in cycles_at[p]:
            if not u_labels:
                continue
            if t_interior & set(u_states):
                continue
            value = eval_labels(t_labels) * eval_labels(u_labels) * eval_labels(t_labels).inverse()
            x_entries.append(XLetter(t_states, t_labels, u_states, u_labels, value))
    y_entries = [
        YLetter(states, labels, eval_labels(labels))
        for labels, states in paths
        if states[-1] in m.accepts
    ]

    state_ids = {t_states: f"t{i}" for i, (_, t_states) in enumerate(paths)}
    star = "acc"
    edges = []
    for x in x_entries:
        combined = tuple(x.t_states) + tuple(x.u_states[1:])
        for t_states, sid in state_ids.items():
            if _is_prefix(t_states, combined):
                edges.append((sid, x, state_ids[x.t_states]))
    for y in y_entries:
        for t_states, sid in state_ids.items():
            if _is_prefix(t_states, y.states):
                edges.append((sid, y, star))
    tilde = GAutomaton(
        list(state_ids.values()) + [star],
        edges,
        state_ids[(m.start,)],
        frozenset([star]),
    )
    return GilmanData(m, tuple(x_entries), tuple(y_entries), tilde)


def xfactorize(m: GAutomaton, word):
    """Loop-erase an accepted word of a deterministic automaton into its
    X-letter sequence plus final Y letter."""
    if not is_deterministic(m):
        raise ValueError("xfactorize needs a deterministic automaton")
    gamma_states = [m.start]
    gamma_labels = []
    letters = []
    for letter in word:
        dst = None
        for _, lab, d in m.out[gamma_states[-1]]:
            if lab == letter:
                dst = d
                break
        if dst is None:
            raise NotAccepted(f"no transition for letter {letter!r}")
        if dst in gamma_states:
            j = gamma_states.index(dst)
            t_states = tuple(gamma_states[: j + 1])
            t_labels = tuple(gamma_labels[:j])
            u_states = tuple(gamma_states[j:]) + (dst,)
            u_labels = tuple(gamma_labels[j:]) + (letter,)
            value = eval_labels(t_labels) * eval_labels(u_labels) * eval_labels(t_labels).inverse()
            letters.append(XLetter(t_states, t_labels, u_states, u_labels, value))
            gamma_states = gamma_states[: j + 1]
            gamma_labels = gamma_labels[:j]
        else:
            gamma_states.append(dst)
            gamma_labels.append(letter)
    if gamma_states[-1] not in m.accepts:
        raise NotAccepted("word ends in a non-accept state")
    y = YLetter(tuple(gamma_states), tuple(gamma_labels), eval_labels(gamma_labels))
    return tuple(letters), y


def reassemble(letters, y: YLetter):
    """Inverse of xfactorize: the accepted word whose decomposition is the
    given letter sequence."""
    out = []
    prev_len = 1
    for x in letters:
        combined_states = tuple(x.t_states) + tuple(x.u_states[1:])
        combined_labels = tuple(x.t_labels) + tuple(x.u_labels)
        if prev_len > len(combined_states):
            raise NotAccepted("prefix condition violated")
        out.extend(combined_labels[prev_len - 1:])
        prev_len = len(x.t_states)
    if prev_len > len(y.states):
        raise NotAccepted("prefix condition violated at the final letter")
    out.extend(y.labels[prev_len - 1:])
    return tuple(out)
