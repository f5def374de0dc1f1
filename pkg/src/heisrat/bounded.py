"""Bounded regular languages as finite unions of star templates.

A template is a sequence of items, each either a fixed group word or the
star of a group word; it denotes { t0 u1^n1 t1 ... us^ns ts : ni >= 0 }.
A BoundedLanguage is a finite union of templates.  Every language produced
by the rewriting pipeline is structurally bounded simply because it is built
in this shape.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product as iter_product

from .errors import ParseError
from .heis import (
    HeisElement,
    IDENTITY,
    Word,
    evaluate,
    format_word,
    mirror_word,
    parse_word,
)


@dataclass(frozen=True)
class Fixed:
    word: Word

    def sort_key(self):
        return (0, tuple(g.sort_key() for g in self.word))


@dataclass(frozen=True)
class Star:
    word: Word

    def sort_key(self):
        return (1, tuple(g.sort_key() for g in self.word))


@dataclass(frozen=True)
class Template:
    items: tuple = ()

    def normalized(self) -> "Template":
        """Merge adjacent fixed parts, drop empty items."""
        out = []
        for item in self.items:
            if not item.word:
                continue
            if isinstance(item, Fixed) and out and isinstance(out[-1], Fixed):
                out[-1] = Fixed(out[-1].word + item.word)
            else:
                out.append(item)
        return Template(tuple(out))

    @property
    def star_count(self) -> int:
        return sum(1 for item in self.items if isinstance(item, Star))

    def instantiate(self, exponents) -> Word:
        exps = list(exponents)
        out: list = []
        i = 0
        for item in self.items:
            if isinstance(item, Fixed):
                out.extend(item.word)
            else:
                out.extend(item.word * exps[i])
                i += 1
        if i != len(exps):
            raise ValueError("exponent count does not match star count")
        return tuple(out)

    def evaluate_at(self, exponents) -> HeisElement:
        g = IDENTITY
        i = 0
        exps = list(exponents)
        for item in self.items:
            if isinstance(item, Fixed):
                g = g * evaluate(item.word)
            else:
                g = g * evaluate(item.word) ** exps[i]
                i += 1
        return g

    def sort_key(self):
        return tuple(item.sort_key() for item in self.items)


@dataclass(frozen=True)
class BoundedLanguage:
    templates: tuple = ()

    @staticmethod
    def of(templates) -> "BoundedLanguage":
        normed = {}
        for t in templates:
            t = t.normalized()
            normed.setdefault(t.sort_key(), t)
        return BoundedLanguage(tuple(normed[k] for k in sorted(normed)))

    def union(self, other: "BoundedLanguage") -> "BoundedLanguage":
        return BoundedLanguage.of(self.templates + other.templates)

    def map_letters(self, fn) -> "BoundedLanguage":
        def map_item(item):
            word = tuple(fn(g) for g in item.word)
            return Fixed(word) if isinstance(item, Fixed) else Star(word)

        return BoundedLanguage.of(
            Template(tuple(map_item(it) for it in t.items)) for t in self.templates
        )

    def mirrored(self) -> "BoundedLanguage":
        from .heis import mirror

        return self.map_letters(mirror)

    def values_up_to(self, max_exp: int, cap: int = 10**7):
        """Evaluation image over all exponent tuples bounded by max_exp."""
        out = set()
        budget = cap
        for t in self.templates:
            s = t.star_count
            for exps in iter_product(range(max_exp + 1), repeat=s):
                out.add(t.evaluate_at(exps))
                budget -= 1
                if budget < 0:
                    raise MemoryError("values_up_to cap hit")
        return out

    def box_values(self, hat_bound: int, area2_bound: int):
        """Evaluation image intersected with a box, computed by a per-template
        reachability walk that never leaves the box.  The box is defined by
        the hat norm and |area2|, so it is stable under the mirror map.
        Under-approximates when a representation must leave the box and
        return; callers pick generous bounds."""
        def in_box(g):
            return abs(g.a) <= hat_bound and abs(g.b) <= hat_bound and abs(g.area2) <= area2_bound

        out = set()
        for t in self.templates:
            current = {IDENTITY}
            for item in t.items:
                step = evaluate(item.word)
                if isinstance(item, Fixed):
                    current = {g * step for g in current}
                    current = {g for g in current if in_box(g)}
                else:
                    grown = set(current)
                    frontier = set(current)
                    while frontier:
                        nxt = {g * step for g in frontier}
                        nxt = {g for g in nxt if in_box(g) and g not in grown}
                        grown |= nxt
                        frontier = nxt
                    current = grown
            out |= {g for g in current if in_box(g)}
        return out


def template_to_json(t: Template) -> dict:
    items = []
    for item in t.items:
        key = "fixed" if isinstance(item, Fixed) else "star"
        items.append({key: format_word(item.word)})
    return {"items": items}


def bounded_language_to_json(bl: BoundedLanguage) -> dict:
    return {"templates": [template_to_json(t) for t in bl.templates]}


def bounded_language_from_json(doc) -> BoundedLanguage:
    if isinstance(doc, str):
        doc = json.loads(doc)
    if not isinstance(doc, dict) or set(doc) - {"templates"}:
        raise ParseError("bounded language document must be {'templates': [...]}")
    templates = []
    for tdoc in doc.get("templates", []):
        if set(tdoc) - {"items"}:
            raise ParseError("template object must have only 'items'")
        items = []
        for idoc in tdoc.get("items", []):
            if set(idoc) == {"fixed"}:
                items.append(Fixed(parse_word(idoc["fixed"])))
            elif set(idoc) == {"star"}:
                items.append(Star(parse_word(idoc["star"])))
            else:
                raise ParseError(f"bad template item {idoc!r}")
        templates.append(Template(tuple(items)))
    return BoundedLanguage.of(templates)
