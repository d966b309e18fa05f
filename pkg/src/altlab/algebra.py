"""Finite ordered monoids, morphisms from A* and syntactic monoids of DFAs.

Elements of a monoid are the integers ``0..size-1``.  Monoids built here
from generators number their elements in breadth-first order, so the unit
is always 0 and every element's display name is its length-lexicographically
smallest representative word.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .errors import AlphabetMismatch, InputError, ResourceCapExceeded
from .frontend import Dfa, minimize

DEFAULT_MAX_MONOID = 64


def _frozen(array) -> np.ndarray:
    array = np.array(array, dtype=np.int64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class FiniteMonoid:
    size: int
    unit: int
    mult: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "mult", _frozen(self.mult))
        if self.mult.shape != (self.size, self.size):
            raise InputError("multiplication table has the wrong shape")
        if self.size and (self.mult.min() < 0 or self.mult.max() >= self.size):
            raise InputError("multiplication table leaves the monoid")
        if not self.names:
            object.__setattr__(self, "names", tuple(str(s) for s in range(self.size)))

    @property
    def elements(self) -> range:
        return range(self.size)

    def mul(self, *elems: int) -> int:
        result = self.unit
        for e in elems:
            result = int(self.mult[result, e])
        return result

    def power(self, s: int, n: int) -> int:
        result, base = self.unit, s
        while n:
            if n & 1:
                result = int(self.mult[result, base])
            base = int(self.mult[base, base])
            n >>= 1
        return result

    def is_idempotent(self, s: int) -> bool:
        return int(self.mult[s, s]) == s

    def name(self, s: int) -> str:
        return self.names[s] or "1"

    def axiom_violations(self) -> list[str]:
        """Exhaustive associativity and unit checks; empty when the table is a monoid."""
        problems = []
        m = self.mult
        left = m[m, :]  # left[x, y, z] = (xy)z
        right = m[:, m]  # right[x, y, z] = x(yz)
        bad = np.argwhere(left != right)
        if len(bad):
            x, y, z = bad[0]
            problems.append(f"not associative at ({x},{y},{z})")
        idx = np.arange(self.size)
        if not (m[self.unit, :] == idx).all() or not (m[:, self.unit] == idx).all():
            problems.append("unit law fails")
        return problems


def omega_power(m: FiniteMonoid, s: int) -> int:
    """The unique idempotent among s, s^2, s^3, ..."""
    p = s
    while int(m.mult[p, p]) != p:
        p = int(m.mult[p, s])
    return p


def _index_and_period(m: FiniteMonoid, s: int) -> tuple[int, int]:
    seen = {}
    p, k = s, 1
    while p not in seen:
        seen[p] = k
        p = int(m.mult[p, s])
        k += 1
    return seen[p], k - seen[p]


def monoid_exponent(m: FiniteMonoid) -> int:
    """Smallest e >= 1 such that s^e is idempotent for every element s."""
    index, period = 1, 1
    for s in m.elements:
        i, p = _index_and_period(m, s)
        index = max(index, i)
        period = math.lcm(period, p)
    return period * math.ceil(index / period)


def is_aperiodic(m: FiniteMonoid) -> bool:
    return all(int(m.mult[omega_power(m, s), s]) == omega_power(m, s) for s in m.elements)


def generate_monoid(
    unit: Hashable,
    generators: Sequence[Hashable],
    compose: Callable[[Hashable, Hashable], Hashable],
    max_size: int = DEFAULT_MAX_MONOID,
) -> tuple[FiniteMonoid, list[Hashable], list[int], list[tuple[int, ...]]]:
    """Close ``generators`` under ``compose`` starting from ``unit``.

    Returns the monoid, the concrete value of every element, the element id
    of every generator and, per element, its shortest generator-index word.
    """
    values = [unit]
    index = {unit: 0}
    words = [()]
    queue = deque([0])
    while queue:
        e = queue.popleft()
        for g, gen in enumerate(generators):
            v = compose(values[e], gen)
            if v not in index:
                if len(values) >= max_size:
                    raise ResourceCapExceeded(
                        f"monoid has more than {max_size} elements (raise --max-monoid)"
                    )
                index[v] = len(values)
                values.append(v)
                words.append(words[e] + (g,))
                queue.append(index[v])
    size = len(values)
    mult = np.empty((size, size), dtype=np.int64)
    for x in range(size):
        for y in range(size):
            mult[x, y] = index[compose(values[x], values[y])]
    gen_ids = [index[gen] for gen in generators]
    monoid = FiniteMonoid(size, 0, mult, tuple(str(w) for w in words))
    return monoid, values, gen_ids, words


@dataclass(frozen=True, eq=False)
class OrderRelation:
    leq: np.ndarray

    def __post_init__(self):
        array = np.array(self.leq, dtype=bool)
        array.setflags(write=False)
        object.__setattr__(self, "leq", array)

    def le(self, s: int, t: int) -> bool:
        return bool(self.leq[s, t])

    def reversed(self) -> OrderRelation:
        return OrderRelation(self.leq.T)

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(s), int(t)) for s, t in np.argwhere(self.leq)]

    def violations(self, monoid: FiniteMonoid) -> list[str]:
        leq = self.leq
        n = monoid.size
        problems = []
        if not leq.diagonal().all():
            problems.append("not reflexive")
        if (leq & leq.T & ~np.eye(n, dtype=bool)).any():
            problems.append("not antisymmetric")
        composed = (leq.astype(np.int64) @ leq.astype(np.int64)) > 0
        if (composed & ~leq).any():
            problems.append("not transitive")
        m = monoid.mult
        for s, t in np.argwhere(leq):
            # s <= t implies us <= ut and su <= tu for all u
            if not leq[m[:, s], m[:, t]].all() or not leq[m[s, :], m[t, :]].all():
                problems.append(f"order not compatible at ({s},{t})")
                break
        return problems


@dataclass(frozen=True, eq=False)
class Morphism:
    monoid: FiniteMonoid
    alphabet: tuple[str, ...]
    letter_images: tuple[int, ...]

    def __post_init__(self):
        if len(self.alphabet) != len(self.letter_images):
            raise InputError("one image per letter is required")

    def letter_image(self, a: str) -> int:
        try:
            return self.letter_images[self.alphabet.index(a)]
        except ValueError:
            raise InputError(f"letter {a!r} not in alphabet") from None

    def image(self, word: Iterable[str]) -> int:
        s = self.monoid.unit
        mult = self.monoid.mult
        for a in word:
            s = int(mult[s, self.letter_image(a)])
        return s

    def content_mask(self, word: Iterable[str]) -> int:
        mask = 0
        for a in word:
            mask |= 1 << self.alphabet.index(a)
        return mask

    @cached_property
    def content(self) -> ContentMorphism:
        return ContentMorphism(self)


def mask_letters(alphabet: Sequence[str], mask: int) -> str:
    return "".join(a for i, a in enumerate(alphabet) if mask >> i & 1)


def letters_mask(alphabet: Sequence[str], letters: Iterable[str]) -> int:
    mask = 0
    for a in letters:
        if a not in alphabet:
            raise InputError(f"letter {a!r} not in alphabet")
        mask |= 1 << alphabet.index(a)
    return mask


def subalphabets(alphabet: Sequence[str]) -> list[int]:
    """All sub-alphabet bitmasks, by size and then numerically."""
    masks = range(1 << len(alphabet))
    return sorted(masks, key=lambda b: (bin(b).count("1"), b))


class ContentMorphism:
    """w -> (alpha(w), content(w)), with shortest witness words for every pair."""

    def __init__(self, morphism: Morphism):
        self.morphism = morphism
        monoid = morphism.monoid
        start = (monoid.unit, 0)
        witness = {start: ""}
        queue = deque([start])
        while queue:
            s, mask = queue.popleft()
            w = witness[(s, mask)]
            for i, (a, img) in enumerate(zip(morphism.alphabet, morphism.letter_images)):
                nxt = (int(monoid.mult[s, img]), mask | 1 << i)
                if nxt not in witness:
                    witness[nxt] = w + a
                    queue.append(nxt)
        self.witnesses: dict[tuple[int, int], str] = witness
        images: dict[int, set[int]] = {b: set() for b in range(1 << len(morphism.alphabet))}
        for s, mask in witness:
            images[mask].add(s)
        self._images = {b: frozenset(v) for b, v in images.items()}

    @property
    def monoid(self) -> FiniteMonoid:
        return self.morphism.monoid

    @property
    def alphabet(self) -> tuple[str, ...]:
        return self.morphism.alphabet

    def __call__(self, word: str) -> tuple[int, int]:
        return self.morphism.image(word), self.morphism.content_mask(word)

    def image_with_content(self, mask: int) -> frozenset[int]:
        return self._images[mask]

    def witness(self, s: int, mask: int) -> str:
        """Shortest word (length-lex) with image s and content exactly ``mask``."""
        try:
            return self.witnesses[(s, mask)]
        except KeyError:
            raise ValueError(
                f"no word with image {s} and content {mask_letters(self.alphabet, mask)!r}"
            ) from None


def image_with_content(beta: ContentMorphism | Morphism, mask: int) -> frozenset[int]:
    if isinstance(beta, Morphism):
        beta = beta.content
    return beta.image_with_content(mask)


@dataclass(frozen=True, eq=False)
class RecognizedLanguage:
    morphism: Morphism
    accepting: frozenset[int]
    order: OrderRelation | None = None
    dfa: Dfa | None = None

    @property
    def monoid(self) -> FiniteMonoid:
        return self.morphism.monoid

    @property
    def alphabet(self) -> tuple[str, ...]:
        return self.morphism.alphabet

    def accepts(self, word: str) -> bool:
        return self.morphism.image(word) in self.accepting

    def complement(self) -> RecognizedLanguage:
        """Same morphism, complemented accepting set; the syntactic order reverses."""
        return RecognizedLanguage(
            self.morphism,
            frozenset(self.monoid.elements) - self.accepting,
            self.order.reversed() if self.order is not None else None,
            self.dfa.complement() if self.dfa is not None else None,
        )


def syntactic_order(monoid: FiniteMonoid, accepting: Iterable[int]) -> OrderRelation:
    """s <= t iff xsy in F implies xty in F for all x, y."""
    m = monoid.mult
    final = np.zeros(monoid.size, dtype=bool)
    final[list(accepting)] = True
    # contexts[s, x, y] = x s y in F
    triple = m[m, :]  # triple[x, s, y] = (xs)y
    contexts = final[triple].transpose(1, 0, 2).reshape(monoid.size, -1)
    # s <= t iff no context accepts s but rejects t
    leq = ~(contexts[:, None, :] & ~contexts[None, :, :]).any(axis=2)
    return OrderRelation(leq)


def syntactic_morphism(dfa: Dfa, max_size: int = DEFAULT_MAX_MONOID) -> RecognizedLanguage:
    """Transition monoid of the minimal DFA with its syntactic order."""
    dfa = minimize(dfa)
    identity = tuple(range(dfa.n_states))
    letter_maps = [
        tuple(dfa.delta[q][i] for q in range(dfa.n_states)) for i in range(len(dfa.alphabet))
    ]

    def compose(f, g):
        return tuple(g[x] for x in f)

    monoid, values, gen_ids, words = generate_monoid(identity, letter_maps, compose, max_size)
    names = tuple("".join(dfa.alphabet[g] for g in w) for w in words)
    monoid = FiniteMonoid(monoid.size, monoid.unit, monoid.mult, names)
    accepting = frozenset(e for e, f in enumerate(values) if f[dfa.initial] in dfa.finals)
    morphism = Morphism(monoid, dfa.alphabet, tuple(gen_ids))
    return RecognizedLanguage(morphism, accepting, syntactic_order(monoid, accepting), dfa)


def product_morphism(
    l1: RecognizedLanguage, l2: RecognizedLanguage, max_size: int = DEFAULT_MAX_MONOID
) -> tuple[Morphism, frozenset[int], frozenset[int]]:
    """Morphism into the submonoid of M1 x M2 generated by paired letter images."""
    if l1.alphabet != l2.alphabet:
        raise AlphabetMismatch(f"alphabets differ: {l1.alphabet} vs {l2.alphabet}")
    m1, m2 = l1.monoid, l2.monoid
    gens = list(zip(l1.morphism.letter_images, l2.morphism.letter_images))

    def compose(x, y):
        return int(m1.mult[x[0], y[0]]), int(m2.mult[x[1], y[1]])

    monoid, values, gen_ids, words = generate_monoid(
        (m1.unit, m2.unit), gens, compose, max_size
    )
    names = tuple("".join(l1.alphabet[g] for g in w) for w in words)
    monoid = FiniteMonoid(monoid.size, monoid.unit, monoid.mult, names)
    f1 = frozenset(e for e, (x, _) in enumerate(values) if x in l1.accepting)
    f2 = frozenset(e for e, (_, y) in enumerate(values) if y in l2.accepting)
    return Morphism(monoid, l1.alphabet, tuple(gen_ids)), f1, f2


def dump_monoid(language: RecognizedLanguage) -> dict:
    monoid = language.monoid
    order = language.order.pairs() if language.order is not None else None
    return {
        "alphabet": list(language.alphabet),
        "size": monoid.size,
        "unit": monoid.unit,
        "mult": monoid.mult.tolist(),
        "order": [list(p) for p in order] if order is not None else None,
        "letters": {a: img for a, img in zip(language.alphabet, language.morphism.letter_images)},
        "accepting": sorted(language.accepting),
        "names": [monoid.name(s) for s in monoid.elements],
    }


def load_monoid(data: dict | str) -> RecognizedLanguage:
    """Inverse of :func:`dump_monoid` (accepts the dict or its JSON text)."""
    if isinstance(data, str):
        data = json.loads(data)
    try:
        size = int(data["size"])
        names = tuple("" if n == "1" else n for n in data.get("names") or ())
        monoid = FiniteMonoid(size, int(data["unit"]), data["mult"], names)
        alphabet = tuple(data.get("alphabet") or data["letters"].keys())
        morphism = Morphism(monoid, alphabet, tuple(int(data["letters"][a]) for a in alphabet))
        order = None
        if data.get("order") is not None:
            leq = np.zeros((size, size), dtype=bool)
            for s, t in data["order"]:
                leq[s, t] = True
            order = OrderRelation(leq)
        accepting = frozenset(int(s) for s in data["accepting"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed monoid dump: {exc}") from None
    problems = monoid.axiom_violations()
    if order is not None:
        problems += order.violations(monoid)
    if problems:
        raise InputError("malformed monoid dump: " + "; ".join(problems))
    return RecognizedLanguage(morphism, accepting, order)


def are_isomorphic(l1: RecognizedLanguage, l2: RecognizedLanguage) -> bool:
    """Isomorphism of recognized languages generated by their letters.

    Both monoids are generated by the letter images, so an isomorphism is
    forced by matching representative words.
    """
    if l1.alphabet != l2.alphabet or l1.monoid.size != l2.monoid.size:
        return False
    m1, m2 = l1.monoid, l2.monoid
    mapping = {m1.unit: m2.unit}
    queue = deque([m1.unit])
    while queue:
        x = queue.popleft()
        for g1, g2 in zip(l1.morphism.letter_images, l2.morphism.letter_images):
            y1, y2 = int(m1.mult[x, g1]), int(m2.mult[mapping[x], g2])
            if y1 in mapping:
                if mapping[y1] != y2:
                    return False
            else:
                mapping[y1] = y2
                queue.append(y1)
    if len(mapping) != m1.size or len(set(mapping.values())) != m2.size:
        return False
    for x in m1.elements:
        for y in m1.elements:
            if mapping[int(m1.mult[x, y])] != int(m2.mult[mapping[x], mapping[y]]):
                return False
    if {mapping[s] for s in l1.accepting} != set(l2.accepting):
        return False
    if (l1.order is None) != (l2.order is None):
        return False
    if l1.order is not None:
        for s in m1.elements:
            for t in m1.elements:
                if l1.order.le(s, t) != l2.order.le(mapping[s], mapping[t]):
                    return False
    return True


def syntactic_quotient(
    language: RecognizedLanguage, max_size: int = DEFAULT_MAX_MONOID
) -> RecognizedLanguage:
    """The syntactic morphism of a language given by any recognizing morphism.

    Elements are identified when no two-sided context separates them; the
    quotient is rebuilt from the letter images so only the image of A* survives.
    """
    monoid = language.monoid
    m = monoid.mult
    final = np.zeros(monoid.size, dtype=bool)
    final[list(language.accepting)] = True
    contexts = final[m[m, :]].transpose(1, 0, 2).reshape(monoid.size, -1)
    signature = [contexts[s].tobytes() for s in monoid.elements]
    rep: dict[bytes, int] = {}
    for s in monoid.elements:
        rep.setdefault(signature[s], s)
    cls = [rep[signature[s]] for s in monoid.elements]

    def compose(x, y):
        return cls[int(m[x, y])]

    gens = [cls[g] for g in language.morphism.letter_images]
    quotient, values, gen_ids, words = generate_monoid(cls[monoid.unit], gens, compose, max_size)
    names = tuple("".join(language.alphabet[g] for g in w) for w in words)
    quotient = FiniteMonoid(quotient.size, quotient.unit, quotient.mult, names)
    accepting = frozenset(e for e, v in enumerate(values) if final[v])
    morphism = Morphism(quotient, language.alphabet, tuple(gen_ids))
    return RecognizedLanguage(morphism, accepting, syntactic_order(quotient, accepting))
