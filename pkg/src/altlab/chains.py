"""Saturation of compatible chain sets at level 2 of the alternation hierarchy.

A chain of length n over a monoid M is a tuple of n elements.  Internally a
chain is encoded as the integer ``sum(s_j * |M|**(n-1-j))`` and a chain set
as a ``frozenset`` of such integers.  The saturated family for each
sub-alphabet B (a bitmask over the alphabet) is kept as the antichain of its
inclusion-maximal compatible sets; the represented family is the downset.

The two saturation rules, applied until nothing new appears:

* product:   S in f[C], T in f[D], C | D == B  =>  S.T in f[B]
* operation: T in f[B]  =>  T^w . (1, Cs_{n-1}[B]) . T^w in f[B]

where T^w is the idempotent power of T in the monoid of chain sets and
Cs_{n-1}[B] is the set of length n-1 chains already computed for B.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .algebra import ContentMorphism, FiniteMonoid, Morphism, mask_letters, subalphabets
from .errors import InputError, ResourceCapExceeded

log = logging.getLogger(__name__)

DEFAULT_MAX_LENGTH = 3
DEFAULT_MAX_SETS = 20000
DEFAULT_TIMEOUT = 300.0
# 2**(2**24) has 16M bits; beyond that the rank bound is only reported symbolically
_EXACT_BOUND_LIMIT = 24
# beyond this the decimal expansion runs to thousands of digits
_EXACT_TEXT_LIMIT = 12

ChainSet = frozenset


class ChainSpace:
    """Encoding of chains of a fixed length over a fixed monoid."""

    _CHUNK = 1 << 21

    def __init__(self, monoid: FiniteMonoid, n: int):
        if n < 1:
            raise InputError("chain length must be at least 1")
        self.monoid = monoid
        self.n = n
        self.size = monoid.size
        self.weights = np.array([self.size ** (n - 1 - j) for j in range(n)], dtype=np.int64)
        self._arrays: dict[frozenset, np.ndarray] = {}

    def encode(self, chain: Iterable[int]) -> int:
        chain = tuple(chain)
        if len(chain) != self.n:
            raise InputError(f"chain {chain} does not have length {self.n}")
        code = 0
        for s in chain:
            if not 0 <= s < self.size:
                raise InputError(f"element {s} is not in the monoid")
            code = code * self.size + s
        return code

    def decode(self, code: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.n):
            code, s = divmod(code, self.size)
            out.append(s)
        return tuple(reversed(out))

    def constant(self, s: int) -> int:
        return self.encode((s,) * self.n)

    def coords(self, chains: frozenset) -> np.ndarray:
        array = self._arrays.get(chains)
        if array is None:
            codes = np.fromiter(chains, dtype=np.int64, count=len(chains))
            array = (codes[:, None] // self.weights[None, :]) % self.size
            if len(self._arrays) > 50000:
                self._arrays.clear()
            self._arrays[chains] = array
        return array

    def product(self, left: frozenset, right: frozenset) -> frozenset:
        a, b = self.coords(left), self.coords(right)
        mult = self.monoid.mult
        out: set[int] = set()
        step = max(1, self._CHUNK // max(1, len(a) * self.n))
        for start in range(0, len(b), step):
            block = b[start : start + step]
            prod = mult[a[:, None, :], block[None, :, :]]
            out.update(np.unique(prod.reshape(-1, self.n) @ self.weights).tolist())
        return frozenset(out)

    def mul(self, x: int, y: int) -> int:
        """Componentwise product of two encoded chains."""
        mult = self.monoid.mult
        out = 0
        for s, t in zip(self.decode(x), self.decode(y)):
            out = out * self.size + int(mult[s, t])
        return out

    def power(self, chains: frozenset, k: int) -> frozenset:
        result = chains
        for _ in range(k - 1):
            result = self.product(result, chains)
        return result

    def idempotent_power(self, chains: frozenset) -> tuple[frozenset, int]:
        """Return (T^e, e) with e the least exponent making T^e idempotent."""
        power, e = chains, 1
        while True:
            square = self.product(power, power)
            if square == power:
                return power, e
            power = self.product(power, chains)
            e += 1

    def prefix(self, s: int, lower: Iterable[int]) -> frozenset:
        """(s, S): prepend s to every chain of length n-1 in ``lower``."""
        offset = s * self.size ** (self.n - 1)
        return frozenset(offset + c for c in lower)

    def erase(self, code: int, position: int) -> int:
        chain = self.decode(code)
        out = 0
        for j, s in enumerate(chain):
            if j != position:
                out = out * self.size + s
        return out


@dataclass(eq=False)
class Derivation:
    """How a chain set was produced.

    ``initial``: the constant singleton {(s,...,s)} with witness ``word``.
    ``product``: ``left . right``.
    ``operation``: ``context^exponent . (1, Cs_{n-1}[B]) . context^exponent``.
    """

    kind: str
    chains: frozenset
    alphabet: int
    element: int | None = None
    word: str | None = None
    left: Derivation | None = None
    right: Derivation | None = None
    context: Derivation | None = None
    exponent: int | None = None
    lower: ChainFamily | None = field(default=None, repr=False)

    def depth(self) -> int:
        kids = [d for d in (self.left, self.right, self.context) if d is not None]
        return 1 + max((k.depth() for k in kids), default=0)

    def replay(self, space: ChainSpace) -> frozenset:
        """Recompute this node's set from its children (one level)."""
        if self.kind == "initial":
            return frozenset({space.constant(self.element)})
        if self.kind == "product":
            return space.product(self.left.chains, self.right.chains)
        idem, _ = space.idempotent_power(self.context.chains)
        inner = space.prefix(space.monoid.unit, self.lower.chain_codes(self.alphabet))
        return space.product(space.product(idem, inner), idem)


@dataclass(eq=False)
class ChainFamily:
    """Saturated compatible chain sets of one length, indexed by sub-alphabet."""

    beta: ContentMorphism
    n: int
    maximal: dict[int, list[frozenset]]
    derivations: dict[int, dict[frozenset, Derivation]]
    lower: ChainFamily | None = None
    iterations: int = 0
    level: int = 2
    history: dict[int, list[Derivation]] = field(default_factory=dict, repr=False)
    space: ChainSpace | None = None

    def __post_init__(self):
        if self.space is None:
            self.space = ChainSpace(self.beta.monoid, self.n)
        self._unions: dict[int, frozenset] = {}

    @property
    def monoid(self) -> FiniteMonoid:
        return self.beta.monoid

    @property
    def alphabet(self) -> tuple[str, ...]:
        return self.beta.alphabet

    def alphabets(self) -> list[int]:
        return sorted(self.maximal, key=lambda b: (bin(b).count("1"), b))

    def chain_codes(self, mask: int) -> frozenset:
        """Union view: the encoded chains of Cs_{2,n}[alpha, B]."""
        if mask not in self._unions:
            self._unions[mask] = frozenset().union(*self.maximal.get(mask, []))
        return self._unions[mask]

    def chain_set(self, mask: int | None = None) -> frozenset[tuple[int, ...]]:
        masks = self.alphabets() if mask is None else [mask]
        codes = frozenset().union(*(self.chain_codes(b) for b in masks))
        return frozenset(self.space.decode(c) for c in codes)

    def maximal_sets(self, mask: int) -> list[frozenset[tuple[int, ...]]]:
        return [frozenset(self.space.decode(c) for c in s) for s in self.maximal.get(mask, [])]

    def set_count(self) -> int:
        return sum(len(v) for v in self.maximal.values())

    def in_downset(self, chains: Iterable[tuple[int, ...]], mask: int) -> bool:
        codes = frozenset(self.space.encode(c) for c in chains)
        return any(codes <= s for s in self.maximal.get(mask, []))

    def find(self, chain: tuple[int, ...], mask: int | None = None) -> tuple[int, frozenset] | None:
        """First (B, maximal set) containing ``chain``, in sub-alphabet order."""
        code = self.space.encode(chain)
        masks = self.alphabets() if mask is None else [mask]
        for b in masks:
            for s in self.maximal.get(b, []):
                if code in s:
                    return b, s
        return None

    def derivation(self, chain: tuple[int, ...], mask: int | None = None) -> Derivation | None:
        """Earliest recorded derivation whose set contains ``chain``.

        Earlier derivations are shallower, which keeps witness words short.
        """
        code = self.space.encode(chain)
        masks = self.alphabets() if mask is None else [mask]
        for b in masks:
            for d in self.history.get(b) or self.derivations.get(b, {}).values():
                if code in d.chains:
                    return d
        return None

    def rank_bound(self) -> int | None:
        """The rank bound l(n) = 3|M| 2^|A| n 2^(2^(2|M|^n)), or None if too large to build."""
        return rank_bound(self.monoid.size, len(self.alphabet), self.n)

    def rank_bound_text(self) -> str:
        return rank_bound_text(self.monoid.size, len(self.alphabet), self.n)

    def to_dict(self) -> dict:
        per_alphabet = {}
        for b in self.alphabets():
            sets = [sorted(self.space.decode(c) for c in s) for s in self.maximal[b]]
            per_alphabet[mask_letters(self.alphabet, b) or "_"] = [
                [list(c) for c in chains] for chains in sorted(sets)
            ]
        return {
            "metadata": {
                "n": self.n,
                "level": self.level,
                "monoid_size": self.monoid.size,
                "iterations": self.iterations,
                "maximal_sets": self.set_count(),
                "rank_bound": self.rank_bound_text(),
            },
            "sets": per_alphabet,
        }


def rank_bound(monoid_size: int, alphabet_size: int, n: int) -> int | None:
    exponent = 2 * monoid_size**n
    if exponent > _EXACT_BOUND_LIMIT:
        return None
    return 3 * monoid_size * 2**alphabet_size * n * 2 ** (2**exponent)


def rank_bound_text(monoid_size: int, alphabet_size: int, n: int) -> str:
    factor = 3 * monoid_size * 2**alphabet_size * n
    if 2 * monoid_size**n <= _EXACT_TEXT_LIMIT:
        return str(rank_bound(monoid_size, alphabet_size, n))
    return f"{factor}*2^(2^{2 * monoid_size**n})"


class _Antichain:
    """Inclusion-maximal sets for one sub-alphabet, each stamped on insertion."""

    def __init__(self):
        self.stamps: dict[frozenset, int] = {}

    def __len__(self):
        return len(self.stamps)

    def __iter__(self) -> Iterator[tuple[frozenset, int]]:
        return iter(list(self.stamps.items()))

    def add(self, chains: frozenset, stamp: int) -> bool:
        for other in self.stamps:
            if chains <= other:
                return False
        for other in [o for o in self.stamps if o < chains]:
            del self.stamps[other]
        self.stamps[chains] = stamp
        return True


def _covers(masks: list[int], target: int) -> list[tuple[int, int]]:
    return [(c, d) for c in masks for d in masks if c | d == target]


def _sort_sets(sets: Iterable[frozenset]) -> list[frozenset]:
    return sorted(sets, key=lambda s: (-len(s), sorted(s)))


def initial_family(beta: ContentMorphism | Morphism, n: int) -> dict[int, list[frozenset]]:
    """B -> the constant singletons {(s,...,s)} for s an image of a word of content B."""
    if isinstance(beta, Morphism):
        beta = beta.content
    space = ChainSpace(beta.monoid, n)
    return {
        b: [frozenset({space.constant(s)}) for s in sorted(beta.image_with_content(b))]
        for b in subalphabets(beta.alphabet)
    }


def _initial_derivations(
    beta: ContentMorphism, space: ChainSpace
) -> dict[int, dict[frozenset, Derivation]]:
    out = {}
    for b in subalphabets(beta.alphabet):
        out[b] = {}
        for s in sorted(beta.image_with_content(b)):
            chains = frozenset({space.constant(s)})
            out[b][chains] = Derivation("initial", chains, b, element=s, word=beta.witness(s, b))
    return out


def sat_step(
    f: dict[int, list[frozenset]], n: int, lower: ChainFamily | None, monoid: FiniteMonoid
) -> dict[int, list[frozenset]]:
    """One synchronous application of the saturation operator, reduced to maximal sets."""
    space = ChainSpace(monoid, n)
    masks = sorted(f)
    out = {}
    for b in masks:
        candidates = list(f[b])
        if n >= 2:
            for c, d in _covers(masks, b):
                for left in f[c]:
                    for right in f[d]:
                        candidates.append(space.product(left, right))
            inner = space.prefix(monoid.unit, lower.chain_codes(b))
            for t in f[b]:
                idem, _ = space.idempotent_power(t)
                candidates.append(space.product(space.product(idem, inner), idem))
        antichain = _Antichain()
        for chains in candidates:
            antichain.add(chains, 0)
        out[b] = _sort_sets(antichain.stamps)
    return out


def _saturate_length(
    beta: ContentMorphism,
    n: int,
    lower: ChainFamily | None,
    schedule: str,
    max_sets: int,
    deadline: float,
) -> ChainFamily:
    space = ChainSpace(beta.monoid, n)
    masks = subalphabets(beta.alphabet)
    if schedule == "descending":
        masks = list(reversed(masks))
    elif schedule != "ascending":
        raise InputError(f"unknown schedule {schedule!r}")

    derivations = _initial_derivations(beta, space)
    history = {b: list(derivations[b].values()) for b in masks}
    current = {b: _Antichain() for b in masks}
    stamp = 0
    for b in masks:
        for chains in derivations[b]:
            stamp += 1
            current[b].add(chains, stamp)

    iterations = 0
    if n >= 2:
        covers = {b: _covers(masks, b) for b in masks}
        inner = {b: space.prefix(beta.monoid.unit, lower.chain_codes(b)) for b in masks}
        done_products: dict[tuple[int, int, int], int] = {}
        done_ops: dict[int, int] = {}
        changed = True
        while changed:
            changed = False
            for b in masks:
                found: list[Derivation] = []
                for c, d in covers[b]:
                    seen = done_products.get((b, c, d), 0)
                    done_products[(b, c, d)] = stamp
                    for left, ls in current[c]:
                        for right, rs in current[d]:
                            if max(ls, rs) <= seen:
                                continue
                            chains = space.product(left, right)
                            found.append(
                                Derivation(
                                    "product", chains, b,
                                    left=derivations[c][left], right=derivations[d][right],
                                )
                            )
                seen = done_ops.get(b, 0)
                done_ops[b] = stamp
                for t, ts in current[b]:
                    if ts <= seen:
                        continue
                    idem, e = space.idempotent_power(t)
                    chains = space.product(space.product(idem, inner[b]), idem)
                    found.append(
                        Derivation(
                            "operation", chains, b,
                            context=derivations[b][t], exponent=e, lower=lower,
                        )
                    )
                for d in found:
                    if current[b].add(d.chains, stamp + 1):
                        stamp += 1
                        derivations[b].setdefault(d.chains, d)
                        history[b].append(d)
                        changed = True
                total = sum(len(a) for a in current.values())
                if total > max_sets:
                    raise ResourceCapExceeded(
                        f"more than {max_sets} maximal chain sets at length {n} (raise --max-sets)"
                    )
                if time.monotonic() > deadline:
                    raise ResourceCapExceeded(
                        f"saturation at length {n} exceeded the time budget (raise --timeout-secs)"
                    )
            if changed:
                iterations += 1
                log.debug("length %d pass %d: %d maximal sets", n, iterations,
                          sum(len(a) for a in current.values()))

    maximal = {b: _sort_sets(current[b].stamps) for b in sorted(masks)}
    kept = {b: {s: derivations[b][s] for s in maximal[b]} for b in maximal}
    return ChainFamily(
        beta, n, maximal, kept, lower=lower, iterations=iterations,
        history={b: history[b] for b in sorted(masks)}, space=space,
    )


def saturate(
    beta: ContentMorphism | Morphism,
    n: int,
    *,
    max_length: int = DEFAULT_MAX_LENGTH,
    max_sets: int = DEFAULT_MAX_SETS,
    timeout: float = DEFAULT_TIMEOUT,
    schedule: str = "ascending",
) -> ChainFamily:
    """Saturate lengths 1..n and return the length-n family (with its ``lower`` chain)."""
    if isinstance(beta, Morphism):
        beta = beta.content
    if n < 1:
        raise InputError("chain length must be at least 1")
    if n > max_length:
        raise InputError(f"chain length {n} exceeds the configured maximum {max_length}")
    deadline = time.monotonic() + timeout
    family = None
    for length in range(1, n + 1):
        family = _saturate_length(beta, length, family, schedule, max_sets, deadline)
    return family


def chain_member(family: ChainFamily, chain: Iterable[int], mask: int | None = None) -> bool:
    chain = tuple(chain)
    if len(chain) != family.n:
        raise InputError(f"chain {chain} does not have length {family.n}")
    return family.find(chain, mask) is not None


def level1_chains(beta: ContentMorphism | Morphism) -> frozenset[tuple[int, int]]:
    """Length-2 level-1 chains: the pairs (alpha(v), alpha(w)) with v a subword of w.

    Built as the pairs reachable from (1, 1) by appending a letter to both
    words or to the longer word only.
    """
    morphism = beta.morphism if isinstance(beta, ContentMorphism) else beta
    mult = morphism.monoid.mult
    unit = morphism.monoid.unit
    start = (unit, unit)
    seen = {start}
    stack = [start]
    while stack:
        t, s = stack.pop()
        for g in morphism.letter_images:
            for nxt in ((int(mult[t, g]), int(mult[s, g])), (t, int(mult[s, g]))):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
    return frozenset(seen)
