"""Small-scale ground truth: Ehrenfeucht-Fraisse games and explicit witnesses.

``ef_leq(w, w2, level, k)`` decides whether every Sigma_level sentence of
quantifier rank k true in ``w`` is true in ``w2``, by playing the game with
an alternation counter: Spoiler plays in the active word and may switch to
the other word at most ``level - 1`` times.

Once a pebble pair splits both words, the remaining rounds are independent
games on the two left parts and on the two right parts, sharing the active
word and counter reached so far.  The solver searches over those interval
pairs rather than raw pebble tuples.
"""

from __future__ import annotations

import itertools
from bisect import bisect_left
from dataclasses import dataclass, field
from functools import lru_cache

from .algebra import ContentMorphism, Morphism, mask_letters
from .chains import ChainFamily, ChainSpace, Derivation
from .errors import InputError, ResourceCapExceeded

DEFAULT_GAME_BUDGET = 10**6
DEFAULT_WORD_BUDGET = 20000


@dataclass(frozen=True)
class GameConfig:
    level: int
    rounds: int

    def __post_init__(self):
        if self.level < 1 or self.rounds < 0:
            raise InputError("game level must be >= 1 and rounds >= 0")


class _Game:
    def __init__(self, w: str, w2: str, level: int):
        self.words = (w, w2)
        self.level = level
        letters = sorted(set(w) | set(w2))
        self.positions = []
        self.counts = []
        for word in self.words:
            pos = {a: [] for a in letters}
            running = [0] * len(letters)
            counts = [tuple(running)]
            for x, a in enumerate(word):
                pos[a].append(x)
                running[letters.index(a)] += 1
                counts.append(tuple(running))
            self.positions.append(pos)
            self.counts.append(counts)
        self.memo: dict = {}

    def letters(self, side: int, lo: int, hi: int) -> int:
        a, b = self.counts[side][lo], self.counts[side][hi]
        mask = 0
        for i, (x, y) in enumerate(zip(a, b)):
            if y > x:
                mask |= 1 << i
        return mask

    def wins(self, segs: tuple[tuple[int, int], tuple[int, int]], active: int, c: int, r: int) -> bool:
        """Duplicator survives r rounds on the interval pair ``segs``."""
        if r == 0:
            return True
        may_switch = c < self.level - 1
        if r == 1:
            ma = self.letters(active, *segs[active])
            mo = self.letters(1 - active, *segs[1 - active])
            return ma & ~mo == 0 and (not may_switch or mo & ~ma == 0)
        key = (segs, active, c, r)
        if key in self.memo:
            return self.memo[key]
        result = True
        sides = (active, 1 - active) if may_switch else (active,)
        for side in sides:
            nc = c if side == active else c + 1
            (xlo, xhi), (ylo, yhi) = segs[side], segs[1 - side]
            word = self.words[side]
            for x in range(xlo, xhi):
                if not self._answer(segs, side, nc, r, x, word[x], (xlo, xhi), (ylo, yhi)):
                    result = False
                    break
            if not result:
                break
        self.memo[key] = result
        return result

    def _answer(self, segs, side, nc, r, x, letter, xs, ys) -> bool:
        pos = self.positions[1 - side].get(letter, [])
        ylo, yhi = ys
        candidates = pos[bisect_left(pos, ylo) : bisect_left(pos, yhi)]
        if not candidates:
            return False
        # try answers at the proportionally matching spot first
        span = max(1, xs[1] - xs[0])
        target = ylo + (x - xs[0]) * (yhi - ylo) / span
        candidates.sort(key=lambda y: abs(y - target))
        for y in candidates:
            if side == 0:
                left = ((xs[0], x), (ylo, y))
                right = ((x + 1, xs[1]), (y + 1, yhi))
            else:
                left = ((ylo, y), (xs[0], x))
                right = ((y + 1, yhi), (x + 1, xs[1]))
            if self.wins(left, side, nc, r - 1) and self.wins(right, side, nc, r - 1):
                return True
        return False


def ef_leq(
    w: str,
    w2: str,
    cfg: GameConfig | None = None,
    *,
    level: int | None = None,
    rounds: int | None = None,
    budget: int = DEFAULT_GAME_BUDGET,
) -> bool:
    """Duplicator wins the ``rounds``-round level game on (w, w2), w active first."""
    if cfg is None:
        cfg = GameConfig(level, rounds)
    if len(w) * len(w2) > budget:
        raise ResourceCapExceeded(
            f"game on words of lengths {len(w)} and {len(w2)} exceeds the budget {budget}"
        )
    if w == w2:
        return True
    game = _Game(w, w2, cfg.level)
    return game.wins(((0, len(w)), (0, len(w2))), 0, 0, cfg.rounds)


@lru_cache(maxsize=200000)
def sigma1_leq(w: str, w2: str, k: int) -> bool:
    """Rank-k existential preorder: Spoiler only ever pebbles ``w``.

    Duplicator must answer each position of ``w`` by an equally labelled
    position of ``w2`` whose left and right parts again satisfy the relation
    at rank k-1.
    """
    if k == 0 or not w:
        return True
    if k == 1:
        return set(w) <= set(w2)
    for x, a in enumerate(w):
        if not any(
            b == a and sigma1_leq(w[:x], w2[:y], k - 1) and sigma1_leq(w[x + 1 :], w2[y + 1 :], k - 1)
            for y, b in enumerate(w2)
        ):
            return False
    return True


def subword_leq(w: str, w2: str, k: int) -> bool:
    """Every scattered subword of ``w`` of length <= k is one of ``w2``.

    This is the prenex-only rank convention; it is coarser than
    :func:`sigma1_leq` from rank 2 on (``bab`` vs ``abba``).
    """
    def embeds(u: str, v: str) -> bool:
        it = iter(v)
        return all(a in it for a in u)

    for n in range(1, min(k, len(w)) + 1):
        for idx in itertools.combinations(range(len(w)), n):
            if not embeds("".join(w[i] for i in idx), w2):
                return False
    return True


@dataclass(frozen=True)
class BruteChains:
    chains: frozenset[tuple[int, ...]]
    by_alphabet: dict[int, frozenset[tuple[int, ...]]]
    level: int
    rank: int
    n: int
    max_len: int
    notes: tuple[str, ...] = (
        "under-approximates rank-k chains: only witness words up to max_len are tried",
        "over-approximates the rank-independent chains: a single finite rank is tested",
    )


@lru_cache(maxsize=32)
def _relation(alphabet: tuple[str, ...], level: int, k: int, max_len: int):
    words = ["".join(p) for n in range(max_len + 1) for p in itertools.product(alphabet, repeat=n)]
    content = [frozenset(w) for w in words]
    succ: list[list[int]] = [[] for _ in words]
    for x, w in enumerate(words):
        for y, w2 in enumerate(words):
            if level >= 2 and k >= 1 and content[x] != content[y]:
                continue
            if level == 1 and k >= 1 and not content[x] <= content[y]:
                continue
            if ef_leq(w, w2, level=level, rounds=k):
                succ[x].append(y)
    return words, succ


def brute_chains(
    beta: ContentMorphism | Morphism, level: int, k: int, n: int, max_len: int
) -> BruteChains:
    """Chains (alpha(w_1), ..., alpha(w_n)) with w_1 <= ... <= w_n, |w_j| <= max_len."""
    morphism = beta.morphism if isinstance(beta, ContentMorphism) else beta
    if n < 1:
        raise InputError("chain length must be at least 1")
    if k > 3 or max_len > 10:
        raise ResourceCapExceeded("brute-force chains are limited to rank <= 3 and words <= 10")
    words, succ = _relation(morphism.alphabet, level, k, max_len)
    images = [morphism.image(w) for w in words]
    masks = [morphism.content_mask(w) for w in words]

    # paths of length n in the relation graph, tracked as (last word, image tuple)
    frontier = {(x, (images[x],)) for x in range(len(words))}
    for _ in range(n - 1):
        frontier = {(y, chain + (images[y],)) for x, chain in frontier for y in succ[x]}
    by_alphabet: dict[int, set] = {}
    for x, chain in frontier:
        # for level >= 2 every word of the path has this content
        by_alphabet.setdefault(masks[x], set()).add(chain)
    frozen = {b: frozenset(v) for b, v in by_alphabet.items()}
    return BruteChains(frozenset().union(*frozen.values()), frozen, level, k, n, max_len)


@dataclass
class WitnessBundle:
    chain: tuple[int, ...]
    rank: int
    words: tuple[str, ...]
    alphabet: int
    level: int = 2
    notes: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class BundleCheck:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


class _Builder:
    def __init__(self, space: ChainSpace, rank: int, max_word: int):
        self.space = space
        self.rank = rank
        self.max_word = max_word
        self.notes: list[str] = []
        self._cache: dict = {}

    def check_length(self, words):
        longest = max(len(w) for w in words)
        if longest > self.max_word:
            raise ResourceCapExceeded(
                f"witness words exceed {self.max_word} letters at rank {self.rank}"
            )

    def realize(self, d: Derivation, code: int) -> tuple[str, ...]:
        key = (id(d), code)
        if key in self._cache:
            return self._cache[key]
        space = self.space
        if code not in d.chains:
            raise InputError(f"chain {space.decode(code)} is not derived by this node")
        if d.kind == "initial":
            words = (d.word,) * space.n
        elif d.kind == "product":
            words = None
            for left in sorted(d.left.chains):
                for right in sorted(d.right.chains):
                    if space.mul(left, right) == code:
                        lw, rw = self.realize(d.left, left), self.realize(d.right, right)
                        words = tuple(a + b for a, b in zip(lw, rw))
                        break
                if words is not None:
                    break
        else:
            words = self._operation(d, code)
        self.check_length(words)
        self._cache[key] = words
        return words

    def _operation(self, d: Derivation, code: int) -> tuple[str, ...]:
        space = self.space
        context = d.context.chains
        idem, e = space.idempotent_power(context)
        h = e * 4**self.rank
        lower = d.lower
        inner_codes = sorted(lower.chain_codes(d.alphabet))
        found = None
        unit_offset = space.monoid.unit * space.size ** (space.n - 1)
        for left in sorted(idem):
            for inner in inner_codes:
                prefix = space.mul(left, unit_offset + inner)
                for right in sorted(idem):
                    if space.mul(prefix, right) == code:
                        found = left, inner, right
                        break
                if found:
                    break
            if found:
                break
        if found is None:
            raise InputError(f"chain {space.decode(code)} is not derived by this node")
        left, inner, right = found
        left_words = self._power_words(d.context, left, h)
        right_words = self._power_words(d.context, right, h)
        inner_chain = lower.space.decode(inner)
        inner_node = lower.derivation(inner_chain, d.alphabet)
        inner_words = _Builder(lower.space, self.rank, self.max_word)
        inner_words._cache = self._cache
        v = inner_words.realize(inner_node, inner)
        self.notes.extend(inner_words.notes)
        if len(context) > 1:
            self.notes.append(
                f"operation context with {len(context)} chains: first factorization used"
            )
        return (left_words[0] + right_words[0],) + tuple(
            left_words[j] + v[j - 1] + right_words[j] for j in range(1, space.n)
        )

    def _power_words(self, node: Derivation, code: int, h: int) -> tuple[str, ...]:
        """Words for ``code`` written as a product of h chains of ``node``'s set."""
        space = self.space
        members = sorted(node.chains)
        unit = space.constant(space.monoid.unit)
        layers = [{unit: None}]
        for _ in range(h):
            layer = {}
            for prev in sorted(layers[-1]):
                for t in members:
                    layer.setdefault(space.mul(prev, t), (prev, t))
            layers.append(layer)
        if code not in layers[-1]:
            raise InputError(f"chain {space.decode(code)} is not a product of {h} factors")
        factors = []
        current = code
        for j in range(h, 0, -1):
            prev, t = layers[j][current]
            factors.append(t)
            current = prev
        factors.reverse()
        parts = [self.realize(node, t) for t in factors]
        words = tuple("".join(p[j] for p in parts) for j in range(space.n))
        self.check_length(words)
        return words


def witness_from_derivation(
    d: Derivation,
    chain: tuple[int, ...],
    k: int,
    *,
    space: ChainSpace | None = None,
    max_word: int = DEFAULT_WORD_BUDGET,
) -> WitnessBundle:
    """Words w_1 <= ... <= w_n at rank k realizing ``chain`` through derivation ``d``.

    Initial nodes repeat their witness word, product nodes concatenate, and
    operation nodes use u^(2h) against w'_j v_j w''_j with h = e * 4^k, where
    e is the idempotent exponent of the context set and u its common first word.
    """
    if k < 0:
        raise InputError("rank must be non-negative")
    if space is None:
        space = _space_of(d, len(chain))
    builder = _Builder(space, k, max_word)
    words = builder.realize(d, space.encode(chain))
    return WitnessBundle(tuple(chain), k, words, d.alphabet, notes=sorted(set(builder.notes)))


def _space_of(d: Derivation, n: int) -> ChainSpace:
    node = d
    while node is not None:
        if node.lower is not None:
            return ChainSpace(node.lower.monoid, n)
        node = node.left or node.context
    raise InputError("cannot infer the monoid of a derivation without operation nodes; pass space=")


def bundle_for_chain(family: ChainFamily, chain: tuple[int, ...], k: int, mask: int | None = None,
                     max_word: int = DEFAULT_WORD_BUDGET) -> WitnessBundle:
    d = family.derivation(tuple(chain), mask)
    if d is None:
        raise InputError(f"chain {tuple(chain)} is not in the saturated family")
    return witness_from_derivation(d, tuple(chain), k, space=family.space, max_word=max_word)


def verify_bundle(
    bundle: WitnessBundle, beta: ContentMorphism | Morphism, budget: int = DEFAULT_GAME_BUDGET
) -> BundleCheck:
    morphism = beta.morphism if isinstance(beta, ContentMorphism) else beta
    if len(bundle.words) != len(bundle.chain):
        return BundleCheck(False, "word count differs from chain length")
    for j, (w, s) in enumerate(zip(bundle.words, bundle.chain)):
        if morphism.image(w) != s:
            return BundleCheck(False, f"image mismatch at j={j}")
        if morphism.content_mask(w) != bundle.alphabet:
            want = mask_letters(morphism.alphabet, bundle.alphabet)
            return BundleCheck(False, f"content mismatch at j={j}: expected {want!r}")
    for j in range(len(bundle.words) - 1):
        if not ef_leq(bundle.words[j], bundle.words[j + 1], level=bundle.level,
                      rounds=bundle.rank, budget=budget):
            return BundleCheck(False, f"ef_leq failed at j={j + 1}")
    return BundleCheck(True)
