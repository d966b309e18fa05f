"""Regular-language input: regex parsing, the DFA text format, minimization.

Regex grammar (whitespace is ignored)::

    expr   := term ('+' term)*
    term   := factor factor*
    factor := atom '*'*
    atom   := letter | '_' | '#' | '(' expr ')'

``+`` is union, juxtaposition is concatenation, ``_`` the empty word and
``#`` the empty language.  Letters are single characters and must belong to
the alphabet declared by the caller.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from .errors import AutomatonFormatError, InputError, RegexSyntaxError

MAX_ALPHABET = 16
RESERVED = frozenset("+*()_#")

EMPTY = "empty"
EPSILON = "epsilon"
LETTER = "letter"
UNION = "union"
CONCAT = "concat"
STAR = "star"


@dataclass(frozen=True)
class Regex:
    kind: str
    children: tuple[Regex, ...] = ()
    letter: str | None = None

    def __str__(self) -> str:
        if self.kind == EMPTY:
            return "#"
        if self.kind == EPSILON:
            return "_"
        if self.kind == LETTER:
            return self.letter
        if self.kind == STAR:
            inner = str(self.children[0])
            if self.children[0].kind in (UNION, CONCAT):
                inner = f"({inner})"
            return inner + "*"
        if self.kind == UNION:
            return "+".join(str(c) for c in self.children)
        parts = []
        for c in self.children:
            parts.append(f"({c})" if c.kind == UNION else str(c))
        return "".join(parts)


def letter(a: str) -> Regex:
    return Regex(LETTER, letter=a)


def union(*children: Regex) -> Regex:
    return Regex(UNION, tuple(children))


def concat(*children: Regex) -> Regex:
    return Regex(CONCAT, tuple(children))


def star(child: Regex) -> Regex:
    return Regex(STAR, (child,))


def check_alphabet(alphabet) -> tuple[str, ...]:
    letters = tuple(alphabet)
    if not letters:
        raise InputError("alphabet must not be empty")
    if len(letters) > MAX_ALPHABET:
        raise InputError(f"alphabet has {len(letters)} letters, at most {MAX_ALPHABET} allowed")
    if len(set(letters)) != len(letters):
        raise InputError("alphabet contains duplicate letters")
    for a in letters:
        if len(a) != 1 or a in RESERVED or a.isspace():
            raise InputError(f"invalid letter {a!r}")
    return letters


class _Parser:
    def __init__(self, text: str, alphabet: tuple[str, ...]):
        self.tokens = [(i, ch) for i, ch in enumerate(text) if not ch.isspace()]
        self.end = len(text)
        self.pos = 0
        self.alphabet = alphabet

    def peek(self):
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return (self.end, None)

    def parse(self) -> Regex:
        node = self.expr()
        offset, ch = self.peek()
        if ch is not None:
            raise RegexSyntaxError(f"unexpected {ch!r}", offset)
        return node

    def expr(self) -> Regex:
        terms = [self.term()]
        while self.peek()[1] == "+":
            self.pos += 1
            terms.append(self.term())
        return terms[0] if len(terms) == 1 else union(*terms)

    def term(self) -> Regex:
        factors = [self.factor()]
        while self.peek()[1] not in (None, "+", ")", "*"):
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else concat(*factors)

    def factor(self) -> Regex:
        node = self.atom()
        while self.peek()[1] == "*":
            self.pos += 1
            node = star(node)
        return node

    def atom(self) -> Regex:
        offset, ch = self.peek()
        if ch is None:
            raise RegexSyntaxError("unexpected end of input", offset)
        self.pos += 1
        if ch == "(":
            node = self.expr()
            close_offset, close = self.peek()
            if close != ")":
                raise RegexSyntaxError("expected ')'", close_offset)
            self.pos += 1
            return node
        if ch == "_":
            return Regex(EPSILON)
        if ch == "#":
            return Regex(EMPTY)
        if ch in RESERVED:
            raise RegexSyntaxError(f"unexpected {ch!r}", offset)
        if ch not in self.alphabet:
            raise RegexSyntaxError(f"letter {ch!r} not in alphabet", offset)
        return letter(ch)


def parse_regex(text: str, alphabet) -> Regex:
    return _Parser(text, check_alphabet(alphabet)).parse()


@dataclass(frozen=True)
class Dfa:
    """Complete DFA; ``delta[q][i]`` is the successor of ``q`` on ``alphabet[i]``."""

    alphabet: tuple[str, ...]
    n_states: int
    initial: int
    finals: frozenset[int]
    delta: tuple[tuple[int, ...], ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.n_states < 1:
            raise AutomatonFormatError("a DFA needs at least one state")
        if len(self.delta) != self.n_states:
            raise AutomatonFormatError("transition table does not match state count")
        if not 0 <= self.initial < self.n_states:
            raise AutomatonFormatError(f"dangling state id {self.initial}")
        for q in self.finals:
            if not 0 <= q < self.n_states:
                raise AutomatonFormatError(f"dangling state id {q}")
        for row in self.delta:
            if len(row) != len(self.alphabet):
                raise AutomatonFormatError("transition table is not total")
            for r in row:
                if not 0 <= r < self.n_states:
                    raise AutomatonFormatError(f"dangling state id {r}")
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(self.alphabet)})

    def letter_index(self, a: str) -> int:
        try:
            return self._index[a]
        except KeyError:
            raise InputError(f"letter {a!r} not in alphabet") from None

    def run(self, word, state: int | None = None) -> int:
        q = self.initial if state is None else state
        for a in word:
            q = self.delta[q][self.letter_index(a)]
        return q

    def accepts(self, word) -> bool:
        return self.run(word) in self.finals

    def complement(self) -> Dfa:
        return Dfa(
            self.alphabet,
            self.n_states,
            self.initial,
            frozenset(range(self.n_states)) - self.finals,
            self.delta,
        )


def _glushkov(node: Regex, letters: list[str], follow: list[set[int]]):
    """Return (nullable, first, last) and fill positions/follow sets."""
    if node.kind == EMPTY:
        return False, set(), set()
    if node.kind == EPSILON:
        return True, set(), set()
    if node.kind == LETTER:
        letters.append(node.letter)
        follow.append(set())
        p = len(letters) - 1
        return False, {p}, {p}
    if node.kind == UNION:
        nullable, first, last = False, set(), set()
        for child in node.children:
            n, f, l = _glushkov(child, letters, follow)
            nullable |= n
            first |= f
            last |= l
        return nullable, first, last
    if node.kind == CONCAT:
        nullable, first, last = True, set(), set()
        for child in node.children:
            n, f, l = _glushkov(child, letters, follow)
            for p in last:
                follow[p] |= f
            if nullable:
                first = first | f
            last = (last | l) if n else l
            nullable = nullable and n
        return nullable, first, last
    if node.kind == STAR:
        _, f, l = _glushkov(node.children[0], letters, follow)
        for p in l:
            follow[p] |= f
        return True, f, l
    raise ValueError(f"unknown regex node {node.kind!r}")


def regex_to_dfa(ast: Regex, alphabet) -> Dfa:
    """Position automaton followed by subset construction; not minimized."""
    alphabet = check_alphabet(alphabet)
    letters: list[str] = []
    follow: list[set[int]] = []
    nullable, first, last = _glushkov(ast, letters, follow)
    for a in letters:
        if a not in alphabet:
            raise InputError(f"letter {a!r} not in alphabet")

    start = frozenset({-1})
    index = {start: 0}
    order = [start]
    rows: list[list[int]] = []
    queue = deque([start])
    while queue:
        current = queue.popleft()
        row = []
        for a in alphabet:
            succ = set()
            for p in current:
                candidates = first if p == -1 else follow[p]
                succ.update(q for q in candidates if letters[q] == a)
            key = frozenset(succ)
            if key not in index:
                index[key] = len(order)
                order.append(key)
                queue.append(key)
            row.append(index[key])
        rows.append(row)
    finals = frozenset(
        i for i, s in enumerate(order) if (s & last) or (nullable and -1 in s)
    )
    return Dfa(alphabet, len(order), 0, finals, tuple(tuple(r) for r in rows))


def minimize(dfa: Dfa) -> Dfa:
    """Minimal complete DFA, states renumbered in BFS order from the initial state."""
    reachable = [dfa.initial]
    seen = {dfa.initial}
    for q in reachable:
        for r in dfa.delta[q]:
            if r not in seen:
                seen.add(r)
                reachable.append(r)

    block = {q: int(q in dfa.finals) for q in reachable}
    n_blocks = len(set(block.values()))
    while True:
        signatures: dict = {}
        new_block = {}
        for q in reachable:
            sig = (block[q],) + tuple(block[r] for r in dfa.delta[q])
            new_block[q] = signatures.setdefault(sig, len(signatures))
        block = new_block
        if len(signatures) == n_blocks:
            break
        n_blocks = len(signatures)

    rep = {}
    for q in reachable:
        rep.setdefault(block[q], q)
    renumber = {block[dfa.initial]: 0}
    queue = deque([block[dfa.initial]])
    while queue:
        b = queue.popleft()
        for r in dfa.delta[rep[b]]:
            if block[r] not in renumber:
                renumber[block[r]] = len(renumber)
                queue.append(block[r])
    delta = [None] * len(renumber)
    finals = set()
    for b, new in renumber.items():
        q = rep[b]
        delta[new] = tuple(renumber[block[r]] for r in dfa.delta[q])
        if q in dfa.finals:
            finals.add(new)
    return Dfa(dfa.alphabet, len(renumber), 0, frozenset(finals), tuple(delta))


def regex_to_min_dfa(ast: Regex, alphabet) -> Dfa:
    return minimize(regex_to_dfa(ast, alphabet))


def compile_regex(text: str, alphabet) -> Dfa:
    return regex_to_min_dfa(parse_regex(text, alphabet), alphabet)


def parse_automaton(text: str) -> Dfa:
    """Read the line-oriented DFA format; partial machines get a sink state."""
    sections: dict[str, list[tuple[int, str]]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        key = key.strip().lower()
        if not sep or key not in ("alphabet", "states", "initial", "final", "trans"):
            raise AutomatonFormatError(f"line {lineno}: unrecognized line {raw.strip()!r}")
        sections.setdefault(key, []).append((lineno, value.strip()))

    for key in ("alphabet", "states", "initial"):
        if key not in sections:
            raise AutomatonFormatError(f"missing section {key!r}")
        if len(sections[key]) > 1:
            raise AutomatonFormatError(f"section {key!r} given more than once")

    try:
        alphabet = check_alphabet(sections["alphabet"][0][1].split())
    except InputError as exc:
        raise AutomatonFormatError(str(exc)) from None

    def state_id(token: str, lineno: int) -> int:
        try:
            q = int(token)
        except ValueError:
            raise AutomatonFormatError(f"line {lineno}: bad state id {token!r}") from None
        if not 0 <= q < n_states:
            raise AutomatonFormatError(f"line {lineno}: dangling state id {q}")
        return q

    lineno, value = sections["states"][0]
    try:
        n_states = int(value)
    except ValueError:
        raise AutomatonFormatError(f"line {lineno}: bad state count {value!r}") from None
    if n_states < 1:
        raise AutomatonFormatError(f"line {lineno}: need at least one state")
    lineno, value = sections["initial"][0]
    initial = state_id(value, lineno)

    finals = set()
    for lineno, value in sections.get("final", []):
        finals.update(state_id(tok, lineno) for tok in value.split())

    table: dict[tuple[int, int], int] = {}
    for lineno, value in sections.get("trans", []):
        parts = value.split()
        if len(parts) != 3:
            raise AutomatonFormatError(f"line {lineno}: expected 'trans: SRC LETTER DST'")
        src = state_id(parts[0], lineno)
        if parts[1] not in alphabet:
            raise AutomatonFormatError(f"line {lineno}: letter {parts[1]!r} not in alphabet")
        dst = state_id(parts[2], lineno)
        key = (src, alphabet.index(parts[1]))
        if key in table:
            raise AutomatonFormatError(
                f"line {lineno}: duplicate transition from {src} on {parts[1]!r}"
            )
        table[key] = dst

    sink = n_states
    complete = len(table) == n_states * len(alphabet)
    total = n_states if complete else n_states + 1
    delta = tuple(
        tuple(table.get((q, i), sink) for i in range(len(alphabet))) for q in range(total)
    )
    return Dfa(alphabet, total, initial, frozenset(finals), delta)


def format_automaton(dfa: Dfa) -> str:
    lines = [
        f"alphabet: {' '.join(dfa.alphabet)}",
        f"states: {dfa.n_states}",
        f"initial: {dfa.initial}",
        f"final: {' '.join(str(q) for q in sorted(dfa.finals))}",
    ]
    for q, row in enumerate(dfa.delta):
        for a, r in zip(dfa.alphabet, row):
            lines.append(f"trans: {q} {a} {r}")
    return "\n".join(lines) + "\n"


def words(alphabet, max_len: int):
    """All words of length <= max_len in length-lexicographic order."""
    for n in range(max_len + 1):
        for w in itertools.product(alphabet, repeat=n):
            yield "".join(w)
