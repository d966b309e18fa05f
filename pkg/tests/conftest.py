from __future__ import annotations

import random

import pytest

from altlab.algebra import syntactic_morphism
from altlab.frontend import Dfa, compile_regex

CONTAINS_A = "(a+b)*a(a+b)*"


def lang(regex: str, alphabet: str = "ab"):
    return syntactic_morphism(compile_regex(regex, alphabet))


def random_dfa(rng: random.Random, max_states: int = 3, alphabet=("a", "b")) -> Dfa:
    n = rng.randint(1, max_states)
    delta = tuple(tuple(rng.randrange(n) for _ in alphabet) for _ in range(n))
    finals = frozenset(q for q in range(n) if rng.random() < 0.5)
    return Dfa(tuple(alphabet), n, 0, finals, delta)


def random_corpus(count: int = 200, seed: int = 2024, max_states: int = 3):
    rng = random.Random(seed)
    return [syntactic_morphism(random_dfa(rng, max_states)) for _ in range(count)]


@pytest.fixture(scope="session")
def contains_a():
    return lang(CONTAINS_A)


@pytest.fixture(scope="session")
def b_star():
    return lang("b*")


@pytest.fixture(scope="session")
def parity():
    return lang("a(aa)*", "a")


@pytest.fixture(scope="session")
def corpus():
    return random_corpus()
