from __future__ import annotations

import itertools

import pytest

from altlab.algebra import image_with_content, letters_mask, subalphabets
from altlab.chains import (
    ChainSpace,
    chain_member,
    initial_family,
    level1_chains,
    rank_bound,
    rank_bound_text,
    sat_step,
    saturate,
)
from altlab.errors import InputError, ResourceCapExceeded

from conftest import lang


def decoded(space, sets):
    return [frozenset(space.decode(c) for c in s) for s in sets]


@pytest.fixture(scope="module")
def ca_family2(contains_a):
    return saturate(contains_a.morphism, 2)


def test_initial_family_examples(contains_a):
    alphabet = contains_a.alphabet
    z = contains_a.morphism.image("a")
    one = contains_a.monoid.unit
    space = ChainSpace(contains_a.monoid, 2)
    f = initial_family(contains_a.morphism, 2)
    assert decoded(space, f[letters_mask(alphabet, "b")]) == [{(one, one)}]
    assert decoded(space, f[0]) == [{(one, one)}]
    assert decoded(space, f[letters_mask(alphabet, "ab")]) == [{(z, z)}]
    f3 = initial_family(contains_a.morphism, 3)
    assert decoded(ChainSpace(contains_a.monoid, 3), f3[0]) == [{(one, one, one)}]


def test_sat_step_on_contains_a_adds_nothing(contains_a):
    lower = saturate(contains_a.morphism, 1)
    f = initial_family(contains_a.morphism, 2)
    assert sat_step(f, 2, lower, contains_a.monoid) == {b: sorted(v, key=sorted) for b, v in f.items()}


def test_saturate_contains_a(contains_a, ca_family2):
    one, z = contains_a.monoid.unit, contains_a.morphism.image("a")
    assert ca_family2.chain_set() == {(one, one), (z, z)}
    assert not chain_member(ca_family2, (one, z))
    assert not chain_member(ca_family2, (z, one))
    assert not chain_member(ca_family2, (z, z), letters_mask(contains_a.alphabet, "b"))
    f3 = saturate(contains_a.morphism, 3)
    assert f3.chain_set() == {(one, one, one), (z, z, z)}
    assert f3.lower.n == 2 and f3.lower.lower.n == 1


def test_trivial_monoid():
    full = lang("(a+b)*")
    for n in (1, 2, 3):
        family = saturate(full.morphism, n)
        assert family.chain_set() == {(0,) * n}
        for b in subalphabets(full.alphabet):
            assert len(family.maximal[b]) == 1
    assert level1_chains(full.morphism) == {(0, 0)}


def test_chain_member_length_mismatch(ca_family2):
    with pytest.raises(InputError):
        chain_member(ca_family2, (0, 0, 0))


def test_level1_examples(contains_a):
    one, z = contains_a.monoid.unit, contains_a.morphism.image("a")
    assert level1_chains(contains_a.morphism) == {(one, one), (z, z), (one, z)}


def test_length_cap(contains_a):
    with pytest.raises(InputError):
        saturate(contains_a.morphism, 4)
    assert saturate(contains_a.morphism, 4, max_length=4).n == 4


def test_set_cap():
    language = lang("(ab)*")
    with pytest.raises(ResourceCapExceeded):
        saturate(language.morphism, 2, max_sets=3)


def _fixpoint_by_steps(language, n):
    """Iterate the synchronous operator from the initial map, checking monotone growth."""
    lower = saturate(language.morphism, n - 1)
    f = initial_family(language.morphism, n)
    steps = 0
    while True:
        g = sat_step(f, n, lower, language.monoid)
        for b in f:
            for s in f[b]:
                assert any(s <= t for t in g[b]), "growth must be monotone"
        steps += 1
        if g == f:
            return f, steps
        f = g


def test_sat_step_fixpoint_equals_saturate(corpus):
    for language in corpus[:60]:
        for n in (2, 3):
            if n == 3 and language.monoid.size > 8:
                continue
            fixpoint, _ = _fixpoint_by_steps(language, n)
            family = saturate(language.morphism, n)
            assert fixpoint == family.maximal


def test_schedule_independence(corpus):
    for language in corpus[:80]:
        n = 3 if language.monoid.size <= 8 else 2
        up = saturate(language.morphism, n, schedule="ascending")
        down = saturate(language.morphism, n, schedule="descending")
        assert up.maximal == down.maximal


def test_structural_invariants(corpus):
    for language in corpus[:80]:
        n = 3 if language.monoid.size <= 8 else 2
        family = saturate(language.morphism, n)
        space, m = family.space, language.monoid
        total = family.set_count()
        assert family.iterations < 2 * total + 2
        for b in family.alphabets():
            sets = family.maximal[b]
            # antichain
            for s, t in itertools.permutations(sets, 2):
                assert not s <= t
            # compatibility: common first element
            for s in sets:
                assert len({space.decode(c)[0] for c in s}) == 1
            # diagonal of the alphabet-exact images is present
            for s in image_with_content(language.morphism, b):
                assert chain_member(family, (s,) * n, b)
        # product closure of the union view
        for b, c in itertools.product(family.alphabets(), repeat=2):
            prod = space.product(family.chain_codes(b), family.chain_codes(c))
            assert prod <= family.chain_codes(b | c)
        # subword closure
        lower = family.lower
        for b in family.alphabets():
            for code in family.chain_codes(b):
                for j in range(n):
                    assert lower.space.decode(space.erase(code, j)) in lower.chain_set(b)
        # level refinement
        two = family if n == 2 else family.lower
        assert two.chain_set() <= level1_chains(language.morphism)
        assert m.size == space.size


def test_derivations_replay(corpus):
    for language in corpus[:60]:
        family = saturate(language.morphism, 2)
        for b in family.alphabets():
            for d in family.history[b]:
                if d.kind != "initial":
                    assert d.replay(family.space) == d.chains
                    kids = [d.left, d.right] if d.kind == "product" else [d.context]
                    for kid in kids:
                        assert kid.depth() < d.depth()
            for s in family.maximal[b]:
                assert family.derivations[b][s].chains == s


def test_antichain_monotonicity(corpus):
    """Set product and idempotent power are monotone for inclusion."""
    for language in corpus[:40]:
        space = ChainSpace(language.monoid, 2)
        codes = sorted(saturate(language.morphism, 2).chain_codes(3))
        for cut in sorted({1, len(codes) // 3, len(codes) // 2, len(codes) - 1} - {0}):
            small, big = frozenset(codes[:cut]), frozenset(codes)
            assert space.product(small, small) <= space.product(big, big)
            assert space.idempotent_power(small)[0] <= space.idempotent_power(big)[0]


def test_idempotent_power_is_idempotent(corpus):
    for language in corpus[:40]:
        space = ChainSpace(language.monoid, 2)
        for s in saturate(language.morphism, 2).maximal[3]:
            idem, e = space.idempotent_power(s)
            assert space.product(idem, idem) == idem
            assert space.power(s, e) == idem


def test_rank_bound_exact():
    assert rank_bound(2, 2, 2) == 48 * 2**256
    assert rank_bound_text(2, 2, 2) == str(48 * 2**256)
    assert rank_bound_text(2, 2, 3) == "72*2^(2^16)"
    assert rank_bound(6, 2, 3) is None


def test_family_dump(ca_family2):
    data = ca_family2.to_dict()
    assert data["metadata"]["n"] == 2
    assert data["metadata"]["rank_bound"] == str(48 * 2**256)
    assert data["sets"]["ab"] == [[[1, 1]]]
    assert data["sets"]["_"] == [[[0, 0]]]
