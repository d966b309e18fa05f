from __future__ import annotations

import random

import pytest

from altlab.algebra import RecognizedLanguage, letters_mask, omega_power, product_morphism
from altlab.chains import level1_chains, saturate
from altlab.deciders import (
    CLASSES,
    Verdict,
    Violation,
    classify,
    compute_b_schemas,
    decide_bsigma2,
    decide_delta,
    decide_fo,
    decide_pi,
    decide_separation,
    decide_sigma,
    hierarchy_violations,
    report_to_dict,
    syntactic,
)
from altlab.errors import AlphabetMismatch, InputError, InternalInconsistency

from conftest import lang


def test_separation_examples(contains_a, b_star):
    assert decide_separation(b_star, contains_a, "sigma2")
    same = decide_separation(contains_a, contains_a, "sigma2")
    assert not same
    assert same.violation.chain[0] == same.violation.chain[1]
    assert "initial" in same.violation.note
    assert decide_separation(lang("#"), contains_a, "sigma2")
    assert decide_separation(lang("#"), contains_a, "pi2")


def test_separation_errors(contains_a):
    with pytest.raises(InputError):
        decide_separation(contains_a, contains_a, "sigma3")
    with pytest.raises(AlphabetMismatch):
        decide_separation(contains_a, lang("a*", "a"))


def test_sigma_pi_examples(contains_a, b_star):
    assert decide_sigma(contains_a, 1)
    v = decide_sigma(b_star, 1)
    assert not v
    z = b_star.morphism.image("a")
    assert v.violation.elements["t"] == z
    assert decide_sigma(b_star, 2)
    assert decide_pi(b_star, 1)
    assert not decide_pi(contains_a, 1)
    assert decide_delta(lang("(a+b)*"), 3)
    with pytest.raises(InputError):
        decide_sigma(contains_a, 4)


def test_schema_examples(contains_a):
    family = saturate(contains_a.morphism, 2)
    one, z = contains_a.monoid.unit, contains_a.morphism.image("a")
    alphabet = contains_a.alphabet
    assert set(compute_b_schemas(family, letters_mask(alphabet, "b"))) == {(one, one, one)}
    assert set(compute_b_schemas(family, letters_mask(alphabet, "a"))) == {(z, z, z)}
    trivial = saturate(lang("(a+b)*").morphism, 2)
    for mask in (1, 2, 3):
        assert set(compute_b_schemas(trivial, mask)) == {(0, 0, 0)}


def test_schema_witnesses(corpus):
    for language in corpus[:50]:
        family = saturate(language.morphism, 2)
        space, m = family.space, language.monoid
        for b in family.alphabets():
            base = family.chain_codes(b)
            for triple, schema in compute_b_schemas(family, b).items():
                s1, s2, s2p = triple
                assert m.mul(schema.r1, schema.r1p) == s1
                t_codes = frozenset(space.encode(c) for c in schema.context)
                assert any(t_codes <= t for t in family.maximal[b])
                idem, _ = space.idempotent_power(t_codes)
                assert space.encode((schema.r1, s2)) in space.product(base, idem)
                assert space.encode((schema.r1p, s2p)) in space.product(idem, base)


def test_bsigma2_and_fo_examples(contains_a, parity):
    assert decide_bsigma2(contains_a)
    assert decide_bsigma2(lang("(a+b)*"))
    v = decide_bsigma2(parity)
    assert not v
    g = parity.morphism.image("a")
    assert v.violation.chain == (g, g, g)
    assert v.violation.lhs == parity.monoid.unit and v.violation.rhs == g
    assert not decide_fo(parity)
    assert decide_fo(contains_a) and decide_fo(lang("(a+b)*"))


def test_classify_examples(contains_a, parity, b_star):
    assert classify(contains_a).yes_classes() == [c for c in CLASSES if c not in ("Pi1", "Delta1")]
    assert classify(parity).yes_classes() == []
    assert classify(lang("(a+b)*")).yes_classes() == list(CLASSES)
    report = classify(b_star)
    assert not report["Sigma1"] and report["Pi1"] and report["Sigma2"] and report["Delta2"]


def test_contains_a_sigma1_classes(contains_a):
    # contains-a is Sigma1 but not Pi1, so every class from level 2 upward holds
    report = classify(contains_a)
    for c in CLASSES:
        expected = c not in ("Pi1", "Delta1")
        assert report[c].decision == expected, c


def test_report_json(contains_a):
    data = report_to_dict(classify(contains_a))
    assert list(data["classes"]) == list(CLASSES)
    assert data["classes"]["Pi1"]["decision"] == "no"
    assert data["classes"]["Pi1"]["violation"]["equation"] == "pi1"


def test_hierarchy_check_detects_breakage():
    yes, no = Verdict(True), Verdict(False, Violation("x", "eq", 0, 1, {}))
    verdicts = {c: yes for c in CLASSES}
    assert hierarchy_violations(verdicts) == []
    verdicts["FO"] = no
    assert hierarchy_violations(verdicts)


def test_classify_raises_on_inconsistency(monkeypatch, contains_a):
    import altlab.deciders as deciders

    monkeypatch.setattr(deciders, "decide_fo", lambda *a, **k: Verdict(False, None))
    with pytest.raises(InternalInconsistency):
        deciders.classify(contains_a)


def _reevaluate(language: RecognizedLanguage, verdict: Verdict) -> None:
    """Recompute a violation from the raw tables and confirm it is a real failure."""
    m, order = language.monoid, language.order
    mul = lambda *xs: m.mul(*xs)  # noqa: E731
    om = lambda s: omega_power(m, s)  # noqa: E731
    v = verdict.violation
    e = v.elements
    if v.equation[:-1] in ("sigma", "pi", "delta"):
        t, s = v.chain
        lhs, rhs = om(s), mul(om(s), t, om(s))
    elif v.equation == "aperiodic":
        (s,) = v.chain
        lhs, rhs = om(s), mul(om(s), s)
    elif v.equation == "bsigma2-chain-left":
        lhs, rhs = mul(om(e["s1"]), om(e["s3"])), mul(om(e["s1"]), e["s2"], om(e["s3"]))
    elif v.equation == "bsigma2-chain-right":
        lhs, rhs = mul(om(e["s3"]), om(e["s1"])), mul(om(e["s3"]), e["s2"], om(e["s1"]))
    else:
        assert v.equation == "bsigma2-schema"
        left = om(mul(e["s2"], e["t2"]))
        right = om(mul(e["t2p"], e["s2p"]))
        lhs = mul(left, e["s1"], right)
        rhs = mul(left, e["s2"], e["t1"], e["s2p"], right)
    assert (lhs, rhs) == (v.lhs, v.rhs)
    if v.relation == "le":
        assert not order.le(lhs, rhs)
    elif v.relation == "ge":
        assert not order.le(rhs, lhs)
    else:
        assert lhs != rhs


def test_violations_reevaluate(corpus):
    for language in corpus:
        report = classify(language)
        syn = syntactic(language)
        for c in CLASSES:
            if not report[c]:
                _reevaluate(syn, report[c])


def test_violation_chains_are_in_the_family(corpus):
    for language in corpus[:60]:
        c1 = level1_chains(language.morphism)
        v = decide_sigma(language, 2)
        if not v:
            assert v.violation.chain in c1
        v = decide_pi(language, 3)
        if not v:
            assert v.violation.chain in saturate(language.morphism, 2).chain_set()


def test_bsigma2_implies_fo(corpus):
    for language in corpus:
        if decide_bsigma2(language):
            assert decide_fo(language)


def test_duality(corpus):
    for language in corpus:
        comp = language.complement()
        assert bool(decide_sigma(language, 2)) == bool(decide_separation(language, comp, "sigma2"))
        assert bool(decide_pi(language, 2)) == bool(decide_separation(language, comp, "pi2"))


def test_pi2_symmetry(corpus):
    rng = random.Random(5)
    for _ in range(60):
        l1, l2 = rng.sample(corpus, 2)
        assert bool(decide_separation(l1, l2, "pi2")) == bool(decide_separation(l2, l1, "sigma2"))
        assert bool(decide_separation(l1, l2, "sigma2")) == bool(decide_separation(l2, l1, "pi2"))


def test_membership_is_invariant_under_recognizer(corpus):
    """Deciders rebuild the syntactic monoid, so a larger recognizer changes nothing."""
    helper = lang("(ab)*")
    for language in corpus[:30]:
        morphism, f1, _ = product_morphism(language, helper)
        bigger = RecognizedLanguage(morphism, f1)
        assert classify(bigger).yes_classes() == classify(language).yes_classes()


def test_known_languages():
    # a*b* is Pi1 (forbid a after b) and so everything above
    report = classify(lang("a*b*"))
    assert report["Pi1"] and not report["Sigma1"]
    # (ab)* sits in Pi2 but not Sigma2
    report = classify(lang("(ab)*"))
    assert report["Pi2"] and not report["Sigma2"] and report["Delta3"]
    # ends with ab: definable both existentially and universally at level 2
    report = classify(lang("(a+b)*ab"))
    assert report["Delta2"] and not report["Sigma1"] and not report["Pi1"]
