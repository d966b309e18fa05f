"""Membership and separation deciders for the alternation hierarchy.

Every decider works on the syntactic ordered monoid of its input and
returns a :class:`Verdict`.  A negative verdict names the equation that
fails, the elements that instantiate it and the chain (or pair of
schemas) that parametrizes the instance, so it can be re-checked from
the multiplication table alone.

Candidate instances are visited in a fixed order: diagonal chains
``(s, ..., s)`` first, then the remaining chains in increasing order.
On a non-aperiodic monoid a diagonal chain already violates every
equation at levels 3 and BSigma2, so those deciders return before
running the (expensive) length-3 saturation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .algebra import (
    DEFAULT_MAX_MONOID,
    ContentMorphism,
    RecognizedLanguage,
    mask_letters,
    omega_power,
    product_morphism,
    subalphabets,
    syntactic_morphism,
    syntactic_quotient,
)
from .chains import (
    DEFAULT_MAX_SETS,
    DEFAULT_TIMEOUT,
    ChainFamily,
    level1_chains,
    saturate,
)
from .errors import InputError, InternalInconsistency

log = logging.getLogger(__name__)

CLASSES = (
    "Sigma1", "Pi1", "Delta1",
    "Sigma2", "Pi2", "Delta2",
    "Sigma3", "Pi3", "Delta3",
    "BSigma2", "FO",
)

_RELATIONS = {"sigma": "le", "pi": "ge", "delta": "eq"}


@dataclass(frozen=True)
class Limits:
    max_monoid: int = DEFAULT_MAX_MONOID
    max_sets: int = DEFAULT_MAX_SETS
    timeout: float = DEFAULT_TIMEOUT


@dataclass(frozen=True)
class Violation:
    """One failed equation instance.

    ``lhs`` and ``rhs`` are monoid elements; ``relation`` is the relation
    that was required between them (``le``, ``ge`` or ``eq``).
    """

    equation: str
    relation: str
    lhs: int
    rhs: int
    elements: dict
    chain: tuple | None = None
    alphabet: str | None = None
    note: str | None = None

    def to_dict(self) -> dict:
        out = {
            "equation": self.equation,
            "relation": self.relation,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "elements": dict(self.elements),
        }
        if self.chain is not None:
            out["chain"] = _jsonable(self.chain)
        if self.alphabet is not None:
            out["alphabet"] = self.alphabet
        if self.note:
            out["note"] = self.note
        return out


def _jsonable(value):
    if isinstance(value, (tuple, list)):
        return [_jsonable(v) for v in value]
    return value


@dataclass(frozen=True)
class Verdict:
    decision: bool
    violation: Violation | None = None

    def __bool__(self) -> bool:
        return self.decision

    @property
    def justification(self) -> str:
        if self.decision:
            return "all equations hold"
        v = self.violation
        return f"{v.equation} fails at {v.elements} (chain {v.chain})"

    def to_dict(self) -> dict:
        out = {"decision": "yes" if self.decision else "no"}
        if self.violation is not None:
            out["violation"] = self.violation.to_dict()
        return out


_YES = Verdict(True)


@dataclass(frozen=True)
class BSchema:
    triple: tuple[int, int, int]
    alphabet: int
    context: frozenset  # the compatible set T, as decoded length-2 chains
    r1: int
    r1p: int


@dataclass
class ClassificationReport:
    verdicts: dict[str, Verdict]
    monoid_size: int
    alphabet: tuple[str, ...]

    def __getitem__(self, name: str) -> Verdict:
        return self.verdicts[name]

    def yes_classes(self) -> list[str]:
        return [c for c in CLASSES if self.verdicts[c].decision]


# ---------------------------------------------------------------------------
# shared per-language state


@dataclass(eq=False)
class _Analysis:
    """Syntactic data of one language, with lazily saturated chain families."""

    language: RecognizedLanguage
    limits: Limits
    _beta: ContentMorphism | None = field(default=None, repr=False)
    _family3: ChainFamily | None = field(default=None, repr=False)
    _family2: ChainFamily | None = field(default=None, repr=False)

    def __post_init__(self):
        m = self.language.monoid
        self.omega = np.array([omega_power(m, s) for s in m.elements], dtype=np.int64)

    @property
    def monoid(self):
        return self.language.monoid

    @property
    def beta(self) -> ContentMorphism:
        if self._beta is None:
            self._beta = self.language.morphism.content
        return self._beta

    def le(self, s: int, t: int) -> bool:
        return self.language.order.le(s, t)

    def family2(self) -> ChainFamily:
        if self._family2 is None:
            if self._family3 is not None:
                self._family2 = self._family3.lower
            else:
                self._family2 = self._saturate(2)
        return self._family2

    def family3(self) -> ChainFamily:
        if self._family3 is None:
            self._family3 = self._saturate(3)
            self._family2 = self._family3.lower
        return self._family3

    def _saturate(self, n: int) -> ChainFamily:
        log.info("saturating length-%d chains over %d elements", n, self.monoid.size)
        return saturate(
            self.beta, n, max_sets=self.limits.max_sets, timeout=self.limits.timeout
        )


def syntactic(language: RecognizedLanguage, limits: Limits | None = None) -> RecognizedLanguage:
    """Rebuild the syntactic ordered monoid of ``language``.

    The equations characterize membership only over the syntactic monoid,
    so every decider calls this first regardless of how the input was built.
    """
    limits = limits or Limits()
    if language.dfa is not None:
        return syntactic_morphism(language.dfa, limits.max_monoid)
    return syntactic_quotient(language, limits.max_monoid)


def _analysis(language, limits) -> _Analysis:
    if isinstance(language, _Analysis):
        return language
    limits = limits or Limits()
    return _Analysis(syntactic(language, limits), limits)


def _diagonal_first(chains: Iterable[tuple[int, ...]]) -> list[tuple[int, ...]]:
    return sorted(chains, key=lambda c: (len(set(c)) != 1, c))


# ---------------------------------------------------------------------------
# Sigma_i / Pi_i / Delta_i


def _check_alternation(
    an: _Analysis, pairs: Iterable[tuple[int, int]], kind: str, i: int
) -> Verdict:
    mult = an.monoid.mult
    relation = _RELATIONS[kind]
    for t, s in pairs:
        e = int(an.omega[s])
        lhs = e
        rhs = int(mult[mult[e, t], e])
        if relation == "le":
            ok = an.le(lhs, rhs)
        elif relation == "ge":
            ok = an.le(rhs, lhs)
        else:
            ok = lhs == rhs
        if not ok:
            return Verdict(
                False,
                Violation(
                    equation=f"{kind}{i}",
                    relation=relation,
                    lhs=lhs,
                    rhs=rhs,
                    elements={"t": t, "s": s, "s_omega": e},
                    chain=(t, s),
                ),
            )
    return _YES


def _alternation_pairs(an: _Analysis, i: int):
    m = an.monoid
    diagonal = [(s, s) for s in m.elements]
    yield from diagonal
    if i == 1:
        rest = [(t, s) for t in m.elements for s in m.elements if t != s]
        yield from rest
        return
    if i == 2:
        chains = level1_chains(an.beta)
    elif i == 3:
        chains = an.family2().chain_set()
    else:
        raise InputError(f"level {i} is not supported (only 1, 2 and 3)")
    yield from (c for c in sorted(chains) if c[0] != c[1])


def _decide_alternation(language, i: int, kind: str, limits: Limits | None) -> Verdict:
    if i not in (1, 2, 3):
        raise InputError(f"level {i} is not supported (only 1, 2 and 3)")
    an = _analysis(language, limits)
    return _check_alternation(an, _alternation_pairs(an, i), kind, i)


def decide_sigma(language, i: int, limits: Limits | None = None) -> Verdict:
    """Sigma_i membership: s^w <= s^w t s^w for every (t, s) in C_{i-1}."""
    return _decide_alternation(language, i, "sigma", limits)


def decide_pi(language, i: int, limits: Limits | None = None) -> Verdict:
    """Pi_i membership: s^w >= s^w t s^w for every (t, s) in C_{i-1}."""
    return _decide_alternation(language, i, "pi", limits)


def decide_delta(language, i: int, limits: Limits | None = None) -> Verdict:
    """Delta_i membership: s^w = s^w t s^w for every (t, s) in C_{i-1}."""
    return _decide_alternation(language, i, "delta", limits)


# ---------------------------------------------------------------------------
# separation


def decide_separation(
    l1: RecognizedLanguage,
    l2: RecognizedLanguage,
    logic: str = "sigma2",
    limits: Limits | None = None,
) -> Verdict:
    """Whether some Sigma2 (or Pi2) language contains ``l1`` and avoids ``l2``."""
    logic = logic.lower()
    if logic not in ("sigma2", "pi2"):
        raise InputError(f"unknown separation logic {logic!r} (use sigma2 or pi2)")
    limits = limits or Limits()
    morphism, f1, f2 = product_morphism(l1, l2, limits.max_monoid)
    family = saturate(
        morphism.content, 2, max_sets=limits.max_sets, timeout=limits.timeout
    )
    chains = family.chain_set()
    for s1 in sorted(f1):
        for s2 in sorted(f2):
            chain = (s1, s2) if logic == "sigma2" else (s2, s1)
            if chain in chains:
                derivation = family.derivation(chain)
                found = family.find(chain)
                note = None
                if derivation is not None:
                    note = f"derived by {derivation.kind} (depth {derivation.depth()})"
                return Verdict(
                    False,
                    Violation(
                        equation=f"separation-{logic}",
                        relation="not-in-chains",
                        lhs=s1,
                        rhs=s2,
                        elements={"s1": s1, "s2": s2},
                        chain=chain,
                        alphabet=mask_letters(morphism.alphabet, found[0]) if found else None,
                        note=note,
                    ),
                )
    return _YES


# ---------------------------------------------------------------------------
# BSigma2


def compute_b_schemas(family2: ChainFamily, mask: int) -> dict[tuple[int, int, int], BSchema]:
    """All B-schemas for the sub-alphabet ``mask``, keyed by triple.

    Each triple keeps the first witness (T, r1, r1') found, scanning maximal
    compatible sets in their stored order and factorizations in increasing order.
    """
    if family2.n != 2:
        raise InputError("B-schemas are defined from length-2 chains")
    space = family2.space
    mult = family2.monoid.mult
    base = family2.chain_codes(mask)
    out: dict[tuple[int, int, int], BSchema] = {}
    for t_codes in family2.maximal.get(mask, []):
        idem, _ = space.idempotent_power(t_codes)
        left = sorted(space.decode(c) for c in space.product(base, idem))
        right = sorted(space.decode(c) for c in space.product(idem, base))
        context = frozenset(space.decode(c) for c in t_codes)
        for r1, s2 in left:
            for r1p, s2p in right:
                triple = (int(mult[r1, r1p]), s2, s2p)
                if triple not in out:
                    out[triple] = BSchema(triple, mask, context, r1, r1p)
    return out


def _schema_violation(an: _Analysis, schemas: list[tuple[int, int, int]], mask: int):
    """First failing instance of the schema-pair equation for one sub-alphabet."""
    mult = an.monoid.mult
    omega = an.omega
    arr = np.array(schemas, dtype=np.int64)
    t1, t2, t2p = arr[:, 0], arr[:, 1], arr[:, 2]
    for s1, s2, s2p in schemas:
        left_idem = omega[mult[s2, t2]]
        right_idem = omega[mult[t2p, s2p]]
        lhs = mult[mult[left_idem, s1], right_idem]
        middle = mult[mult[mult[s2, t1], s2p], right_idem]
        rhs = mult[left_idem, middle]
        bad = np.nonzero(lhs != rhs)[0]
        if bad.size:
            j = int(bad[0])
            return Violation(
                equation="bsigma2-schema",
                relation="eq",
                lhs=int(lhs[j]),
                rhs=int(rhs[j]),
                elements={
                    "s1": s1, "s2": s2, "s2p": s2p,
                    "t1": int(t1[j]), "t2": int(t2[j]), "t2p": int(t2p[j]),
                },
                chain=((s1, s2, s2p), tuple(int(x) for x in arr[j])),
                alphabet=mask_letters(an.language.alphabet, mask),
            )
    return None


def _chain3_violation(an: _Analysis, chains: Iterable[tuple[int, int, int]]):
    mult = an.monoid.mult
    omega = an.omega
    for s1, s2, s3 in chains:
        e1, e3 = int(omega[s1]), int(omega[s3])
        for name, a, b in (("bsigma2-chain-left", e1, e3), ("bsigma2-chain-right", e3, e1)):
            lhs = int(mult[a, b])
            rhs = int(mult[mult[a, s2], b])
            if lhs != rhs:
                return Violation(
                    equation=name,
                    relation="eq",
                    lhs=lhs,
                    rhs=rhs,
                    elements={"s1": s1, "s2": s2, "s3": s3},
                    chain=(s1, s2, s3),
                )
    return None


def decide_bsigma2(language, limits: Limits | None = None) -> Verdict:
    """Boolean combinations of Sigma2: the chain equation and the schema equation."""
    an = _analysis(language, limits)
    diagonal = [(s, s, s) for s in an.monoid.elements]
    violation = _chain3_violation(an, diagonal)
    if violation is not None:
        return Verdict(False, violation)
    family3 = an.family3()
    rest = [c for c in sorted(family3.chain_set()) if len(set(c)) != 1]
    violation = _chain3_violation(an, rest)
    if violation is not None:
        return Verdict(False, violation)
    family2 = an.family2()
    for mask in subalphabets(an.language.alphabet):
        schemas = sorted(compute_b_schemas(family2, mask))
        if schemas:
            violation = _schema_violation(an, schemas, mask)
            if violation is not None:
                return Verdict(False, violation)
    return _YES


# ---------------------------------------------------------------------------
# FO


def decide_fo(language, limits: Limits | None = None) -> Verdict:
    """First-order definability: the syntactic monoid is aperiodic."""
    an = _analysis(language, limits)
    mult = an.monoid.mult
    for s in an.monoid.elements:
        e = int(an.omega[s])
        rhs = int(mult[e, s])
        if e != rhs:
            return Verdict(
                False,
                Violation("aperiodic", "eq", e, rhs, {"s": s, "s_omega": e}, chain=(s,)),
            )
    return _YES


# ---------------------------------------------------------------------------
# classification


_ARROWS = (
    *[(f"Delta{i}", f"Sigma{i}") for i in (1, 2, 3)],
    *[(f"Delta{i}", f"Pi{i}") for i in (1, 2, 3)],
    *[(f"Sigma{i}", f"Delta{i + 1}") for i in (1, 2)],
    *[(f"Pi{i}", f"Delta{i + 1}") for i in (1, 2)],
    ("Sigma2", "BSigma2"),
    ("Pi2", "BSigma2"),
    ("BSigma2", "Delta3"),
    *[(c, "FO") for c in CLASSES if c != "FO"],
)


def hierarchy_violations(verdicts: dict[str, Verdict]) -> list[str]:
    problems = [
        f"{a} holds but {b} does not"
        for a, b in _ARROWS
        if verdicts[a].decision and not verdicts[b].decision
    ]
    for i in (1, 2, 3):
        both = verdicts[f"Sigma{i}"].decision and verdicts[f"Pi{i}"].decision
        if both != verdicts[f"Delta{i}"].decision:
            problems.append(f"Sigma{i} and Pi{i} disagree with Delta{i}")
    return problems


def classify(language: RecognizedLanguage, limits: Limits | None = None) -> ClassificationReport:
    """Decide every supported class and cross-check the inclusions between them."""
    an = _analysis(language, limits)
    verdicts: dict[str, Verdict] = {"FO": decide_fo(an)}
    for i in (1, 2, 3):
        verdicts[f"Sigma{i}"] = decide_sigma(an, i)
        verdicts[f"Pi{i}"] = decide_pi(an, i)
        verdicts[f"Delta{i}"] = decide_delta(an, i)
    verdicts["BSigma2"] = decide_bsigma2(an)
    verdicts = {c: verdicts[c] for c in CLASSES}
    problems = hierarchy_violations(verdicts)
    if problems:
        raise InternalInconsistency("classification is inconsistent: " + "; ".join(problems))
    return ClassificationReport(verdicts, an.monoid.size, an.language.alphabet)


def report_to_dict(report: ClassificationReport) -> dict:
    return {
        "alphabet": list(report.alphabet),
        "monoid_size": report.monoid_size,
        "classes": {c: report.verdicts[c].to_dict() for c in CLASSES},
    }
