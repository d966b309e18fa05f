"""Deciding quantifier alternation classes of regular languages.

The pipeline is: regex or DFA -> syntactic ordered monoid -> saturated
chain sets -> equation checks.  A brute-force game solver lives in
:mod:`altlab.oracle` for cross-checking.
"""

from __future__ import annotations

from .algebra import (
    RecognizedLanguage,
    dump_monoid,
    load_monoid,
    product_morphism,
    syntactic_morphism,
)
from .chains import ChainFamily, level1_chains, saturate
from .deciders import (
    CLASSES,
    Limits,
    Verdict,
    classify,
    compute_b_schemas,
    decide_bsigma2,
    decide_delta,
    decide_fo,
    decide_pi,
    decide_separation,
    decide_sigma,
)
from .errors import (
    AltlabError,
    InputError,
    InternalInconsistency,
    ResourceCapExceeded,
)
from .frontend import Dfa, compile_regex, parse_automaton, parse_regex

__all__ = [
    "AltlabError", "CLASSES", "ChainFamily", "Dfa", "InputError", "InternalInconsistency",
    "Limits", "RecognizedLanguage", "ResourceCapExceeded", "Verdict", "classify",
    "compile_regex", "compute_b_schemas", "decide_bsigma2", "decide_delta", "decide_fo",
    "decide_pi", "decide_separation", "decide_sigma", "dump_monoid", "level1_chains",
    "load_monoid", "parse_automaton", "parse_regex", "product_morphism", "saturate",
    "syntactic_morphism",
]
