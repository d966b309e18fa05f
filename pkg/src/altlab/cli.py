"""Command-line interface: ``altlab <subcommand> ...``.

Exit codes: 0 on completion (the verdict is in the output), 2 for input
errors, 3 when a resource cap is hit, 4 when an internal self-check fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import algebra, chains, deciders, oracle
from .errors import InputError, InternalInconsistency, ResourceCapExceeded
from .frontend import check_alphabet, compile_regex, parse_automaton

log = logging.getLogger("altlab")

_LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "trace": logging.DEBUG}


# ---------------------------------------------------------------------------
# input handling


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _language(regex, dfa, monoid, alphabet, max_monoid) -> algebra.RecognizedLanguage:
    given = [x is not None for x in (regex, dfa, monoid)]
    if sum(given) != 1:
        raise InputError("give exactly one of a regex, a DFA file or a monoid dump")
    if regex is not None:
        if alphabet is None:
            raise InputError("--alphabet is required with a regex")
        return algebra.syntactic_morphism(compile_regex(regex, alphabet), max_monoid)
    if dfa is not None:
        automaton = parse_automaton(_read(dfa))
        if alphabet is not None and tuple(check_alphabet(alphabet)) != automaton.alphabet:
            raise InputError(f"--alphabet {alphabet!r} differs from the DFA alphabet")
        return algebra.syntactic_morphism(automaton, max_monoid)
    return algebra.load_monoid(_read(monoid))


def _single(args) -> algebra.RecognizedLanguage:
    return _language(args.regex, args.dfa, args.monoid, args.alphabet, args.max_monoid)


def _limits(args) -> deciders.Limits:
    return deciders.Limits(args.max_monoid, args.max_sets, args.timeout_secs)


def _mask(language, letters: str | None) -> int | None:
    if letters is None:
        return None
    if letters in ("", "_"):
        return 0
    unknown = set(letters) - set(language.alphabet)
    if unknown:
        raise InputError(f"letters {''.join(sorted(unknown))!r} are not in the alphabet")
    return algebra.letters_mask(language.alphabet, letters)


def _elements(text: str, size: int) -> tuple[int, ...]:
    try:
        out = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise InputError(f"chain {text!r} must be comma-separated element ids") from None
    bad = [x for x in out if not 0 <= x < size]
    if bad:
        raise InputError(f"element ids {bad} are out of range 0..{size - 1}")
    return out


# ---------------------------------------------------------------------------
# output helpers


def _emit(args, payload: dict, table: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=False))
    else:
        print(table)


def _name(monoid, s: int) -> str:
    return monoid.name(s)


def _chain_text(monoid, chain) -> str:
    return "(" + ", ".join(_name(monoid, s) for s in chain) + ")"


def _verdict_text(monoid, verdict: deciders.Verdict) -> str:
    if verdict.decision:
        return "yes"
    v = verdict.violation
    parts = [f"no  [{v.equation}]"]
    if v.chain is not None and v.equation != "bsigma2-schema":
        parts.append(f"chain {_chain_text(monoid, v.chain)}")
    elif v.chain is not None:
        parts.append(" vs ".join(_chain_text(monoid, c) for c in v.chain))
    rel = {"le": "<=", "ge": ">=", "eq": "="}.get(v.relation)
    if rel:
        parts.append(f"needs {_name(monoid, v.lhs)} {rel} {_name(monoid, v.rhs)}")
    if v.alphabet is not None:
        parts.append(f"B={v.alphabet or '_'}")
    if v.note:
        parts.append(v.note)
    return "  ".join(parts)


# ---------------------------------------------------------------------------
# subcommands


def cmd_monoid(args) -> int:
    language = _single(args)
    dump = algebra.dump_monoid(language)
    if args.dump or args.format == "json":
        print(json.dumps(dump, indent=2))
        return 0
    m = language.monoid
    width = max(len(_name(m, s)) for s in m.elements) + 1
    lines = [f"elements: {m.size}   alphabet: {''.join(language.alphabet)}"]
    header = " " * width + "".join(_name(m, s).rjust(width) for s in m.elements)
    lines.append(header)
    for x in m.elements:
        row = "".join(_name(m, int(m.mult[x, y])).rjust(width) for y in m.elements)
        lines.append(_name(m, x).rjust(width) + row)
    lines.append("ids: " + ", ".join(f"{s}={_name(m, s)}" for s in m.elements))
    lines.append("accepting: " + ", ".join(_name(m, s) for s in sorted(language.accepting)))
    strict = [(s, t) for s, t in language.order.pairs() if s != t]
    lines.append("order: " + (", ".join(f"{_name(m, s)}<={_name(m, t)}" for s, t in strict) or "equality"))
    print("\n".join(lines))
    return 0


def _family(language, args, n: int) -> chains.ChainFamily:
    syn = deciders.syntactic(language, _limits(args))
    return chains.saturate(
        syn.morphism.content, n, max_sets=args.max_sets, timeout=args.timeout_secs,
        max_length=max(n, chains.DEFAULT_MAX_LENGTH),
    )


def cmd_chains(args) -> int:
    language = _single(args)
    if args.level == 1:
        if args.length != 2:
            raise InputError("level-1 chains are available for length 2 only")
        syn = deciders.syntactic(language, _limits(args))
        pairs = sorted(chains.level1_chains(syn.morphism))
        payload = {"metadata": {"n": 2, "level": 1}, "chains": [list(p) for p in pairs]}
        table = "\n".join(_chain_text(syn.monoid, p) for p in pairs)
        _emit(args, payload, table)
        return 0
    family = _family(language, args, args.length)
    mask = _mask(family.beta.morphism, args.alphabet_subset) if args.alphabet_subset is not None else None
    payload = family.to_dict()
    if mask is not None:
        key = algebra.mask_letters(family.alphabet, mask) or "_"
        payload["sets"] = {key: payload["sets"].get(key, [])}
    if args.dump or args.format == "json":
        print(json.dumps(payload, indent=2))
        return 0
    m = family.monoid
    meta = payload["metadata"]
    lines = [
        f"length {family.n}, level 2, {m.size} elements, {meta['iterations']} iterations, "
        f"{meta['maximal_sets']} maximal sets",
        f"rank bound: {meta['rank_bound']}",
    ]
    masks = family.alphabets() if mask is None else [mask]
    for b in masks:
        lines.append(f"B = {algebra.mask_letters(family.alphabet, b) or '_'}")
        for s in family.maximal_sets(b):
            lines.append("  {" + ", ".join(_chain_text(m, c) for c in sorted(s)) + "}")
    print("\n".join(lines))
    return 0


def cmd_schemas(args) -> int:
    language = _single(args)
    family = _family(language, args, 2)
    alphabet = family.alphabet
    masks = algebra.subalphabets(alphabet)
    if args.alphabet_subset is not None:
        masks = [_mask(family.beta.morphism, args.alphabet_subset)]
    m = family.monoid
    payload, lines = {}, []
    for b in masks:
        key = algebra.mask_letters(alphabet, b) or "_"
        schemas = deciders.compute_b_schemas(family, b)
        payload[key] = [
            {"triple": list(t), "r1": sc.r1, "r1p": sc.r1p,
             "T": sorted(list(c) for c in sc.context)}
            for t, sc in sorted(schemas.items())
        ]
        lines.append(f"B = {key}: " + (", ".join(_chain_text(m, t) for t in sorted(schemas)) or "none"))
    _emit(args, {"schemas": payload}, "\n".join(lines))
    return 0


def cmd_classify(args) -> int:
    language = _single(args)
    report = deciders.classify(language, _limits(args))
    syn = deciders.syntactic(language, _limits(args))
    lines = [f"syntactic monoid: {report.monoid_size} elements"]
    width = max(len(c) for c in deciders.CLASSES)
    for c in deciders.CLASSES:
        lines.append(f"{c.ljust(width)}  {_verdict_text(syn.monoid, report[c])}")
    _emit(args, deciders.report_to_dict(report), "\n".join(lines))
    return 0


def cmd_separate(args) -> int:
    l1 = _language(args.regex1, args.dfa1, args.monoid1, args.alphabet, args.max_monoid)
    l2 = _language(args.regex2, args.dfa2, args.monoid2, args.alphabet, args.max_monoid)
    verdict = deciders.decide_separation(l1, l2, args.logic, _limits(args))
    morphism, _, _ = algebra.product_morphism(l1, l2, args.max_monoid)
    text = f"{args.logic}-separable: {_verdict_text(morphism.monoid, verdict)}"
    _emit(args, {"logic": args.logic, **verdict.to_dict()}, text)
    return 0


def cmd_witness(args) -> int:
    language = _single(args)
    syn = deciders.syntactic(language, _limits(args))
    chain = _elements(args.chain, syn.monoid.size)
    if len(chain) < 2:
        raise InputError("a witness chain needs at least two elements")
    family = _family(language, args, len(chain))
    mask = _mask(syn.morphism, args.alphabet_subset)
    if family.find(chain, mask) is None:
        raise InputError(f"chain {chain} is not produced by saturation")
    bundle = oracle.bundle_for_chain(family, chain, args.rank, mask)
    check = oracle.verify_bundle(bundle, family.beta)
    payload = {
        "chain": list(chain),
        "rank": args.rank,
        "alphabet": algebra.mask_letters(family.alphabet, bundle.alphabet) or "_",
        "words": list(bundle.words),
        "verified": check.ok,
        "reason": check.reason,
    }
    lines = [f"chain {_chain_text(syn.monoid, chain)} at rank {args.rank}, B = {payload['alphabet']}"]
    lines += [f"  w{j + 1} = {w or '(empty)'}  (length {len(w)})" for j, w in enumerate(bundle.words)]
    lines.append("verified" if check.ok else f"verification failed: {check.reason}")
    _emit(args, payload, "\n".join(lines))
    return 0 if check.ok else 4


def cmd_oracle_ef(args) -> int:
    ok = oracle.ef_leq(args.word1, args.word2, level=args.level, rounds=args.rank)
    payload = {"word1": args.word1, "word2": args.word2, "level": args.level,
               "rank": args.rank, "holds": ok}
    _emit(args, payload, f"{args.word1!r} <= {args.word2!r} (level {args.level}, rank {args.rank}): {ok}")
    return 0


def cmd_oracle_brute(args) -> int:
    language = deciders.syntactic(_single(args), _limits(args))
    brute = oracle.brute_chains(language.morphism, args.level, args.rank, args.length, args.max_len)
    rows = sorted(brute.chains)
    payload = {"level": args.level, "rank": args.rank, "n": args.length,
               "max_len": args.max_len, "chains": [list(c) for c in rows]}
    _emit(args, payload, "\n".join(_chain_text(language.monoid, c) for c in rows))
    return 0


def cmd_oracle_compare(args) -> int:
    language = _single(args)
    family = _family(language, args, args.length)
    brute = oracle.brute_chains(family.beta.morphism, 2, args.rank, args.length, args.max_len)
    saturated = family.chain_set()
    missing = sorted(saturated - brute.chains)
    extra = sorted(brute.chains - saturated)
    payload = {
        "rank": args.rank, "n": args.length, "max_len": args.max_len,
        "saturated_not_found": [list(c) for c in missing],
        "found_not_saturated": [list(c) for c in extra],
    }
    m = family.monoid
    lines = [
        f"saturated chains: {len(saturated)}, brute-force chains: {len(brute.chains)}",
        "saturated but not found by brute force: "
        + (", ".join(_chain_text(m, c) for c in missing) or "none"),
        "found by brute force only (rank too small to separate): "
        + (", ".join(_chain_text(m, c) for c in extra) or "none"),
    ]
    _emit(args, payload, "\n".join(lines))
    return 0


# ---------------------------------------------------------------------------
# parser


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=("table", "json"), default="table")
    parser.add_argument("--max-monoid", type=int, default=algebra.DEFAULT_MAX_MONOID)
    parser.add_argument("--max-sets", type=int, default=chains.DEFAULT_MAX_SETS)
    parser.add_argument("--timeout-secs", type=float, default=chains.DEFAULT_TIMEOUT)


def _input(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--regex", help="regular expression over the alphabet (+, *, parentheses, _ = empty)")
    parser.add_argument("--alphabet", help="letters, e.g. ab")
    parser.add_argument("--dfa", help="automaton file")
    parser.add_argument("--monoid", help="monoid dump produced by 'monoid --dump'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="altlab", description="Quantifier alternation membership and separation for regular languages."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("monoid", help="syntactic ordered monoid")
    _input(p), _common(p)
    p.add_argument("--dump", action="store_true", help="print the JSON dump")
    p.set_defaults(func=cmd_monoid)

    p = sub.add_parser("chains", help="saturate compatible chain sets")
    _input(p), _common(p)
    p.add_argument("--length", type=int, default=2)
    p.add_argument("--level", type=int, choices=(1, 2), default=2)
    p.add_argument("--alphabet-subset")
    p.add_argument("--dump", action="store_true")
    p.set_defaults(func=cmd_chains)

    p = sub.add_parser("schemas", help="B-schemas")
    _input(p), _common(p)
    p.add_argument("--alphabet-subset")
    p.set_defaults(func=cmd_schemas)

    p = sub.add_parser("classify", help="decide every class")
    _input(p), _common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("separate", help="Sigma2 / Pi2 separation")
    _common(p)
    p.add_argument("--alphabet")
    for i in (1, 2):
        p.add_argument(f"--regex{i}")
        p.add_argument(f"--dfa{i}")
        p.add_argument(f"--monoid{i}")
    p.add_argument("--logic", choices=("sigma2", "pi2"), default="sigma2")
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("witness", help="build and verify words realizing a chain")
    _input(p), _common(p)
    p.add_argument("--chain", required=True, help="comma-separated element ids, e.g. 0,1")
    p.add_argument("--rank", type=int, default=1)
    p.add_argument("--alphabet-subset")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("oracle", help="brute-force game checks")
    osub = p.add_subparsers(dest="oracle_command", required=True)
    q = osub.add_parser("ef", help="decide w1 <= w2 by the game")
    _common(q)
    q.add_argument("word1")
    q.add_argument("word2")
    q.add_argument("--level", type=int, default=2)
    q.add_argument("--rank", type=int, default=2)
    q.set_defaults(func=cmd_oracle_ef)
    for name, func in (("brute-chains", cmd_oracle_brute), ("compare", cmd_oracle_compare)):
        q = osub.add_parser(name)
        _input(q), _common(q)
        q.add_argument("--length", type=int, default=2)
        q.add_argument("--rank", type=int, default=1)
        q.add_argument("--max-len", type=int, default=6)
        if name == "brute-chains":
            q.add_argument("--level", type=int, default=2)
        q.set_defaults(func=func)
    return parser


def _configure_logging() -> None:
    mode = os.environ.get("ALTLAB_LOG", "quiet").lower()
    level = _LOG_LEVELS.get(mode, logging.WARNING)
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("altlab").setLevel(level)


def run(argv: list[str] | None = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceCapExceeded as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return 3
    except InternalInconsistency as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return 4


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
