"""Command-line interface.

Subcommands: parse, exec, canonicalize, wpo, entails, check, prove-check,
prove-synth, diff-test.  All randomness is seeded; identical argv and seed
produce byte-identical machine-format reports.  Exit codes: subcommand
semantics (0/1/2 for verdict-style commands), 64 for usage errors, 70 for
internal invariant failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import corpus
from .canonical import VarLimitError, cano
from .checker import auto_domain, check_triple, find_witness
from .entailment import entails
from .parser import (
    ParseError, parse, parse_assertion, parse_command, parse_triple,
    parse_wpo_query,
)
from .proofs import (
    DerivationNode, RuleName, check_derivation, derivation_to_text,
    parse_derivation, synthesize_derivation,
)
from .semantics import DomainSpec, brute_wpo, format_state
from .syntax import Exit, Triple, desugar, fv
from .wpo import WpoConfig, wpo_info

USAGE_ERROR = 64
INTERNAL_ERROR = 70


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit 64
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _domain_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--locs", type=int, default=None,
                   help="number of locations in the finite domain")
    p.add_argument("--max-cells", type=int, default=2,
                   help="input-side cap on enumerated heap sizes")
    p.add_argument("--loop-bound", type=int, default=3,
                   help="loop unfolding bound")


def _spec_from(args) -> DomainSpec | None:
    if args.locs is None:
        return None
    return DomainSpec.of(args.locs, args.max_cells)


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="islkit", description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("parse", help="parse and reprint a program, assertion or triple")
    p.add_argument("file", help="input file, or - for stdin")
    p.add_argument("--kind", choices=("program", "assertion", "triple"),
                   default="program")
    p.add_argument("--desugar", action="store_true",
                   help="lower if/while/assert/malloc to the core language")

    p = sub.add_parser("exec", help="run the concrete-semantics oracle on 'P ; C ; exit'")
    p.add_argument("file")
    _domain_args(p)

    p = sub.add_parser("canonicalize", help="case-analyze an assertion for a command")
    p.add_argument("--input", required=True, help="assertion text")
    p.add_argument("--cmd", required=True, help="command text")
    p.add_argument("--seed", type=int, default=0, help="accepted for report compatibility")

    p = sub.add_parser("wpo", help="weakest postcondition of 'P ; C ; exit'")
    p.add_argument("file")
    p.add_argument("--loop-bound", type=int, default=3)
    p.add_argument("--no-prune", action="store_true",
                   help="keep unsatisfiable disjuncts (table-literal output)")

    p = sub.add_parser("entails", help="decide entailment between two assertions")
    p.add_argument("antecedent")
    p.add_argument("consequent")
    p.add_argument("--explain", action="store_true", help="print the counterexample")
    p.add_argument("--locs", type=int, default=None,
                   help="domain for the semantic cross-check printout")

    p = sub.add_parser("check", help="check validity of a triple file")
    p.add_argument("file")
    _domain_args(p)
    p.add_argument("--witness", action="store_true",
                   help="print the refuting state for invalid triples")

    p = sub.add_parser("prove-check", help="check a derivation file")
    p.add_argument("file")

    p = sub.add_parser("prove-synth", help="synthesize a derivation for a triple file")
    p.add_argument("file")
    p.add_argument("--loop-bound", type=int, default=3)

    p = sub.add_parser("diff-test", help="run the differential suites")
    p.add_argument("--suite", choices=sorted(corpus.SUITES) + ["all"], default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=200,
                   help="cases per suite (samples for the lemma suite)")
    _domain_args(p)
    p.add_argument("--format", choices=("plain", "machine"), default="plain")
    return top


def _cmd_parse(args) -> int:
    tree = parse(_read_input(args.file), args.kind)
    if args.desugar:
        if args.kind == "program":
            tree = desugar(tree)
        elif args.kind == "triple":
            tree = Triple(tree.pre, desugar(tree.cmd), tree.exit, tree.post)
    print(tree)
    return 0


def _cmd_exec(args) -> int:
    pre, cmd, exit_ = parse_wpo_query(_read_input(args.file))
    cmd = desugar(cmd)
    spec = _spec_from(args) or auto_domain(
        Triple(pre, cmd, exit_, pre), WpoConfig(loop_bound=args.loop_bound))
    states = brute_wpo(pre, cmd, exit_, spec, args.loop_bound)
    for s in sorted(states, key=str):
        print(format_state(s))
    print(f"# {len(states)} state(s) over {len(spec.locations)} location(s)")
    return 0


def _cmd_canonicalize(args) -> int:
    assertion = parse_assertion(args.input)
    cmd = desugar(parse_command(args.cmd))
    result = cano(assertion, cmd)
    for line in sorted(str(d) for d in result.disjuncts):
        print(line)
    return 0


def _cmd_wpo(args) -> int:
    pre, cmd, exit_ = parse_wpo_query(_read_input(args.file))
    cmd = desugar(cmd)
    cfg = WpoConfig(loop_bound=args.loop_bound, prune=not args.no_prune)
    result = wpo_info(pre, cmd, exit_, cfg)
    print(result.assertion)
    if not result.loops_exact:
        print(f"# loop unfoldings truncated at bound {args.loop_bound}",
              file=sys.stderr)
    return 0


def _cmd_entails(args) -> int:
    antecedent = parse_assertion(args.antecedent)
    consequent = parse_assertion(args.consequent)
    verdict = entails(antecedent, consequent)
    print(verdict if not args.explain or verdict.counterexample is None
          else f"{verdict.status}: {format_state(verdict.counterexample)} "
               f"satisfies the antecedent only")
    return {"holds": 0, "fails": 1, "unknown": 2}[verdict.status]


def _cmd_check(args) -> int:
    triple = parse_triple(_read_input(args.file))
    triple = Triple(triple.pre, desugar(triple.cmd), triple.exit, triple.post)
    cfg = WpoConfig(loop_bound=args.loop_bound)
    verdict = check_triple(triple, cfg, _spec_from(args))
    print(verdict)
    if args.witness and verdict.witness is not None:
        print(format_state(verdict.witness))
    return verdict.exit_code


def _cmd_prove_check(args) -> int:
    derivation = parse_derivation(_read_input(args.file))
    violation = check_derivation(derivation)
    if violation is None:
        print(f"ok: {derivation.conclusion}")
        return 0
    print(f"violation {violation}")
    return 1


def _cmd_prove_synth(args) -> int:
    triple = parse_triple(_read_input(args.file))
    cmd = desugar(triple.cmd)
    cfg = WpoConfig(loop_bound=args.loop_bound)
    derivation = synthesize_derivation(triple.pre, cmd, triple.exit, cfg)
    verdict = entails(triple.post, derivation.conclusion.post)
    if verdict.holds:
        derivation = DerivationNode(
            RuleName.CONS, Triple(triple.pre, cmd, triple.exit, triple.post),
            (derivation,))
    print(derivation_to_text(derivation))
    if not verdict.holds:
        print(f"# postcondition not entailed by the weakest postcondition "
              f"({verdict}); printed the canonical derivation instead",
              file=sys.stderr)
        return 1
    return 0


def _cmd_diff_test(args) -> int:
    names = sorted(corpus.SUITES) if args.suite == "all" else [args.suite]
    reports = []
    for name in names:
        kwargs = {"seed": args.seed}
        if name == "expressiveness":
            kwargs.update(cases=args.cases, locs=args.locs or 3,
                          max_cells=args.max_cells, loop_bound=args.loop_bound)
        elif name == "lemmas":
            kwargs.update(samples=max(args.cases, 1))
        elif name == "soundness":
            kwargs.update(per_rule=max(args.cases // 10, 1))
        else:
            kwargs.update(cases=args.cases)
        reports.append(corpus.SUITES[name](**kwargs))
    failed = 0
    for r in reports:
        for line in r.lines(args.format):
            print(line)
        failed += r.failed
    if args.format == "plain":
        print(f"total: {sum(r.cases for r in reports)} cases, {failed} failed")
    return 0 if failed == 0 else 1


_HANDLERS = {
    "parse": _cmd_parse,
    "exec": _cmd_exec,
    "canonicalize": _cmd_canonicalize,
    "wpo": _cmd_wpo,
    "entails": _cmd_entails,
    "check": _cmd_check,
    "prove-check": _cmd_prove_check,
    "prove-synth": _cmd_prove_synth,
    "diff-test": _cmd_diff_test,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.subcommand](args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except VarLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except Exception as exc:  # internal invariant failure
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
