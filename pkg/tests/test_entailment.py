"""Entailment: syntactic decision procedure vs the finite-domain oracle."""

from __future__ import annotations

import pytest

from islkit.canonical import ca_vars
from islkit.entailment import (
    entails, entails_oracle, entails_sh, entails_syntactic,
)
from islkit.parser import parse_assertion
from islkit.semantics import DomainSpec, satisfies
from islkit.syntax import Var, fv

x, y = Var("x"), Var("y")


def a(text):
    return parse_assertion(text)


def qd(text):
    [d] = parse_assertion(text).disjuncts
    return d


def test_entails_sh_existential_instantiation():
    assert entails_sh(a("x != null * x -> null").disjuncts[0].body,
                      qd("exists v . x -> v"))


def test_entails_sh_empty_refutes_cell():
    assert not entails_sh(a("emp").disjuncts[0].body, qd("x -> null"))


def test_entails_sh_alias_classes_match():
    body = a("x == y * x != null * y != null * y -/>").disjuncts[0].body
    assert entails_sh(body, qd("x -/>"))


def test_entails_sh_canonicalizes_when_needed():
    body = a("x -> null").disjuncts[0].body  # no verdict on x vs y
    assert not entails_sh(body, qd("y -> null"))
    assert entails_sh(body, qd("exists v . v -> null"))


def test_reflexive():
    p = a("x == y * y -> null \\/ exists v . x -> v")
    assert entails(p, p).holds


def test_false_entails_everything():
    assert entails(a("false"), a("x -> y")).holds


def test_refutation_carries_state():
    verdict = entails(a("x -> null"), a("x -/>"))
    assert verdict.status == "fails"
    assert satisfies(verdict.counterexample, a("x -> null"), verdict.domain)
    assert not satisfies(verdict.counterexample, a("x -/>"), verdict.domain)


def test_emp_does_not_entail_false():
    assert entails(a("emp"), a("false")).status == "fails"


def test_disjunction_cover():
    assert entails(a("x -> null \\/ x -/>"),
                   a("exists v . x -> v \\/ x -/>")).holds


def test_single_disjunct_cover_is_enough():
    # each canonical piece of the antecedent lands in one consequent disjunct
    assert entails(a("exists v . x -> v"), a("x -> null \\/ "
                                             "exists w . w != null * x -> w")).holds


def test_weakening_by_dropping_pure():
    assert entails(a("x != y * x -> null"), a("x -> null")).holds
    assert not entails(a("x -> null"), a("x != y * x -> null")).holds


def test_oracle_agreement_small():
    spec = DomainSpec.of(2, 2)
    assert entails_oracle(a("x -> null \\/ x -/>"),
                          a("exists v . x -> v \\/ x -/>"), spec)
    assert not entails_oracle(a("emp"), a("false"), spec)


def test_transitivity_on_samples():
    chain = [a("x == y * x -> null"), a("x -> null"), a("exists v . x -> v")]
    for p, q in zip(chain, chain[1:]):
        assert entails(p, q).holds
    assert entails(chain[0], chain[2]).holds


def test_variable_cap_yields_unknown():
    wide = " * ".join(f"a{i} != b{i}" for i in range(5))
    verdict = entails(a(wide), a("emp"), cap=7)
    assert verdict.status == "unknown"


def test_fresh_token_needs_spare_value():
    # holds over large domains: a value different from x and null exists
    assert entails_syntactic(a("x != null * emp"),
                             a("exists w . w != x * w != null * emp"))
