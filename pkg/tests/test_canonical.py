"""Satisfiability, aliases, case analysis and canonicalization."""

from __future__ import annotations

import itertools

import pytest

from islkit.canonical import (
    AliasClasses, VarLimitError, alias_candidates, aliases, ca, ca_vars, cano,
    is_canonical, pi, satisfiable,
)
from islkit.parser import parse_assertion, parse_command
from islkit.semantics import DomainSpec, enum_states, satisfies
from islkit.syntax import (
    NULL, PureAtom, SymbolicHeap, Var, desugar, fv, heap, neq,
)

x, y, z, t = Var("x"), Var("y"), Var("z"), Var("t")


def h(text):
    return parse_assertion(text).disjuncts[0].body


def c(text):
    return desugar(parse_command(text))


# ---------------------------------------------------------------------------
# satisfiability
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("text, expected", [
    ("x == y * x -> t * y -> u", False),   # equal sources, disjoint cells
    ("x == null * x -> t", False),         # null is never allocated
    ("x != y * x -> y * y -/>", True),
    ("x != x", False),
    ("x == y * y == z * x != z", False),   # non-transitive commitment
    ("emp", True),
    ("x -> x * x -/>", False),
    ("x == null * y == null * x != y", False),
])
def test_satisfiable(text, expected):
    assert satisfiable(h(text)) is expected


def test_satisfiable_witness_bound():
    """A satisfiable heap has a model with one location per non-null class."""
    cases = ["x != y * x != null * y != null", "x -> y * y -/> * x != y",
             "x == y * x -> null", "exists_free x"]
    for text in cases[:3]:
        body = h(text)
        classes = AliasClasses(body)
        non_null = [g for g in classes.classes() if NULL not in g]
        spec = DomainSpec.of(len(non_null) + 1, len(body.spatial_atoms))
        found = any(satisfies(s, body, spec)
                    for s in enum_states(fv(body), spec))
        assert found == satisfiable(body)


# ---------------------------------------------------------------------------
# aliases
# ---------------------------------------------------------------------------

def test_aliases_literal():
    assert aliases(x, h("x == y * y -> t")) == {y}


def test_aliases_orientation_normalized():
    assert aliases(x, h("y == x * y -> t")) == {y}


def test_aliases_empty():
    assert aliases(x, h("emp")) == frozenset()


def test_alias_candidates_include_self():
    assert alias_candidates(x, h("x == y * y -> t")) == (x, y)
    assert alias_candidates(x, h("emp")) == (x,)


# ---------------------------------------------------------------------------
# partitions
# ---------------------------------------------------------------------------

def test_pi_two_vars_is_bell_three():
    assert len(pi({x, y})) == 5


def test_pi_empty():
    assert pi(set()) == (SymbolicHeap(()),)


def test_pi_single_var():
    assert set(pi({x})) == {h("x == null"), h("x != null")}


def test_pi_matches_relation_enumeration():
    """Enumerating reflexive-symmetric relations and filtering by
    satisfiability yields the same pure formulas as partitions."""
    items = (x, y, NULL)
    pairs = list(itertools.combinations(items, 2))
    survivors = set()
    for bits in itertools.product((True, False), repeat=len(pairs)):
        atoms = [PureAtom("eq" if b else "neq", a, bb)
                 for b, (a, bb) in zip(bits, pairs)]
        candidate = SymbolicHeap(tuple(atoms))
        if satisfiable(candidate):
            survivors.add(candidate)
    assert survivors == set(pi({x, y}))


# ---------------------------------------------------------------------------
# case analysis
# ---------------------------------------------------------------------------

def test_ca_worked_example():
    out = ca(h("y -> null"), c("free(x)"))
    assert set(out) == {
        h("x == y * y != null * x != null * y -> null"),
        h("x != y * y != null * x == null * y -> null"),
        h("x != y * y != null * x != null * y -> null"),
    }


def test_ca_no_variables():
    assert ca(h("emp"), c("skip")) == (h("emp"),)


def test_ca_unsat_input_is_empty():
    assert ca(h("x == null * x -> t"), c("skip")) == ()


def test_ca_outputs_are_canonical_and_bounded():
    from math import comb

    def bell(n):
        b = [1]
        for _ in range(n):
            b.append(sum(comb(len(b) - 1, k) * b[k] for k in range(len(b))))
        return b[n]

    body = h("x -> y")
    command = c("free(z)")
    out = ca(body, command)
    vs = fv(body) | fv(command)
    assert all(is_canonical(piece, vs) for piece in out)
    assert all(satisfiable(piece) for piece in out)
    assert len(out) <= bell(len(vs) + 1)


def test_ca_cap():
    body = heap(*(neq(Var(f"a{i}"), Var(f"b{i}")) for i in range(4)))
    with pytest.raises(VarLimitError):
        ca(body, c("skip"), cap=7)


# ---------------------------------------------------------------------------
# is_canonical
# ---------------------------------------------------------------------------

def test_is_canonical_requires_all_pairs():
    assert not is_canonical(h("y -> t"), {x, y})
    assert is_canonical(h("x == y * x != null * y != null * y -> t"), {x, y})


def test_is_canonical_tautologies_implicit():
    assert is_canonical(h("x != null"), {x})


# ---------------------------------------------------------------------------
# cano
# ---------------------------------------------------------------------------

def test_cano_worked_example():
    out = cano(parse_assertion("y -> null"), c("free(x)"))
    assert len(out.disjuncts) == 3


def test_cano_false():
    out = cano(parse_assertion("false"), c("free(x)"))
    assert out.is_false


def test_cano_case_splits_binders():
    out = cano(parse_assertion("exists z . z -> null"), c("free(x)"))
    spec = DomainSpec.of(2, 1)
    original = parse_assertion("exists z . z -> null")
    for state in enum_states({x, z}, spec):
        assert satisfies(state, out, spec) == satisfies(state, original, spec)
    for d in out.disjuncts:
        assert is_canonical(d.body, fv(d.body) | {x})


def test_cano_renames_clashing_binders():
    out = cano(parse_assertion("exists x . x -> null"), c("free(x)"))
    for d in out.disjuncts:
        assert x not in d.binders
