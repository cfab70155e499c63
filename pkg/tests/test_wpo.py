"""Weakest postcondition: table rows, worked examples, and the engine's
differential agreement with the brute-force oracle."""

from __future__ import annotations

import pytest

from islkit.entailment import entails
from islkit.parser import parse_assertion, parse_command
from islkit.semantics import DomainSpec, brute_wpo, enum_states, satisfies
from islkit.syntax import (
    Exit, FALSE, Var, desugar, fv, max_allocs,
)
from islkit.wpo import NotCanonicalError, WpoConfig, wpo, wpo_info, wpo_sh

x, y = Var("x"), Var("y")


def a(text):
    return parse_assertion(text)


def c(text):
    return desugar(parse_command(text))


def body(text):
    return parse_assertion(text).disjuncts[0].body


def states_of(assertion, variables, spec):
    return frozenset(s for s in enum_states(variables, spec)
                     if satisfies(s, assertion, spec))


def assert_matches_oracle(pre_text, cmd_text, exit_, locs=3, cells=2, bound=3):
    pre, command = a(pre_text), c(cmd_text)
    spec = DomainSpec.of(locs, cells)
    computed = wpo(pre, command, exit_, WpoConfig(loop_bound=bound))
    reachable = brute_wpo(pre, command, exit_, spec, bound)
    out_spec = spec.with_cells(min(cells + max_allocs(command, bound), locs))
    assert states_of(computed, fv(pre) | fv(command), out_spec) == reachable


# ---------------------------------------------------------------------------
# per-row goldens
# ---------------------------------------------------------------------------

def test_free_ok_row():
    out = wpo_sh(body("x == y * x != null * y != null * y -> e"),
                 c("free(x)"), Exit.OK)
    assert out == a("x == y * x != null * y != null * y -/>")


def test_free_er_row_returns_input():
    canonical = body("x != y * x != null * y != null * e == e * "
                     "x != e * y != e * e != null * y -> e")
    out = wpo_sh(canonical, c("free(x)"), Exit.ER)
    assert out == a(str(canonical))


def test_skip_er_row_is_false():
    assert wpo_sh(body("x -> y"), c("skip"), Exit.ER) == FALSE


def test_alloc_row_has_resurrection_disjunct():
    out = wpo_sh(body("y != null * y -/>"), c("x := alloc()"), Exit.OK)
    resurrected = [d for d in out.disjuncts
                   if str(d.body).count("->") == 1 and "-/>" not in str(d.body)]
    assert resurrected, "expected a disjunct that reuses the deallocated cell"


def test_heap_rows_demand_alias_verdicts():
    with pytest.raises(NotCanonicalError):
        wpo_sh(body("y -> null"), c("free(x)"), Exit.OK)


def test_assume_row_stars_the_condition():
    out = wpo_sh(body("x -> y"), c("assume(x != y)"), Exit.OK)
    assert out == a("x != y * x -> y")


# ---------------------------------------------------------------------------
# worked examples through the full pipeline
# ---------------------------------------------------------------------------

def test_alias_case_free_ok():
    out = wpo(a("x == y * y -> e"), c("free(x)"), Exit.OK)
    # equivalent to the single-case answer: the cell is deallocated
    spec = DomainSpec.of(3, 2)
    expected = a("x == y * x != null * y -/>")
    assert states_of(out, {x, y, Var("e")}, spec) == \
        states_of(expected, {x, y, Var("e")}, spec)


def test_alias_case_free_er():
    out = wpo(a("x != y * y -> e"), c("free(x)"), Exit.ER)
    spec = DomainSpec.of(3, 2)
    expected = a("x != y * y -> e")
    assert states_of(out, {x, y, Var("e")}, spec) == \
        states_of(expected, {x, y, Var("e")}, spec)


def test_skip_preserves_meaning():
    for text in ("x -> y", "exists v . x -> v \\/ emp", "x == null"):
        out = wpo(a(text), c("skip"), Exit.OK)
        assert entails(out, a(text)).holds and entails(a(text), out).holds


def test_null_free_error():
    out = wpo(a("emp"), c("x := null ; free(x)"), Exit.ER)
    assert entails(out, a("x == null")).holds
    assert entails(a("x == null"), out).holds


def test_false_is_a_fixed_point():
    for exit_ in (Exit.OK, Exit.ER):
        assert wpo(a("false"), c("x := alloc() ; free(y)"), exit_) == FALSE


# ---------------------------------------------------------------------------
# differential agreement (the acceptance suite runs the randomized version)
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("pre, cmd, exit_", [
    ("x -> null", "free(x)", Exit.OK),
    ("x -> null", "free(x)", Exit.ER),
    ("emp", "x := alloc()", Exit.OK),
    ("x -/> * y -/>", "x := alloc()", Exit.OK),
    ("exists v . x -> v", "y := [x]", Exit.OK),
    ("x -> y", "[x] := null", Exit.OK),
    ("x -> y * y -/>", "free(x) ; free(y)", Exit.ER),
    ("x -> null", "local x { x := null }", Exit.OK),
    ("x -> null \\/ x -/>", "assert(x == null)", Exit.ER),
    ("emp", "x := malloc()", Exit.OK),
    ("x -> x", "free(x) ; x := alloc()", Exit.OK),
])
def test_matches_oracle(pre, cmd, exit_):
    assert_matches_oracle(pre, cmd, exit_)


def test_matches_oracle_loops():
    assert_matches_oracle("emp", "star { x := alloc() ; free(x) }", Exit.OK,
                          locs=3, cells=1, bound=2)
    assert_matches_oracle("x -> null", "star { free(x) }", Exit.ER,
                          locs=2, cells=1, bound=2)
    assert_matches_oracle("emp", "while (x != null) { x := null }", Exit.OK,
                          locs=2, cells=1, bound=2)


# ---------------------------------------------------------------------------
# engine invariants
# ---------------------------------------------------------------------------

def test_loop_bound_monotone():
    pre, command = a("x -> null"), c("star { choice { free(x) } or { skip } }")
    spec = DomainSpec.of(2, 1)
    previous = frozenset()
    for bound in (0, 1, 2):
        out = wpo(pre, command, Exit.ER, WpoConfig(loop_bound=bound))
        current = states_of(out, {x}, spec)
        assert previous <= current
        previous = current


def test_fixpoint_detection():
    info = wpo_info(a("x -> null"), c("star { [x] := null }"), Exit.OK,
                    WpoConfig(loop_bound=2))
    assert info.loops_exact


def test_truncation_reported():
    info = wpo_info(a("emp"), c("star { x := alloc() }"), Exit.OK,
                    WpoConfig(loop_bound=1))
    assert not info.loops_exact


def test_binder_hygiene():
    pre, command = a("exists v . x -> v"), c("x := y ; y := [x]")
    out = wpo(pre, command, Exit.OK)
    free = fv(pre) | fv(command)
    for d in out.disjuncts:
        assert not (set(d.binders) & free)
        assert fv(d) <= free


def test_seq_associativity_semantically():
    spec = DomainSpec.of(2, 1)
    left = wpo(a("x -> null"), c("{ free(x) ; x := alloc() } ; [x] := y"), Exit.OK)
    right = wpo(a("x -> null"), c("free(x) ; { x := alloc() ; [x] := y }"), Exit.OK)
    assert states_of(left, {x, y}, spec.with_cells(2)) == \
        states_of(right, {x, y}, spec.with_cells(2))


def test_no_prune_keeps_table_shape():
    cfg = WpoConfig(prune=False)
    out = wpo(a("y -/>"), c("x := alloc()"), Exit.OK, cfg)
    pruned = wpo(a("y -/>"), c("x := alloc()"), Exit.OK)
    assert len(out.disjuncts) >= len(pruned.disjuncts)
    spec = DomainSpec.of(2, 1).with_cells(2)
    assert states_of(out, {x, y}, spec) == states_of(pruned, {x, y}, spec)
