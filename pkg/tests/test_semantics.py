"""Concrete semantics: satisfaction, transitions, enumeration, oracles."""

from __future__ import annotations

import pytest

from islkit.parser import parse_assertion, parse_command, parse_triple
from islkit.semantics import (
    BOT, DomainExhausted, DomainSpec, Heap, State, Store, brute_valid,
    brute_wpo, enum_states, execute, format_state, satisfies,
)
from islkit.syntax import Exit, Var, desugar, fv

x, y = Var("x"), Var("y")
SPEC = DomainSpec.of(2, 2)


def mkstate(store, cells):
    return State(Store(tuple(store.items())), Heap(tuple(cells.items())))


def assertion(text):
    return parse_assertion(text)


def cmd(text):
    return desugar(parse_command(text))


# ---------------------------------------------------------------------------
# satisfaction
# ---------------------------------------------------------------------------

def test_points_to_holds():
    st = mkstate({"x": 1}, {1: 0})
    assert satisfies(st, assertion("x -> null"), SPEC)


def test_deallocated_cell_is_not_points_to():
    st = mkstate({"x": 1}, {1: BOT})
    assert not satisfies(st, assertion("x -> null"), SPEC)
    assert satisfies(st, assertion("x -/>"), SPEC)


def test_separation_forces_two_cells():
    st = mkstate({"x": 1, "y": 1}, {1: 0})
    assert not satisfies(st, assertion("x -> null * y -> null"), SPEC)


def test_pure_atoms_need_empty_heap():
    st = mkstate({"x": 1, "y": 1}, {1: 0})
    assert not satisfies(st, assertion("x == y"), SPEC)
    assert satisfies(State(st.store, Heap()), assertion("x == y"), SPEC)


def test_existential_ranges_over_values():
    st = mkstate({"x": 1}, {1: 2})
    assert satisfies(st, assertion("exists v . x -> v"), SPEC)
    assert not satisfies(st, assertion("exists v . v -> x"), SPEC)


def test_default_store_value_is_null():
    assert satisfies(mkstate({}, {}), assertion("x == null"), SPEC)


# ---------------------------------------------------------------------------
# transitions
# ---------------------------------------------------------------------------

def test_free_ok_marks_cell_deallocated():
    st = mkstate({"x": 1}, {1: 2})
    assert execute(st, cmd("free(x)"), Exit.OK, 0, SPEC) == \
        frozenset((mkstate({"x": 1}, {1: BOT}),))


def test_free_on_missing_cell_errors():
    st = mkstate({"x": 1}, {})
    assert execute(st, cmd("free(x)"), Exit.ER, 0, SPEC) == frozenset((st,))
    assert execute(st, cmd("free(x)"), Exit.OK, 0, SPEC) == frozenset()


def test_free_double_free_errors():
    st = mkstate({"x": 1}, {1: BOT})
    assert execute(st, cmd("free(x)"), Exit.ER, 0, SPEC) == frozenset((st,))


def test_skip_has_no_error_transitions():
    st = mkstate({}, {})
    assert execute(st, cmd("skip"), Exit.ER, 0, SPEC) == frozenset()


def test_alloc_prefers_fresh_or_deallocated():
    st = mkstate({}, {1: BOT, 2: 0})
    out = execute(st, cmd("x := alloc()"), Exit.OK, 0, SPEC)
    assert all(s.store.get("x") == 1 for s in out)  # cell 2 is live


def test_alloc_exhaustion_is_distinguished():
    st = mkstate({}, {1: 0, 2: 0})
    with pytest.raises(DomainExhausted):
        execute(st, cmd("x := alloc()"), Exit.OK, 0, SPEC)


def test_local_restores_outer_value():
    st = mkstate({"x": 1}, {})
    out = execute(st, cmd("local x { x := null }"), Exit.OK, 0, SPEC)
    assert out == frozenset((st,))


def test_store_and_load():
    st = mkstate({"x": 1, "y": 2}, {1: 0, 2: 1})
    out = execute(st, cmd("[x] := y ; x := [y]"), Exit.OK, 0, SPEC)
    assert out == frozenset((mkstate({"x": 1, "y": 2}, {1: 2, 2: 1}),))


def test_loop_truncation_applies_to_both_exits():
    st = mkstate({}, {})
    loop = cmd("star { error }")
    assert execute(st, loop, Exit.ER, 0, SPEC) == frozenset()
    assert execute(st, loop, Exit.ER, 1, SPEC) == frozenset((st,))
    assert execute(st, loop, Exit.OK, 0, SPEC) == frozenset((st,))


def test_loop_ok_unions_iterations():
    st = mkstate({"x": 1}, {1: 2})
    loop = cmd("star { free(x) }")
    out = execute(st, loop, Exit.OK, 2, SPEC)
    assert out == frozenset((st, mkstate({"x": 1}, {1: BOT})))


# ---------------------------------------------------------------------------
# enumeration and oracles
# ---------------------------------------------------------------------------

def test_enum_count_one_var_one_loc():
    states = list(enum_states({x}, DomainSpec.of(1, 1)))
    assert len(states) == 8  # 2 stores x (empty + 3 one-cell heaps)
    assert len(set(states)) == 8


def test_enum_count_empty():
    assert list(enum_states(set(), DomainSpec.of(0, 0))) == [State(Store(), Heap())]


def test_enum_count_zero_cells():
    states = list(enum_states({x, y}, DomainSpec.of(2, 0)))
    assert len(states) == 9
    assert all(not s.heap.cells for s in states)


def test_brute_wpo_free():
    pre = assertion("x -> null")
    out = brute_wpo(pre, cmd("free(x)"), Exit.OK, SPEC, 0)
    assert out and all(s.heap.get(s.store.get("x")) is BOT for s in out)


def test_brute_wpo_false_pre():
    assert brute_wpo(assertion("false"), cmd("skip"), Exit.OK, SPEC, 0) == frozenset()


def test_brute_wpo_alloc_two_locations():
    out = brute_wpo(assertion("emp"), cmd("x := alloc()"), Exit.OK, SPEC, 0)
    # every state has exactly the allocated cell, at either location
    assert {s.store.get("x") for s in out} == {1, 2}
    assert all(s.heap.dom == {s.store.get("x")} for s in out)


def test_brute_valid_goldens():
    assert brute_valid(parse_triple("[ exists v . x -> v ] free(x) [ ok: x -/> ]"),
                       SPEC, 0)
    assert not brute_valid(
        parse_triple("[ emp * x -> null ] free(x) [ er: emp * x -> null ]"),
        SPEC, 0)
    assert brute_valid(parse_triple("[ x -> y ] skip [ ok: false ]"), SPEC, 0)


def test_format_state():
    st = mkstate({"x": 1}, {1: BOT, 2: 0})
    assert format_state(st) == "{x=l1} | {l1=⊥, l2=null}"


# ---------------------------------------------------------------------------
# executable lemmas (small versions; the acceptance suite runs the big ones)
# ---------------------------------------------------------------------------

def test_heap_monotonicity_and_untouched_vars():
    program = cmd("choice { x := alloc() } or { free(x) ; [y] := x }")
    for st in enum_states({x, y}, DomainSpec.of(2, 1)):
        for exit_ in (Exit.OK, Exit.ER):
            for succ in execute(st, program, exit_, 1, SPEC):
                assert st.heap.dom <= succ.heap.dom
                assert st.store.get("z") == succ.store.get("z")


def test_star_monotone_in_bound():
    loop = cmd("star { choice { free(x) } or { x := alloc() } }")
    st = mkstate({"x": 1}, {1: 0})
    big = DomainSpec.of(4, 1)
    small = execute(st, loop, Exit.OK, 1, big)
    large = execute(st, loop, Exit.OK, 2, big)
    assert small < large
