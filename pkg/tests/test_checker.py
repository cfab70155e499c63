"""End-user triple checking and witness extraction."""

from __future__ import annotations

import pytest

from islkit.checker import auto_domain, check_triple, find_witness
from islkit.parser import parse_triple
from islkit.semantics import BOT, DomainSpec, Heap, State, Store, execute, satisfies
from islkit.syntax import Triple, desugar
from islkit.wpo import WpoConfig


def triple(text):
    t = parse_triple(text)
    return Triple(t.pre, desugar(t.cmd), t.exit, t.post)


def test_valid_free():
    v = check_triple(triple("[ exists v . x -> v ] free(x) [ ok: x -/> ]"))
    assert v.status == "valid" and v.evidence == "entailment"
    assert v.exit_code == 0


def test_invalid_framed_error_with_witness():
    v = check_triple(triple("[ emp * x -> null ] free(x) [ er: emp * x -> null ]"))
    assert v.status == "invalid" and v.exit_code == 1
    assert satisfies(v.witness, triple("[ emp ] skip [ ok: x -> null ]").post,
                     v.domain)


def test_vacuous_false_post():
    v = check_triple(triple("[ x -> y ] skip [ ok: false ]"))
    assert v.status == "valid"


def test_witness_is_replayable():
    t = triple("[ emp * x -> null ] free(x) [ er: emp * x -> null ]")
    v = check_triple(t)
    from islkit.semantics import brute_wpo
    assert satisfies(v.witness, t.post, v.domain)
    assert v.witness not in brute_wpo(t.pre, t.cmd, t.exit, v.domain, 3)


def test_loop_fixpoint_promotes_to_unconditional():
    v = check_triple(triple("[ x -> null ] star { free(x) } [ er: x -/> ]"),
                     WpoConfig(loop_bound=2))
    assert v.status == "valid" and not v.bound_relative


def test_loop_without_fixpoint_is_bound_relative():
    v = check_triple(triple("[ emp ] star { x := alloc() } [ ok: emp ]"),
                     WpoConfig(loop_bound=1))
    assert v.status == "valid" and v.bound_relative


def test_double_free_bug_is_reachable():
    v = check_triple(triple("[ exists v . x -> v ] free(x) ; free(x) [ er: x -/> ]"))
    assert v.status == "valid"


def test_auto_domain_accounts_for_allocations():
    t = triple("[ emp ] x := alloc() ; y := alloc() [ ok: exists v w . x -> v * y -> w ]")
    spec = auto_domain(t, WpoConfig())
    assert len(spec.locations) >= 3
    assert check_triple(t).status == "valid"


def test_find_witness_predecessor():
    t = triple("[ exists v . x -> v ] free(x) [ ok: x -/> ]")
    spec = DomainSpec.of(2, 1)
    post_state = State(Store((("x", 1),)), Heap(((1, BOT),)))
    pre_state = find_witness(t, post_state, spec)
    assert pre_state is not None
    assert satisfies(pre_state, t.pre, spec)
    assert post_state in execute(pre_state, t.cmd, t.exit, 0, spec)


def test_find_witness_contract():
    t = triple("[ exists v . x -> v ] free(x) [ ok: x -/> ]")
    bad_post = State(Store(), Heap())
    with pytest.raises(ValueError):
        find_witness(t, bad_post, DomainSpec.of(2, 1))


def test_find_witness_false_pre():
    t = triple("[ false ] skip [ ok: emp ]")
    assert find_witness(t, State(Store(), Heap()), DomainSpec.of(1, 1)) is None
