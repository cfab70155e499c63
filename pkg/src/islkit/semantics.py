"""Concrete semantics over a finite value domain.

States are (store, heap) pairs.  Values are integers: 0 is the null value,
positive integers are locations.  Heap cells hold a value or the
deallocation marker (``None``, printed as ⊥); a deallocated cell stays in
the heap domain.  This module provides the satisfaction relation, an
executable transition relation with bounded loops, exhaustive state
enumeration, and the brute-force weakest-postcondition/validity oracles
used for differential testing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from .syntax import (
    Alloc, Assertion, Assign, Assume, Choice, Command, ErrorCmd, Exit, Free,
    Havoc, Load, Local, NegPoints, PointsTo, PureAtom, QuantifiedHeap, Seq,
    Skip, Star, Store as StoreCmd, SymbolicHeap, Term, Triple, Var, fv,
)

NULL_VALUE = 0
BOT: Optional[int] = None  # deallocated-cell marker; not a value


class DomainExhausted(Exception):
    """alloc found no admissible location: the finite domain is too small."""


@dataclass(frozen=True)
class DomainSpec:
    """Finite carrier: locations 1..n, the null value 0, and an input-side
    cap on enumerated heap sizes."""

    locations: tuple[int, ...]
    max_cells: int

    def __post_init__(self) -> None:
        if NULL_VALUE in self.locations:
            raise ValueError("null is not a location")
        if self.max_cells < 0:
            raise ValueError("max_cells must be non-negative")

    @classmethod
    def of(cls, num_locs: int, max_cells: int) -> "DomainSpec":
        return cls(tuple(range(1, num_locs + 1)), max_cells)

    @property
    def values(self) -> tuple[int, ...]:
        return (NULL_VALUE,) + self.locations

    def with_cells(self, max_cells: int) -> "DomainSpec":
        return DomainSpec(self.locations, max_cells)


@dataclass(frozen=True)
class Store:
    """Total store: explicit bindings plus the default null for the rest.

    Bindings equal to the default are dropped, so two stores are equal iff
    they agree as total functions.
    """

    bindings: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        cleaned = tuple(sorted((n, v) for n, v in self.bindings if v != NULL_VALUE))
        object.__setattr__(self, "bindings", cleaned)
        object.__setattr__(self, "_map", dict(cleaned))

    def get(self, var: Var | str) -> int:
        name = var.name if isinstance(var, Var) else var
        return self._map.get(name, NULL_VALUE)

    def set(self, var: Var | str, value: int) -> "Store":
        name = var.name if isinstance(var, Var) else var
        rest = tuple((n, v) for n, v in self.bindings if n != name)
        return Store(rest + ((name, value),))

    def eval_term(self, t: Term) -> int:
        if isinstance(t, Var):
            return self.get(t)
        return NULL_VALUE

    def __str__(self) -> str:
        inner = ", ".join(f"{n}={format_value(v)}" for n, v in self.bindings)
        return "{" + inner + "}"


@dataclass(frozen=True)
class Heap:
    """Finite partial map from locations to values or the ⊥ marker."""

    cells: tuple[tuple[int, Optional[int]], ...] = ()

    def __post_init__(self) -> None:
        locs = [l for l, _ in self.cells]
        if len(set(locs)) != len(locs):
            raise ValueError("heap domain must not repeat locations")
        object.__setattr__(self, "cells", tuple(sorted(self.cells)))
        object.__setattr__(self, "_map", dict(self.cells))

    @property
    def dom(self) -> frozenset[int]:
        return frozenset(l for l, _ in self.cells)

    @property
    def dom_plus(self) -> frozenset[int]:
        return frozenset(l for l, v in self.cells if v is not None)

    def get(self, loc: int) -> Optional[int]:
        return self._map[loc]

    def set(self, loc: int, value: Optional[int]) -> "Heap":
        rest = tuple((l, v) for l, v in self.cells if l != loc)
        return Heap(rest + ((loc, value),))

    def as_dict(self) -> dict[int, Optional[int]]:
        return self._map

    def __str__(self) -> str:
        inner = ", ".join(f"l{l}={format_cell(v)}" for l, v in self.cells)
        return "{" + inner + "}"


@dataclass(frozen=True)
class State:
    store: Store
    heap: Heap

    def __str__(self) -> str:
        return f"{self.store} | {self.heap}"


EMPTY_STATE = State(Store(), Heap())


def format_value(v: int) -> str:
    return "null" if v == NULL_VALUE else f"l{v}"


def format_cell(v: Optional[int]) -> str:
    return "⊥" if v is None else format_value(v)


def format_state(state: State) -> str:
    return str(state)


# ---------------------------------------------------------------------------
# Satisfaction
# ---------------------------------------------------------------------------

def _pure_holds(atom: PureAtom, store: Store) -> bool:
    l, r = store.eval_term(atom.lhs), store.eval_term(atom.rhs)
    return (l == r) if atom.kind == "eq" else (l != r)


def _env_value(env: dict[str, int], t: Term) -> int:
    if isinstance(t, Var):
        return env.get(t.name, NULL_VALUE)
    return NULL_VALUE


def _heap_holds_env(env: dict[str, int], heap_map: dict[int, Optional[int]],
                    h: SymbolicHeap) -> bool:
    required: dict[int, Optional[int]] = {}
    for a in h.atoms:
        if isinstance(a, PureAtom):
            same = _env_value(env, a.lhs) == _env_value(env, a.rhs)
            if same != (a.kind == "eq"):
                return False
        elif isinstance(a, PointsTo):
            loc = env.get(a.src.name, NULL_VALUE)
            if loc in required:
                return False
            required[loc] = _env_value(env, a.dst)
        else:  # NegPoints
            loc = env.get(a.src.name, NULL_VALUE)
            if loc in required:
                return False
            required[loc] = BOT
    return required == heap_map


def heap_holds(state: State, h: SymbolicHeap) -> bool:
    """Direct check: pure atoms hold on the store and the spatial atoms
    carve the heap exactly (each allocates a distinct singleton cell)."""
    return _heap_holds_env(dict(state.store.bindings), state.heap.as_dict(), h)


def _qheap_holds(env: dict[str, int], heap_map: dict[int, Optional[int]],
                 d: QuantifiedHeap, values: tuple[int, ...]) -> bool:
    if not d.binders:
        return _heap_holds_env(env, heap_map, d.body)
    names = [b.name for b in d.binders]
    saved = {n: env[n] for n in names if n in env}
    try:
        for combo in itertools.product(values, repeat=len(names)):
            for n, v in zip(names, combo):
                env[n] = v
            if _heap_holds_env(env, heap_map, d.body):
                return True
        return False
    finally:
        for n in names:
            env.pop(n, None)
        env.update(saved)


def satisfies(state: State, assertion: Assertion | QuantifiedHeap | SymbolicHeap,
              spec: DomainSpec) -> bool:
    """Satisfaction relation; existentials range over the domain's values."""
    env = dict(state.store.bindings)
    heap_map = state.heap.as_dict()
    if isinstance(assertion, SymbolicHeap):
        return _heap_holds_env(env, heap_map, assertion)
    if isinstance(assertion, QuantifiedHeap):
        return _qheap_holds(env, heap_map, assertion, spec.values)
    return any(_qheap_holds(env, heap_map, d, spec.values)
               for d in assertion.disjuncts)


# ---------------------------------------------------------------------------
# Transition relation
# ---------------------------------------------------------------------------

def execute(state: State, cmd: Command, exit_: Exit, loop_bound: int,
            spec: DomainSpec) -> frozenset[State]:
    """All states reachable from ``state`` under ``cmd`` with the given
    exit condition; loops are truncated at ``loop_bound`` iterations."""
    ok = exit_ is Exit.OK
    s, h = state.store, state.heap

    if isinstance(cmd, Skip):
        return frozenset((state,)) if ok else frozenset()
    if isinstance(cmd, ErrorCmd):
        return frozenset() if ok else frozenset((state,))
    if isinstance(cmd, Assign):
        if not ok:
            return frozenset()
        return frozenset((State(s.set(cmd.var, s.eval_term(cmd.term)), h),))
    if isinstance(cmd, Havoc):
        if not ok:
            return frozenset()
        return frozenset(State(s.set(cmd.var, v), h) for v in spec.values)
    if isinstance(cmd, Assume):
        if not ok:
            return frozenset()
        if all(_pure_holds(a, s) for a in cmd.cond.pure_atoms):
            return frozenset((state,))
        return frozenset()
    if isinstance(cmd, Seq):
        if ok:
            out: set[State] = set()
            for mid in execute(state, cmd.first, Exit.OK, loop_bound, spec):
                out |= execute(mid, cmd.second, Exit.OK, loop_bound, spec)
            return frozenset(out)
        out = set(execute(state, cmd.first, Exit.ER, loop_bound, spec))
        for mid in execute(state, cmd.first, Exit.OK, loop_bound, spec):
            out |= execute(mid, cmd.second, Exit.ER, loop_bound, spec)
        return frozenset(out)
    if isinstance(cmd, Choice):
        return execute(state, cmd.left, exit_, loop_bound, spec) | \
            execute(state, cmd.right, exit_, loop_bound, spec)
    if isinstance(cmd, Star):
        frontier: set[State] = {state}
        ok_states: set[State] = {state}
        er_states: set[State] = set()
        for _ in range(loop_bound):
            if not frontier:
                break
            if not ok:
                for mid in frontier:
                    er_states |= execute(mid, cmd.body, Exit.ER, loop_bound, spec)
            nxt: set[State] = set()
            for mid in frontier:
                nxt |= execute(mid, cmd.body, Exit.OK, loop_bound, spec)
            frontier = nxt - ok_states
            ok_states |= nxt
        return frozenset(ok_states) if ok else frozenset(er_states)
    if isinstance(cmd, Local):
        out = set()
        old = s.get(cmd.var)
        for v in spec.values:
            inner = State(s.set(cmd.var, v), h)
            for (s2, h2) in ((st.store, st.heap)
                             for st in execute(inner, cmd.body, exit_, loop_bound, spec)):
                out.add(State(s2.set(cmd.var, old), h2))
        return frozenset(out)
    if isinstance(cmd, Alloc):
        if not ok:
            return frozenset()
        dom = h.dom
        admissible = [l for l in spec.locations
                      if l not in dom or h.get(l) is BOT]
        if not admissible:
            raise DomainExhausted(
                f"alloc: no free or deallocated location among {len(spec.locations)}")
        return frozenset(State(s.set(cmd.var, l), h.set(l, v))
                         for l in admissible for v in spec.values)
    if isinstance(cmd, Free):
        loc = s.get(cmd.var)
        if loc in h.dom_plus:
            return frozenset((State(s, h.set(loc, BOT)),)) if ok else frozenset()
        return frozenset() if ok else frozenset((state,))
    if isinstance(cmd, Load):
        loc = s.get(cmd.src)
        if loc in h.dom_plus:
            if not ok:
                return frozenset()
            return frozenset((State(s.set(cmd.dst, h.get(loc)), h),))
        return frozenset() if ok else frozenset((state,))
    if isinstance(cmd, StoreCmd):
        loc = s.get(cmd.dst)
        if loc in h.dom_plus:
            if not ok:
                return frozenset()
            return frozenset((State(s, h.set(loc, s.eval_term(cmd.value))),))
        return frozenset() if ok else frozenset((state,))
    raise TypeError(f"execute: not a core command: {cmd!r}")


# ---------------------------------------------------------------------------
# Enumeration and brute-force oracles
# ---------------------------------------------------------------------------

def enum_heaps(spec: DomainSpec) -> Iterator[Heap]:
    cell_values = spec.values + (BOT,)
    for k in range(spec.max_cells + 1):
        for locs in itertools.combinations(spec.locations, k):
            for vals in itertools.product(cell_values, repeat=k):
                yield Heap(tuple(zip(locs, vals)))


def enum_states(variables: Iterable[Var], spec: DomainSpec) -> Iterator[State]:
    """Every store over ``variables`` crossed with every heap within the
    domain's caps; deterministic order."""
    names = sorted({v.name for v in variables})
    heaps = list(enum_heaps(spec))
    for values in itertools.product(spec.values, repeat=len(names)):
        store = Store(tuple(zip(names, values)))
        for h in heaps:
            yield State(store, h)


def brute_wpo(pre: Assertion, cmd: Command, exit_: Exit, spec: DomainSpec,
              loop_bound: int) -> frozenset[State]:
    """Reachable post-states: run every enumerated pre-model through the
    transition relation."""
    out: set[State] = set()
    for state in enum_states(fv(pre) | fv(cmd), spec):
        if satisfies(state, pre, spec):
            out |= execute(state, cmd, exit_, loop_bound, spec)
    return frozenset(out)


def _q_cell_bound(post: Assertion) -> int:
    counts = [len(d.body.spatial_atoms) for d in post.disjuncts]
    return max(counts, default=0)


def brute_valid(triple: Triple, spec: DomainSpec, loop_bound: int) -> bool:
    """Validity relativized to the finite domain and loop bound: every
    enumerated post-model is reachable from some pre-model.

    Candidate post-states are enumerated with the cell cap raised to the
    postcondition's spatial width, since models of a disjunct have exactly
    one cell per spatial atom.
    """
    reachable = brute_wpo(triple.pre, triple.cmd, triple.exit, spec, loop_bound)
    out_spec = spec.with_cells(max(spec.max_cells, _q_cell_bound(triple.post)))
    names = fv(triple.pre) | fv(triple.cmd) | fv(triple.post)
    for state in enum_states(names, out_spec):
        if satisfies(state, triple.post, out_spec) and state not in reachable:
            return False
    return True
