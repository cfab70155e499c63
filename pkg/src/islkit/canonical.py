"""Satisfiability, alias classes, case analysis and canonicalization.

A symbolic heap is *canonical* for a variable set V when it commits to an
equality or disequality for every pair of terms over V ∪ {null}
(tautological ``t == t`` atoms are implicit and never stored).  Case
analysis extends a heap with every satisfiable such commitment; since a
non-transitive commitment is unsatisfiable, enumerating set partitions of
V ∪ {null} is extensionally the same as enumerating reflexive-symmetric
relations and filtering, at Bell-number instead of exponential cost.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterable, Sequence

from .syntax import (
    NULL, Assertion, Command, NegPoints, PointsTo, PureAtom, QuantifiedHeap,
    SymbolicHeap, Term, Var, eliminate_one_point, eq, fv, neq,
    rename_binders_away, term_key,
)

DEFAULT_VAR_CAP = 7


class VarLimitError(Exception):
    """Case analysis refused: too many variables for the Bell-number blowup."""

    def __init__(self, n_vars: int, cap: int):
        super().__init__(
            f"case analysis over {n_vars} variables exceeds the cap of {cap}; "
            f"raise the cap if you accept Bell({n_vars + 1}) disjuncts")
        self.n_vars = n_vars
        self.cap = cap


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[Term, Term] = {}

    def find(self, t: Term) -> Term:
        parent = self.parent
        if t not in parent:
            parent[t] = t
            return t
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    def union(self, a: Term, b: Term) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the smallest term of a class as its representative
            if term_key(ra) <= term_key(rb):
                self.parent[rb] = ra
            else:
                self.parent[ra] = rb


class AliasClasses:
    """Partition of a heap's terms (plus null) into equality classes,
    together with the asserted disequalities."""

    def __init__(self, h: SymbolicHeap, extra_terms: Iterable[Term] = ()):
        uf = _UnionFind()
        terms: set[Term] = {NULL}
        terms.update(extra_terms)
        for a in h.atoms:
            if isinstance(a, PureAtom):
                terms.add(a.lhs)
                terms.add(a.rhs)
            elif isinstance(a, PointsTo):
                terms.add(a.src)
                terms.add(a.dst)
            elif isinstance(a, NegPoints):
                terms.add(a.src)
        for t in terms:
            uf.find(t)
        for a in h.atoms:
            if isinstance(a, PureAtom) and a.kind == "eq":
                uf.union(a.lhs, a.rhs)
        self._uf = uf
        self._terms = terms
        self.disequalities: list[tuple[Term, Term]] = [
            (a.lhs, a.rhs) for a in h.atoms
            if isinstance(a, PureAtom) and a.kind == "neq"
        ]

    def rep(self, t: Term) -> Term:
        return self._uf.find(t)

    def same(self, a: Term, b: Term) -> bool:
        return self.rep(a) == self.rep(b)

    def classes(self) -> list[tuple[Term, ...]]:
        groups: dict[Term, list[Term]] = {}
        for t in self._terms:
            groups.setdefault(self.rep(t), []).append(t)
        out = [tuple(sorted(g, key=term_key)) for g in groups.values()]
        return sorted(out, key=lambda g: term_key(g[0]))

    @property
    def terms(self) -> frozenset[Term]:
        return frozenset(self._terms)


def satisfiable(h: SymbolicHeap) -> bool:
    """Decide satisfiability of a quantifier-free symbolic heap.

    Unsatisfiable exactly when an asserted disequality collapses into one
    equality class, a spatial source is equal to null, or two spatial
    atoms have equal sources (separation forces disjoint singleton cells).
    Otherwise a witness exists over a large enough domain, one location
    per non-null class.
    """
    ac = AliasClasses(h)
    for (l, r) in ac.disequalities:
        if ac.same(l, r):
            return False
    sources: list[Term] = [a.src for a in h.atoms
                           if isinstance(a, (PointsTo, NegPoints))]
    reps = []
    for s in sources:
        if ac.same(s, NULL):
            return False
        reps.append(ac.rep(s))
    return len(set(reps)) == len(reps)


def aliases(x: Var, h: SymbolicHeap) -> frozenset[Var]:
    """Variables v with an explicit ``x == v`` (either orientation) in h."""
    out = set()
    for a in h.atoms:
        if isinstance(a, PureAtom) and a.kind == "eq":
            if a.lhs == x and isinstance(a.rhs, Var):
                out.add(a.rhs)
            elif a.rhs == x and isinstance(a.lhs, Var):
                out.add(a.lhs)
    out.discard(x)
    return frozenset(out)


def alias_candidates(x: Var, h: SymbolicHeap) -> tuple[Var, ...]:
    """``x`` itself plus its explicit aliases, deterministically ordered.

    Canonical heaps carry the tautology ``x == x`` implicitly, so the
    machinery that scans for an aliased cell must consider x too.
    """
    return (x,) + tuple(sorted(aliases(x, h), key=term_key))


def _iter_partitions(items: Sequence[Term]):
    """Set partitions in restricted-growth order; blocks keep item order."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for sub in _iter_partitions(rest):
        for i in range(len(sub)):
            yield sub[:i] + [[first] + sub[i]] + sub[i + 1:]
        yield [[first]] + sub


@lru_cache(maxsize=4096)
def _partitions_of(items: tuple[Term, ...]) -> tuple[tuple[tuple[Term, ...], ...], ...]:
    return tuple(tuple(tuple(b) for b in blocks)
                 for blocks in _iter_partitions(items))


def pi(variables: Iterable[Var]) -> tuple[SymbolicHeap, ...]:
    """One pure heap per set partition of V ∪ {null}: intra-class pairs as
    equalities, cross-class pairs as disequalities (diagonal implicit)."""
    items: tuple[Term, ...] = tuple(sorted(set(variables), key=term_key)) + (NULL,)
    out = []
    for blocks in _partitions_of(items):
        block_of = {}
        for i, b in enumerate(blocks):
            for t in b:
                block_of[t] = i
        atoms = []
        for a, b in itertools.combinations(items, 2):
            atoms.append(eq(a, b) if block_of[a] == block_of[b] else neq(a, b))
        out.append(SymbolicHeap(tuple(atoms)))
    return tuple(out)


def ca_vars(h: SymbolicHeap, variables: Iterable[Var],
            cap: int = DEFAULT_VAR_CAP) -> tuple[SymbolicHeap, ...]:
    """Case analysis of ``h`` over an explicit variable set.

    A partition of the terms decides every pair, so the satisfiability
    filter reduces to direct block checks against the heap's own atoms; no
    candidate is materialized unless it survives.
    """
    vs = set(variables) | fv(h)
    if len(vs) > cap:
        raise VarLimitError(len(vs), cap)
    items: tuple[Term, ...] = tuple(sorted(vs, key=term_key)) + (NULL,)

    eq_pairs: list[tuple[Term, Term]] = []
    neq_pairs: list[tuple[Term, Term]] = []
    sources: list[Term] = []
    present: set[tuple[Term, Term]] = set()
    for a in h.atoms:
        if isinstance(a, PureAtom):
            present.add((a.lhs, a.rhs))
            (eq_pairs if a.kind == "eq" else neq_pairs).append((a.lhs, a.rhs))
        elif isinstance(a, (PointsTo, NegPoints)):
            sources.append(a.src)

    out = []
    for blocks in _partitions_of(items):
        block_of: dict[Term, int] = {}
        for i, b in enumerate(blocks):
            for t in b:
                block_of[t] = i
        if any(block_of[a] != block_of[b] for a, b in eq_pairs):
            continue
        if any(block_of[a] == block_of[b] for a, b in neq_pairs):
            continue
        null_block = block_of[NULL]
        src_blocks = [block_of[s] for s in sources]
        if null_block in src_blocks or len(set(src_blocks)) != len(src_blocks):
            continue
        extra = []
        for a, b in itertools.combinations(items, 2):
            if (a, b) in present or (b, a) in present:
                continue
            extra.append(eq(a, b) if block_of[a] == block_of[b] else neq(a, b))
        out.append(SymbolicHeap(tuple(extra) + h.atoms))
    return tuple(out)


def ca(h: SymbolicHeap, cmd: Command, cap: int = DEFAULT_VAR_CAP) -> tuple[SymbolicHeap, ...]:
    """Case analysis of ``h`` against the variables of a command."""
    return ca_vars(h, fv(h) | fv(cmd), cap)


def is_canonical(h: SymbolicHeap, variables: Iterable[Var]) -> bool:
    """Does ``h`` decide every pair of terms over V ∪ {null}?"""
    items: list[Term] = sorted(set(variables), key=term_key) + [NULL]
    decided = set()
    for a in h.atoms:
        if isinstance(a, PureAtom):
            decided.add(frozenset((a.lhs, a.rhs)))
    for a, b in itertools.combinations(items, 2):
        if frozenset((a, b)) not in decided:
            return False
    return True


def cano(assertion: Assertion, cmd: Command, cap: int = DEFAULT_VAR_CAP,
         avoid: frozenset[Var] = frozenset()) -> Assertion:
    """Canonicalize an assertion for a command: alpha-rename binders away
    from the command's variables, case-analyze each disjunct, re-wrap."""
    cmd_vars = fv(cmd)
    out: list[QuantifiedHeap] = []
    for d in assertion.disjuncts:
        d = rename_binders_away(d, cmd_vars | avoid)
        for piece in ca_vars(d.body, fv(d.body) | cmd_vars, cap):
            out.append(eliminate_one_point(QuantifiedHeap(d.binders, piece)))
    return Assertion(tuple(out))
