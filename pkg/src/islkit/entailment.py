"""Entailment between assertions of the fragment.

The decision procedure works per canonical piece of the antecedent: a
satisfiable canonical heap's models differ only in which distinct
locations its equality classes name, so a consequent disjunct holds in
one model iff it holds in all of them.  Existential binders of the
consequent are instantiated either by an antecedent class or by a "fresh"
token standing for a value outside every class (fresh tokens cannot occur
in spatial atoms: every cell of a model sits at a class location).

The semantic cross-check ``entails_oracle`` enumerates a finite domain;
``entails`` combines both: the syntactic answer, and on a refutation a
replayable finite-domain counterexample.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .canonical import (
    DEFAULT_VAR_CAP, AliasClasses, VarLimitError, ca_vars, is_canonical,
    satisfiable,
)
from .semantics import DomainSpec, State, enum_states, satisfies
from .syntax import (
    Assertion, NegPoints, PointsTo, PureAtom, QuantifiedHeap, SymbolicHeap,
    Term, Var, eliminate_one_point, fv, rename_binders_away, term_key,
)


@dataclass(frozen=True)
class EntailVerdict:
    status: str  # 'holds' | 'fails' | 'unknown'
    counterexample: Optional[State] = None
    domain: Optional[DomainSpec] = None
    reason: Optional[str] = None

    @property
    def holds(self) -> bool:
        return self.status == "holds"

    def __str__(self) -> str:
        if self.status == "holds":
            return "holds"
        if self.status == "fails":
            return f"fails (counterexample {self.counterexample})"
        return f"unknown ({self.reason})"


HOLDS = EntailVerdict("holds")


# ---------------------------------------------------------------------------
# Syntactic procedure
# ---------------------------------------------------------------------------

# Instantiation values are comparable tagged tuples: ("cls", term_key(rep))
# for an antecedent equality class, ("tok", i) for the i-th fresh token
# (pairwise distinct, distinct from every class value).

def _cls_value(ac: AliasClasses, t: Term) -> tuple:
    return ("cls", term_key(ac.rep(t)))


def _spatial_profile(h: SymbolicHeap, ac: AliasClasses) -> list[tuple]:
    out = []
    for a in h.atoms:
        if isinstance(a, PointsTo):
            out.append(("pt", _cls_value(ac, a.src), _cls_value(ac, a.dst)))
        elif isinstance(a, NegPoints):
            out.append(("np", _cls_value(ac, a.src), ()))
    out.sort()
    return out


def entails_sh(h: SymbolicHeap, target: QuantifiedHeap) -> bool:
    """Does every model of the canonical heap ``h`` satisfy ``target``?

    ``h`` must be satisfiable and canonical over its own variables plus
    the target's free variables.  Binder instantiation is a backtracking
    search: pure atoms prune as soon as both sides are assigned, and
    binders in spatial positions only range over matching classes.
    """
    target = eliminate_one_point(
        rename_binders_away(target, fv(h) | fv(target.body)))
    free_needed = fv(target) | fv(h)
    if not is_canonical(h, free_needed):
        # the disequality reasoning below is only tight on canonical heaps;
        # case-analyze first (every model of h lands in some piece)
        return all(entails_sh(piece, target)
                   for piece in ca_vars(h, free_needed))
    if not satisfiable(h):
        return True

    ac = AliasClasses(h, extra_terms=free_needed)
    class_values = sorted({_cls_value(ac, t) for t in ac.terms})
    h_spatial = _spatial_profile(h, ac)

    binders = target.binders
    body = target.body
    if len(body.spatial_atoms) != len(h_spatial):
        return False  # no multiset bijection is possible

    def val(assign: dict[Var, tuple], t: Term) -> Optional[tuple]:
        if isinstance(t, Var) and t in binder_set:
            return assign.get(t)
        return _cls_value(ac, t)

    binder_set = set(binders)
    src_classes = sorted({s for tag, s, _ in h_spatial})
    tgt_classes = sorted({d for tag, s, d in h_spatial if tag == "pt"})

    # pools: binders in spatial source/target positions can only take the
    # corresponding antecedent classes; others range over every class plus
    # one pairwise-distinct fresh token per binder
    in_src = set()
    in_tgt = set()
    for a in body.atoms:
        if isinstance(a, PointsTo):
            in_src.add(a.src)
            if isinstance(a.dst, Var):
                in_tgt.add(a.dst)
        elif isinstance(a, NegPoints):
            in_src.add(a.src)
    pools = []
    for i, b in enumerate(binders):
        if b in in_src:
            pools.append(list(src_classes))
        elif b in in_tgt:
            pools.append(list(tgt_classes))
        else:
            pools.append(class_values + [("tok", j) for j in range(i + 1)])

    # pure atoms become checkable once their latest binder is assigned
    level_of = {b: i for i, b in enumerate(binders)}
    checks_at: list[list[PureAtom]] = [[] for _ in range(len(binders) + 1)]
    for a in body.atoms:
        if isinstance(a, PureAtom):
            lvl = max((level_of[t] + 1 for t in (a.lhs, a.rhs)
                       if isinstance(t, Var) and t in binder_set), default=0)
            checks_at[lvl].append(a)

    def pure_ok(atoms: list[PureAtom], assign: dict[Var, tuple]) -> bool:
        for a in atoms:
            lv, rv = val(assign, a.lhs), val(assign, a.rhs)
            if (lv == rv) != (a.kind == "eq"):
                return False
        return True

    def spatial_ok(assign: dict[Var, tuple]) -> bool:
        spatial = []
        for a in body.atoms:
            if isinstance(a, PointsTo):
                spatial.append(("pt", val(assign, a.src), val(assign, a.dst)))
            elif isinstance(a, NegPoints):
                spatial.append(("np", val(assign, a.src), ()))
        spatial.sort()
        return spatial == h_spatial

    def search(i: int, assign: dict[Var, tuple]) -> bool:
        if not pure_ok(checks_at[i], assign):
            return False
        if i == len(binders):
            return spatial_ok(assign)
        for cand in pools[i]:
            assign[binders[i]] = cand
            if search(i + 1, assign):
                return True
        assign.pop(binders[i], None)
        return False

    return search(0, {})


def entails_syntactic(antecedent: Assertion, consequent: Assertion,
                      cap: int = DEFAULT_VAR_CAP) -> Optional[bool]:
    """Syntactic entailment check; None when the variable cap is exceeded."""
    shared = fv(antecedent) | fv(consequent)
    consequent_set = set(consequent.disjuncts)
    for d in antecedent.disjuncts:
        if d in consequent_set:
            continue
        d = rename_binders_away(d, shared)
        body = d.body  # binders become skolem free variables
        try:
            pieces = ca_vars(body, shared | fv(body), cap)
        except VarLimitError:
            return None
        for piece in pieces:
            if not any(entails_sh(piece, q) for q in consequent.disjuncts):
                return False
    return True


# ---------------------------------------------------------------------------
# Semantic cross-check
# ---------------------------------------------------------------------------

def entails_oracle(antecedent: Assertion, consequent: Assertion,
                   spec: DomainSpec) -> bool:
    """True iff no enumerated state satisfies the antecedent but not the
    consequent."""
    return _counterexample(antecedent, consequent, spec) is None


def _counterexample(antecedent: Assertion, consequent: Assertion,
                    spec: DomainSpec) -> Optional[State]:
    # models of the antecedent have exactly one cell per spatial atom of
    # some disjunct, so other heap sizes cannot refute
    sizes = {len(d.body.spatial_atoms) for d in antecedent.disjuncts}
    for state in enum_states(fv(antecedent) | fv(consequent), spec):
        if len(state.heap.cells) not in sizes:
            continue
        if satisfies(state, antecedent, spec) and not satisfies(state, consequent, spec):
            return state
    return None


def refutation_domain(antecedent: Assertion, consequent: Assertion) -> DomainSpec:
    """Domain big enough to exhibit a refuting antecedent model: one
    location per variable and spatial atom plus one spare."""
    n_vars = len(fv(antecedent) | fv(consequent))
    binders = max((len(d.binders) for d in antecedent.disjuncts), default=0)
    spatial = max((len(d.body.spatial_atoms) for d in antecedent.disjuncts), default=0)
    return DomainSpec.of(n_vars + binders + 1, spatial)


def entails(antecedent: Assertion, consequent: Assertion,
            cap: int = DEFAULT_VAR_CAP) -> EntailVerdict:
    """Decide antecedent ⊨ consequent; refutations carry a finite-domain
    counterexample."""
    syn = entails_syntactic(antecedent, consequent, cap)
    if syn is None:
        return EntailVerdict("unknown", reason="variable cap exceeded")
    if syn:
        return HOLDS
    spec = refutation_domain(antecedent, consequent)
    ce = _counterexample(antecedent, consequent, spec)
    if ce is None:
        spec = DomainSpec.of(len(spec.locations) + 2, spec.max_cells + 1)
        ce = _counterexample(antecedent, consequent, spec)
    if ce is None:
        return EntailVerdict(
            "unknown",
            reason="syntactic refutation but no finite counterexample found")
    return EntailVerdict("fails", counterexample=ce, domain=spec)
