"""Weakest-postcondition computation over symbolic heaps.

``wpo(P, C, ε)`` canonicalizes P for C, maps the per-heap table ``wpo_sh``
over the disjunct bodies, re-wraps the binders and flattens into
disjunctive normal form.  Loops are unfolded up to a configured bound; an
optional early exit detects that the next unfolding is entailed by the
accumulated disjunction, in which case the bounded result is exact for
every larger bound.

All fresh names avoid an explicitly threaded set, so outputs are
deterministic and no introduced binder collides with the free variables
of the inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .canonical import (
    DEFAULT_VAR_CAP, alias_candidates, ca_vars, cano, is_canonical,
    satisfiable,
)
from .entailment import entails_syntactic
from .syntax import (
    Alloc, Assertion, Assign, Assume, Choice, Command, ErrorCmd, Exit, FALSE,
    Free, Havoc, Load, Local, NegPoints, PointsTo, PureAtom, QuantifiedHeap,
    Seq, Skip, Star, Store, SymbolicHeap, Var, assertion_of_heap,
    eliminate_one_point, eq, fresh_var, fv, or_assertions,
    rename_binders_away, subst_assertion, subst_atom, subst_heap, subst_term,
)


class NotCanonicalError(Exception):
    """A heap-accessing row was reached with a non-canonical heap."""


@dataclass(frozen=True)
class WpoConfig:
    loop_bound: int = 3
    var_cap: int = DEFAULT_VAR_CAP
    prune: bool = True
    early_exit: bool = True


@dataclass(frozen=True)
class WpoResult:
    assertion: Assertion
    loops_exact: bool  # every Star unfolding reached an entailment fixpoint


@dataclass
class _Ctx:
    cfg: WpoConfig
    loops_exact: bool = True


def wpo(pre: Assertion, cmd: Command, exit_: Exit,
        cfg: WpoConfig = WpoConfig()) -> Assertion:
    return wpo_info(pre, cmd, exit_, cfg).assertion


def wpo_info(pre: Assertion, cmd: Command, exit_: Exit,
             cfg: WpoConfig = WpoConfig()) -> WpoResult:
    ctx = _Ctx(cfg)
    result = _wpo(pre, cmd, exit_, ctx, frozenset(fv(pre) | fv(cmd)))
    return WpoResult(result, ctx.loops_exact)


def wpo_sh(h: SymbolicHeap, cmd: Command, exit_: Exit,
           cfg: WpoConfig = WpoConfig()) -> Assertion:
    """Per-heap table; the heap must be canonical for heap-accessing
    commands (``wpo`` canonicalizes first)."""
    ctx = _Ctx(cfg)
    return _wpo_sh(h, cmd, exit_, ctx, frozenset(fv(h) | fv(cmd)))


def star_iterates(h: SymbolicHeap, body: Command,
                  cfg: WpoConfig = WpoConfig()) -> tuple[list[Assertion], list[Assertion], bool]:
    """The bounded loop unfolding used by the Star rows (see unfold_star)."""
    ctx = _Ctx(cfg)
    return unfold_star(h, body, ctx, frozenset(fv(h) | fv(body)))


# ---------------------------------------------------------------------------
# Internals
# ---------------------------------------------------------------------------

def _wpo(pre: Assertion, cmd: Command, exit_: Exit, ctx: _Ctx,
         avoid: frozenset[Var]) -> Assertion:
    canonical = cano(pre, cmd, cap=ctx.cfg.var_cap, avoid=avoid)
    out: list[QuantifiedHeap] = []
    seen: set[QuantifiedHeap] = set()
    for d in canonical.disjuncts:
        inner_avoid = avoid | fv(d.body) | set(d.binders)
        result = _wpo_sh(d.body, cmd, exit_, ctx, inner_avoid)
        for r in result.disjuncts:
            merged = eliminate_one_point(QuantifiedHeap(d.binders + r.binders, r.body))
            if ctx.cfg.prune and not satisfiable(merged.body):
                continue
            if merged not in seen:
                seen.add(merged)
                out.append(merged)
    if ctx.cfg.prune:
        out = _drop_twin_subsumed(out)
    return Assertion(tuple(out))


def _reduce_neq_only(d: QuantifiedHeap) -> QuantifiedHeap:
    """Delete binders whose every occurrence is in a disequality, together
    with those atoms.  The reduced disjunct is weaker in every domain, so a
    disjunct may be dropped when its reduction is already present."""
    binders = set(d.binders)
    body = d.body
    changed = True
    while changed:
        changed = False
        for b in list(binders):
            occurrences = [a for a in body.atoms if b in fv(a)]
            if occurrences and all(isinstance(a, PureAtom) and a.kind == "neq"
                                   for a in occurrences):
                binders.discard(b)
                body = SymbolicHeap(tuple(a for a in body.atoms if b not in fv(a)))
                changed = True
    return QuantifiedHeap(tuple(b for b in d.binders if b in binders), body)


def _drop_twin_subsumed(disjuncts: list[QuantifiedHeap]) -> list[QuantifiedHeap]:
    present = set(disjuncts)
    kept = []
    for d in disjuncts:
        reduced = _reduce_neq_only(d)
        if reduced != d and reduced in present:
            continue
        kept.append(d)
    return kept


def _wpo_sh(h: SymbolicHeap, cmd: Command, exit_: Exit, ctx: _Ctx,
            avoid: frozenset[Var]) -> Assertion:
    ok = exit_ is Exit.OK

    if isinstance(cmd, Skip):
        return assertion_of_heap(h) if ok else FALSE
    if isinstance(cmd, ErrorCmd):
        return FALSE if ok else assertion_of_heap(h)
    if isinstance(cmd, Assume):
        return assertion_of_heap(h.star(cmd.cond)) if ok else FALSE
    if isinstance(cmd, Assign):
        if not ok:
            return FALSE
        xp = fresh_var(cmd.var, avoid)
        body = subst_heap(h, cmd.var, xp).star(
            SymbolicHeap((eq(cmd.var, subst_term(cmd.term, cmd.var, xp)),)))
        return Assertion((QuantifiedHeap((xp,), body),))
    if isinstance(cmd, Havoc):
        if not ok:
            return FALSE
        xp = fresh_var(cmd.var, avoid)
        return Assertion((QuantifiedHeap((xp,), subst_heap(h, cmd.var, xp)),))
    if isinstance(cmd, Seq):
        first_ok = _wpo_sh(h, cmd.first, Exit.OK, ctx, avoid)
        if ok:
            return _wpo(first_ok, cmd.second, Exit.OK, ctx, avoid)
        return or_assertions(
            _wpo_sh(h, cmd.first, Exit.ER, ctx, avoid),
            _wpo(first_ok, cmd.second, Exit.ER, ctx, avoid))
    if isinstance(cmd, Choice):
        return or_assertions(_wpo_sh(h, cmd.left, exit_, ctx, avoid),
                             _wpo_sh(h, cmd.right, exit_, ctx, avoid))
    if isinstance(cmd, Star):
        iterates, error_terms, _ = unfold_star(h, cmd.body, ctx, avoid)
        return or_assertions(*iterates) if ok else or_assertions(*error_terms)
    if isinstance(cmd, Local):
        return _wpo_local(h, cmd, exit_, ctx, avoid)
    if isinstance(cmd, Alloc):
        return _wpo_alloc(h, cmd, exit_, ctx, avoid)
    if isinstance(cmd, Free):
        return _wpo_free(h, cmd, exit_, ctx, avoid)
    if isinstance(cmd, Load):
        return _wpo_load(h, cmd, exit_, ctx, avoid)
    if isinstance(cmd, Store):
        return _wpo_store(h, cmd, exit_, ctx, avoid)
    raise TypeError(f"wpo_sh: not a core command: {cmd!r}")


def unfold_star(h: SymbolicHeap, body: Command, ctx: _Ctx,
                avoid: frozenset[Var]) -> tuple[list[Assertion], list[Assertion], bool]:
    """Loop unfolding: iterate Υ(0)=ψ, Υ(n+1)=wpo(Υ(n), body, ok).

    Returns the Υ family (bounded normal-exit disjuncts), the per-iteration
    error terms wpo(Υ(n), body, er), and whether an entailment fixpoint made
    the bounded family exact.  At bound B the normal union ranges over
    Υ(0..B) and the error union over iterations 0..B-1, matching the
    transition relation truncated at B runs of the body.
    """
    iterates: list[Assertion] = [assertion_of_heap(h)]
    error_terms: list[Assertion] = []
    for _ in range(ctx.cfg.loop_bound):
        current = iterates[-1]
        error_terms.append(_wpo(current, body, Exit.ER, ctx, avoid))
        nxt = _wpo(current, body, Exit.OK, ctx, avoid)
        if ctx.cfg.early_exit and \
                entails_syntactic(nxt, or_assertions(*iterates), ctx.cfg.var_cap):
            return iterates, error_terms, True
        iterates.append(nxt)
    ctx.loops_exact = False
    return iterates, error_terms, False


def _wpo_local(h: SymbolicHeap, cmd: Local, exit_: Exit, ctx: _Ctx,
               avoid: frozenset[Var]) -> Assertion:
    x = cmd.var
    xp = fresh_var(x, avoid | {x})
    xq = fresh_var(x, avoid | {x, xp})
    shifted = subst_heap(h, x, xp)
    inner = _wpo(assertion_of_heap(shifted), cmd.body, exit_, ctx,
                 avoid | {x, xp, xq})
    renamed = Assertion(tuple(rename_binders_away(d, {x, xp, xq})
                              for d in inner.disjuncts))
    result = subst_assertion(subst_assertion(renamed, x, xq), xp, x)
    return Assertion(tuple(QuantifiedHeap((xq,) + d.binders, d.body)
                           for d in result.disjuncts))


def _require_access_verdicts(x: Var, h: SymbolicHeap, cmd: Command) -> None:
    """The Free/Load/Store rows are sound only when the heap decides the
    accessed variable against every spatial source; canonical heaps always
    do.  Raising here flags a caller that skipped canonicalization."""
    decided = {frozenset((p.lhs, p.rhs)) for p in h.pure_atoms}
    for a in h.atoms:
        if isinstance(a, (PointsTo, NegPoints)):
            if a.src != x and frozenset((x, a.src)) not in decided:
                raise NotCanonicalError(
                    f"{h} does not decide {x} against {a.src}; "
                    f"canonicalize for {cmd} first")


def _wpo_alloc(h: SymbolicHeap, cmd: Alloc, exit_: Exit, ctx: _Ctx,
               avoid: frozenset[Var]) -> Assertion:
    if exit_ is Exit.ER:
        return FALSE
    x = cmd.var
    xp = fresh_var(x, avoid | {x})
    vv = fresh_var("v", avoid | {x, xp})
    negs = [a for a in h.atoms if isinstance(a, NegPoints)]
    rest = SymbolicHeap(tuple(a for a in h.atoms if not isinstance(a, NegPoints)))
    disjuncts = [QuantifiedHeap(
        (xp, vv), subst_heap(h, x, xp).star(SymbolicHeap((PointsTo(x, vv),))))]
    # reuse of a deallocated cell: one disjunct per negative atom, whose
    # source (under the old-value renaming) the fresh cell aliases
    for j, neg in enumerate(negs):
        others = tuple(subst_atom(a, x, xp) for i, a in enumerate(negs) if i != j)
        glue = eq(x, subst_term(neg.src, x, xp))
        body = SymbolicHeap(others + (PointsTo(x, vv), glue)).star(
            subst_heap(rest, x, xp))
        disjuncts.append(QuantifiedHeap((xp, vv), body))
    return Assertion(tuple(disjuncts))


def _aliased_cell(x: Var, h: SymbolicHeap) -> PointsTo | None:
    """The points-to atom whose source is x or an explicit alias of x."""
    candidates = set(alias_candidates(x, h))
    for a in h.atoms:
        if isinstance(a, PointsTo) and a.src in candidates:
            return a
    return None


def _wpo_free(h: SymbolicHeap, cmd: Free, exit_: Exit, ctx: _Ctx,
              avoid: frozenset[Var]) -> Assertion:
    _require_access_verdicts(cmd.var, h, cmd)
    cell = _aliased_cell(cmd.var, h)
    if exit_ is Exit.OK:
        if cell is None:
            return FALSE
        return assertion_of_heap(h.without(cell).star(
            SymbolicHeap((NegPoints(cell.src),))))
    return assertion_of_heap(h) if cell is None else FALSE


def _wpo_load(h: SymbolicHeap, cmd: Load, exit_: Exit, ctx: _Ctx,
              avoid: frozenset[Var]) -> Assertion:
    _require_access_verdicts(cmd.src, h, cmd)
    cell = _aliased_cell(cmd.src, h)
    if exit_ is Exit.ER:
        return assertion_of_heap(h) if cell is None else FALSE
    if cell is None:
        return FALSE
    x = cmd.dst
    xp = fresh_var(x, avoid | {x})
    body = subst_heap(h, x, xp).star(
        SymbolicHeap((eq(x, subst_term(cell.dst, x, xp)),)))
    return Assertion((QuantifiedHeap((xp,), body),))


def _wpo_store(h: SymbolicHeap, cmd: Store, exit_: Exit, ctx: _Ctx,
               avoid: frozenset[Var]) -> Assertion:
    _require_access_verdicts(cmd.dst, h, cmd)
    cell = _aliased_cell(cmd.dst, h)
    if exit_ is Exit.ER:
        return assertion_of_heap(h) if cell is None else FALSE
    if cell is None:
        return FALSE
    return assertion_of_heap(h.without(cell).star(
        SymbolicHeap((PointsTo(cell.src, cmd.value),))))
