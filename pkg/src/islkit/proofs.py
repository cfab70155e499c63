"""Derivation trees: rule checking and proof synthesis.

A derivation node applies one proof rule to premise subtrees; axioms with
a dual postcondition (``[P] C [ok:Q1][er:Q2]``) are stored as one node per
exit condition.  ``check_step`` validates a single application including
its side conditions (consequence steps are discharged by the entailment
module); ``check_derivation`` folds over a tree, macro-expanding the
derived Backwards Variant rule into its primitive derivation first.

``synthesize_derivation`` builds the canonical derivation of
``[P] C [ε: wpo(P, C, ε)]``: per canonical disjunct a command-directed
tree, wrapped by existential introduction, disjunction, and a final
consequence step; loops go through the bounded Backwards Variant schema.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .canonical import aliases, cano, is_canonical
from .entailment import entails
from .syntax import (
    Alloc, Assertion, Assign, Assume, Choice, Command, ErrorCmd, Exit, FALSE,
    Free, Havoc, Load, Local, NegPoints, PointsTo, QuantifiedHeap, Seq, Skip,
    Star, Store, SymbolicHeap, Triple, Var, assertion_of_heap,
    eq, fresh_var, fv, mod_of, or_assertions, rename_binders_away,
    subst_assertion, subst_atom, subst_heap, subst_term, wrap_exists,
)
from .wpo import WpoConfig, star_iterates, wpo, wpo_sh


class RuleName(enum.Enum):
    SKIP = "Skip"
    ERROR = "Error"
    SEQ1 = "Seq1"
    SEQ2 = "Seq2"
    LOOP_ZERO = "LoopZero"
    LOOP_NON_ZERO = "LoopNonZero"
    CONS = "Cons"
    DISJ = "Disj"
    CHOICE = "Choice"
    EXIST = "Exist"
    ASSIGN = "Assign"
    HAVOC = "Havoc"
    ASSUME = "Assume"
    LOCAL = "Local"
    FRAME_OK = "FrameOk"
    ALLOC1 = "Alloc1"
    ALLOC2 = "Alloc2"
    FREE = "Free"
    FREE_ER = "FreeEr"
    LOAD = "Load"
    LOAD_ER = "LoadEr"
    STORE = "Store"
    STORE_ER = "StoreEr"
    BACKWARDS_VARIANT = "BackwardsVariant"

    def __str__(self) -> str:
        return self.value


DERIVED_RULES = frozenset((RuleName.BACKWARDS_VARIANT,))

_RULE_BY_NAME = {r.value: r for r in RuleName}


@dataclass(frozen=True)
class SideData:
    """Rule-specific payload: the Exist variable, the alias witness of the
    heap rules, the frame of FrameOk, or the taken Choice branch."""

    var: Optional[Var] = None
    alias: Optional[Var] = None
    frame: Optional[QuantifiedHeap] = None
    branch: Optional[str] = None


NO_SIDE = SideData()


@dataclass(frozen=True)
class DerivationNode:
    rule: RuleName
    conclusion: Triple
    premises: tuple["DerivationNode", ...] = ()
    side: SideData = NO_SIDE


@dataclass(frozen=True)
class RuleViolation:
    reason: str
    path: tuple[int, ...] = ()

    def __str__(self) -> str:
        where = "/".join(str(i) for i in self.path) or "root"
        return f"at {where}: {self.reason}"


# ---------------------------------------------------------------------------
# Single-step checking
# ---------------------------------------------------------------------------

def _single_qf(a: Assertion) -> Optional[SymbolicHeap]:
    if len(a.disjuncts) == 1 and not a.disjuncts[0].binders:
        return a.disjuncts[0].body
    return None


def star_frame(a: Assertion, frame: QuantifiedHeap) -> Assertion:
    """Per-disjunct separating conjunction with a quantified frame; binders
    on both sides are renamed apart before hoisting the frame's."""
    out = []
    frame_free = fv(frame)
    for d in a.disjuncts:
        d = rename_binders_away(d, frame_free | set(frame.binders) | fv(frame.body))
        f = rename_binders_away(frame, set(d.binders) | fv(d.body) | frame_free)
        out.append(QuantifiedHeap(d.binders + f.binders, d.body.star(f.body)))
    return Assertion(tuple(out))


def _heap_rule_vars(cmd: Command, h: SymbolicHeap) -> frozenset[Var]:
    return fv(h) | fv(cmd)


def _find_cell(x: Var, h: SymbolicHeap, witness: Optional[Var]) -> Optional[PointsTo]:
    """The points-to atom whose source is ``witness`` (when given) or any
    alias of x, counting x itself: canonical heaps carry x == x implicitly."""
    allowed = {x} | set(aliases(x, h))
    for a in h.atoms:
        if isinstance(a, PointsTo) and a.src in allowed:
            if witness is None or a.src == witness:
                return a
    return None


def _expected_assign(h: SymbolicHeap, cmd: Assign) -> Assertion:
    xp = fresh_var(cmd.var, fv(h) | fv(cmd.term) | {cmd.var})
    body = subst_heap(h, cmd.var, xp).star(
        SymbolicHeap((eq(cmd.var, subst_term(cmd.term, cmd.var, xp)),)))
    return Assertion((QuantifiedHeap((xp,), body),))


def _expected_havoc(h: SymbolicHeap, cmd: Havoc) -> Assertion:
    xp = fresh_var(cmd.var, fv(h) | {cmd.var})
    return Assertion((QuantifiedHeap((xp,), subst_heap(h, cmd.var, xp)),))


def _expected_alloc1(h: SymbolicHeap, cmd: Alloc) -> Assertion:
    xp = fresh_var(cmd.var, fv(h) | {cmd.var})
    vv = fresh_var("v", fv(h) | {cmd.var, xp})
    body = subst_heap(h, cmd.var, xp).star(SymbolicHeap((PointsTo(cmd.var, vv),)))
    return Assertion((QuantifiedHeap((xp, vv), body),))


def _expected_alloc2(rest: SymbolicHeap, cmd: Alloc, alias: Var) -> Assertion:
    """Reuse of the deallocated cell named by ``alias``.

    For alias = x itself the new value of x equals its old value, so the
    rest of the heap persists unrenamed; the displayed renaming schema is
    unsound in that corner (its x ≈ y glue degenerates to a tautology)."""
    if alias == cmd.var:
        vv = fresh_var("v", fv(rest) | {cmd.var})
        return Assertion((QuantifiedHeap(
            (vv,), rest.star(SymbolicHeap((PointsTo(cmd.var, vv),)))),))
    xp = fresh_var(cmd.var, fv(rest) | {cmd.var, alias})
    vv = fresh_var("v", fv(rest) | {cmd.var, alias, xp})
    body = SymbolicHeap((PointsTo(cmd.var, vv), eq(cmd.var, alias))).star(
        subst_heap(rest, cmd.var, xp))
    return Assertion((QuantifiedHeap((xp, vv), body),))


def _expected_load(h: SymbolicHeap, cmd: Load, cell: PointsTo) -> Assertion:
    xp = fresh_var(cmd.dst, fv(h) | {cmd.dst, cmd.src})
    body = subst_heap(h, cmd.dst, xp).star(
        SymbolicHeap((eq(cmd.dst, subst_term(cell.dst, cmd.dst, xp)),)))
    return Assertion((QuantifiedHeap((xp,), body),))


def check_step(node: DerivationNode) -> Optional[RuleViolation]:
    """Validate one rule application (premises are taken at face value)."""
    try:
        return _check_step(node)
    except Exception as exc:  # malformed side data, arity surprises, ...
        return RuleViolation(f"{node.rule}: malformed application: {exc}")


def _bad(rule: RuleName, why: str) -> RuleViolation:
    return RuleViolation(f"{rule.value}: {why}")


def _check_arity(node: DerivationNode, n: int) -> Optional[RuleViolation]:
    if len(node.premises) != n:
        return _bad(node.rule, f"expects {n} premise(s), got {len(node.premises)}")
    return None


def _check_step(node: DerivationNode) -> Optional[RuleViolation]:
    rule, concl = node.rule, node.conclusion
    cmd, ex = concl.cmd, concl.exit

    if rule is RuleName.SKIP:
        bad = _check_arity(node, 0)
        if bad:
            return bad
        if not isinstance(cmd, Skip):
            return _bad(rule, "command must be skip")
        want = concl.pre if ex is Exit.OK else FALSE
        if concl.post != want:
            return _bad(rule, f"{ex} postcondition must be {want}")
        return None

    if rule is RuleName.ERROR:
        bad = _check_arity(node, 0)
        if bad:
            return bad
        if not isinstance(cmd, ErrorCmd):
            return _bad(rule, "command must be error")
        want = concl.pre if ex is Exit.ER else FALSE
        if concl.post != want:
            return _bad(rule, f"{ex} postcondition must be {want}")
        return None

    if rule is RuleName.LOOP_ZERO:
        bad = _check_arity(node, 0)
        if bad:
            return bad
        if not isinstance(cmd, Star):
            return _bad(rule, "command must be a loop")
        want = concl.pre if ex is Exit.OK else FALSE
        if concl.post != want:
            return _bad(rule, f"{ex} postcondition must be {want}")
        return None

    if rule is RuleName.LOOP_NON_ZERO:
        bad = _check_arity(node, 1)
        if bad:
            return bad
        if not isinstance(cmd, Star):
            return _bad(rule, "command must be a loop")
        (p,) = node.premises
        expected_cmd = Seq(cmd, cmd.body)
        if p.conclusion.cmd != expected_cmd:
            return _bad(rule, "premise must run the loop followed by its body")
        if p.conclusion.pre != concl.pre or p.conclusion.post != concl.post \
                or p.conclusion.exit is not ex:
            return _bad(rule, "conclusion must copy the premise triple")
        return None

    if rule is RuleName.SEQ1:
        bad = _check_arity(node, 1)
        if bad:
            return bad
        if not isinstance(cmd, Seq):
            return _bad(rule, "command must be a sequence")
        if ex is not Exit.ER:
            return _bad(rule, "applies to the er exit only")
        (p,) = node.premises
        if p.conclusion.exit is not Exit.ER or p.conclusion.cmd != cmd.first:
            return _bad(rule, "premise must be the first command at exit er")
        if p.conclusion.pre != concl.pre or p.conclusion.post != concl.post:
            return _bad(rule, "pre/post must match the premise")
        return None

    if rule is RuleName.SEQ2:
        bad = _check_arity(node, 2)
        if bad:
            return bad
        if not isinstance(cmd, Seq):
            return _bad(rule, "command must be a sequence")
        p1, p2 = node.premises
        if p1.conclusion.cmd != cmd.first or p1.conclusion.exit is not Exit.OK:
            return _bad(rule, "first premise must run the first command at ok")
        if p2.conclusion.cmd != cmd.second or p2.conclusion.exit is not ex:
            return _bad(rule, "second premise must run the second command")
        if p1.conclusion.post != p2.conclusion.pre:
            return _bad(rule, "midcondition mismatch between the premises")
        if concl.pre != p1.conclusion.pre or concl.post != p2.conclusion.post:
            return _bad(rule, "conclusion pre/post mismatch")
        return None

    if rule is RuleName.CONS:
        bad = _check_arity(node, 1)
        if bad:
            return bad
        (p,) = node.premises
        if p.conclusion.cmd != cmd or p.conclusion.exit is not ex:
            return _bad(rule, "premise must share command and exit")
        v1 = entails(p.conclusion.pre, concl.pre)
        if not v1.holds:
            return _bad(rule, f"premise pre does not entail pre: {v1}")
        v2 = entails(concl.post, p.conclusion.post)
        if not v2.holds:
            return _bad(rule, f"post does not entail premise post: {v2}")
        return None

    if rule is RuleName.DISJ:
        for p in node.premises:
            if p.conclusion.cmd != cmd or p.conclusion.exit is not ex:
                return _bad(rule, "premises must share command and exit")
        pre = or_assertions(*(p.conclusion.pre for p in node.premises))
        post = or_assertions(*(p.conclusion.post for p in node.premises))
        if concl.pre != pre:
            return _bad(rule, "precondition must be the premise disjunction")
        if concl.post != post:
            return _bad(rule, "postcondition must be the premise disjunction")
        return None

    if rule is RuleName.CHOICE:
        if not isinstance(cmd, Choice):
            return _bad(rule, "command must be a choice")
        if len(node.premises) == 2:
            p1, p2 = node.premises
            if p1.conclusion.cmd != cmd.left or p2.conclusion.cmd != cmd.right:
                return _bad(rule, "premises must run the two branches")
            for p in node.premises:
                if p.conclusion.exit is not ex or p.conclusion.pre != concl.pre \
                        or p.conclusion.post != concl.post:
                    return _bad(rule, "premises must share the triple shape")
            return None
        if _check_arity(node, 1):
            return _bad(rule, "expects one or two premises")
        (p,) = node.premises
        branches = {"left": cmd.left, "right": cmd.right}
        if node.side.branch is not None:
            allowed = [branches.get(node.side.branch)]
            if allowed == [None]:
                return _bad(rule, f"unknown branch {node.side.branch!r}")
        else:
            allowed = [cmd.left, cmd.right]
        if p.conclusion.cmd not in allowed:
            return _bad(rule, "premise must run a branch of the choice")
        if p.conclusion.exit is not ex or p.conclusion.pre != concl.pre \
                or p.conclusion.post != concl.post:
            return _bad(rule, "conclusion must copy the premise pre/post")
        return None

    if rule is RuleName.EXIST:
        bad = _check_arity(node, 1)
        if bad:
            return bad
        x = node.side.var
        if x is None:
            return _bad(rule, "missing quantified variable")
        if x in fv(cmd):
            return _bad(rule, f"{x} occurs free in the command")
        (p,) = node.premises
        if p.conclusion.cmd != cmd or p.conclusion.exit is not ex:
            return _bad(rule, "premise must share command and exit")
        if concl.pre != wrap_exists(x, p.conclusion.pre):
            return _bad(rule, "precondition must quantify the premise pre")
        if concl.post != wrap_exists(x, p.conclusion.post):
            return _bad(rule, "postcondition must quantify the premise post")
        return None

    if rule is RuleName.LOCAL:
        bad = _check_arity(node, 1)
        if bad:
            return bad
        if not isinstance(cmd, Local):
            return _bad(rule, "command must be a local block")
        (p,) = node.premises
        if p.conclusion.cmd != cmd.body or p.conclusion.exit is not ex:
            return _bad(rule, "premise must run the block body")
        x = cmd.var
        if x not in fv(concl.pre):
            if concl.pre != p.conclusion.pre:
                return _bad(rule, "precondition must match the premise")
            if concl.post != wrap_exists(x, p.conclusion.post):
                return _bad(rule, "postcondition must quantify the local variable")
            return None
        # renaming form: the local variable occurs free in the precondition,
        # so the premise runs the body from the renamed heap and the old
        # value is rebound in the postcondition
        xp = node.side.var
        if xp is None:
            return _bad(rule, f"{x} occurs free in the precondition; the "
                        "renaming form needs its fresh variable as (var x')")
        h = _single_qf(concl.pre)
        if h is None:
            return _bad(rule, "renaming form needs one quantifier-free heap")
        if xp == x or xp in fv(h) | fv(cmd):
            return _bad(rule, f"renaming variable {xp} is not fresh")
        if p.conclusion.pre != assertion_of_heap(subst_heap(h, x, xp)):
            return _bad(rule, "premise pre must rename the local variable")
        inner = p.conclusion.post
        xq = fresh_var(x, fv(h) | fv(cmd) | fv(inner) | {x, xp})
        washed = Assertion(tuple(rename_binders_away(d, {x, xp, xq})
                                 for d in inner.disjuncts))
        want = wrap_exists(xq, subst_assertion(
            subst_assertion(washed, x, xq), xp, x))
        if concl.post != want:
            return _bad(rule, "postcondition must rebind the renamed values")
        return None

    if rule is RuleName.FRAME_OK:
        bad = _check_arity(node, 1)
        if bad:
            return bad
        frame = node.side.frame
        if frame is None:
            return _bad(rule, "missing frame")
        if ex is not Exit.OK:
            return _bad(rule, "frame only applies to the ok exit")
        (p,) = node.premises
        if p.conclusion.cmd != cmd or p.conclusion.exit is not Exit.OK:
            return _bad(rule, "premise must share the command at ok")
        if mod_of(cmd) & fv(frame):
            return _bad(rule, "command modifies a frame variable")
        if concl.pre != star_frame(p.conclusion.pre, frame):
            return _bad(rule, "precondition must be the framed premise pre")
        if concl.post != star_frame(p.conclusion.post, frame):
            return _bad(rule, "postcondition must be the framed premise post")
        return None

    if rule is RuleName.BACKWARDS_VARIANT:
        return _check_backwards_variant(node)

    # axioms over a single quantifier-free precondition
    bad = _check_arity(node, 0)
    if bad:
        return bad
    h = _single_qf(concl.pre)
    if h is None:
        return _bad(rule, "precondition must be one quantifier-free symbolic heap")

    if rule is RuleName.ASSIGN:
        if not isinstance(cmd, Assign):
            return _bad(rule, "command must be an assignment")
        want = _expected_assign(h, cmd) if ex is Exit.OK else FALSE
        if concl.post != want:
            return _bad(rule, "postcondition does not match the schema")
        return None

    if rule is RuleName.HAVOC:
        if not isinstance(cmd, Havoc):
            return _bad(rule, "command must be a nondeterministic assignment")
        want = _expected_havoc(h, cmd) if ex is Exit.OK else FALSE
        if concl.post != want:
            return _bad(rule, "postcondition does not match the schema")
        return None

    if rule is RuleName.ASSUME:
        if not isinstance(cmd, Assume):
            return _bad(rule, "command must be an assume")
        want = assertion_of_heap(h.star(cmd.cond)) if ex is Exit.OK else FALSE
        if concl.post != want:
            return _bad(rule, "postcondition does not match the schema")
        return None

    if rule is RuleName.ALLOC1:
        if not isinstance(cmd, Alloc):
            return _bad(rule, "command must be an allocation")
        want = _expected_alloc1(h, cmd) if ex is Exit.OK else FALSE
        if concl.post != want:
            return _bad(rule, "postcondition does not match the schema")
        return None

    if rule is RuleName.ALLOC2:
        if not isinstance(cmd, Alloc):
            return _bad(rule, "command must be an allocation")
        y = node.side.alias
        if y is None:
            return _bad(rule, "missing deallocated-cell variable")
        neg = NegPoints(y)
        if neg not in h.atoms:
            return _bad(rule, f"precondition lacks {neg}")
        want = _expected_alloc2(h.without(neg), cmd, y) if ex is Exit.OK else FALSE
        if concl.post != want:
            return _bad(rule, "postcondition does not match the schema")
        return None

    if rule in (RuleName.FREE, RuleName.FREE_ER):
        if not isinstance(cmd, Free):
            return _bad(rule, "command must be a free")
        if not is_canonical(h, _heap_rule_vars(cmd, h)):
            return _bad(rule, "precondition must be canonical for the command")
        cell = _find_cell(cmd.var, h, node.side.alias)
        if rule is RuleName.FREE:
            if cell is None:
                return _bad(rule, "no aliased cell to deallocate")
            want = assertion_of_heap(h.without(cell).star(
                SymbolicHeap((NegPoints(cell.src),)))) if ex is Exit.OK else FALSE
        else:
            if _find_cell(cmd.var, h, None) is not None:
                return _bad(rule, "an aliased cell is allocated")
            want = FALSE if ex is Exit.OK else assertion_of_heap(h)
        if concl.post != want:
            return _bad(rule, "postcondition does not match the schema")
        return None

    if rule in (RuleName.LOAD, RuleName.LOAD_ER):
        if not isinstance(cmd, Load):
            return _bad(rule, "command must be a load")
        if not is_canonical(h, _heap_rule_vars(cmd, h)):
            return _bad(rule, "precondition must be canonical for the command")
        cell = _find_cell(cmd.src, h, node.side.alias)
        if rule is RuleName.LOAD:
            if cell is None:
                return _bad(rule, "no aliased cell to read")
            want = _expected_load(h, cmd, cell) if ex is Exit.OK else FALSE
        else:
            if _find_cell(cmd.src, h, None) is not None:
                return _bad(rule, "an aliased cell is allocated")
            want = FALSE if ex is Exit.OK else assertion_of_heap(h)
        if concl.post != want:
            return _bad(rule, "postcondition does not match the schema")
        return None

    if rule in (RuleName.STORE, RuleName.STORE_ER):
        if not isinstance(cmd, Store):
            return _bad(rule, "command must be a store")
        if not is_canonical(h, _heap_rule_vars(cmd, h)):
            return _bad(rule, "precondition must be canonical for the command")
        cell = _find_cell(cmd.dst, h, node.side.alias)
        if rule is RuleName.STORE:
            if cell is None:
                return _bad(rule, "no aliased cell to overwrite")
            want = assertion_of_heap(h.without(cell).star(
                SymbolicHeap((PointsTo(cell.src, cmd.value),)))) \
                if ex is Exit.OK else FALSE
        else:
            if _find_cell(cmd.dst, h, None) is not None:
                return _bad(rule, "an aliased cell is allocated")
            want = FALSE if ex is Exit.OK else assertion_of_heap(h)
        if concl.post != want:
            return _bad(rule, "postcondition does not match the schema")
        return None

    return _bad(rule, "unhandled rule")


def _check_backwards_variant(node: DerivationNode) -> Optional[RuleViolation]:
    rule, concl = node.rule, node.conclusion
    if not isinstance(concl.cmd, Star):
        return _bad(rule, "command must be a loop")
    if concl.exit is not Exit.OK:
        return _bad(rule, "applies to the ok exit only")
    family = [concl.pre]
    for i, p in enumerate(node.premises):
        if p.conclusion.cmd != concl.cmd.body:
            return _bad(rule, f"premise {i} must run the loop body")
        if p.conclusion.exit is not Exit.OK:
            return _bad(rule, f"premise {i} must exit ok")
        if p.conclusion.pre != family[-1]:
            return _bad(rule, f"premise {i} must start from the previous variant")
        family.append(p.conclusion.post)
    if concl.post != or_assertions(*family):
        return _bad(rule, "postcondition must disjoin the variant family")
    return None


def expand_backwards_variant(node: DerivationNode) -> DerivationNode:
    """The primitive derivation behind a Backwards Variant application:
    loop induction via LoopZero / Seq2+LoopNonZero, then Disj and Cons."""
    concl = node.conclusion
    body = concl.cmd.body
    family = [concl.pre] + [p.conclusion.post for p in node.premises]
    stages = [DerivationNode(
        RuleName.LOOP_ZERO, Triple(family[0], concl.cmd, Exit.OK, family[0]))]
    for k, premise in enumerate(node.premises):
        seq = DerivationNode(
            RuleName.SEQ2,
            Triple(family[0], Seq(concl.cmd, body), Exit.OK, family[k + 1]),
            (stages[-1], premise))
        stages.append(DerivationNode(
            RuleName.LOOP_NON_ZERO,
            Triple(family[0], concl.cmd, Exit.OK, family[k + 1]),
            (seq,)))
    disj = DerivationNode(
        RuleName.DISJ,
        Triple(or_assertions(*(family[0] for _ in stages)), concl.cmd, Exit.OK,
               or_assertions(*family)),
        tuple(stages))
    return DerivationNode(RuleName.CONS, concl, (disj,))


def check_derivation(node: DerivationNode,
                     path: tuple[int, ...] = ()) -> Optional[RuleViolation]:
    """Check every node; the first failure is reported with its path."""
    if node.rule in DERIVED_RULES:
        shape = check_step(node)
        if shape is not None:
            return RuleViolation(shape.reason, path)
        return check_derivation(expand_backwards_variant(node), path)
    result = check_step(node)
    if result is not None:
        return RuleViolation(result.reason, path)
    for i, p in enumerate(node.premises):
        sub = check_derivation(p, path + (i,))
        if sub is not None:
            return sub
    return None


# ---------------------------------------------------------------------------
# Synthesis of the canonical derivation
# ---------------------------------------------------------------------------

def _cons_to(node: DerivationNode, pre: Assertion, post: Assertion) -> DerivationNode:
    """Wrap in a consequence step unless the conclusion already matches."""
    c = node.conclusion
    if c.pre == pre and c.post == post:
        return node
    return DerivationNode(RuleName.CONS, Triple(pre, c.cmd, c.exit, post), (node,))


def synthesize_derivation(pre: Assertion, cmd: Command, exit_: Exit,
                          cfg: WpoConfig = WpoConfig()) -> DerivationNode:
    """A derivation of ``[pre] cmd [exit: wpo(pre, cmd, exit)]`` accepted by
    ``check_derivation``."""
    target = wpo(pre, cmd, exit_, cfg)
    canonical = cano(pre, cmd, cap=cfg.var_cap, avoid=frozenset(fv(pre) | fv(cmd)))
    parts = []
    for d in canonical.disjuncts:
        node = _synthesize_sh(d.body, cmd, exit_, cfg)
        for b in reversed(d.binders):
            node = DerivationNode(
                RuleName.EXIST,
                Triple(wrap_exists(b, node.conclusion.pre), cmd, exit_,
                       wrap_exists(b, node.conclusion.post)),
                (node,), SideData(var=b))
        parts.append(node)
    disj = DerivationNode(
        RuleName.DISJ,
        Triple(or_assertions(*(p.conclusion.pre for p in parts)), cmd, exit_,
               or_assertions(*(p.conclusion.post for p in parts))),
        tuple(parts))
    return _cons_to(disj, pre, target)


def _axiom(rule: RuleName, h: SymbolicHeap, cmd: Command, exit_: Exit,
           post: Assertion, side: SideData = NO_SIDE) -> DerivationNode:
    return DerivationNode(rule, Triple(assertion_of_heap(h), cmd, exit_, post), (), side)


def _synthesize_sh(h: SymbolicHeap, cmd: Command, exit_: Exit,
                   cfg: WpoConfig) -> DerivationNode:
    """Command-directed derivation of ``[h] cmd [exit: wpo_sh(h, cmd, exit)]``
    for a heap canonical for cmd."""
    ok = exit_ is Exit.OK
    here = assertion_of_heap(h)
    result = wpo_sh(h, cmd, exit_, cfg)

    if isinstance(cmd, Skip):
        return _axiom(RuleName.SKIP, h, cmd, exit_, result)
    if isinstance(cmd, ErrorCmd):
        return _axiom(RuleName.ERROR, h, cmd, exit_, result)
    if isinstance(cmd, Assume):
        return _axiom(RuleName.ASSUME, h, cmd, exit_, result)
    if isinstance(cmd, Assign):
        return _axiom(RuleName.ASSIGN, h, cmd, exit_, result)
    if isinstance(cmd, Havoc):
        return _axiom(RuleName.HAVOC, h, cmd, exit_, result)

    if isinstance(cmd, Alloc):
        if not ok:
            return _axiom(RuleName.ALLOC1, h, cmd, exit_, FALSE)
        parts = [_axiom(RuleName.ALLOC1, h, cmd, exit_, _expected_alloc1(h, cmd))]
        for a in h.atoms:
            if isinstance(a, NegPoints):
                schema = _expected_alloc2(h.without(a), cmd, a.src)
                parts.append(_axiom(RuleName.ALLOC2, h, cmd, exit_, schema,
                                    SideData(alias=a.src)))
        disj = DerivationNode(
            RuleName.DISJ,
            Triple(or_assertions(*(p.conclusion.pre for p in parts)), cmd, exit_,
                   or_assertions(*(p.conclusion.post for p in parts))),
            tuple(parts))
        return _cons_to(disj, here, result)

    if isinstance(cmd, Free):
        cell = _find_cell(cmd.var, h, None)
        if ok:
            if cell is None:
                return _axiom(RuleName.FREE_ER, h, cmd, exit_, FALSE)
            return _axiom(RuleName.FREE, h, cmd, exit_, result,
                          SideData(alias=cell.src))
        if cell is None:
            return _axiom(RuleName.FREE_ER, h, cmd, exit_, result)
        return _axiom(RuleName.FREE, h, cmd, exit_, FALSE, SideData(alias=cell.src))

    if isinstance(cmd, Load):
        cell = _find_cell(cmd.src, h, None)
        if ok:
            if cell is None:
                return _axiom(RuleName.LOAD_ER, h, cmd, exit_, FALSE)
            return _axiom(RuleName.LOAD, h, cmd, exit_, result,
                          SideData(alias=cell.src))
        if cell is None:
            return _axiom(RuleName.LOAD_ER, h, cmd, exit_, result)
        return _axiom(RuleName.LOAD, h, cmd, exit_, FALSE, SideData(alias=cell.src))

    if isinstance(cmd, Store):
        cell = _find_cell(cmd.dst, h, None)
        if ok:
            if cell is None:
                return _axiom(RuleName.STORE_ER, h, cmd, exit_, FALSE)
            return _axiom(RuleName.STORE, h, cmd, exit_, result,
                          SideData(alias=cell.src))
        if cell is None:
            return _axiom(RuleName.STORE_ER, h, cmd, exit_, result)
        return _axiom(RuleName.STORE, h, cmd, exit_, FALSE, SideData(alias=cell.src))

    if isinstance(cmd, Choice):
        left = _synthesize_sh(h, cmd.left, exit_, cfg)
        right = _synthesize_sh(h, cmd.right, exit_, cfg)
        parts = [
            DerivationNode(RuleName.CHOICE,
                           Triple(here, cmd, exit_, left.conclusion.post),
                           (left,), SideData(branch="left")),
            DerivationNode(RuleName.CHOICE,
                           Triple(here, cmd, exit_, right.conclusion.post),
                           (right,), SideData(branch="right")),
        ]
        disj = DerivationNode(
            RuleName.DISJ,
            Triple(or_assertions(here, here), cmd, exit_,
                   or_assertions(left.conclusion.post, right.conclusion.post)),
            tuple(parts))
        return _cons_to(disj, here, result)

    if isinstance(cmd, Seq):
        first = _synthesize_sh(h, cmd.first, Exit.OK, cfg)
        mid = first.conclusion.post
        if ok:
            second = synthesize_derivation(mid, cmd.second, Exit.OK, cfg)
            seq = DerivationNode(
                RuleName.SEQ2,
                Triple(here, cmd, Exit.OK, second.conclusion.post),
                (first, second))
            return _cons_to(seq, here, result)
        first_er = _synthesize_sh(h, cmd.first, Exit.ER, cfg)
        left = DerivationNode(
            RuleName.SEQ1,
            Triple(here, cmd, Exit.ER, first_er.conclusion.post), (first_er,))
        second = synthesize_derivation(mid, cmd.second, Exit.ER, cfg)
        right = DerivationNode(
            RuleName.SEQ2,
            Triple(here, cmd, Exit.ER, second.conclusion.post), (first, second))
        disj = DerivationNode(
            RuleName.DISJ,
            Triple(or_assertions(here, here), cmd, Exit.ER,
                   or_assertions(left.conclusion.post, right.conclusion.post)),
            (left, right))
        return _cons_to(disj, here, result)

    if isinstance(cmd, Local):
        return _synthesize_local(h, cmd, exit_, cfg, result)

    if isinstance(cmd, Star):
        return _synthesize_star(h, cmd, exit_, cfg, result)

    raise TypeError(f"synthesize: not a core command: {cmd!r}")



def _synthesize_local(h: SymbolicHeap, cmd: Local, exit_: Exit, cfg: WpoConfig,
                      result: Assertion) -> DerivationNode:
    x = cmd.var
    here = assertion_of_heap(h)
    if x not in fv(h):
        inner = synthesize_derivation(here, cmd.body, exit_, cfg)
        node = DerivationNode(
            RuleName.LOCAL,
            Triple(here, cmd, exit_, wrap_exists(x, inner.conclusion.post)),
            (inner,))
        return _cons_to(node, here, result)
    # the local variable is pinned by the precondition: renaming form
    xp = fresh_var(x, fv(h) | fv(cmd) | {x})
    shifted = subst_heap(h, x, xp)
    inner = synthesize_derivation(assertion_of_heap(shifted), cmd.body, exit_, cfg)
    w0 = inner.conclusion.post
    xq = fresh_var(x, fv(h) | fv(cmd) | fv(w0) | {x, xp})
    washed = Assertion(tuple(rename_binders_away(d, {x, xp, xq})
                             for d in w0.disjuncts))
    post = wrap_exists(xq, subst_assertion(
        subst_assertion(washed, x, xq), xp, x))
    node = DerivationNode(RuleName.LOCAL, Triple(here, cmd, exit_, post),
                          (inner,), SideData(var=xp))
    return _cons_to(node, here, result)


def _synthesize_star(h: SymbolicHeap, cmd: Star, exit_: Exit, cfg: WpoConfig,
                     result: Assertion) -> DerivationNode:
    here = assertion_of_heap(h)
    iterates, error_terms, _ = star_iterates(h, cmd.body, cfg)

    def bv_upto(count: int) -> DerivationNode:
        """[h] loop [ok: ⋁ iterates[:count]] via the variant schema."""
        if count <= 1:
            return DerivationNode(RuleName.LOOP_ZERO,
                                  Triple(here, cmd, Exit.OK, here))
        premises = tuple(
            synthesize_derivation(iterates[n], cmd.body, Exit.OK, cfg)
            for n in range(count - 1))
        return DerivationNode(
            RuleName.BACKWARDS_VARIANT,
            Triple(here, cmd, Exit.OK, or_assertions(*iterates[:count])),
            premises)

    if exit_ is Exit.OK:
        return _cons_to(bv_upto(len(iterates)), here, result)

    k = len(error_terms)
    if k == 0:
        return DerivationNode(RuleName.LOOP_ZERO, Triple(here, cmd, Exit.ER, FALSE))
    loop_ok = bv_upto(k)
    parts = tuple(synthesize_derivation(iterates[n], cmd.body, Exit.ER, cfg)
                  for n in range(k))
    disj = DerivationNode(
        RuleName.DISJ,
        Triple(or_assertions(*(p.conclusion.pre for p in parts)), cmd.body,
               Exit.ER, or_assertions(*(p.conclusion.post for p in parts))),
        parts)
    step = _cons_to(disj, loop_ok.conclusion.post, disj.conclusion.post)
    seq = DerivationNode(
        RuleName.SEQ2,
        Triple(here, Seq(cmd, cmd.body), Exit.ER, step.conclusion.post),
        (loop_ok, step))
    nonzero = DerivationNode(
        RuleName.LOOP_NON_ZERO,
        Triple(here, cmd, Exit.ER, step.conclusion.post), (seq,))
    return _cons_to(nonzero, here, result)


# ---------------------------------------------------------------------------
# Text format: (Rule [ pre ] cmd [ exit: post ] (side ...) premise*)
# ---------------------------------------------------------------------------

_SIDE_KEYWORDS = ("var", "alias", "frame", "branch")


def derivation_to_text(node: DerivationNode, indent: int = 0) -> str:
    pad = "  " * indent
    parts = [f"{pad}({node.rule.value} {node.conclusion}"]
    s = node.side
    if s.var is not None:
        parts[0] += f" (var {s.var})"
    if s.alias is not None:
        parts[0] += f" (alias {s.alias})"
    if s.frame is not None:
        parts[0] += f" (frame {s.frame})"
    if s.branch is not None:
        parts[0] += f" (branch {s.branch})"
    for p in node.premises:
        parts.append(derivation_to_text(p, indent + 1))
    return "\n".join(parts) + ")"


def parse_derivation(text: str) -> DerivationNode:
    from .parser import ParseError, _Parser

    p = _Parser(text)

    def node() -> DerivationNode:
        p.expect("(")
        t = p.peek()
        rule = _RULE_BY_NAME.get(t.text)
        if rule is None:
            raise ParseError(f"unknown rule {t.text!r}", t.line, t.col,
                             tuple(sorted(_RULE_BY_NAME)))
        p.advance()
        conclusion = p.triple()
        side = {}
        premises = []
        while p.at("("):
            nxt = p.peek(1)
            if nxt.text in _SIDE_KEYWORDS:
                p.advance()
                kw = p.advance().text
                if kw == "var":
                    side["var"] = p.name()
                elif kw == "alias":
                    side["alias"] = p.name()
                elif kw == "branch":
                    side["branch"] = p.advance().text
                else:
                    side["frame"] = p.quantified_heap()
                p.expect(")")
            else:
                premises.append(node())
        p.expect(")")
        return DerivationNode(rule, conclusion, tuple(premises), SideData(**side))

    result = node()
    p.expect_eof()
    return result
