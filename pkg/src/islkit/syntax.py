"""Core syntax: terms, symbolic heaps, assertions, commands and triples.

Assertions are finite disjunctions of existentially quantified symbolic
heaps.  A symbolic heap is a separating conjunction of pure atoms
(``t == t'``, ``t != t'``) and spatial atoms (``x -> t`` for an allocated
cell, ``x -/>`` for a cell that is in the heap domain but deallocated).
No ``/\\``, ``\\/`` or negation occurs inside a symbolic heap.

Structural identifications baked into the types:

* symbolic heaps compare equal modulo atom order (atoms are kept sorted),
* assertions compare equal modulo disjunct order (disjuncts are sorted),
* quantified heaps compare equal modulo renaming of their binders,
* ``emp`` is neutral and dropped on construction; the empty atom multiset
  prints as ``emp``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Union


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("variable names must be nonempty")

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class NullTerm:
    def __str__(self) -> str:
        return "null"


NULL = NullTerm()

Term = Union[Var, NullTerm]


def term_key(t: Term) -> tuple:
    """Deterministic ordering key: variables alphabetically, null last."""
    if isinstance(t, Var):
        return (0, t.name)
    return (1, "")


def fresh_var(hint: Var | str, avoid: Iterable[Var]) -> Var:
    """First primed variant of ``hint`` not in ``avoid`` (never the hint itself)."""
    base = hint.name if isinstance(hint, Var) else hint
    taken = {v.name for v in avoid}
    name = base + "'"
    while name in taken:
        name += "'"
    return Var(name)


def fresh_vars(hints: Iterable[Var | str], avoid: Iterable[Var]) -> list[Var]:
    taken = set(avoid)
    out = []
    for h in hints:
        v = fresh_var(h, taken)
        out.append(v)
        taken.add(v)
    return out


# ---------------------------------------------------------------------------
# Atoms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PureAtom:
    """``lhs == rhs`` (kind 'eq') or ``lhs != rhs`` (kind 'neq').

    Sides are kept in a fixed orientation (variables alphabetically, null
    last), so ``x == y`` and ``y == x`` are the same atom.
    """

    kind: str
    lhs: Term
    rhs: Term

    def __post_init__(self) -> None:
        if self.kind not in ("eq", "neq"):
            raise ValueError(f"bad pure-atom kind {self.kind!r}")
        if term_key(self.lhs) > term_key(self.rhs):
            lhs, rhs = self.rhs, self.lhs
            object.__setattr__(self, "lhs", lhs)
            object.__setattr__(self, "rhs", rhs)

    def __str__(self) -> str:
        op = "==" if self.kind == "eq" else "!="
        return f"{self.lhs} {op} {self.rhs}"


def eq(lhs: Term, rhs: Term) -> PureAtom:
    return PureAtom("eq", lhs, rhs)


def neq(lhs: Term, rhs: Term) -> PureAtom:
    return PureAtom("neq", lhs, rhs)


@dataclass(frozen=True)
class PointsTo:
    src: Var
    dst: Term

    def __str__(self) -> str:
        return f"{self.src} -> {self.dst}"


@dataclass(frozen=True)
class NegPoints:
    """The cell named by ``src`` is in the heap domain but deallocated."""

    src: Var

    def __str__(self) -> str:
        return f"{self.src} -/>"


@dataclass(frozen=True)
class Emp:
    def __str__(self) -> str:
        return "emp"


SpatialAtom = Union[Emp, PointsTo, NegPoints]
Atom = Union[PureAtom, SpatialAtom]


def atom_key(a: Atom) -> tuple:
    if isinstance(a, PureAtom):
        rank = 0 if a.kind == "eq" else 1
        return (rank, term_key(a.lhs), term_key(a.rhs))
    if isinstance(a, PointsTo):
        return (2, term_key(a.src), term_key(a.dst))
    if isinstance(a, NegPoints):
        return (3, term_key(a.src), ())
    return (4, (), ())


# ---------------------------------------------------------------------------
# Symbolic heaps, quantified heaps, assertions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymbolicHeap:
    """Multiset of atoms under ``*``; kept sorted, with ``emp`` (neutral)
    and duplicate pure atoms (idempotent) dropped."""

    atoms: tuple[Atom, ...]

    def __post_init__(self) -> None:
        spatial = [a for a in self.atoms if isinstance(a, (PointsTo, NegPoints))]
        pure = {a for a in self.atoms if isinstance(a, PureAtom)
                and not (a.kind == "eq" and a.lhs == a.rhs)}
        cleaned = tuple(sorted(spatial + list(pure), key=atom_key))
        object.__setattr__(self, "atoms", cleaned)

    def star(self, other: "SymbolicHeap") -> "SymbolicHeap":
        return SymbolicHeap(self.atoms + other.atoms)

    def without(self, atom: Atom) -> "SymbolicHeap":
        """Remove one occurrence of ``atom``."""
        atoms = list(self.atoms)
        atoms.remove(atom)
        return SymbolicHeap(tuple(atoms))

    @property
    def pure_atoms(self) -> tuple[PureAtom, ...]:
        return tuple(a for a in self.atoms if isinstance(a, PureAtom))

    @property
    def spatial_atoms(self) -> tuple[Atom, ...]:
        return tuple(a for a in self.atoms if not isinstance(a, PureAtom))

    @property
    def is_pure(self) -> bool:
        return all(isinstance(a, PureAtom) for a in self.atoms)

    def __str__(self) -> str:
        if not self.atoms:
            return "emp"
        return " * ".join(str(a) for a in self.atoms)


EMP_HEAP = SymbolicHeap(())


def heap(*atoms: Atom) -> SymbolicHeap:
    return SymbolicHeap(tuple(atoms))


_PLACEHOLDER = "?"  # cannot be lexed, so never collides with user variables


def _occurrence_order(body: SymbolicHeap) -> dict[Var, int]:
    order: dict[Var, int] = {}
    def note(t: Term) -> None:
        if isinstance(t, Var) and t not in order:
            order[t] = len(order)
    for a in body.atoms:
        if isinstance(a, PureAtom):
            note(a.lhs)
            note(a.rhs)
        elif isinstance(a, PointsTo):
            note(a.src)
            note(a.dst)
        elif isinstance(a, NegPoints):
            note(a.src)
    return order


@dataclass(frozen=True, eq=False)
class QuantifiedHeap:
    """``exists binders . body`` — equality is up to binder renaming.

    Construction normalizes by two identities of the logic: binders that
    do not occur in the body are dropped (the value domain is never empty:
    null exists), and binders are ordered by first occurrence in the
    sorted body (adjacent existentials commute).
    """

    binders: tuple[Var, ...]
    body: SymbolicHeap

    def __post_init__(self) -> None:
        if len(set(self.binders)) != len(self.binders):
            raise ValueError("binders must be pairwise distinct")
        occ = _occurrence_order(self.body)
        used = sorted((b for b in self.binders if b in occ), key=occ.__getitem__)
        object.__setattr__(self, "binders", tuple(used))

    @cached_property
    def _alpha(self) -> tuple:
        body = self.body
        for i, b in enumerate(self.binders):
            body = subst_heap(body, b, Var(_PLACEHOLDER + str(i)))
        return (len(self.binders), body)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuantifiedHeap):
            return NotImplemented
        return self._alpha == other._alpha

    def __hash__(self) -> int:
        return hash(self._alpha)

    def __str__(self) -> str:
        if not self.binders:
            return str(self.body)
        names = " ".join(v.name for v in self.binders)
        return f"exists {names} . {self.body}"


def qheap(binders: Iterable[Var], body: SymbolicHeap) -> QuantifiedHeap:
    return QuantifiedHeap(tuple(binders), body)


def _disjunct_key(d: QuantifiedHeap) -> tuple:
    n, body = d._alpha
    return (tuple(atom_key(a) + (str(a),) for a in body.atoms), n)


@dataclass(frozen=True)
class Assertion:
    """Finite disjunction of quantified heaps; empty disjunction is false."""

    disjuncts: tuple[QuantifiedHeap, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "disjuncts",
                           tuple(sorted(self.disjuncts, key=_disjunct_key)))

    @property
    def is_false(self) -> bool:
        return not self.disjuncts

    def __str__(self) -> str:
        if not self.disjuncts:
            return "false"
        return " \\/ ".join(str(d) for d in self.disjuncts)


FALSE = Assertion(())


def assertion_of(*disjuncts: QuantifiedHeap) -> Assertion:
    return Assertion(tuple(disjuncts))


def assertion_of_heap(h: SymbolicHeap) -> Assertion:
    return Assertion((QuantifiedHeap((), h),))


def or_assertions(*parts: Assertion) -> Assertion:
    out: list[QuantifiedHeap] = []
    for p in parts:
        out.extend(p.disjuncts)
    return Assertion(tuple(out))


def wrap_exists(x: Var, a: Assertion) -> Assertion:
    """Prepend an existential binder to every disjunct (renaming clashes)."""
    out = []
    for d in a.disjuncts:
        if x in d.binders:
            repl = fresh_var(x, set(d.binders) | fv(d.body) | {x})
            d = QuantifiedHeap(tuple(repl if b == x else b for b in d.binders),
                               subst_heap(d.body, x, repl))
        out.append(QuantifiedHeap((x,) + d.binders, d.body))
    return Assertion(tuple(out))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Skip:
    def __str__(self) -> str:
        return "skip"


@dataclass(frozen=True)
class Assign:
    var: Var
    term: Term

    def __str__(self) -> str:
        return f"{self.var} := {self.term}"


@dataclass(frozen=True)
class Havoc:
    var: Var

    def __str__(self) -> str:
        return f"{self.var} := *"


@dataclass(frozen=True)
class Assume:
    cond: SymbolicHeap

    def __post_init__(self) -> None:
        if not self.cond.is_pure:
            raise ValueError("assume payload must be a pure formula")

    def __str__(self) -> str:
        return f"assume({self.cond})"


@dataclass(frozen=True)
class Local:
    var: Var
    body: "Command"

    def __str__(self) -> str:
        return f"local {self.var} {{ {self.body} }}"


@dataclass(frozen=True)
class Seq:
    first: "Command"
    second: "Command"

    def __str__(self) -> str:
        left = f"{{ {self.first} }}" if isinstance(self.first, Seq) else str(self.first)
        return f"{left} ; {self.second}"


@dataclass(frozen=True)
class Choice:
    left: "Command"
    right: "Command"

    def __str__(self) -> str:
        return f"choice {{ {self.left} }} or {{ {self.right} }}"


@dataclass(frozen=True)
class Star:
    body: "Command"

    def __str__(self) -> str:
        return f"star {{ {self.body} }}"


@dataclass(frozen=True)
class Alloc:
    var: Var

    def __str__(self) -> str:
        return f"{self.var} := alloc()"


@dataclass(frozen=True)
class Free:
    var: Var

    def __str__(self) -> str:
        return f"free({self.var})"


@dataclass(frozen=True)
class Load:
    dst: Var
    src: Var

    def __str__(self) -> str:
        return f"{self.dst} := [{self.src}]"


@dataclass(frozen=True)
class Store:
    dst: Var
    value: Term

    def __str__(self) -> str:
        return f"[{self.dst}] := {self.value}"


@dataclass(frozen=True)
class ErrorCmd:
    def __str__(self) -> str:
        return "error"


Command = Union[Skip, Assign, Havoc, Assume, Local, Seq, Choice, Star,
                Alloc, Free, Load, Store, ErrorCmd]


# Sugared forms, lowered by desugar().

@dataclass(frozen=True)
class If:
    cond: SymbolicHeap
    then: "SugaredCommand"
    orelse: "SugaredCommand"

    def __str__(self) -> str:
        return f"if ({self.cond}) {{ {self.then} }} else {{ {self.orelse} }}"


@dataclass(frozen=True)
class While:
    cond: SymbolicHeap
    body: "SugaredCommand"

    def __str__(self) -> str:
        return f"while ({self.cond}) {{ {self.body} }}"


@dataclass(frozen=True)
class AssertCmd:
    cond: SymbolicHeap

    def __str__(self) -> str:
        return f"assert({self.cond})"


@dataclass(frozen=True)
class Malloc:
    var: Var

    def __str__(self) -> str:
        return f"{self.var} := malloc()"


SugaredCommand = Union[Command, If, While, AssertCmd, Malloc]


def negate_atom(a: PureAtom) -> PureAtom:
    return PureAtom("neq" if a.kind == "eq" else "eq", a.lhs, a.rhs)


def assume_not(cond: SymbolicHeap) -> Command:
    """``assume(!B)`` for a pure B: choice over the negated atoms."""
    atoms = cond.pure_atoms
    if not atoms:
        # !(empty conjunction) is false; no assume-false literal exists
        return Assume(heap(neq(NULL, NULL)))
    out: Command = Assume(heap(negate_atom(atoms[0])))
    for a in atoms[1:]:
        out = Choice(out, Assume(heap(negate_atom(a))))
    return out


def desugar(c: SugaredCommand) -> Command:
    """Lower if/while/assert/malloc to the core language."""
    if isinstance(c, If):
        return Choice(Seq(Assume(c.cond), desugar(c.then)),
                      Seq(assume_not(c.cond), desugar(c.orelse)))
    if isinstance(c, While):
        return Seq(Star(Seq(Assume(c.cond), desugar(c.body))), assume_not(c.cond))
    if isinstance(c, AssertCmd):
        return Choice(Seq(assume_not(c.cond), ErrorCmd()), Assume(c.cond))
    if isinstance(c, Malloc):
        return Choice(Alloc(c.var), Assign(c.var, NULL))
    if isinstance(c, Local):
        return Local(c.var, desugar(c.body))
    if isinstance(c, Seq):
        return Seq(desugar(c.first), desugar(c.second))
    if isinstance(c, Choice):
        return Choice(desugar(c.left), desugar(c.right))
    if isinstance(c, Star):
        return Star(desugar(c.body))
    return c


# ---------------------------------------------------------------------------
# Exit conditions and triples
# ---------------------------------------------------------------------------

class Exit(enum.Enum):
    OK = "ok"
    ER = "er"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Triple:
    pre: Assertion
    cmd: Command
    exit: Exit
    post: Assertion

    def __str__(self) -> str:
        return f"[ {self.pre} ] {self.cmd} [ {self.exit}: {self.post} ]"


# ---------------------------------------------------------------------------
# Free variables
# ---------------------------------------------------------------------------

def fv(entity) -> frozenset[Var]:
    """Free variables of a term, atom, heap, assertion or command."""
    if isinstance(entity, Var):
        return frozenset((entity,))
    if isinstance(entity, NullTerm):
        return frozenset()
    if isinstance(entity, PureAtom):
        return fv(entity.lhs) | fv(entity.rhs)
    if isinstance(entity, PointsTo):
        return fv(entity.src) | fv(entity.dst)
    if isinstance(entity, NegPoints):
        return frozenset((entity.src,))
    if isinstance(entity, Emp):
        return frozenset()
    if isinstance(entity, SymbolicHeap):
        out: frozenset[Var] = frozenset()
        for a in entity.atoms:
            out |= fv(a)
        return out
    if isinstance(entity, QuantifiedHeap):
        return fv(entity.body) - frozenset(entity.binders)
    if isinstance(entity, Assertion):
        out = frozenset()
        for d in entity.disjuncts:
            out |= fv(d)
        return out
    if isinstance(entity, Triple):
        return fv(entity.pre) | fv(entity.cmd) | fv(entity.post)
    return _fv_command(entity)


def _fv_command(c: Command) -> frozenset[Var]:
    if isinstance(c, (Skip, ErrorCmd)):
        return frozenset()
    if isinstance(c, Assign):
        return frozenset((c.var,)) | fv(c.term)
    if isinstance(c, Havoc):
        return frozenset((c.var,))
    if isinstance(c, Assume):
        return fv(c.cond)
    if isinstance(c, Local):
        return fv(c.body) - {c.var}
    if isinstance(c, Seq):
        return fv(c.first) | fv(c.second)
    if isinstance(c, Choice):
        return fv(c.left) | fv(c.right)
    if isinstance(c, Star):
        return fv(c.body)
    if isinstance(c, Alloc):
        return frozenset((c.var,))
    if isinstance(c, Free):
        return frozenset((c.var,))
    if isinstance(c, Load):
        return frozenset((c.dst, c.src))
    if isinstance(c, Store):
        return frozenset((c.dst,)) | fv(c.value)
    raise TypeError(f"fv: not a core command: {c!r}")


def mod_of(c: Command) -> frozenset[Var]:
    """Variables a command may modify."""
    if isinstance(c, (Skip, Assume, ErrorCmd, Free, Store)):
        return frozenset()
    if isinstance(c, (Assign, Havoc, Alloc)):
        return frozenset((c.var,))
    if isinstance(c, Load):
        return frozenset((c.dst,))
    if isinstance(c, Local):
        return mod_of(c.body) - {c.var}
    if isinstance(c, Seq):
        return mod_of(c.first) | mod_of(c.second)
    if isinstance(c, Choice):
        return mod_of(c.left) | mod_of(c.right)
    if isinstance(c, Star):
        return mod_of(c.body)
    raise TypeError(f"mod_of: not a core command: {c!r}")


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------

class NullSourceSubstitution(Exception):
    """Substituting null into a points-to/negative-atom source position.

    The grammar only admits variables there; callers must case-split
    before substituting.
    """


def subst_term(t: Term, x: Var, value: Term) -> Term:
    return value if t == x else t


def subst_atom(a: Atom, x: Var, value: Term) -> Atom:
    if isinstance(a, PureAtom):
        return PureAtom(a.kind, subst_term(a.lhs, x, value), subst_term(a.rhs, x, value))
    if isinstance(a, PointsTo):
        src = subst_term(a.src, x, value)
        if not isinstance(src, Var):
            raise NullSourceSubstitution(f"{a} [{x} := {value}]")
        return PointsTo(src, subst_term(a.dst, x, value))
    if isinstance(a, NegPoints):
        src = subst_term(a.src, x, value)
        if not isinstance(src, Var):
            raise NullSourceSubstitution(f"{a} [{x} := {value}]")
        return NegPoints(src)
    return a


def subst_heap(h: SymbolicHeap, x: Var, value: Term) -> SymbolicHeap:
    return SymbolicHeap(tuple(subst_atom(a, x, value) for a in h.atoms))


def subst_qheap(d: QuantifiedHeap, x: Var, value: Term) -> QuantifiedHeap:
    if x in d.binders:
        return d
    clash = set(d.binders) & fv(value)
    binders, body = d.binders, d.body
    if clash:
        avoid = set(binders) | fv(body) | fv(value) | {x}
        renamed = list(binders)
        for i, b in enumerate(binders):
            if b in clash:
                nb = fresh_var(b, avoid)
                avoid.add(nb)
                renamed[i] = nb
                body = subst_heap(body, b, nb)
        binders = tuple(renamed)
    return QuantifiedHeap(binders, subst_heap(body, x, value))


def subst_assertion(a: Assertion, x: Var, value: Term) -> Assertion:
    return Assertion(tuple(subst_qheap(d, x, value) for d in a.disjuncts))


def subst(entity, x: Var, value: Term):
    """Capture-avoiding substitution on heaps, quantified heaps or assertions."""
    if isinstance(entity, SymbolicHeap):
        return subst_heap(entity, x, value)
    if isinstance(entity, QuantifiedHeap):
        return subst_qheap(entity, x, value)
    if isinstance(entity, Assertion):
        return subst_assertion(entity, x, value)
    raise TypeError(f"subst: unsupported entity {entity!r}")


def eliminate_one_point(d: QuantifiedHeap) -> QuantifiedHeap:
    """Apply the one-point rule: a binder equated to another term is
    substituted away (``exists z . z == t * φ  ≡  φ[z := t]``).

    Exact in every value domain, unlike dropping disequality-constrained
    binders, which is domain-size dependent and therefore never done.
    """
    binders = list(d.binders)
    body = d.body
    changed = True
    while changed:
        changed = False
        for b in binders:
            witnesses: list[Term] = []
            for a in body.atoms:
                if isinstance(a, PureAtom) and a.kind == "eq":
                    if a.lhs == b and a.rhs != b:
                        witnesses.append(a.rhs)
                    elif a.rhs == b and a.lhs != b:
                        witnesses.append(a.lhs)
            witnesses.sort(key=term_key)  # prefer a variable over null
            if witnesses:
                try:
                    body = subst_heap(body, b, witnesses[0])
                except NullSourceSubstitution:
                    continue  # b sources a cell and is equated only to null: unsat
                binders.remove(b)
                changed = True
                break
    return QuantifiedHeap(tuple(binders), body)


def rename_binders_away(d: QuantifiedHeap, avoid: Iterable[Var]) -> QuantifiedHeap:
    """Alpha-rename the binders of ``d`` that occur in ``avoid``."""
    avoid = set(avoid)
    clash = [b for b in d.binders if b in avoid]
    if not clash:
        return d
    taken = avoid | set(d.binders) | fv(d.body)
    binders, body = list(d.binders), d.body
    for i, b in enumerate(d.binders):
        if b in avoid:
            nb = fresh_var(b, taken)
            taken.add(nb)
            binders[i] = nb
            body = subst_heap(body, b, nb)
    return QuantifiedHeap(tuple(binders), body)


def command_size(c: Command) -> int:
    if isinstance(c, (Seq, Choice)):
        a, b = (c.first, c.second) if isinstance(c, Seq) else (c.left, c.right)
        return 1 + command_size(a) + command_size(b)
    if isinstance(c, (Star, Local)):
        return 1 + command_size(c.body)
    return 1


def iter_subcommands(c: Command) -> Iterator[Command]:
    yield c
    if isinstance(c, Seq):
        yield from iter_subcommands(c.first)
        yield from iter_subcommands(c.second)
    elif isinstance(c, Choice):
        yield from iter_subcommands(c.left)
        yield from iter_subcommands(c.right)
    elif isinstance(c, (Star, Local)):
        yield from iter_subcommands(c.body)


def has_star(c: Command) -> bool:
    return any(isinstance(s, Star) for s in iter_subcommands(c))


def max_allocs(c: Command, loop_bound: int) -> int:
    """Static bound on allocations a single run can perform."""
    if isinstance(c, Alloc):
        return 1
    if isinstance(c, Seq):
        return max_allocs(c.first, loop_bound) + max_allocs(c.second, loop_bound)
    if isinstance(c, Choice):
        return max(max_allocs(c.left, loop_bound), max_allocs(c.right, loop_bound))
    if isinstance(c, Star):
        return loop_bound * max_allocs(c.body, loop_bound)
    if isinstance(c, Local):
        return max_allocs(c.body, loop_bound)
    return 0
