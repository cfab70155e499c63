"""End-user triple checking: weakest-postcondition + entailment pipeline
with brute-force fallback and backward witness extraction.

A triple ``[P] C [ε:Q]`` is valid when every Q-state is reachable from
some P-state, so validity reduces to Q entailing the computed weakest
postcondition.  The verdict is exact for loop-free commands; for loops it
is relative to the unfolding bound unless every unfolding reached its
entailment fixpoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .entailment import entails
from .semantics import (
    DomainExhausted, DomainSpec, State, brute_valid, brute_wpo, enum_states,
    execute, satisfies,
)
from .syntax import Exit, Triple, fv, has_star, max_allocs
from .wpo import WpoConfig, wpo_info


@dataclass(frozen=True)
class TripleVerdict:
    status: str  # 'valid' | 'invalid' | 'unknown'
    evidence: Optional[str] = None  # 'entailment' | 'brute-force'
    witness: Optional[State] = None
    domain: Optional[DomainSpec] = None
    reason: Optional[str] = None
    bound_relative: bool = False

    @property
    def exit_code(self) -> int:
        return {"valid": 0, "invalid": 1, "unknown": 2}[self.status]

    def __str__(self) -> str:
        if self.status == "valid":
            tag = " (relative to the loop bound)" if self.bound_relative else ""
            return f"valid by {self.evidence}{tag}"
        if self.status == "invalid":
            tag = f" (within the loop bound)" if self.bound_relative else ""
            return f"invalid{tag}: no pre-state reaches {self.witness}"
        return f"unknown: {self.reason}"


def _spatial_width(assertion) -> int:
    return max((len(d.body.spatial_atoms) for d in assertion.disjuncts), default=0)


def auto_domain(triple: Triple, cfg: WpoConfig) -> DomainSpec:
    """Default domain sizing: one location per spatial atom of the pre- and
    postcondition plus one per possible allocation plus a spare."""
    locs = (_spatial_width(triple.pre) + _spatial_width(triple.post)
            + max_allocs(triple.cmd, cfg.loop_bound) + 1)
    return DomainSpec.of(locs, max(_spatial_width(triple.pre), 1))


def check_triple(triple: Triple, cfg: WpoConfig = WpoConfig(),
                 spec: Optional[DomainSpec] = None) -> TripleVerdict:
    """Decide validity of a triple via entailment against the computed
    weakest postcondition, falling back to the brute-force oracle."""
    spec = spec or auto_domain(triple, cfg)
    looping = has_star(triple.cmd)
    info = wpo_info(triple.pre, triple.cmd, triple.exit, cfg)
    bound_relative = looping and not info.loops_exact

    verdict = entails(triple.post, info.assertion)
    if verdict.holds:
        return TripleVerdict("valid", evidence="entailment",
                             bound_relative=bound_relative)

    if verdict.status == "unknown":
        try:
            ok = brute_valid(triple, spec, cfg.loop_bound)
        except DomainExhausted as exc:
            return TripleVerdict("unknown", reason=f"domain exhausted: {exc}",
                                 domain=spec)
        if ok:
            return TripleVerdict("valid", evidence="brute-force", domain=spec,
                                 bound_relative=looping)
        verdict_ce = _search_counterexample(triple, spec, cfg)
        if verdict_ce is not None:
            return verdict_ce
        return TripleVerdict("unknown", reason=verdict.reason, domain=spec)

    # the entailment refutation is a Q-state; confirm it is unreachable
    ce, dom = verdict.counterexample, verdict.domain
    try:
        reachable = brute_wpo(triple.pre, triple.cmd, triple.exit, dom,
                              cfg.loop_bound)
    except DomainExhausted as exc:
        return TripleVerdict("unknown", reason=f"domain exhausted: {exc}",
                             domain=dom)
    if ce not in reachable:
        return TripleVerdict("invalid", witness=ce, domain=dom,
                             bound_relative=bound_relative)
    if looping:
        return TripleVerdict("unknown", reason="verdict may flip at a higher "
                             "loop bound", domain=dom)
    return TripleVerdict("unknown", reason="refutation state is reachable; "
                         "entailment and oracle disagree", domain=dom)


def _search_counterexample(triple: Triple, spec: DomainSpec,
                           cfg: WpoConfig) -> Optional[TripleVerdict]:
    out_spec = spec.with_cells(max(spec.max_cells, _spatial_width(triple.post)))
    names = fv(triple.pre) | fv(triple.cmd) | fv(triple.post)
    try:
        reachable = brute_wpo(triple.pre, triple.cmd, triple.exit, spec,
                              cfg.loop_bound)
    except DomainExhausted:
        return None
    for state in enum_states(names, out_spec):
        if satisfies(state, triple.post, out_spec) and state not in reachable:
            return TripleVerdict("invalid", witness=state, domain=spec,
                                 bound_relative=has_star(triple.cmd))
    return None


def find_witness(triple: Triple, post_state: State, spec: DomainSpec,
                 cfg: WpoConfig = WpoConfig()) -> Optional[State]:
    """A backward bug witness: some pre-state satisfying the precondition
    from which ``post_state`` is reachable, or None within the domain."""
    if not satisfies(post_state, triple.post, spec):
        raise ValueError("post_state does not satisfy the postcondition")
    for state in enum_states(fv(triple.pre) | fv(triple.cmd), spec):
        if not satisfies(state, triple.pre, spec):
            continue
        if post_state in execute(state, triple.cmd, triple.exit,
                                 cfg.loop_bound, spec):
            return state
    return None
