"""Inductive overapproximation of reachable configurations.

The potentially-reachable set is the flow (state-equation) closure of a
Presburger set, refined on demand with trap constraints: a trap is a state
subset that, once it holds an agent, holds one forever, so a flow solution
whose initial configuration marks a trap must keep it marked.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PreconditionError, SolverInconclusive
from .model import Configuration, ReplicatedSystem, Transition, delta
from .presburger import (
    Cmp, FAtom, Formula, LinearTerm, conj, disj, exists, is_sat, simplify,
    substitute, var_cmp, fresh_var,
)


@dataclass(frozen=True)
class Trap:
    """State subset where every consuming transition also produces back in."""

    states: frozenset[str]

    @staticmethod
    def of(system: ReplicatedSystem, states) -> "Trap":
        trap = Trap(frozenset(states))
        if not trap.states:
            raise PreconditionError("a trap must be a nonempty state subset")
        bad = trap.violations(system)
        if bad:
            raise PreconditionError(
                f"not a trap: transition(s) {sorted(bad)} drain {sorted(trap.states)}")
        return trap

    def violations(self, system: ReplicatedSystem) -> set[str]:
        out = set()
        for t in system.transitions:
            if t.pre.support & self.states and not (t.post.support & self.states):
                out.add(t.name)
        return out


def _count_term(states) -> LinearTerm:
    return LinearTerm.make({q: 1 for q in states})


def _enabled_formula(t: Transition) -> Formula:
    return conj([var_cmp(q, ">=", n) for q, n in t.pre.counts])


def pre_set(phi: Formula, U, system: ReplicatedSystem) -> Formula:
    """One-step predecessors: configurations with a U-step into [[phi]]."""
    parts = []
    for t in U:
        succ = substitute(phi, {
            q: LinearTerm.make({q: 1}, d) for q, d in delta(t).items()})
        parts.append(conj([succ, _enabled_formula(t)]))
    return simplify(disj(parts))


def post_set(phi: Formula, U, system: ReplicatedSystem) -> Formula:
    """One-step successors: configurations reached from [[phi]] by a U-step."""
    parts = []
    for t in U:
        d = delta(t)
        pred = substitute(phi, {
            q: LinearTerm.make({q: 1}, -k) for q, k in d.items()})
        fired = conj([var_cmp(q, ">=", n) for q, n in t.post.counts])
        parts.append(conj([pred, fired]))
    return simplify(disj(parts))


@dataclass(frozen=True)
class PReachResult:
    """Existential flow formula over the state counts, plus its refinements.

    formula is inductive and contains every configuration reachable from
    [[source]]; body is the quantifier body with init_vars/flow_vars free,
    kept so refinement can recover flow witnesses.
    """

    formula: Formula
    body: Formula
    init_vars: tuple[tuple[str, str], ...]   # state -> bound variable
    flow_vars: tuple[tuple[str, str], ...]   # transition -> bound variable
    source: Formula
    traps_used: tuple[Trap, ...]
    system: ReplicatedSystem

    def init_var(self, state: str) -> str:
        return dict(self.init_vars)[state]


def preach(phi: Formula, system: ReplicatedSystem,
           traps: tuple[Trap, ...] = ()) -> PReachResult:
    """Inductive overapproximation of the configurations reachable from [[phi]]."""
    init = {q: fresh_var(f"i_{q}") for q in system.states}
    flow = {t.name: fresh_var(f"n_{t.name}") for t in system.transitions}

    start = substitute(phi, {q: LinearTerm.var(v) for q, v in init.items()})
    balance = []
    for q in system.states:
        rhs = LinearTerm.var(init[q])
        for t in system.transitions:
            d = delta(t).get(q, 0)
            if d:
                rhs = rhs.add(LinearTerm.var(flow[t.name], d))
        balance.append(FAtom(Cmp(LinearTerm.var(q), "==", rhs)))

    constraints = [start] + balance
    for trap in traps:
        marked_now = FAtom(Cmp(_count_term(trap.states), ">=", LinearTerm.of(1)))
        unmarked_init = FAtom(Cmp(
            LinearTerm.make({init[q]: 1 for q in trap.states}), "<=", LinearTerm.of(0)))
        constraints.append(disj([unmarked_init, marked_now]))

    body = conj(constraints)
    bound = tuple(init.values()) + tuple(flow.values())
    return PReachResult(
        formula=simplify(exists(bound, body)),
        body=body,
        init_vars=tuple(init.items()),
        flow_vars=tuple(flow.items()),
        source=phi,
        traps_used=tuple(traps),
        system=system,
    )


def _find_trap(system: ReplicatedSystem, marked_at: Configuration,
               empty_at: Configuration) -> Trap | None:
    """A trap marked at marked_at but empty at empty_at, smallest first."""
    flags = {q: f"p_{q}" for q in system.states}
    constraints = [var_cmp(v, "<=", 1) for v in flags.values()]
    for t in system.transitions:
        produced = [var_cmp(flags[q], ">=", 1) for q in sorted(t.post.support)]
        for q in sorted(t.pre.support):
            constraints.append(disj([var_cmp(flags[q], "<=", 0)] + produced))
    support = sorted(marked_at.support)
    if not support:
        return None
    constraints.append(FAtom(Cmp(
        LinearTerm.make({flags[q]: 1 for q in support}), ">=", LinearTerm.of(1))))
    for q in sorted(empty_at.support):
        constraints.append(var_cmp(flags[q], "<=", 0))
    base = conj(constraints)
    for size in range(1, len(system.states) + 1):
        verdict = is_sat(conj([base, FAtom(Cmp(
            LinearTerm.make({v: 1 for v in flags.values()}), "==",
            LinearTerm.of(size)))]))
        if verdict.status == "unknown":
            raise SolverInconclusive(verdict.reason or "trap search inconclusive")
        if verdict.is_sat:
            chosen = {q for q, v in flags.items() if verdict.model.get(v, 0) >= 1}
            return Trap.of(system, chosen)
    return None


def membership_witness(result: PReachResult, C: Configuration):
    """Flow witness (init configuration, firing counts) for C, or None."""
    env = {q: LinearTerm.of(C[q]) for q in result.system.states}
    verdict = is_sat(substitute(result.body, env))
    if verdict.status == "unknown":
        raise SolverInconclusive(verdict.reason or "membership query inconclusive")
    if not verdict.is_sat:
        return None
    model = verdict.model
    init = Configuration.make({q: model.get(v, 0) for q, v in result.init_vars})
    counts = {t: model.get(v, 0) for t, v in result.flow_vars}
    return init, counts


def refine_with_trap(result: PReachResult, spurious: Configuration,
                     max_traps: int = 32) -> PReachResult | None:
    """Strengthen the overapproximation until spurious falls out, trap by trap.

    Returns the refined result, or None when no trap separates (the
    configuration may be genuinely reachable).
    """
    witness = membership_witness(result, spurious)
    if witness is None:
        raise PreconditionError("configuration is not in the overapproximation")
    current = result
    while witness is not None and len(current.traps_used) < max_traps:
        init, _ = witness
        trap = _find_trap(current.system, init, spurious)
        if trap is None or trap in current.traps_used:
            return None
        current = preach(current.source, current.system,
                         current.traps_used + (trap,))
        witness = membership_witness(current, spurious)
    return current if witness is None else None
