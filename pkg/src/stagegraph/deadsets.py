"""Disabled and dead transition sets.

Disabled means not enabled right now; dead means disabled at every
reachable configuration.  Both sets of configurations are downward closed,
so they have finite decompositions into omega-configurations.  This module
computes the disabled decomposition directly, the dead one exactly via
backward reachability, approximates it with a bounded-lookahead chain of
formulas, and searches for death certificates (inductive downward-closed
sets proving deadness).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import ExactComputationTooLarge, SolverInconclusive
from .model import Configuration, ReplicatedSystem, Transition, delta
from .presburger import (
    Cmp, FAtom, Formula, LinearTerm, TRUE, FALSE, conj, disj, is_sat,
    shift_by_delta, simplify, var_cmp,
)

OMEGA = None  # sentinel in user-facing dict views


@dataclass(frozen=True)
class OmegaConfiguration:
    """State -> count extended with omega; sparse over the finite entries.

    States absent from finite are omega.  Omega absorbs addition and
    dominates every finite count.
    """

    finite: tuple[tuple[str, int], ...]

    @staticmethod
    def make(finite) -> "OmegaConfiguration":
        items = finite.items() if hasattr(finite, "items") else finite
        return OmegaConfiguration(tuple(sorted((s, int(n)) for s, n in items)))

    @staticmethod
    def all_omega() -> "OmegaConfiguration":
        return OmegaConfiguration(())

    def value(self, state: str):
        for s, n in self.finite:
            if s == state:
                return n
        return OMEGA

    def as_dict(self) -> dict[str, int]:
        return dict(self.finite)

    def leq(self, other: "OmegaConfiguration") -> bool:
        mine = self.as_dict()
        for s, n in other.finite:
            if s not in mine or mine[s] > n:
                return False
        return True

    def contains(self, C: Configuration) -> bool:
        return all(C[s] <= n for s, n in self.finite)

    def covers_multiset(self, M: Configuration) -> bool:
        """self >= M, omega components dominating everything."""
        return all(n >= M[s] for s, n in self.finite if M[s] > 0) and \
            all(self.value(s) is OMEGA or self.value(s) >= n for s, n in M.counts)

    def add_delta(self, d) -> "OmegaConfiguration":
        return OmegaConfiguration.make(
            {s: n + d.get(s, 0) for s, n in self.finite})

    def meet(self, other: "OmegaConfiguration") -> "OmegaConfiguration":
        vals = self.as_dict()
        for s, n in other.finite:
            vals[s] = n if s not in vals else min(vals[s], n)
        return OmegaConfiguration.make(vals)

    def pretty(self, states) -> str:
        return "(" + ", ".join(
            f"{s}:{'w' if self.value(s) is OMEGA else self.value(s)}"
            for s in states) + ")"


def _prune_down(elements: Iterable[OmegaConfiguration]) -> tuple[OmegaConfiguration, ...]:
    """Keep only maximal elements; membership in the union is preserved."""
    out: list[OmegaConfiguration] = []
    for e in elements:
        if any(e.leq(o) for o in out):
            continue
        out = [o for o in out if not o.leq(e)]
        out.append(e)
    return tuple(sorted(out, key=lambda o: o.finite))


@dataclass(frozen=True)
class DownwardSet:
    """Downward-closed set given by the antichain of its maximal elements."""

    decomposition: tuple[OmegaConfiguration, ...]

    @staticmethod
    def make(elements: Iterable[OmegaConfiguration]) -> "DownwardSet":
        return DownwardSet(_prune_down(elements))

    @staticmethod
    def empty() -> "DownwardSet":
        return DownwardSet(())

    @staticmethod
    def everything() -> "DownwardSet":
        return DownwardSet((OmegaConfiguration.all_omega(),))

    def contains(self, C: Configuration) -> bool:
        return any(e.contains(C) for e in self.decomposition)

    def intersect(self, other: "DownwardSet") -> "DownwardSet":
        return DownwardSet.make(
            a.meet(b) for a in self.decomposition for b in other.decomposition)


def _prune_up(elements: Iterable[Configuration]) -> tuple[Configuration, ...]:
    out: list[Configuration] = []
    for e in elements:
        if any(e.covers(o) for o in out):
            continue
        out = [o for o in out if not o.covers(e)]
        out.append(e)
    return tuple(sorted(out, key=lambda c: c.counts))


@dataclass(frozen=True)
class UpwardBasis:
    """Upward-closed set given by the antichain of its minimal elements."""

    basis: tuple[Configuration, ...]

    @staticmethod
    def make(elements: Iterable[Configuration]) -> "UpwardBasis":
        return UpwardBasis(_prune_up(elements))

    def contains(self, C: Configuration) -> bool:
        return any(C.covers(b) for b in self.basis)

    def complement(self) -> DownwardSet:
        """Decomposition of the complement, via componentwise cut-offs."""
        down = DownwardSet.everything()
        for b in self.basis:
            if not b.counts:
                return DownwardSet.empty()
            cuts = DownwardSet.make(
                OmegaConfiguration.make({q: n - 1}) for q, n in b.counts)
            down = down.intersect(cuts)
        return down


def disabled_decomposition(U: Iterable[Transition]) -> DownwardSet:
    """Decomposition of the configurations disabling every transition in U.

    Per transition, each state q in its precondition contributes the
    omega-configuration with q capped at pre(q) - 1 and omega elsewhere.
    """
    down = DownwardSet.everything()
    for t in U:
        per_t = DownwardSet.make(
            OmegaConfiguration.make({q: n - 1}) for q, n in t.pre.counts)
        down = down.intersect(per_t)
    return down


def disabled_formula(U: Iterable[Transition]) -> Formula:
    """Constraint satisfied exactly by the configurations disabling all of U."""
    return simplify(conj([
        disj([var_cmp(q, "<=", n - 1) for q, n in t.pre.counts])
        for t in U
    ]))


def _min_predecessor(b: Configuration, t: Transition) -> Configuration:
    d = delta(t)
    states = b.support | t.pre.support | set(d)
    return Configuration.make({
        q: max(t.pre[q], b[q] - d.get(q, 0)) for q in states})


def backward_basis(U: Iterable[Transition], system: ReplicatedSystem,
                   node_budget: int = 10_000) -> UpwardBasis:
    """Minimal configurations from which some transition of U can ever fire.

    Backward coverability saturation: the upward closure of the preimages
    is iterated to a fixpoint with antichain pruning.  The complement of
    the result is exactly the dead set for U.
    """
    basis: list[Configuration] = []

    def insert(c: Configuration) -> bool:
        nonlocal basis
        if any(c.covers(o) for o in basis):
            return False
        basis = [o for o in basis if not o.covers(c)]
        basis.append(c)
        return True

    work: list[Configuration] = []
    for u in U:
        if insert(u.pre):
            work.append(u.pre)
    visited = 0
    while work:
        b = work.pop()
        for t in system.transitions:
            mp = _min_predecessor(b, t)
            if insert(mp):
                visited += 1
                if visited > node_budget:
                    raise ExactComputationTooLarge(
                        f"backward saturation exceeded {node_budget} elements")
                work.append(mp)
    return UpwardBasis.make(basis)


def dead_exact(U: Iterable[Transition], system: ReplicatedSystem,
               node_budget: int = 10_000) -> DownwardSet:
    """Decomposition of the configurations at which all of U is dead."""
    return backward_basis(U, system, node_budget).complement()


def down_formula(d: DownwardSet) -> Formula:
    """Constraint form of a downward-closed set; omega components vanish."""
    return simplify(disj([
        conj([var_cmp(q, "<=", n) for q, n in e.finite])
        for e in d.decomposition
    ]))


def dead_approx(U: Iterable[Transition], i: int, system: ReplicatedSystem) -> Formula:
    """Configurations whose reachable set within i steps disables U throughout.

    Chain: level 0 is the disabled constraint; level i+1 additionally
    requires every one-step successor to satisfy level i.  Built purely by
    substitution, so the result stays quantifier-free.
    """
    U = list(U)
    current = disabled_formula(U)
    base = current
    for _ in range(i):
        guarded = []
        for t in system.transitions:
            not_enabled = disj([var_cmp(q, "<=", n - 1) for q, n in t.pre.counts])
            guarded.append(disj([not_enabled, shift_by_delta(current, delta(t))]))
        current = simplify(conj([base] + guarded))
    return current


def dis_eq_dead(U: Iterable[Transition], scope: Iterable[Transition]) -> bool:
    """Whether disabling U already implies U is dead, relative to scope.

    Finite check over the preconditions: any scope transition t that fires
    from a configuration disabling U must leave some u' in U still requiring
    more agents than available, witnessed through the componentwise
    truncated difference.
    """
    U = list(U)
    for t in scope:
        for u in U:
            # pre(t) + (pre(u) - post(t))+ must dominate some pre(u').
            gap = {q: max(u.pre[q] - t.post[q], 0)
                   for q in u.pre.support | t.post.support}
            combined = Configuration.make(
                {q: t.pre[q] + gap.get(q, 0)
                 for q in t.pre.support | set(gap)})
            if not any(combined.covers(u2.pre) for u2 in U):
                return False
    return True


@dataclass(frozen=True)
class DeathCertificate:
    """Finite set of omega-configurations whose downward closure is inductive
    and disables every killed transition, hence kills them."""

    witnesses: tuple[OmegaConfiguration, ...]
    killed: frozenset[str]

    def down(self) -> DownwardSet:
        return DownwardSet.make(self.witnesses)

    def check(self, system: ReplicatedSystem) -> bool:
        by_name = {t.name: t for t in system.transitions}
        for name in self.killed:
            u = by_name[name]
            if any(w.covers_multiset(u.pre) for w in self.witnesses):
                return False
        for w in self.witnesses:
            for t in system.transitions:
                if w.covers_multiset(t.pre):
                    succ = w.add_delta(delta(t))
                    if not any(succ.leq(other) for other in self.witnesses):
                        return False
        return True


def _omega_ge_pre(flags, vals, i, t: Transition) -> Formula:
    """Encoded witness-i >= pre(t)."""
    return conj([
        disj([var_cmp(flags[i][q], ">=", 1), var_cmp(vals[i][q], ">=", n)])
        for q, n in t.pre.counts
    ])


def _omega_disables(flags, vals, i, t: Transition) -> Formula:
    if not t.pre.counts:
        return FALSE
    return disj([
        conj([var_cmp(flags[i][q], "<=", 0), var_cmp(vals[i][q], "<=", n - 1)])
        for q, n in t.pre.counts
    ])


def _certificate_conditions(system: ReplicatedSystem, k: int, flags, vals,
                            bound: int) -> list[Formula]:
    """Shared encoding of: downward closure inductive, values boxed."""
    parts: list[Formula] = []
    for i in range(k):
        for q in system.states:
            parts.append(var_cmp(flags[i][q], "<=", 1))
            parts.append(var_cmp(vals[i][q], "<=", bound))
    for i in range(k):
        for t in system.transitions:
            d = delta(t)
            succ_in = []
            for j in range(k):
                cover = []
                for q in system.states:
                    opts = [var_cmp(flags[j][q], ">=", 1)]
                    shift = d.get(q, 0)
                    opts.append(conj([
                        var_cmp(flags[i][q], "<=", 0),
                        FAtom(Cmp(LinearTerm.make({vals[i][q]: 1}, shift), "<=",
                                  LinearTerm.var(vals[j][q]))),
                    ]))
                    cover.append(disj(opts))
                succ_in.append(conj(cover))
            parts.append(disj([_omega_disables(flags, vals, i, t),
                               disj(succ_in)]))
    return parts


def _decode_witnesses(system, model, k, flags, vals):
    out = []
    for i in range(k):
        finite = {}
        for q in system.states:
            if model.get(flags[i][q], 0) == 0:
                finite[q] = model.get(vals[i][q], 0)
        out.append(OmegaConfiguration.make(finite))
    return tuple(out)


def find_death_certificate(system: ReplicatedSystem, targets, k: int = 1,
                           must_contain: Optional[Configuration] = None,
                           avoid: tuple[DownwardSet, ...] = (),
                           bound: Optional[int] = None
                           ) -> Optional[DeathCertificate]:
    """Search for a size-k death certificate killing as many targets as possible.

    Omega components are encoded for the solver as per-state flags next to a
    bounded finite value, so the query stays quantifier-free.
    """
    targets = list(targets)
    if k < 1 or not targets:
        raise SolverInconclusive("need k >= 1 and nonempty targets")
    if must_contain is not None and any(d.contains(must_contain) for d in avoid):
        return None
    maxpre = max((n for t in system.transitions for _, n in t.pre.counts),
                 default=1)
    if bound is None:
        bound = max(maxpre - 1, 0)
        if must_contain is not None:
            bound = max(bound, max((n for _, n in must_contain.counts), default=0))

    flags = [{q: f"w{i}_{q}_omega" for q in system.states} for i in range(k)]
    vals = [{q: f"w{i}_{q}_val" for q in system.states} for i in range(k)]
    sel = {t.name: f"kill_{t.name}" for t in targets}

    base = _certificate_conditions(system, k, flags, vals, bound)
    for t in targets:
        guard = var_cmp(sel[t.name], "<=", 0)
        for i in range(k):
            base.append(disj([guard, _omega_disables(flags, vals, i, t)]))
        base.append(var_cmp(sel[t.name], "<=", 1))
    if must_contain is not None:
        base.append(disj([
            conj([disj([var_cmp(flags[i][q], ">=", 1),
                        var_cmp(vals[i][q], ">=", n)])
                  for q, n in must_contain.counts])
            for i in range(k)
        ]))

    sel_sum = LinearTerm.make({v: 1 for v in sel.values()})
    for want in range(len(targets), 0, -1):
        query = conj(base + [FAtom(Cmp(sel_sum, ">=", LinearTerm.of(want)))])
        verdict = is_sat(query)
        if verdict.status == "unknown":
            raise SolverInconclusive(verdict.reason or "certificate search inconclusive")
        if verdict.is_sat:
            witnesses = _decode_witnesses(system, verdict.model, k, flags, vals)
            killed = frozenset(
                t.name for t in targets
                if all(not w.covers_multiset(t.pre) for w in witnesses))
            cert = DeathCertificate(witnesses, killed)
            assert cert.check(system)
            return cert
    return None
