"""Satisfiability interface: built-in exact solver and verdict types.

The built-in solver is complete for the existential fragment and, through
quantifier elimination, for negated existentials as they arise in inclusion
checks.  External SMT-LIB solvers plug in through the same is_sat shape
(see smtlib.py); every caller treats Unknown as failure of the current
tactic, never as unsat.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import InputError, SolverInconclusive
from . import cooper, lia
from . import formula as F
from .formula import (
    And, Cmp, Cong, Exists, FAtom, Formula, LinearTerm, Not, Or, conj,
    evaluate, free_vars, fresh_var, is_quantifier_free, nnf, norm_cmp,
    simplify,
)


@dataclass(frozen=True)
class SolverVerdict:
    status: str  # "sat" | "unsat" | "unknown"
    model: dict[str, int] | None = None
    reason: str | None = None

    @staticmethod
    def sat(model: dict[str, int]) -> "SolverVerdict":
        return SolverVerdict("sat", model=model)

    @staticmethod
    def unsat() -> "SolverVerdict":
        return SolverVerdict("unsat")

    @staticmethod
    def unknown(reason: str) -> "SolverVerdict":
        return SolverVerdict("unknown", reason=reason)

    @property
    def is_sat(self) -> bool:
        return self.status == "sat"

    @property
    def is_unsat(self) -> bool:
        return self.status == "unsat"


def _open_quantifiers(phi: Formula, positive: bool = True) -> Formula:
    """Strip positive existentials (fresh renaming); eliminate negative ones."""
    if isinstance(phi, FAtom):
        return phi
    if isinstance(phi, And):
        return conj([_open_quantifiers(c, positive) for c in phi.children])
    if isinstance(phi, Or):
        return F.disj([_open_quantifiers(c, positive) for c in phi.children])
    if isinstance(phi, Not):
        return F.negate(_open_quantifiers(phi.child, not positive))
    if isinstance(phi, Exists):
        if positive:
            renaming = {v: LinearTerm.var(fresh_var(v.split("!")[0])) for v in phi.bound}
            body = F.substitute(phi.body, renaming)
            return _open_quantifiers(body, True)
        inner = _open_quantifiers(phi.body, True)
        if not is_quantifier_free(inner):
            inner = cooper.eliminate_quantifiers(inner)
        return cooper.eliminate_block(phi.bound, inner)
    raise TypeError(f"not a formula: {phi!r}")


class BuiltinSolver:
    """Exact, self-contained decision procedure; sessions are stateless."""

    def __init__(self, bb_budget: int = 400):
        self.bb_budget = bb_budget

    def is_sat(self, phi: Formula) -> SolverVerdict:
        goal_vars = sorted(free_vars(phi))
        opened = simplify(nnf(_open_quantifiers(phi)))
        model = self._search([opened], [], [], [])
        if model is None:
            return SolverVerdict.unsat()
        out = {v: model.get(v, 0) for v in goal_vars}
        return SolverVerdict.sat(out)

    def _search(self, nodes: list[Formula], les, eqs, congs) -> dict[str, int] | None:
        les, eqs, congs = list(les), list(eqs), list(congs)
        pending: list[Formula] = []
        stack = list(nodes)
        while stack:
            node = stack.pop()
            if isinstance(node, And):
                stack.extend(node.children)
            elif isinstance(node, FAtom):
                a = node.atom
                if isinstance(a, Cong):
                    congs.append((a.term.as_dict(), a.term.const - a.residue, a.modulus))
                    continue
                kind, term = norm_cmp(a)
                if kind == "le":
                    les.append((term.as_dict(), term.const))
                elif kind == "eq":
                    eqs.append((term.as_dict(), term.const))
                else:  # t != 0 splits into t <= -1 or t >= 1
                    lo = (term.as_dict(), term.const + 1)
                    hi = ({v: -c for v, c in term.coeffs}, -term.const + 1)
                    pending.append(Or((
                        FAtom(Cmp(LinearTerm.make(dict(lo[0]), lo[1]), "<=", LinearTerm.of(0))),
                        FAtom(Cmp(LinearTerm.make(dict(hi[0]), hi[1]), "<=", LinearTerm.of(0))),
                    )))
            elif isinstance(node, Or):
                if not node.children:
                    return None
                pending.append(node)
            elif isinstance(node, Not):
                inner = nnf(node)
                if inner == node:
                    raise InputError("negation reached the solver core")
                stack.append(inner)
            else:
                raise TypeError(f"not a formula: {node!r}")

        if not pending:
            return lia.decide(les, eqs, congs, bb_budget=self.bb_budget)

        if (les or eqs) and lia.lp_feasible(les, eqs) is None:
            return None

        pending.sort(key=lambda o: len(o.children))
        first, rest = pending[0], pending[1:]
        for child in first.children:
            model = self._search([child] + rest, les, eqs, congs)
            if model is not None:
                return model
        return None


_DEFAULT = BuiltinSolver()


def default_solver() -> BuiltinSolver:
    return _DEFAULT


def is_sat(phi: Formula, solver=None) -> SolverVerdict:
    return (solver or _DEFAULT).is_sat(phi)


def entails(phi: Formula, psi: Formula, solver=None) -> bool:
    """phi |= psi, decided as unsatisfiability of phi and not psi."""
    verdict = is_sat(conj([phi, F.negate(psi)]), solver)
    if verdict.status == "unknown":
        raise SolverInconclusive(verdict.reason or "solver returned unknown")
    return verdict.is_unsat


def equivalent(phi: Formula, psi: Formula, solver=None) -> bool:
    return entails(phi, psi, solver) and entails(psi, phi, solver)


def qe(phi: Formula) -> Formula:
    """Quantifier-free equivalent of phi, simplified."""
    return simplify(cooper.eliminate_quantifiers(phi))


def eval_formula(phi: Formula, env, solver=None) -> bool:
    """Membership of a valuation in [[phi]]; residual existentials go to the solver."""
    missing = free_vars(phi) - set(env)
    if missing:
        raise InputError(f"no value for variable(s) {sorted(missing)}")
    ground = F.substitute(phi, {v: LinearTerm.of(int(env[v])) for v in env})
    ground = simplify(ground)
    if is_quantifier_free(ground):
        return evaluate(ground, {})
    verdict = is_sat(ground, solver)
    if verdict.status == "unknown":
        raise SolverInconclusive(verdict.reason or "solver returned unknown")
    return verdict.is_sat
