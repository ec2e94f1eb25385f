"""Quantifier elimination for Presburger formulas over the naturals.

Uses the classic test-point method: an existential variable is replaced by a
disjunction over its lower-bound terms shifted through one period of the
divisibility constraints.  Equalities with a unit coefficient short-circuit
to a plain substitution, which is the common case for the flow-style
formulas this library produces.
"""

from __future__ import annotations

from math import lcm

from . import formula as F
from .formula import (
    And, Cmp, Cong, Exists, FAtom, Formula, LinearTerm, Not, Or,
    conj, disj, free_vars, nnf, norm_cmp as _norm_cmp, simplify,
)
from . import lia


def _as_rows(f: Formula) -> tuple[list, list] | None:
    """LE/EQ rows of a conjunction of atoms, or None if not convertible."""
    les, eqs = [], []
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, And):
            stack.extend(node.children)
        elif isinstance(node, FAtom) and isinstance(node.atom, Cmp):
            kind, term = _norm_cmp(node.atom)
            if kind == "ne":
                continue  # sound to drop for a feasibility over-check
            (les if kind == "le" else eqs).append((term.as_dict(), term.const))
        elif isinstance(node, FAtom) and isinstance(node.atom, Cong):
            continue
        else:
            return None
    return les, eqs


def _expand_ne(phi: Formula, var: str) -> Formula:
    """Split every != atom that mentions var into a < / > disjunction."""
    if isinstance(phi, FAtom):
        a = phi.atom
        if isinstance(a, Cmp) and a.op == "!=" and var in a.free_vars():
            return disj([FAtom(Cmp(a.lhs, "<", a.rhs)), FAtom(Cmp(a.lhs, ">", a.rhs))])
        return phi
    if isinstance(phi, And):
        return conj([_expand_ne(c, var) for c in phi.children])
    if isinstance(phi, Or):
        return disj([_expand_ne(c, var) for c in phi.children])
    if isinstance(phi, Not):
        return F.negate(_expand_ne(phi.child, var))
    raise ValueError("quantified subformula reached variable elimination")


def _top_equality(phi: Formula, var: str):
    """A unit-coefficient equality on var conjoined at the top, if any."""
    nodes = phi.children if isinstance(phi, And) else (phi,)
    for node in nodes:
        if isinstance(node, FAtom) and isinstance(node.atom, Cmp) and node.atom.op == "==":
            g = node.atom.gap()
            c = g.coeff(var)
            if c in (1, -1):
                # var = -(g - c*var)/c
                rest = g.drop(var).scale(-c)
                return rest
    return None


def _prune(phi: Formula) -> Formula:
    """Drop conjunctive branches whose rational relaxation is already empty."""
    if isinstance(phi, And):
        kids = [_prune(c) for c in phi.children]
        out = conj(kids)
        if isinstance(out, And):
            rows = _as_rows(out)
            if rows is not None and rows != ([], []) and lia.lp_feasible(*rows) is None:
                return F.FALSE
        return out
    if isinstance(phi, Or):
        return disj([_prune(c) for c in phi.children])
    return phi


def _subst_testpoint(phi: Formula, var: str, delta: int, tp: LinearTerm) -> Formula:
    """phi with delta*var replaced by the term tp in every atom mentioning var."""
    if isinstance(phi, FAtom):
        a = phi.atom
        if var not in a.free_vars():
            return phi
        if isinstance(a, Cmp):
            kind, t = _norm_cmp(a)
            c = t.coeff(var)
            f = delta // abs(c)
            scaled = t.scale(f)
            sign = 1 if c > 0 else -1
            new = scaled.drop(var).add(tp.scale(sign))
            op = "<=" if kind == "le" else "=="
            return FAtom(Cmp(new, op, LinearTerm.of(0)))
        c = a.term.coeff(var)
        f = delta // abs(c)
        sign = 1 if c > 0 else -1
        new = a.term.scale(f).drop(var).add(tp.scale(sign))
        return FAtom(Cong(new.shift(-f * a.residue), f * a.modulus, 0))
    if isinstance(phi, And):
        return conj([_subst_testpoint(c, var, delta, tp) for c in phi.children])
    if isinstance(phi, Or):
        return disj([_subst_testpoint(c, var, delta, tp) for c in phi.children])
    raise ValueError("unexpected node during test-point substitution")


def _eliminate_one(phi: Formula, var: str) -> Formula:
    """Quantifier-free equivalent of 'exists var (in N): phi' for NNF phi."""
    if var not in free_vars(phi):
        return phi

    rest = _top_equality(phi, var)
    if rest is not None:
        mapping = {var: rest}
        nonneg = FAtom(Cmp(rest.scale(-1), "<=", LinearTerm.of(0)))
        return conj([F.substitute(phi, mapping), nonneg])

    phi = _expand_ne(phi, var)

    delta = 1
    atoms: list = []

    def walk(node):
        if isinstance(node, FAtom):
            if var in node.atom.free_vars():
                atoms.append(node.atom)
        elif isinstance(node, (And, Or)):
            for c in node.children:
                walk(c)
        else:
            raise ValueError("elimination expects an NNF quantifier-free body")

    walk(phi)
    for a in atoms:
        t = a.gap() if isinstance(a, Cmp) else a.term
        delta = lcm(delta, abs(t.coeff(var)))

    period = delta
    lowers: list[LinearTerm] = [LinearTerm.of(-1)]  # the domain bound var >= 0
    for a in atoms:
        if isinstance(a, Cmp):
            kind, t = _norm_cmp(a)
            c = t.coeff(var)
            f = delta // abs(c)
            scaled = t.scale(f).drop(var)
            if kind == "le":
                if c < 0:  # -y + s <= 0, i.e. y >= s
                    lowers.append(scaled.shift(-1))
            else:
                if c < 0:
                    lowers.append(scaled.shift(-1))
                else:
                    lowers.append(scaled.scale(-1).shift(-1))
        else:
            c = a.term.coeff(var)
            period = lcm(period, a.modulus * (delta // abs(c)))

    branches: list[Formula] = []
    seen: set = set()
    for b in lowers:
        if b in seen:
            continue
        seen.add(b)
        for j in range(1, period + 1):
            tp = b.shift(j)
            parts = [_subst_testpoint(phi, var, delta, tp)]
            parts.append(FAtom(Cmp(tp.scale(-1), "<=", LinearTerm.of(0))))
            if delta > 1:
                parts.append(FAtom(Cong(tp, delta, 0)))
            branches.append(conj(parts))
    return _prune(simplify(disj(branches)))


def eliminate_block(bound: tuple[str, ...], body: Formula) -> Formula:
    """Eliminate a block of existential variables from a quantifier-free body."""
    phi = simplify(nnf(body))
    remaining = [v for v in bound if v in free_vars(phi)]
    while remaining:
        # Cheap variables first: unit equalities beat full test-point splits.
        best = None
        for v in remaining:
            if _top_equality(phi, v) is not None:
                best = v
                break
        if best is None:
            counts = {v: 0 for v in remaining}

            def count(node):
                if isinstance(node, FAtom):
                    for v in node.atom.free_vars():
                        if v in counts:
                            counts[v] += 1
                elif isinstance(node, (And, Or)):
                    for c in node.children:
                        count(c)

            count(phi)
            best = min(remaining, key=lambda v: (counts[v], v))
        phi = simplify(_eliminate_one(phi, best))
        remaining = [v for v in remaining if v in free_vars(phi)]
    return phi


def eliminate_quantifiers(phi: Formula) -> Formula:
    """Equivalent quantifier-free formula (variables range over naturals)."""
    if isinstance(phi, FAtom):
        return phi
    if isinstance(phi, And):
        return conj([eliminate_quantifiers(c) for c in phi.children])
    if isinstance(phi, Or):
        return disj([eliminate_quantifiers(c) for c in phi.children])
    if isinstance(phi, Not):
        return F.negate(eliminate_quantifiers(phi.child))
    if isinstance(phi, Exists):
        return eliminate_block(phi.bound, eliminate_quantifiers(phi.body))
    raise TypeError(f"not a formula: {phi!r}")
