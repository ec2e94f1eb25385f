"""Existential Presburger formulas over nonnegative integer variables.

Atoms are linear comparisons and congruences; formulas close them under
conjunction, disjunction, negation and existential quantification.  All
variables range over the naturals.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

from ..errors import InputError

_fresh_counter = itertools.count(1)


def fresh_var(stem: str) -> str:
    """Return a variable name guaranteed not to collide with user identifiers.

    The '!' character is outside the identifier grammar, so capture is
    impossible no matter what state names a system declares.
    """
    return f"{stem}!{next(_fresh_counter)}"


@dataclass(frozen=True)
class LinearTerm:
    """Integer-linear expression sum(coeff * var) + const in canonical form."""

    coeffs: tuple[tuple[str, int], ...]
    const: int = 0

    @staticmethod
    def make(coeffs: Mapping[str, int] | None = None, const: int = 0) -> "LinearTerm":
        items = tuple(sorted((v, c) for v, c in (coeffs or {}).items() if c != 0))
        return LinearTerm(items, const)

    @staticmethod
    def var(name: str, coeff: int = 1) -> "LinearTerm":
        return LinearTerm.make({name: coeff})

    @staticmethod
    def of(value: int) -> "LinearTerm":
        return LinearTerm((), value)

    def as_dict(self) -> dict[str, int]:
        return dict(self.coeffs)

    def free_vars(self) -> set[str]:
        return {v for v, _ in self.coeffs}

    def coeff(self, var: str) -> int:
        for v, c in self.coeffs:
            if v == var:
                return c
        return 0

    def add(self, other: "LinearTerm") -> "LinearTerm":
        d = self.as_dict()
        for v, c in other.coeffs:
            d[v] = d.get(v, 0) + c
        return LinearTerm.make(d, self.const + other.const)

    def sub(self, other: "LinearTerm") -> "LinearTerm":
        return self.add(other.scale(-1))

    def scale(self, k: int) -> "LinearTerm":
        if k == 0:
            return LinearTerm.of(0)
        return LinearTerm(tuple((v, c * k) for v, c in self.coeffs), self.const * k)

    def shift(self, delta: int) -> "LinearTerm":
        return LinearTerm(self.coeffs, self.const + delta)

    def drop(self, var: str) -> "LinearTerm":
        return LinearTerm(tuple((v, c) for v, c in self.coeffs if v != var), self.const)

    def substitute(self, mapping: Mapping[str, "LinearTerm"]) -> "LinearTerm":
        if not any(v in mapping for v, _ in self.coeffs):
            return self
        out = LinearTerm.of(self.const)
        for v, c in self.coeffs:
            if v in mapping:
                out = out.add(mapping[v].scale(c))
            else:
                out = out.add(LinearTerm.var(v, c))
        return out

    def evaluate(self, env: Mapping[str, int]) -> int:
        total = self.const
        for v, c in self.coeffs:
            if v not in env:
                raise InputError(f"variable {v!r} has no value")
            total += c * env[v]
        return total

    def is_constant(self) -> bool:
        return not self.coeffs

    def __str__(self) -> str:
        parts = []
        for v, c in self.coeffs:
            if c == 1:
                parts.append(v)
            else:
                parts.append(f"{c}*{v}")
        if self.const != 0 or not parts:
            parts.append(str(self.const))
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out


_CMP_EVAL = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "==": lambda a, b: a == b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
    "!=": lambda a, b: a != b,
}

_CMP_NEG = {"<": ">=", "<=": ">", "==": "!=", ">=": "<", ">": "<=", "!=": "=="}


@dataclass(frozen=True)
class Cmp:
    """Comparison atom lhs op rhs with op in <, <=, ==, >=, >, !=."""

    lhs: LinearTerm
    op: str
    rhs: LinearTerm

    def __post_init__(self):
        if self.op not in _CMP_EVAL:
            raise InputError(f"unknown comparison operator {self.op!r}")

    def gap(self) -> LinearTerm:
        """lhs - rhs, the single term the atom constrains."""
        return self.lhs.sub(self.rhs)

    def holds(self, env: Mapping[str, int]) -> bool:
        return _CMP_EVAL[self.op](self.lhs.evaluate(env), self.rhs.evaluate(env))

    def negated(self) -> "Cmp":
        return Cmp(self.lhs, _CMP_NEG[self.op], self.rhs)

    def free_vars(self) -> set[str]:
        return self.lhs.free_vars() | self.rhs.free_vars()

    def substitute(self, mapping: Mapping[str, LinearTerm]) -> "Cmp":
        return Cmp(self.lhs.substitute(mapping), self.op, self.rhs.substitute(mapping))

    def __str__(self) -> str:
        return f"{self.lhs} {self.op} {self.rhs}"


@dataclass(frozen=True)
class Cong:
    """Congruence atom: term ≡ residue (mod modulus), modulus >= 2."""

    term: LinearTerm
    modulus: int
    residue: int

    def __post_init__(self):
        if self.modulus < 2:
            raise InputError("congruence modulus must be at least 2")
        if not 0 <= self.residue < self.modulus:
            raise InputError("congruence residue must lie in [0, modulus)")

    def holds(self, env: Mapping[str, int]) -> bool:
        return self.term.evaluate(env) % self.modulus == self.residue

    def free_vars(self) -> set[str]:
        return self.term.free_vars()

    def substitute(self, mapping: Mapping[str, LinearTerm]) -> "Cong":
        return Cong(self.term.substitute(mapping), self.modulus, self.residue)

    def __str__(self) -> str:
        return f"{self.term} % {self.modulus} == {self.residue}"


Atom = Cmp | Cong


class Formula:
    """Base class of the formula AST.  Instances are immutable."""

    __slots__ = ()

    def __and__(self, other: "Formula") -> "Formula":
        return conj([self, other])

    def __or__(self, other: "Formula") -> "Formula":
        return disj([self, other])

    def __invert__(self) -> "Formula":
        return negate(self)


@dataclass(frozen=True)
class FAtom(Formula):
    atom: Atom

    def __str__(self) -> str:
        return str(self.atom)


@dataclass(frozen=True)
class And(Formula):
    children: tuple[Formula, ...]

    def __str__(self) -> str:
        if not self.children:
            return "true"
        return "(" + " && ".join(str(c) for c in self.children) + ")"


@dataclass(frozen=True)
class Or(Formula):
    children: tuple[Formula, ...]

    def __str__(self) -> str:
        if not self.children:
            return "false"
        return "(" + " || ".join(str(c) for c in self.children) + ")"


@dataclass(frozen=True)
class Not(Formula):
    child: Formula

    def __str__(self) -> str:
        return f"!({self.child})"


@dataclass(frozen=True)
class Exists(Formula):
    bound: tuple[str, ...]
    body: Formula

    def __post_init__(self):
        if not self.bound:
            raise InputError("Exists needs at least one bound variable")

    def __str__(self) -> str:
        return f"(exists {' '.join(self.bound)}: {self.body})"


TRUE: Formula = And(())
FALSE: Formula = Or(())


def atom(a: Atom) -> Formula:
    return FAtom(a)


def cmp_atom(lhs: LinearTerm, op: str, rhs: LinearTerm) -> Formula:
    return FAtom(Cmp(lhs, op, rhs))


def var_cmp(name: str, op: str, value: int) -> Formula:
    return cmp_atom(LinearTerm.var(name), op, LinearTerm.of(value))


def conj(parts: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.children)
        elif p == FALSE:
            return FALSE
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(parts: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.children)
        elif p == TRUE:
            return TRUE
        else:
            flat.append(p)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def negate(phi: Formula) -> Formula:
    if isinstance(phi, Not):
        return phi.child
    return Not(phi)


def exists(bound: Iterable[str], body: Formula) -> Formula:
    names = tuple(bound)
    if not names:
        return body
    if isinstance(body, Exists):
        return Exists(names + body.bound, body.body)
    return Exists(names, body)


def free_vars(phi: Formula) -> set[str]:
    if isinstance(phi, FAtom):
        return phi.atom.free_vars()
    if isinstance(phi, (And, Or)):
        out: set[str] = set()
        for c in phi.children:
            out |= free_vars(c)
        return out
    if isinstance(phi, Not):
        return free_vars(phi.child)
    if isinstance(phi, Exists):
        return free_vars(phi.body) - set(phi.bound)
    raise TypeError(f"not a formula: {phi!r}")


def is_quantifier_free(phi: Formula) -> bool:
    if isinstance(phi, FAtom):
        return True
    if isinstance(phi, (And, Or)):
        return all(is_quantifier_free(c) for c in phi.children)
    if isinstance(phi, Not):
        return is_quantifier_free(phi.child)
    return False


def substitute(phi: Formula, mapping: Mapping[str, LinearTerm]) -> Formula:
    """Capture-avoiding substitution of terms for free variables."""
    if isinstance(phi, FAtom):
        return FAtom(phi.atom.substitute(mapping))
    if isinstance(phi, And):
        return conj([substitute(c, mapping) for c in phi.children])
    if isinstance(phi, Or):
        return disj([substitute(c, mapping) for c in phi.children])
    if isinstance(phi, Not):
        return negate(substitute(phi.child, mapping))
    if isinstance(phi, Exists):
        clash = set(phi.bound) & set(mapping)
        used: set[str] = set()
        for t in mapping.values():
            used |= t.free_vars()
        if not clash and not (set(phi.bound) & used):
            return Exists(phi.bound, substitute(phi.body, mapping))
        renaming = {v: LinearTerm.var(fresh_var(v.split("!")[0])) for v in phi.bound}
        fresh_names = tuple(renaming[v].coeffs[0][0] for v in phi.bound)
        body = substitute(phi.body, renaming)
        return Exists(fresh_names, substitute(body, mapping))
    raise TypeError(f"not a formula: {phi!r}")


def shift_by_delta(phi: Formula, delta: Mapping[str, int]) -> Formula:
    """phi with every state variable q replaced by q + delta(q).

    Evaluating the result at C answers whether C + delta satisfies phi.
    """
    mapping = {
        q: LinearTerm.make({q: 1}, d) for q, d in delta.items() if d != 0
    }
    return substitute(phi, mapping)


def nnf(phi: Formula, positive: bool = True) -> Formula:
    """Negation normal form; negations are pushed into the atoms.

    Quantifiers block the push: Not(Exists(...)) is kept as written, with the
    body normalized positively.  Quantifier-free inputs come out negation-free.
    """
    if isinstance(phi, FAtom):
        if positive:
            return phi
        a = phi.atom
        if isinstance(a, Cmp):
            return FAtom(a.negated())
        others = [r for r in range(a.modulus) if r != a.residue]
        return disj([FAtom(Cong(a.term, a.modulus, r)) for r in others])
    if isinstance(phi, And):
        parts = [nnf(c, positive) for c in phi.children]
        return conj(parts) if positive else disj(parts)
    if isinstance(phi, Or):
        parts = [nnf(c, positive) for c in phi.children]
        return disj(parts) if positive else conj(parts)
    if isinstance(phi, Not):
        return nnf(phi.child, not positive)
    if isinstance(phi, Exists):
        inner = Exists(phi.bound, nnf(phi.body, True))
        return inner if positive else Not(inner)
    raise TypeError(f"not a formula: {phi!r}")


def evaluate(phi: Formula, env: Mapping[str, int]) -> bool:
    """Ground evaluation; quantifier-free formulas only."""
    if isinstance(phi, FAtom):
        return phi.atom.holds(env)
    if isinstance(phi, And):
        return all(evaluate(c, env) for c in phi.children)
    if isinstance(phi, Or):
        return any(evaluate(c, env) for c in phi.children)
    if isinstance(phi, Not):
        return not evaluate(phi.child, env)
    if isinstance(phi, Exists):
        raise InputError("cannot evaluate a quantified formula pointwise")
    raise TypeError(f"not a formula: {phi!r}")


def norm_cmp(a: Cmp) -> tuple[str, LinearTerm]:
    """Canonical view: ('le', t) means t <= 0, ('eq', t) means t == 0."""
    g = a.gap()
    if a.op == "<":
        return "le", g.shift(1)
    if a.op == "<=":
        return "le", g
    if a.op == ">":
        return "le", g.scale(-1).shift(1)
    if a.op == ">=":
        return "le", g.scale(-1)
    if a.op == "==":
        return "eq", g
    return "ne", g


def _atom_truth(a: Atom) -> bool | None:
    """Constant truth value of an atom over natural-valued variables, if any."""
    if isinstance(a, Cmp):
        kind, t = norm_cmp(a)
        if t.is_constant():
            if kind == "le":
                return t.const <= 0
            if kind == "eq":
                return t.const == 0
            return t.const != 0
        lo = t.const if all(c >= 0 for _, c in t.coeffs) else None
        hi = t.const if all(c <= 0 for _, c in t.coeffs) else None
        if kind == "le":
            if hi is not None and hi <= 0:
                return True
            if lo is not None and lo > 0:
                return False
        elif kind == "eq":
            if (lo is not None and lo > 0) or (hi is not None and hi < 0):
                return False
        else:
            if (lo is not None and lo > 0) or (hi is not None and hi < 0):
                return True
        return None
    if a.term.is_constant():
        return a.term.const % a.modulus == a.residue
    return None


def simplify(phi: Formula) -> Formula:
    """Cheap bottom-up simplification: constant folding and deduplication."""
    if isinstance(phi, FAtom):
        t = _atom_truth(phi.atom)
        if t is None:
            return phi
        return TRUE if t else FALSE
    if isinstance(phi, (And, Or)):
        is_and = isinstance(phi, And)
        seen: list[Formula] = []
        for c in phi.children:
            s = simplify(c)
            if s == (TRUE if is_and else FALSE):
                continue
            if s == (FALSE if is_and else TRUE):
                return FALSE if is_and else TRUE
            kids = s.children if isinstance(s, And if is_and else Or) else (s,)
            for k in kids:
                if k not in seen:
                    seen.append(k)
        return conj(seen) if is_and else disj(seen)
    if isinstance(phi, Not):
        inner = simplify(phi.child)
        if inner == TRUE:
            return FALSE
        if inner == FALSE:
            return TRUE
        return negate(inner)
    if isinstance(phi, Exists):
        body = simplify(phi.body)
        live = [v for v in phi.bound if v in free_vars(body)]
        if not live:
            return body
        return Exists(tuple(live), body)
    raise TypeError(f"not a formula: {phi!r}")
