"""Presburger constraints over state counts and the solvers deciding them."""

from .formula import (
    And, Atom, Cmp, Cong, Exists, FAtom, Formula, LinearTerm, Not, Or,
    TRUE, FALSE, atom, cmp_atom, conj, disj, evaluate, exists, free_vars,
    fresh_var, is_quantifier_free, negate, nnf, shift_by_delta, simplify,
    substitute, var_cmp,
)
from .smtlib import QF_LOGIC, QUANT_LOGIC, SmtLibSolver, emit_smtlib
from .solve import (
    BuiltinSolver, SolverVerdict, default_solver, entails, equivalent,
    eval_formula, is_sat, qe,
)

__all__ = [
    "And", "Atom", "BuiltinSolver", "Cmp", "Cong", "Exists", "FAtom",
    "FALSE", "Formula", "LinearTerm", "Not", "Or", "QF_LOGIC", "QUANT_LOGIC",
    "SmtLibSolver", "SolverVerdict", "TRUE", "atom", "cmp_atom", "conj",
    "default_solver", "disj", "emit_smtlib", "entails", "equivalent",
    "eval_formula", "evaluate", "exists", "free_vars", "fresh_var", "is_sat",
    "is_quantifier_free", "negate", "nnf", "qe", "shift_by_delta",
    "simplify", "substitute", "var_cmp",
]
