"""SMT-LIB 2.6 emission and the subprocess solver session.

The wire contract: commands set-logic, declare-const, assert, check-sat,
get-model, exit over the solver's stdin/stdout; accepted responses are
sat/unsat/unknown plus one get-model S-expression.  Anything else is a
solver error and surfaces as an Unknown verdict or SolverProtocolError.
"""

from __future__ import annotations

import shlex
import subprocess

from ..errors import InputError, SolverProtocolError
from . import formula as F
from .formula import (
    And, Cmp, Cong, Exists, FAtom, Formula, LinearTerm, Not, Or,
    free_vars, fresh_var, is_quantifier_free, nnf,
)
from .solve import SolverVerdict, eval_formula

QF_LOGIC = "quantifier-free-integer"
QUANT_LOGIC = "quantified-integer"
_LOGIC_NAMES = {QF_LOGIC: "QF_LIA", QUANT_LOGIC: "LIA"}


def _smt_name(v: str) -> str:
    return f"|{v}|" if "!" in v else v


def _emit_int(n: int) -> str:
    return str(n) if n >= 0 else f"(- {-n})"


def _emit_term(t: LinearTerm) -> str:
    parts = []
    for v, c in t.coeffs:
        name = _smt_name(v)
        parts.append(name if c == 1 else f"(* {_emit_int(c)} {name})")
    if t.const != 0 or not parts:
        parts.append(_emit_int(t.const))
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def _term_nonneg_everywhere(t: LinearTerm) -> bool:
    return t.const >= 0 and all(c >= 0 for _, c in t.coeffs)


class _Emitter:
    def __init__(self, quantified: bool):
        self.quantified = quantified
        self.quotients: list[tuple[str, Formula]] = []

    def _cong(self, a: Cong) -> str:
        q = fresh_var("q")
        shifted = a.term  # t == m*q + residue
        eq = Cmp(shifted, "==", LinearTerm.make({q: a.modulus}, a.residue))
        guard: list[str] = [self.formula(FAtom(eq))]
        if _term_nonneg_everywhere(a.term):
            guard.append(f"(>= {_smt_name(q)} 0)")
        body = guard[0] if len(guard) == 1 else "(and " + " ".join(guard) + ")"
        if self.quantified:
            return f"(exists (({_smt_name(q)} Int)) {body})"
        self.quotients.append((q, body))
        return body

    def formula(self, phi: Formula) -> str:
        if isinstance(phi, FAtom):
            a = phi.atom
            if isinstance(a, Cong):
                return self._cong(a)
            lhs, op, rhs = a.lhs, a.op, a.rhs
            # Strict comparisons over integers normalize to slack form.
            if op == "<":
                return f"(<= {_emit_term(lhs.shift(1))} {_emit_term(rhs)})"
            if op == ">":
                return f"(>= {_emit_term(lhs)} {_emit_term(rhs.shift(1))})"
            if op == "!=":
                return f"(not (= {_emit_term(lhs)} {_emit_term(rhs)}))"
            smt_op = {"<=": "<=", ">=": ">=", "==": "="}[op]
            return f"({smt_op} {_emit_term(lhs)} {_emit_term(rhs)})"
        if isinstance(phi, And):
            if not phi.children:
                return "true"
            return "(and " + " ".join(self.formula(c) for c in phi.children) + ")"
        if isinstance(phi, Or):
            if not phi.children:
                return "false"
            return "(or " + " ".join(self.formula(c) for c in phi.children) + ")"
        if isinstance(phi, Not):
            return f"(not {self.formula(phi.child)})"
        if isinstance(phi, Exists):
            decls = " ".join(f"({_smt_name(v)} Int)" for v in phi.bound)
            guards = " ".join(f"(>= {_smt_name(v)} 0)" for v in phi.bound)
            return f"(exists ({decls}) (and {guards} {self.formula(phi.body)}))"
        raise TypeError(f"not a formula: {phi!r}")


def emit_smtlib(phi: Formula, logic: str = QF_LOGIC) -> str:
    """Declarations and assertions for phi, variables pinned to N by >= 0."""
    if logic not in _LOGIC_NAMES:
        raise InputError(f"unknown logic tag {logic!r}")
    quantified = logic == QUANT_LOGIC
    if not quantified:
        if not is_quantifier_free(phi):
            raise InputError("quantified formula under the quantifier-free tag")
        phi = nnf(phi)  # keeps congruence compilation polarity-safe
    emitter = _Emitter(quantified)
    body = emitter.formula(phi)
    lines = []
    for v in sorted(free_vars(phi)):
        lines.append(f"(declare-const {_smt_name(v)} Int)")
        lines.append(f"(assert (>= {_smt_name(v)} 0))")
    for q, _ in emitter.quotients:
        lines.append(f"(declare-const {_smt_name(q)} Int)")
    lines.append(f"(assert {body})")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# S-expression parsing for get-model answers
# ---------------------------------------------------------------------------

def _tokenize(text: str):
    out, i, n = [], 0, len(text)
    while i < n:
        ch = text[i]
        if ch in "()":
            out.append(ch)
            i += 1
        elif ch.isspace():
            i += 1
        elif ch == "|":
            j = text.index("|", i + 1)
            out.append(text[i:j + 1])
            i = j + 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            out.append(text[i:j])
            i = j
    return out


def parse_sexprs(text: str):
    tokens = _tokenize(text)
    pos = 0

    def parse():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while pos < len(tokens) and tokens[pos] != ")":
                items.append(parse())
            if pos >= len(tokens):
                raise SolverProtocolError("unbalanced S-expression")
            pos += 1
            return items
        if tok == ")":
            raise SolverProtocolError("unbalanced S-expression")
        return tok

    out = []
    while pos < len(tokens):
        out.append(parse())
    return out


def _model_value(expr) -> int:
    if isinstance(expr, str):
        return int(expr)
    if isinstance(expr, list) and len(expr) == 2 and expr[0] == "-":
        return -_model_value(expr[1])
    raise SolverProtocolError(f"unparsable model value: {expr!r}")


def _unquote(name: str) -> str:
    return name[1:-1] if name.startswith("|") and name.endswith("|") else name


class SmtLibSolver:
    """One-shot SMT-LIB sessions over a user-configured solver command.

    Each query owns a private subprocess; nothing is shared between queries,
    so independent queries may run concurrently.
    """

    def __init__(self, command: str | list[str], timeout: float = 60.0,
                 logic: str | None = None):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout
        self.logic = logic

    def _script(self, phi: Formula) -> str:
        logic = self.logic or (QF_LOGIC if is_quantifier_free(phi) else QUANT_LOGIC)
        lines = [f"(set-logic {_LOGIC_NAMES[logic]})"]
        lines.append(emit_smtlib(phi, logic).rstrip("\n"))
        lines.append("(check-sat)")
        lines.append("(get-model)")
        lines.append("(exit)")
        return "\n".join(lines) + "\n"

    def is_sat(self, phi: Formula) -> SolverVerdict:
        script = self._script(phi)
        try:
            proc = subprocess.run(
                self.command, input=script, text=True,
                capture_output=True, timeout=self.timeout,
            )
        except subprocess.TimeoutExpired:
            return SolverVerdict.unknown(f"solver timeout after {self.timeout}s")
        except OSError as exc:
            return SolverVerdict.unknown(f"solver process failure: {exc}")
        lines = [ln.strip() for ln in proc.stdout.splitlines() if ln.strip()]
        if not lines:
            return SolverVerdict.unknown(
                f"no solver output (stderr: {proc.stderr.strip()[:200]})")
        verdict, rest = lines[0], "\n".join(lines[1:])
        if verdict == "unsat":
            return SolverVerdict.unsat()
        if verdict == "unknown":
            return SolverVerdict.unknown("solver reported unknown")
        if verdict != "sat":
            raise SolverProtocolError(f"unexpected solver answer {verdict!r}")
        model = self._parse_model(rest)
        out = {v: model.get(v, 0) for v in free_vars(phi)}
        try:
            ok = eval_formula(phi, out) if is_quantifier_free(phi) else True
        except Exception:
            ok = False
        if not ok and is_quantifier_free(phi):
            return SolverVerdict.unknown("solver model failed validation")
        return SolverVerdict.sat(out)

    @staticmethod
    def _parse_model(text: str) -> dict[str, int]:
        model: dict[str, int] = {}
        for expr in parse_sexprs(text):
            if not isinstance(expr, list):
                continue
            entries = expr[1:] if expr and expr[0] == "model" else expr
            for entry in entries:
                if (isinstance(entry, list) and len(entry) == 5
                        and entry[0] == "define-fun" and entry[3] == "Int"):
                    model[_unquote(entry[1])] = _model_value(entry[4])
        return model
