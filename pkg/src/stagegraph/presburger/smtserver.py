"""A minimal SMT-LIB 2 server over the built-in solver.

Speaks exactly the command subset the library's sessions use (set-logic,
declare-const, assert, check-sat, get-model, exit), which makes the
subprocess solver interface testable without any third-party solver:

    python -m stagegraph.presburger.smtserver

SMT-LIB integers are signed, while the internal solver works over the
naturals, so every declared or bound variable v is split into v+ - v-.
"""

from __future__ import annotations

import sys

from . import formula as F
from .formula import Cmp, FAtom, LinearTerm, conj, disj, exists, negate
from .smtlib import _emit_int, _smt_name, _unquote, parse_sexprs
from .solve import BuiltinSolver


def _parse_term(expr, scope: set[str]) -> LinearTerm:
    if isinstance(expr, str):
        name = _unquote(expr)
        if name.lstrip("-").isdigit():
            return LinearTerm.of(int(name))
        if name not in scope:
            raise ValueError(f"undeclared identifier {name!r}")
        return LinearTerm.var(name)
    head = expr[0]
    args = [_parse_term(a, scope) for a in expr[1:]]
    if head == "+":
        out = LinearTerm.of(0)
        for a in args:
            out = out.add(a)
        return out
    if head == "-":
        if len(args) == 1:
            return args[0].scale(-1)
        out = args[0]
        for a in args[1:]:
            out = out.sub(a)
        return out
    if head == "*":
        consts = [a for a in args if a.is_constant()]
        rest = [a for a in args if not a.is_constant()]
        if len(rest) > 1:
            raise ValueError("nonlinear multiplication")
        k = 1
        for c in consts:
            k *= c.const
        return rest[0].scale(k) if rest else LinearTerm.of(k)
    raise ValueError(f"unsupported term {expr!r}")


def _parse_formula(expr, scope: set[str]) -> F.Formula:
    if isinstance(expr, str):
        if expr == "true":
            return F.TRUE
        if expr == "false":
            return F.FALSE
        raise ValueError(f"unsupported formula atom {expr!r}")
    head = expr[0]
    if head == "and":
        return conj([_parse_formula(a, scope) for a in expr[1:]])
    if head == "or":
        return disj([_parse_formula(a, scope) for a in expr[1:]])
    if head == "not":
        return negate(_parse_formula(expr[1], scope))
    if head == "=>":
        lhs = _parse_formula(expr[1], scope)
        rhs = _parse_formula(expr[2], scope)
        return disj([negate(lhs), rhs])
    if head == "exists":
        names = [_unquote(d[0]) for d in expr[1]]
        body = _parse_formula(expr[2], scope | set(names))
        return exists(names, body)
    if head in ("<=", "<", ">=", ">", "="):
        op = "==" if head == "=" else head
        lhs = _parse_term(expr[1], scope)
        rhs = _parse_term(expr[2], scope)
        return FAtom(Cmp(lhs, op, rhs))
    raise ValueError(f"unsupported formula {expr!r}")


def _split_signed(phi: F.Formula, names) -> tuple[F.Formula, dict[str, tuple[str, str]]]:
    pairs = {v: (f"{v}!pos", f"{v}!neg") for v in names}
    mapping = {v: LinearTerm.make({p: 1, n: -1}) for v, (p, n) in pairs.items()}
    return F.substitute(phi, mapping), pairs


def _split_exists(phi: F.Formula) -> F.Formula:
    if isinstance(phi, F.Exists):
        body, pairs = _split_signed(_split_exists(phi.body), phi.bound)
        flat = [x for pn in pairs.values() for x in pn]
        return exists(flat, body)
    if isinstance(phi, F.And):
        return conj([_split_exists(c) for c in phi.children])
    if isinstance(phi, F.Or):
        return disj([_split_exists(c) for c in phi.children])
    if isinstance(phi, F.Not):
        return negate(_split_exists(phi.child))
    return phi


def run(stream_in, stream_out) -> None:
    solver = BuiltinSolver()
    decls: list[str] = []
    asserts: list[F.Formula] = []
    last_model: dict[str, int] | None = None

    def out(line: str) -> None:
        stream_out.write(line + "\n")

    for expr in parse_sexprs(stream_in.read()):
        if not isinstance(expr, list) or not expr:
            continue
        cmd = expr[0]
        try:
            if cmd in ("set-logic", "set-option", "set-info"):
                continue
            if cmd == "declare-const":
                decls.append(_unquote(expr[1]))
            elif cmd == "declare-fun":
                if expr[2] != []:
                    raise ValueError("only constants are supported")
                decls.append(_unquote(expr[1]))
            elif cmd == "assert":
                asserts.append(_parse_formula(expr[1], set(decls)))
            elif cmd == "check-sat":
                phi = _split_exists(conj(asserts))
                split, pairs = _split_signed(phi, decls)
                verdict = solver.is_sat(split)
                if verdict.is_sat:
                    m = verdict.model or {}
                    last_model = {v: m.get(p, 0) - m.get(n, 0)
                                  for v, (p, n) in pairs.items()}
                    out("sat")
                elif verdict.is_unsat:
                    last_model = None
                    out("unsat")
                else:
                    last_model = None
                    out("unknown")
            elif cmd == "get-model":
                if last_model is None:
                    out('(error "model is not available")')
                else:
                    entries = " ".join(
                        f"(define-fun {_smt_name(v)} () Int {_emit_int(val)})"
                        for v, val in sorted(last_model.items()))
                    out(f"( {entries} )")
            elif cmd == "exit":
                break
            else:
                out(f'(error "unsupported command {cmd}")')
        except Exception as exc:  # surface per-command errors SMT-LIB style
            out(f'(error "{exc}")')
    stream_out.flush()


def main() -> int:
    run(sys.stdin, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
