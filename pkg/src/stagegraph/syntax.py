"""Text syntax for formulas and configurations.

Grammar (the external contract used by system and stage-graph files):

    formula := 'exists' IDENT+ ':' formula | disj
    disj    := conj ('||' conj)*
    conj    := lit ('&&' lit)*
    lit     := '!' lit | '(' formula ')' | atom
    atom    := lin cmp lin | lin '%' INT '==' INT
    lin     := ['-'] term (('+'|'-') term)*
    term    := INT | IDENT | INT '*' IDENT
    cmp     := '<' | '<=' | '==' | '>=' | '>' | '!='

Variables are state names, valued in the naturals.  The existential prefix
is only meaningful in stage-graph files; system files require
quantifier-free formulas.
"""

from __future__ import annotations

import re

from .errors import InputError
from .presburger import (
    Cmp, Cong, Exists, FAtom, Formula, LinearTerm, Not, And, Or,
    conj, disj, exists, free_vars, negate, substitute,
)
from .model import Configuration

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<int>\d+)"
    r"|(?P<op>\|\||&&|<=|>=|==|!=|[!()<>%+\-*:])|(?P<bad>\S))")


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m or m.end() == pos:
                break
            if m.group("bad"):
                raise InputError(self._where(m.start("bad"))
                                 + f": unexpected character {m.group('bad')!r}")
            kind = "ident" if m.group("ident") else "int" if m.group("int") else "op"
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def _where(self, offset: int) -> str:
        line = self.text.count("\n", 0, offset) + 1
        col = offset - (self.text.rfind("\n", 0, offset) + 1) + 1
        return f"line {line}, column {col}"

    def peek(self) -> tuple[str, str] | None:
        if self.i < len(self.tokens):
            kind, val, _ = self.tokens[self.i]
            return kind, val
        return None

    def next(self) -> tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise InputError("unexpected end of formula")
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        tok = self.peek()
        if tok is None or tok[1] != value:
            where = (self._where(self.tokens[self.i][2])
                     if self.i < len(self.tokens) else "end of input")
            got = tok[1] if tok else "end of input"
            raise InputError(f"{where}: expected {value!r}, found {got!r}")
        self.i += 1

    def error(self, msg: str) -> InputError:
        where = (self._where(self.tokens[self.i][2])
                 if self.i < len(self.tokens) else "end of input")
        return InputError(f"{where}: {msg}")


def _parse_lin(lx: _Lexer) -> LinearTerm:
    out = LinearTerm.of(0)
    sign = 1
    tok = lx.peek()
    if tok and tok[1] == "-":
        lx.next()
        sign = -1
    while True:
        tok = lx.peek()
        if tok is None:
            raise lx.error("expected a term")
        kind, val = tok
        if kind == "int":
            lx.next()
            nxt = lx.peek()
            if nxt and nxt[1] == "*":
                lx.next()
                k2, v2 = lx.next()
                if k2 != "ident":
                    raise lx.error("expected a variable after '*'")
                out = out.add(LinearTerm.var(v2, sign * int(val)))
            else:
                out = out.shift(sign * int(val))
        elif kind == "ident":
            lx.next()
            out = out.add(LinearTerm.var(val, sign))
        else:
            raise lx.error(f"expected a term, found {val!r}")
        tok = lx.peek()
        if tok and tok[1] in ("+", "-"):
            sign = 1 if tok[1] == "+" else -1
            lx.next()
            continue
        return out


_CMP_OPS = {"<", "<=", "==", ">=", ">", "!="}


def _parse_atom(lx: _Lexer) -> Formula:
    lhs = _parse_lin(lx)
    tok = lx.peek()
    if tok and tok[1] == "%":
        lx.next()
        k, v = lx.next()
        if k != "int":
            raise lx.error("expected a modulus after '%'")
        m = int(v)
        lx.expect("==")
        k2, v2 = lx.next()
        if k2 != "int":
            raise lx.error("expected a residue after '=='")
        r = int(v2)
        if m < 2:
            raise lx.error("congruence modulus must be at least 2")
        if not 0 <= r < m:
            raise lx.error("congruence residue must lie in [0, modulus)")
        return FAtom(Cong(lhs, m, r))
    if tok is None or tok[1] not in _CMP_OPS:
        raise lx.error("expected a comparison operator")
    lx.next()
    rhs = _parse_lin(lx)
    return FAtom(Cmp(lhs, tok[1], rhs))


def _parse_lit(lx: _Lexer) -> Formula:
    tok = lx.peek()
    if tok is None:
        raise lx.error("expected a formula")
    if tok[1] == "!":
        lx.next()
        return negate(_parse_lit(lx))
    if tok[1] == "(":
        lx.next()
        inner = _parse_formula(lx)
        lx.expect(")")
        return inner
    return _parse_atom(lx)


def _parse_conj(lx: _Lexer) -> Formula:
    parts = [_parse_lit(lx)]
    while (tok := lx.peek()) and tok[1] == "&&":
        lx.next()
        parts.append(_parse_lit(lx))
    return conj(parts) if len(parts) > 1 else parts[0]


def _parse_disj(lx: _Lexer) -> Formula:
    parts = [_parse_conj(lx)]
    while (tok := lx.peek()) and tok[1] == "||":
        lx.next()
        parts.append(_parse_conj(lx))
    return disj(parts) if len(parts) > 1 else parts[0]


def _parse_formula(lx: _Lexer) -> Formula:
    tok = lx.peek()
    if tok and tok[0] == "ident" and tok[1] == "exists":
        lx.next()
        names: list[str] = []
        while (t := lx.peek()) and t[0] == "ident" and t[1] != "exists":
            names.append(lx.next()[1])
        if not names:
            raise lx.error("expected bound variables after 'exists'")
        lx.expect(":")
        return exists(names, _parse_formula(lx))
    return _parse_disj(lx)


def parse_formula(text: str) -> Formula:
    lx = _Lexer(text)
    phi = _parse_formula(lx)
    if lx.peek() is not None:
        raise lx.error("trailing input after formula")
    return phi


def _emit_lin(t: LinearTerm) -> str:
    parts: list[tuple[int, str]] = []
    for v, c in t.coeffs:
        body = v if abs(c) == 1 else f"{abs(c)}*{v}"
        parts.append((1 if c > 0 else -1, body))
    if t.const != 0 or not parts:
        parts.append((1 if t.const >= 0 else -1, str(abs(t.const))))
    out = ("-" if parts[0][0] < 0 else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += (" + " if sign > 0 else " - ") + body
    return out


def _emit(phi: Formula, parenthesize: bool) -> str:
    if isinstance(phi, FAtom):
        a = phi.atom
        if isinstance(a, Cong):
            return f"{_emit_lin(a.term)} % {a.modulus} == {a.residue}"
        return f"{_emit_lin(a.lhs)} {a.op} {_emit_lin(a.rhs)}"
    if isinstance(phi, And):
        if not phi.children:
            return "0 == 0"
        body = " && ".join(_emit(c, isinstance(c, (Or, Exists))) for c in phi.children)
        return f"({body})" if parenthesize else body
    if isinstance(phi, Or):
        if not phi.children:
            return "0 == 1"
        body = " || ".join(_emit(c, isinstance(c, Exists)) for c in phi.children)
        return f"({body})" if parenthesize else body
    if isinstance(phi, Not):
        return "!" + _emit(phi.child, True) if isinstance(phi.child, FAtom) \
            else f"!({_emit(phi.child, False)})"
    if isinstance(phi, Exists):
        body = f"exists {' '.join(phi.bound)}: {_emit(phi.body, False)}"
        return f"({body})" if parenthesize else body
    raise TypeError(f"not a formula: {phi!r}")


def _safe_bound_names(phi: Formula, taken: set[str]) -> Formula:
    """Rename '!'-style internal bound variables to grammar identifiers."""
    if isinstance(phi, Exists):
        mapping = {}
        new_names = []
        for v in phi.bound:
            if "!" not in v and v not in taken:
                name = v
            else:
                stem = re.sub(r"[^A-Za-z0-9_]", "_", v.split("!")[0]) or "v"
                n = 1
                name = f"{stem}_{n}"
                while name in taken:
                    n += 1
                    name = f"{stem}_{n}"
            taken.add(name)
            new_names.append(name)
            if name != v:
                mapping[v] = LinearTerm.var(name)
        body = substitute(phi.body, mapping) if mapping else phi.body
        return Exists(tuple(new_names), _safe_bound_names(body, taken))
    if isinstance(phi, And):
        return And(tuple(_safe_bound_names(c, taken) for c in phi.children))
    if isinstance(phi, Or):
        return Or(tuple(_safe_bound_names(c, taken) for c in phi.children))
    if isinstance(phi, Not):
        return Not(_safe_bound_names(phi.child, taken))
    return phi


def format_formula(phi: Formula) -> str:
    """Grammar-conformant text; parse_formula(format_formula(phi)) == phi
    up to bound-variable names."""
    renamed = _safe_bound_names(phi, set(free_vars(phi)))
    return _emit(renamed, False)


def parse_config_string(text: str) -> Configuration:
    """Parse "STATE:count,..." with omitted states defaulting to zero."""
    counts: dict[str, int] = {}
    text = text.strip()
    if not text:
        return Configuration.zero()
    for chunk in text.split(","):
        if ":" not in chunk:
            raise InputError(f"bad configuration entry {chunk.strip()!r}, "
                             "expected STATE:count")
        state, _, num = chunk.partition(":")
        state, num = state.strip(), num.strip()
        if not num.isdigit():
            raise InputError(f"bad count {num!r} for state {state!r}")
        counts[state] = counts.get(state, 0) + int(num)
    return Configuration.make(counts)


def format_config(C: Configuration) -> str:
    return ",".join(f"{s}:{n}" for s, n in C.counts)
