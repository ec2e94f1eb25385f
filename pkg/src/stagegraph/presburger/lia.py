"""Exact decision procedures for linear integer arithmetic over naturals.

Everything here is exact: the LP relaxation runs a Fraction-based simplex,
and integer feasibility falls back from branch-and-bound to a complete
test-point elimination when branching does not converge.

A constraint system is a triple (les, eqs, congs) of rows over variable
names, every variable implicitly ranging over the nonnegative integers:

    les:   (coeffs, const)    meaning  sum(coeffs) + const <= 0
    eqs:   (coeffs, const)    meaning  sum(coeffs) + const == 0
    congs: (coeffs, const, m) meaning  sum(coeffs) + const == 0  (mod m)
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm

Row = tuple[dict[str, int], int]


def _row_sub(coeffs: dict[str, int], const: int, var: str,
             rep: dict[str, int], rep_const: int, var_coeff: int) -> Row:
    """Replace var (appearing with var_coeff) by the expression rep + rep_const."""
    out = {v: c for v, c in coeffs.items() if v != var}
    for v, c in rep.items():
        out[v] = out.get(v, 0) + var_coeff * c
        if out[v] == 0:
            del out[v]
    return out, const + var_coeff * rep_const


def _vars_of(les, eqs, congs) -> list[str]:
    seen: set[str] = set()
    for coeffs, _ in les:
        seen.update(coeffs)
    for coeffs, _ in eqs:
        seen.update(coeffs)
    for coeffs, _, _ in congs:
        seen.update(coeffs)
    return sorted(seen)


class _Infeasible(Exception):
    pass


# ---------------------------------------------------------------------------
# Exact LP feasibility (two-phase simplex with Bland's rule)
# ---------------------------------------------------------------------------

def lp_feasible(les: list[Row], eqs: list[Row]) -> dict[str, Fraction] | None:
    """A rational point of {x >= 0 | les, eqs}, or None if the polyhedron is empty."""
    names = _vars_of(les, eqs, [])
    col = {v: i for i, v in enumerate(names)}
    n = len(names)

    # Row normal form: sum(a * x) (= or <=) b.
    norm: list[tuple[list[int], int, bool]] = []
    for coeffs, const in les:
        vec = [0] * n
        for v, c in coeffs.items():
            vec[col[v]] = c
        norm.append((vec, -const, False))
    for coeffs, const in eqs:
        vec = [0] * n
        for v, c in coeffs.items():
            vec[col[v]] = c
        norm.append((vec, -const, True))

    m = len(norm)
    n_slack = sum(1 for _, _, is_eq in norm if not is_eq)
    total = n + n_slack + m  # reserve an artificial column per row
    tableau: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    basis: list[int] = []
    n_art = 0
    slack_i = 0

    for vec, b, is_eq in norm:
        row = [Fraction(0)] * total
        for j, a in enumerate(vec):
            row[j] = Fraction(a)
        if not is_eq:
            row[n + slack_i] = Fraction(1)
            this_slack = n + slack_i
            slack_i += 1
        else:
            this_slack = None
        if b < 0:
            row = [-x for x in row]
            b = -b
        if this_slack is not None and row[this_slack] == 1:
            basis.append(this_slack)
        else:
            art = n + n_slack + n_art
            n_art += 1
            row[art] = Fraction(1)
            basis.append(art)
        tableau.append(row)
        rhs.append(Fraction(b))

    art_cols = set(range(n + n_slack, n + n_slack + n_art))
    if not art_cols:
        # Slack basis is already feasible.
        sol = {v: Fraction(0) for v in names}
        return sol

    # Phase-1 objective: maximize -(sum of artificials).
    cost = [Fraction(0)] * total
    z = Fraction(0)
    for i, b in enumerate(basis):
        if b in art_cols:
            for j in range(total):
                cost[j] += tableau[i][j]
            z -= rhs[i]
    for b in basis:
        cost[b] = Fraction(0)

    while True:
        enter = -1
        for j in range(total):
            if cost[j] > 0:
                enter = j
                break
        if enter < 0:
            break
        leave = -1
        best: Fraction | None = None
        for i in range(m):
            a = tableau[i][enter]
            if a > 0:
                ratio = rhs[i] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            break  # unbounded improvement cannot occur in phase 1
        piv = tableau[leave][enter]
        tableau[leave] = [x / piv for x in tableau[leave]]
        rhs[leave] /= piv
        for i in range(m):
            if i != leave and tableau[i][enter] != 0:
                f = tableau[i][enter]
                tableau[i] = [x - f * y for x, y in zip(tableau[i], tableau[leave])]
                rhs[i] -= f * rhs[leave]
        f = cost[enter]
        cost = [x - f * y for x, y in zip(cost, tableau[leave])]
        z += f * rhs[leave]
        basis[leave] = enter

    if z < 0:
        return None
    sol = {v: Fraction(0) for v in names}
    for i, b in enumerate(basis):
        if b < n:
            sol[names[b]] = rhs[i]
    return sol


# ---------------------------------------------------------------------------
# Normalization: gcd pruning and unit-coefficient equality substitution
# ---------------------------------------------------------------------------

def _normalize(les: list[Row], eqs: list[Row], congs) -> tuple[list[Row], list[Row], list, list]:
    """Shrink the system; raises _Infeasible on a detected contradiction.

    Returns (les, eqs, congs, substitutions); substitutions is a list of
    (var, rep_coeffs, rep_const, divisor) applied last-to-first when a model
    of the reduced system is extended back to the full variable set.
    """
    les = [({**c}, k) for c, k in les]
    eqs = [({**c}, k) for c, k in eqs]
    congs = [({**c}, k, m) for c, k, m in congs]
    subs: list[tuple[str, dict[str, int], int, int]] = []

    changed = True
    while changed:
        changed = False

        kept_eqs: list[Row] = []
        for coeffs, const in eqs:
            if not coeffs:
                if const != 0:
                    raise _Infeasible
                continue
            g = gcd(*(abs(c) for c in coeffs.values()))
            if const % g != 0:
                raise _Infeasible
            if g > 1:
                coeffs = {v: c // g for v, c in coeffs.items()}
                const //= g
            kept_eqs.append((coeffs, const))
        eqs = kept_eqs

        pivot = None
        for idx, (coeffs, const) in enumerate(eqs):
            for v, c in coeffs.items():
                if c in (1, -1):
                    pivot = (idx, v, c)
                    break
            if pivot:
                break
        if pivot:
            idx, v, c = pivot
            coeffs, const = eqs.pop(idx)
            # v = -(rest + const)/c ; with c = +-1 this stays integral.
            rep = {w: -(cc // c) for w, cc in coeffs.items() if w != v}
            rep_const = -(const // c)
            subs.append((v, rep, rep_const, 1))
            les = [_row_sub(co, k, v, rep, rep_const, co[v]) if v in co else (co, k)
                   for co, k in les]
            eqs = [_row_sub(co, k, v, rep, rep_const, co[v]) if v in co else (co, k)
                   for co, k in eqs]
            congs = [(*_row_sub(co, k, v, rep, rep_const, co[v]), m) if v in co else (co, k, m)
                     for co, k, m in congs]
            # v >= 0 must survive the substitution.
            neg = {w: -cc for w, cc in rep.items()}
            les.append((neg, -rep_const))
            changed = True
            continue

        kept_les: list[Row] = []
        for coeffs, const in les:
            if not coeffs:
                if const > 0:
                    raise _Infeasible
                continue
            kept_les.append((coeffs, const))
        les = kept_les

        kept_congs = []
        for coeffs, const, m in congs:
            coeffs = {v: c % m for v, c in coeffs.items()}
            coeffs = {v: c for v, c in coeffs.items() if c != 0}
            const %= m
            if not coeffs:
                if const != 0:
                    raise _Infeasible
                continue
            kept_congs.append((coeffs, const, m))
        congs = kept_congs

    return les, eqs, congs, subs


def _apply_subs(model: dict[str, int], subs) -> dict[str, int]:
    for var, rep, rep_const, div in reversed(subs):
        val = rep_const + sum(c * model.get(v, 0) for v, c in rep.items())
        assert val % div == 0
        model[var] = val // div
    return model


# ---------------------------------------------------------------------------
# Complete decision: branch-and-bound with test-point elimination fallback
# ---------------------------------------------------------------------------

def _branch_and_bound(les: list[Row], eqs: list[Row], budget: list[int]):
    """Returns ('sat', model) | ('unsat', None) | ('budget', None)."""
    if budget[0] <= 0:
        return "budget", None
    budget[0] -= 1
    point = lp_feasible(les, eqs)
    if point is None:
        return "unsat", None
    frac_var = None
    for v in sorted(point):
        if point[v].denominator != 1:
            frac_var = v
            break
    if frac_var is None:
        return "sat", {v: int(x) for v, x in point.items()}
    fl = point[frac_var].numerator // point[frac_var].denominator
    left = les + [({frac_var: 1}, -fl)]
    status, model = _branch_and_bound(left, eqs, budget)
    if status != "unsat":
        return status, model
    right = les + [({frac_var: -1}, fl + 1)]
    return _branch_and_bound(right, eqs, budget)


def _pick_var(les, eqs, congs) -> str:
    counts: dict[str, int] = {}
    for coeffs, _ in les + eqs:
        for v in coeffs:
            counts[v] = counts.get(v, 0) + 1
    for coeffs, _, _ in congs:
        for v in coeffs:
            counts[v] = counts.get(v, 0) + 1
    return min(counts, key=lambda v: (counts[v], v))


def _eliminate(les, eqs, congs, var):
    """Test-point elimination of one variable; yields reduced systems with a
    callback computing the eliminated value from a model of the residue."""
    delta = 1
    for coeffs, _ in les + eqs:
        if var in coeffs:
            delta = lcm(delta, abs(coeffs[var]))
    for coeffs, _, _ in congs:
        if var in coeffs:
            delta = lcm(delta, abs(coeffs[var]))

    # Scale every atom so the coefficient of y := delta * var is +-1.
    sc_les, oth_les, sc_eqs, oth_eqs, sc_congs, oth_congs = [], [], [], [], [], []
    for coeffs, const in les:
        if var in coeffs:
            f = delta // abs(coeffs[var])
            sc_les.append(({v: c * f for v, c in coeffs.items()}, const * f))
        else:
            oth_les.append((coeffs, const))
    for coeffs, const in eqs:
        if var in coeffs:
            f = delta // abs(coeffs[var])
            sc_eqs.append(({v: c * f for v, c in coeffs.items()}, const * f))
        else:
            oth_eqs.append((coeffs, const))
    for coeffs, const, m in congs:
        if var in coeffs:
            f = delta // abs(coeffs[var])
            sc_congs.append(({v: c * f for v, c in coeffs.items()}, const * f, m * f))
        else:
            oth_congs.append((coeffs, const, m))

    # Lower bounds b < y, collected as terms (coeffs, const) over other vars.
    lowers: list[Row] = [({}, -1)]  # y >= 0
    for coeffs, const in sc_les:
        rest = {v: c for v, c in coeffs.items() if v != var}
        if coeffs[var] < 0:  # -y + rest + const <= 0  =>  y >= rest + const
            lowers.append((rest, const - 1))
    for coeffs, const in sc_eqs:
        rest = {v: c for v, c in coeffs.items() if v != var}
        if coeffs[var] < 0:
            lowers.append((rest, const - 1))
        else:
            lowers.append(({v: -c for v, c in rest.items()}, -const - 1))

    period = delta
    for coeffs, _, m in sc_congs:
        period = lcm(period, m)

    def substituted(b: Row, j: int):
        """Every atom with y := b + j substituted (y has coefficient +-1 now)."""
        b_coeffs, b_const = b
        tp_coeffs, tp_const = b_coeffs, b_const + j
        n_les = list(oth_les)
        for coeffs, const in sc_les:
            sign = 1 if coeffs[var] > 0 else -1
            rest = {v: c for v, c in coeffs.items() if v != var}
            row, k = rest, const
            for v, c in tp_coeffs.items():
                row = {**row}
                row[v] = row.get(v, 0) + sign * c
                if row[v] == 0:
                    del row[v]
            n_les.append((row, k + sign * tp_const))
        n_eqs = list(oth_eqs)
        for coeffs, const in sc_eqs:
            sign = 1 if coeffs[var] > 0 else -1
            rest = {v: c for v, c in coeffs.items() if v != var}
            row = {**rest}
            for v, c in tp_coeffs.items():
                row[v] = row.get(v, 0) + sign * c
                if row[v] == 0:
                    del row[v]
            n_eqs.append((row, const + sign * tp_const))
        n_congs = list(oth_congs)
        for coeffs, const, m in sc_congs:
            sign = 1 if coeffs[var] > 0 else -1
            rest = {v: c for v, c in coeffs.items() if v != var}
            row = {**rest}
            for v, c in tp_coeffs.items():
                row[v] = row.get(v, 0) + sign * c
                if row[v] == 0:
                    del row[v]
            n_congs.append((row, const + sign * tp_const, m))
        if delta > 1:
            n_congs.append((dict(tp_coeffs), tp_const, delta))
        # y >= 0 is implicit in the variable domain, so the test point must
        # carry it explicitly: -(b + j) <= 0.
        n_les.append(({v: -c for v, c in tp_coeffs.items()}, -tp_const))
        return n_les, n_eqs, n_congs

    def branches():
        for b in lowers:
            for j in range(1, period + 1):
                yield b, j, substituted(b, j)

    def value_of(b: Row, j: int, model: dict[str, int]) -> int:
        b_coeffs, b_const = b
        y = b_const + j + sum(c * model.get(v, 0) for v, c in b_coeffs.items())
        assert y % delta == 0 and y >= 0
        return y // delta

    return branches, value_of


def decide(les: list[Row], eqs: list[Row], congs=None,
           bb_budget: int = 400) -> dict[str, int] | None:
    """Find nonnegative integers satisfying the system, or prove there are none.

    Complete: branch-and-bound handles the common case quickly and the
    test-point elimination takes over when branching exceeds its budget.
    """
    congs = congs or []
    try:
        les, eqs, congs, subs = _normalize(les, eqs, congs)
    except _Infeasible:
        return None

    if not congs:
        status, model = _branch_and_bound(les, eqs, [bb_budget])
        if status == "sat":
            full = dict(model)
            for v in _vars_of(les, eqs, []):
                full.setdefault(v, 0)
            return _apply_subs(full, subs)
        if status == "unsat":
            return None

    model = _decide_exact(les, eqs, congs)
    if model is None:
        return None
    return _apply_subs(model, subs)


def _decide_exact(les, eqs, congs) -> dict[str, int] | None:
    try:
        les, eqs, congs, subs = _normalize(les, eqs, congs)
    except _Infeasible:
        return None
    names = _vars_of(les, eqs, congs)
    if not names:
        ok = all(const <= 0 for _, const in les) and not eqs and \
            all(const % m == 0 for _, const, m in congs)
        return {} if ok else None
    if lp_feasible(les, eqs) is None:
        return None
    var = _pick_var(les, eqs, congs)
    branches, value_of = _eliminate(les, eqs, congs, var)
    for b, j, (n_les, n_eqs, n_congs) in branches():
        model = _decide_exact(n_les, n_eqs, n_congs)
        if model is not None:
            for v in names:
                model.setdefault(v, 0)
            model[var] = value_of(b, j, model)
            return _apply_subs(model, subs)
    return None
