"""Exact linear feasibility by Fourier-Motzkin elimination.

Rows are kept over `Fraction`; strict and non-strict inequalities are
carried together (a strict row combined with anything stays strict).
Equalities are eliminated by substitution before any FM step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .terms import (
    ADD, EQ, HALF, IMPL, JOIN, LE, LT, MEET, MINUS_ONE, NEG, ONE, OPLUS,
    OTIMES, ZERO, Atom, Binary, Const, Term, Unary, Var,
)

DEFAULT_ROW_CAP = 200_000
DEFAULT_C = 20

F0 = Fraction(0)
F1 = Fraction(1)


class FmBlowup(RuntimeError):
    def __init__(self, cap: int):
        super().__init__(f"Fourier-Motzkin elimination exceeded {cap} rows")
        self.cap = cap


# -- affine expressions -------------------------------------------------------

class Lin:
    """Affine form sum(coeffs[v] * v) + const, immutable by convention."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs: Mapping[str, Fraction] | None = None, const=F0):
        self.coeffs = {v: c for v, c in (coeffs or {}).items() if c}
        self.const = Fraction(const)

    @classmethod
    def var(cls, name: str) -> "Lin":
        return cls({name: F1})

    def __add__(self, other: "Lin") -> "Lin":
        out = dict(self.coeffs)
        for v, c in other.coeffs.items():
            out[v] = out.get(v, F0) + c
        return Lin(out, self.const + other.const)

    def __neg__(self) -> "Lin":
        return Lin({v: -c for v, c in self.coeffs.items()}, -self.const)

    def __sub__(self, other: "Lin") -> "Lin":
        return self + (-other)

    def shift(self, k) -> "Lin":
        return Lin(self.coeffs, self.const + k)

    def __repr__(self):
        terms = " + ".join(f"{c}*{v}" for v, c in sorted(self.coeffs.items()))
        return f"Lin({terms or '0'} + {self.const})"


# (lin, rel) means  lin rel 0  with rel in {=, <=, <}
Constraint = tuple[Lin, str]

CONST_VALUE = {ZERO: F0, ONE: F1, MINUS_ONE: -F1, HALF: Fraction(1, 2)}

# regime labels per piecewise operator; first label is tried first
REGIMES = {
    MEET: ("left", "right"),
    JOIN: ("left", "right"),
    OTIMES: ("zero", "sum"),
    OPLUS: ("sum", "one"),
    IMPL: ("one", "diff"),
}


def regime(op: str, label: str, a: Lin, b: Lin) -> tuple[Lin, list[Constraint]]:
    """Value and side conditions of `a op b` inside one linear regime.

    The regimes of an operator partition the plane: ties belong to the
    first label, so the second one is guarded by a strict row.
    """
    if op == MEET:
        if label == "left":
            return a, [(a - b, LE)]
        return b, [(b - a, LT)]
    if op == JOIN:
        if label == "left":
            return a, [(b - a, LE)]
        return b, [(a - b, LT)]
    s = a + b
    if op == OTIMES:
        if label == "zero":
            return Lin(), [(s.shift(-1), LE)]
        return s.shift(-1), [(-s.shift(-1), LT)]
    if op == OPLUS:
        if label == "sum":
            return s, [(s.shift(-1), LE)]
        return Lin(const=1), [(-s.shift(-1), LT)]
    if op == IMPL:
        if label == "one":
            return Lin(const=1), [(a - b, LE)]
        return (b - a).shift(1), [(b - a, LT)]
    raise ValueError(f"{op!r} is not piecewise")


def regime_at(op: str, a: Fraction, b: Fraction) -> str:
    """The regime of `a op b` that holds at the given argument values."""
    if op == MEET:
        return "left" if a <= b else "right"
    if op == JOIN:
        return "left" if a >= b else "right"
    if op == OTIMES:
        return "zero" if a + b <= 1 else "sum"
    if op == OPLUS:
        return "sum" if a + b <= 1 else "one"
    if op == IMPL:
        return "one" if a <= b else "diff"
    raise ValueError(f"{op!r} is not piecewise")


def relaxation(op: str, t: Lin, a: Lin, b: Lin, bounded: bool) -> list[Constraint]:
    """Linear consequences of t = a op b valid in every regime.

    The MV bounds rely on all values lying in [0, 1].
    """
    one = Lin(const=1)
    if op == MEET:
        return [(t - a, LE), (t - b, LE)]
    if op == JOIN:
        return [(a - t, LE), (b - t, LE)]
    if not bounded:
        return []
    if op == OPLUS:
        return [(t - a - b, LE), (t - one, LE), (a - t, LE), (b - t, LE)]
    if op == OTIMES:
        return [((a + b).shift(-1) - t, LE), (-t, LE), (t - a, LE), (t - b, LE)]
    if op == IMPL:
        return [((b - a).shift(1) - t, LE), (t - one, LE), (b - t, LE), ((-a).shift(1) - t, LE)]
    return []


def split_sides(atom: Atom):
    """(op, value side, left arg, right arg) if `atom` equates a linear term with
    one piecewise operation on linear arguments; None otherwise."""
    if atom.rel != EQ:
        return None
    for pw, other in ((atom.left, atom.right), (atom.right, atom.left)):
        if isinstance(pw, Binary) and pw.op in REGIMES:
            side: list = []
            try:
                a = linearize_term(pw.left, None, side)
                b = linearize_term(pw.right, None, side)
                t = linearize_term(other, None, side)
            except ValueError:
                return None
            return pw.op, t, a, b
    return None


def evaluate_lin(lin: Lin, values: Mapping[str, Fraction]) -> Fraction:
    return lin.const + sum((c * values[v] for v, c in lin.coeffs.items()), F0)


def piecewise_op(atom: Atom) -> Optional[str]:
    """The single piecewise operator of a flat atom, or None if it is linear."""
    found = [t.op for side in (atom.left, atom.right) for t in _nodes(side)
             if isinstance(t, Binary) and t.op in REGIMES]
    if len(found) > 1:
        raise ValueError("atom has more than one piecewise operator; flatten it first")
    return found[0] if found else None


def case_options(atom: Atom) -> tuple[str, ...]:
    op = piecewise_op(atom)
    return REGIMES[op] if op else ()


def _nodes(t: Term):
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        if isinstance(s, Unary):
            stack.append(s.child)
        elif isinstance(s, Binary):
            stack.extend((s.left, s.right))


def linearize_term(t: Term, case: Optional[str], side: list[Constraint]) -> Lin:
    if isinstance(t, Var):
        return Lin.var(t.name)
    if isinstance(t, Const):
        return Lin(const=CONST_VALUE[t.symbol])
    if isinstance(t, Unary):
        c = linearize_term(t.child, case, side)
        return -c if t.op == NEG else (-c).shift(1)
    a = linearize_term(t.left, case, side)
    b = linearize_term(t.right, case, side)
    if t.op == ADD:
        return a + b
    if case is None:
        raise ValueError(f"no regime chosen for {t.op!r}")
    value, guards = regime(t.op, case, a, b)
    side.extend(guards)
    return value


def linearize(atom: Atom, case: Optional[str] = None) -> list[Constraint]:
    """Constraints equivalent to `atom` within the regime `case`."""
    side: list[Constraint] = []
    left = linearize_term(atom.left, case, side)
    right = linearize_term(atom.right, case, side)
    return side + [(left - right, atom.rel)]


# -- integer systems ----------------------------------------------------------

@dataclass(frozen=True)
class LinearSystem:
    """A x <= b together with B x < d over `variables` (integer A, B)."""

    variables: tuple[str, ...]
    A: tuple[tuple[int, ...], ...] = ()
    b: tuple[Fraction, ...] = ()
    B: tuple[tuple[int, ...], ...] = ()
    d: tuple[Fraction, ...] = ()

    @property
    def entry_bound(self) -> int:
        entries = [abs(x) for row in self.A + self.B for x in row]
        entries += [abs(x) for x in self.b + self.d]
        return max([1, *map(math.ceil, entries)])

    @property
    def n_rows(self) -> int:
        return len(self.A) + len(self.B)

    def rows(self):
        """(coefficients, rhs, strict, key) for every row."""
        for i, (row, rhs) in enumerate(zip(self.A, self.b)):
            yield row, rhs, False, ("A", i)
        for j, (row, rhs) in enumerate(zip(self.B, self.d)):
            yield row, rhs, True, ("B", j)

    def satisfied_by(self, x: Mapping[str, Fraction]) -> bool:
        for row, rhs, strict, _ in self.rows():
            lhs = sum((c * Fraction(x[v]) for c, v in zip(row, self.variables) if c), F0)
            if lhs > rhs or (strict and lhs == rhs):
                return False
        return True

    def dump(self) -> str:
        """Plain tableau: one row per line, coefficients, relation, rhs."""
        lines = ["vars " + " ".join(self.variables)]
        for row, rhs, strict, _ in self.rows():
            rel = "<" if strict else "<="
            lines.append(" ".join(f"{c:d}" for c in row) + f" {rel} {rhs}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_constraints(cls, constraints: Iterable[Constraint],
                         variables: Iterable[str] | None = None) -> "LinearSystem":
        constraints = list(constraints)
        names = list(variables) if variables is not None else []
        seen = set(names)
        for lin, _ in constraints:
            for v in sorted(lin.coeffs):
                if v not in seen:
                    seen.add(v)
                    names.append(v)
        A, b, B, d = [], [], [], []

        def row(lin: Lin):
            out = []
            for v in names:
                c = lin.coeffs.get(v, F0)
                if c.denominator != 1:
                    raise ValueError("non-integer coefficient in extracted row")
                out.append(int(c))
            return tuple(out), -lin.const

        for lin, rel in constraints:
            if rel == EQ:
                for side in (lin, -lin):
                    r, rhs = row(side)
                    A.append(r)
                    b.append(rhs)
            else:
                r, rhs = row(lin)
                (B if rel == LT else A).append(r)
                (d if rel == LT else b).append(rhs)
        return cls(tuple(names), tuple(A), tuple(b), tuple(B), tuple(d))


def extract_system(atoms: Iterable[Atom], cases: Mapping[int, str] | None = None, *,
                   fixed: Mapping[str, Fraction] | None = None,
                   box: tuple[Fraction, Fraction] | None = None) -> LinearSystem:
    """Linear system of a flat conjunction under a choice of regimes.

    `cases[i]` selects the regime of the piecewise operator in atom i
    (e.g. "left" for `x /\\ y = z` makes x the minimum).  `fixed` pins
    variables to values; `box` adds lo <= v <= hi for every variable.
    """
    cases = cases or {}
    constraints: list[Constraint] = []
    for i, atom in enumerate(atoms):
        constraints.extend(linearize(atom, cases.get(i)))
    for name, value in (fixed or {}).items():
        constraints.append((Lin.var(name).shift(-Fraction(value)), EQ))
    names = []
    seen = set()
    for lin, _ in constraints:
        for v in sorted(lin.coeffs):
            if v not in seen:
                seen.add(v)
                names.append(v)
    if box is not None:
        lo, hi = map(Fraction, box)
        for v in names:
            constraints.append((Lin.var(v).shift(-hi), LE))
            constraints.append(((-Lin.var(v)).shift(lo), LE))
    return LinearSystem.from_constraints(constraints, names)


def perturb_strict(S: LinearSystem, witness: Mapping[str, Fraction]) -> LinearSystem:
    """Replace each strict row B_i x < d_i by B_i x <= d'_i.

    d'_i = max(d_i - 1, B_i w) for a witness w of S, so d_i - 1 <= d'_i < d_i
    and w still satisfies the non-strict system.  Fourier-Motzkin does not
    need this; it reproduces the textbook reduction to non-strict rows.
    """
    if not S.satisfied_by(witness):
        raise ValueError("witness does not satisfy the system")
    rows, rhs = list(S.A), list(S.b)
    for row, d in zip(S.B, S.d):
        value = sum((c * Fraction(witness[v]) for c, v in zip(row, S.variables)), F0)
        rows.append(row)
        rhs.append(max(d - 1, value))
    return LinearSystem(S.variables, tuple(rows), tuple(rhs))


def small_witness_bound(m: int, k: int) -> int:
    """(m k)^m: magnitude bound on some solution of a feasible m-column system."""
    if m < 1 or k < 1:
        raise ValueError("m and k must be positive")
    return (m * k) ** m


@dataclass(frozen=True)
class WitnessBox:
    M: int

    @property
    def bound(self) -> int:
        return 2 ** self.M


def witness_box(N: int, c: int = DEFAULT_C) -> WitnessBox:
    """Smallest M with M >= c N log2(3 c N), computed on integers.

    2^M >= (3cN)^(cN) iff M >= cN log2(3cN), so M is read off the bit
    length of the integer power.
    """
    if N < 1 or c < 1:
        raise ValueError("N and c must be positive")
    power = (3 * c * N) ** (c * N)
    bits = power.bit_length()
    return WitnessBox(bits - 1 if power == 1 << (bits - 1) else bits)


# -- Fourier-Motzkin core -----------------------------------------------------

class _Row:
    """sum(coeffs) (< or <=) rhs, with an optional origin combination."""

    __slots__ = ("coeffs", "rhs", "strict", "origin")

    def __init__(self, coeffs, rhs, strict, origin=None):
        self.coeffs = coeffs
        self.rhs = rhs
        self.strict = strict
        self.origin = origin


def _scale_origin(o, k):
    if o is None or isinstance(o, frozenset):
        return o
    return {key: val * k for key, val in o.items()}


def _combine_origin(o1, k1, o2, k2):
    """Origin of k1*r1 + k2*r2.

    Origins are either coefficient dicts (exact certificates) or
    frozensets of labels, which only record which inputs took part.
    """
    if o1 is None or o2 is None:
        return None
    if isinstance(o1, frozenset):
        return o1 | o2
    out = {key: val * k1 for key, val in o1.items()}
    for key, val in o2.items():
        out[key] = out.get(key, F0) + val * k2
    return {key: val for key, val in out.items() if val}


def _combine(r1: _Row, k1: Fraction, r2: _Row, k2: Fraction) -> _Row:
    """k1*r1 + k2*r2 with k1, k2 > 0."""
    coeffs = {v: c * k1 for v, c in r1.coeffs.items()}
    for v, c in r2.coeffs.items():
        s = coeffs.get(v, F0) + c * k2
        if s:
            coeffs[v] = s
        else:
            coeffs.pop(v, None)
    return _Row(coeffs, r1.rhs * k1 + r2.rhs * k2, r1.strict or r2.strict,
                _combine_origin(r1.origin, k1, r2.origin, k2))


class Infeasible(Exception):
    def __init__(self, origin):
        super().__init__("infeasible")
        self.origin = origin


def _violated(row: _Row) -> bool:
    return row.rhs < 0 or (row.strict and row.rhs == 0)


def _tidy(rows: list[_Row]) -> list[_Row]:
    """Drop duplicates and rows implied by variable bounds; detect conflicts.

    Every row this returns or raises on is a nonnegative combination of
    the input rows, so certificates stay valid.
    """
    best: dict = {}
    for row in rows:
        if not row.coeffs:
            if _violated(row):
                raise Infeasible(row.origin)
            continue
        pivot = min(row.coeffs)
        scale = abs(row.coeffs[pivot])
        key = tuple(sorted((v, c / scale) for v, c in row.coeffs.items()))
        rhs = row.rhs / scale
        old = best.get(key)
        if old is None or rhs < old[0] or (rhs == old[0] and row.strict and not old[1].strict):
            best[key] = (rhs, row)
    lower: dict[str, _Row] = {}
    upper: dict[str, _Row] = {}

    def bound(row: _Row) -> Fraction:
        (v, c), = row.coeffs.items()
        return row.rhs / c

    for rhs, row in best.values():
        if len(row.coeffs) != 1:
            continue
        (v, c), = row.coeffs.items()
        table = upper if c > 0 else lower
        old = table.get(v)
        if old is None:
            table[v] = row
            continue
        bo, bn = bound(old), bound(row)
        tighter = bn < bo if c > 0 else bn > bo
        if tighter or (bn == bo and row.strict and not old.strict):
            table[v] = row
    for v in lower.keys() & upper.keys():
        lo, hi = lower[v], upper[v]
        combo = _combine(lo, 1 / abs(lo.coeffs[v]), hi, 1 / abs(hi.coeffs[v]))
        if _violated(combo):
            raise Infeasible(combo.origin)
    out = []
    for rhs, row in best.values():
        if len(row.coeffs) == 1:
            (v, c), = row.coeffs.items()
            if (upper if c > 0 else lower).get(v) is row:
                out.append(row)
            continue
        # largest and smallest value of the row's left side over the bound box
        hi_sum = lo_sum = F0
        hi_ok = lo_ok = True
        hi_strict = lo_strict = False
        lo_parts = []
        for v, c in row.coeffs.items():
            up, dn = upper.get(v), lower.get(v)
            for want_max in (True, False):
                b = (up if c > 0 else dn) if want_max else (dn if c > 0 else up)
                if b is None:
                    if want_max:
                        hi_ok = False
                    else:
                        lo_ok = False
                    continue
                val = c * bound(b)
                if want_max:
                    hi_sum += val
                    hi_strict |= b.strict
                else:
                    lo_sum += val
                    lo_strict |= b.strict
                    lo_parts.append((b, abs(c) / abs(b.coeffs[v])))
        if lo_ok and (lo_sum > row.rhs or (lo_sum == row.rhs and (row.strict or lo_strict))):
            combo = row
            for b, k in lo_parts:
                combo = _combine(combo, F1, b, k)
            raise Infeasible(combo.origin)
        if hi_ok and (hi_sum < row.rhs or (hi_sum == row.rhs and not row.strict)):
            continue
        out.append(row)
    return out


def _simplest_positive(lo: Fraction, lo_open: bool, hi, hi_open: bool) -> Fraction:
    """Simplest rational in the interval from lo >= 0 to hi (None = infinity)."""
    n = math.floor(lo)
    c = n if (n == lo and not lo_open) else n + 1
    if hi is None or c < hi or (c == hi and not hi_open):
        return Fraction(c)
    # no integer inside: n <= lo and hi <= n + 1, recurse on reciprocals
    new_lo = 1 / (hi - n)
    new_hi = None if lo == n else 1 / (lo - n)
    return n + 1 / _simplest_positive(new_lo, hi_open, new_hi, lo_open)


def choose_value(lo, lo_open: bool, hi, hi_open: bool) -> Fraction:
    """Smallest-denominator rational in the interval, nearest to 0 on ties.

    `lo`/`hi` of None mean unbounded on that side.
    """
    zero_ok = ((lo is None or lo < 0 or (lo == 0 and not lo_open)) and
               (hi is None or hi > 0 or (hi == 0 and not hi_open)))
    if zero_ok:
        return F0
    if lo is not None and lo >= 0:
        return _simplest_positive(lo, lo_open, hi, hi_open)
    # interval lies left of zero: mirror it
    return -_simplest_positive(-hi, hi_open, None if lo is None else -lo, lo_open)


def _eliminate(rows: list[_Row], cap: int, stages: list | None):
    """Run FM to the empty variable set; raise Infeasible on a conflict."""
    peak = len(rows)
    while True:
        rows = _tidy(rows)
        counts: dict[str, list[int]] = {}
        for row in rows:
            for v, c in row.coeffs.items():
                counts.setdefault(v, [0, 0])[0 if c > 0 else 1] += 1
        if not counts:
            return peak
        v = min(sorted(counts), key=lambda u: counts[u][0] * counts[u][1] - sum(counts[u]))
        pos = [r for r in rows if r.coeffs.get(v, F0) > 0]
        neg = [r for r in rows if r.coeffs.get(v, F0) < 0]
        rest = [r for r in rows if v not in r.coeffs]
        if stages is not None:
            stages.append((v, pos + neg))
        if len(rest) + len(pos) * len(neg) > cap:
            raise FmBlowup(cap)
        new = rest
        for p in pos:
            for n in neg:
                new.append(_combine(p, 1 / p.coeffs[v], n, -1 / n.coeffs[v]))
        peak = max(peak, len(new))
        rows = new


def _back_substitute(stages, values: dict[str, Fraction]) -> None:
    for v, vrows in reversed(stages):
        lo = hi = None
        lo_open = hi_open = False
        for row in vrows:
            c = row.coeffs[v]
            rest = sum((k * values.get(u, F0) for u, k in row.coeffs.items() if u != v), F0)
            limit = (row.rhs - rest) / c
            if c > 0:
                if hi is None or limit < hi or (limit == hi and row.strict):
                    hi, hi_open = limit, row.strict
            else:
                if lo is None or limit > lo or (limit == lo and row.strict):
                    lo, lo_open = limit, row.strict
        values[v] = choose_value(lo, lo_open, hi, hi_open)


def _holds_at(row: _Row, x: Mapping[str, Fraction]) -> bool:
    lhs = sum((c * x.get(v, F0) for v, c in row.coeffs.items()), F0)
    return lhs < row.rhs or (lhs == row.rhs and not row.strict)


class Polyhedron:
    """Conjunction of linear constraints with eager equality elimination.

    Copy before branching; `add` mutates.  Variables removed by an
    equality are kept as affine expressions over the remaining ones.
    """

    def __init__(self, track: bool = False, cap: int = DEFAULT_ROW_CAP):
        self.subst: dict[str, tuple[Lin, object]] = {}
        self.order: list[str] = []
        self.rows: list[_Row] = []
        self.known: set[str] = set()
        self.track = track
        self.cap = cap
        self.peak = 0

    def copy(self) -> "Polyhedron":
        other = Polyhedron.__new__(Polyhedron)
        other.subst = dict(self.subst)
        other.order = list(self.order)
        other.rows = list(self.rows)
        other.known = set(self.known)
        other.track = self.track
        other.cap = self.cap
        other.peak = self.peak
        return other

    def _resolve(self, lin: Lin, origin) -> tuple[Lin, object]:
        coeffs = dict(lin.coeffs)
        const = lin.const
        origin = _scale_origin(origin, F1)
        for v in [u for u in coeffs if u in self.subst]:
            c = coeffs.pop(v)
            expr, eorigin = self.subst[v]
            for u, k in expr.coeffs.items():
                s = coeffs.get(u, F0) + c * k
                if s:
                    coeffs[u] = s
                else:
                    coeffs.pop(u, None)
            const += c * expr.const
            if origin is not None:
                origin = _combine_origin(origin, F1, eorigin, -c)
        return Lin(coeffs, const), origin

    def add(self, lin: Lin, rel: str, origin=None, pivot: str | None = None) -> bool:
        """Add `lin rel 0`; False if that is immediately contradictory.

        For an equality, `pivot` names the variable to eliminate with it.
        """
        self.known.update(lin.coeffs)
        if not self.track:
            origin = None
        lin, origin = self._resolve(lin, origin)
        if rel != EQ:
            row = _Row(lin.coeffs, -lin.const, rel == LT, origin)
            if not row.coeffs:
                if _violated(row):
                    self.conflict = origin
                    return False
                return True
            self.rows.append(row)
            return True
        if not lin.coeffs:
            if lin.const != 0:
                # 0 <= -const fails for const > 0; otherwise use the reversed row
                sign = F1 if lin.const > 0 else -F1
                self.conflict = _scale_origin(origin, sign)
                return False
            return True
        # prefer a unit pivot so substituted rows stay integral
        if pivot is not None and pivot in lin.coeffs:
            v = pivot
        else:
            v = min(lin.coeffs, key=lambda u: (abs(lin.coeffs[u]) != 1, u))
        c = lin.coeffs[v]
        expr = Lin({u: -k / c for u, k in lin.coeffs.items() if u != v}, -lin.const / c)
        ok = self._eliminate_var(v, expr, origin, c)
        # stored origin is that of lin / c, i.e. of the row v - expr
        self.subst[v] = (expr, _scale_origin(origin, 1 / c))
        self.order.append(v)
        return ok

    def _eliminate_var(self, v: str, expr: Lin, origin, c: Fraction) -> bool:
        """Substitute v := expr everywhere; False if a row turns into 0 < 0 or worse."""
        ok = True
        new_rows = []
        for row in self.rows:
            k = row.coeffs.get(v)
            if k is None:
                new_rows.append(row)
                continue
            coeffs = dict(row.coeffs)
            del coeffs[v]
            for u, e in expr.coeffs.items():
                s = coeffs.get(u, F0) + k * e
                if s:
                    coeffs[u] = s
                else:
                    coeffs.pop(u, None)
            rhs = row.rhs - k * expr.const
            norigin = None
            if row.origin is not None and origin is not None:
                norigin = _combine_origin(row.origin, F1, origin, -k / c)
            row = _Row(coeffs, rhs, row.strict, norigin)
            if not coeffs:
                if _violated(row) and ok:
                    ok = False
                    self.conflict = norigin
                continue
            new_rows.append(row)
        self.rows = new_rows
        for u, (e, eo) in list(self.subst.items()):
            k = e.coeffs.get(v)
            if k is None:
                continue
            coeffs = dict(e.coeffs)
            del coeffs[v]
            for w, x in expr.coeffs.items():
                s = coeffs.get(w, F0) + k * x
                if s:
                    coeffs[w] = s
                else:
                    coeffs.pop(w, None)
            no = None
            if eo is not None and origin is not None:
                no = _combine_origin(eo, F1, origin, k / c)
            self.subst[u] = (Lin(coeffs, e.const + k * expr.const), no)
        return ok

    def feasible(self) -> bool:
        try:
            self.peak = max(self.peak, _eliminate(list(self.rows), self.cap, None))
        except Infeasible as exc:
            self.conflict = exc.origin
            return False
        return True

    def solve(self, cache: dict | None = None,
              hint: Mapping[str, Fraction] | None = None) -> Optional[dict[str, Fraction]]:
        """A witness over every variable ever mentioned, or None.

        `cache` maps row keys to free-variable solutions and may be shared
        between polyhedra whose rows coincide.  A `hint` that satisfies
        every row is returned as is, without running elimination.
        """
        if hint is not None and all(_holds_at(row, hint) for row in self.rows):
            free = {v: hint.get(v, F0) for v in self.known if v not in self.subst}
            return self._complete(free)
        key = self.key() if cache is not None else None
        if key is not None and key in cache:
            free = cache[key]
        else:
            stages: list = []
            try:
                self.peak = max(self.peak, _eliminate(list(self.rows), self.cap, stages))
                free = {}
                _back_substitute(stages, free)
            except Infeasible as exc:
                self.conflict = exc.origin
                free = None
            if key is not None and (free is not None or not self.track):
                cache[key] = free
        if free is None:
            return None
        return self._complete(free)

    def _complete(self, free: dict[str, Fraction]) -> dict[str, Fraction]:
        values = dict(free)
        for v in self.known:
            if v not in self.subst:
                values.setdefault(v, F0)
        for v in self.subst:
            expr, _ = self.subst[v]
            values[v] = expr.const + sum((c * values.get(u, F0) for u, c in expr.coeffs.items()), F0)
        return values

    def key(self) -> frozenset:
        """Canonical form of the remaining inequality rows, for caching."""
        out = []
        for row in self.rows:
            if not row.coeffs:
                continue
            pivot = min(row.coeffs)
            scale = abs(row.coeffs[pivot])
            out.append((tuple(sorted((v, c / scale) for v, c in row.coeffs.items())),
                        row.rhs / scale, row.strict))
        return frozenset(out)


# -- public entry point -------------------------------------------------------

@dataclass
class Feasibility:
    sat: bool
    witness: Optional[dict[str, Fraction]] = None
    certificate: Optional[dict] = None
    peak_rows: int = 0
    stats: dict = field(default_factory=dict)


def feasible(S: LinearSystem, *, box=None, cap: int = DEFAULT_ROW_CAP,
             certificate: bool = False) -> Feasibility:
    """Decide S over the reals; return a rational witness or an UNSAT proof.

    With `box=B` the rows -B <= x_i <= B are added (keys ("box", i, sign)),
    so any witness returned lies inside the box.  With `certificate` an
    UNSAT answer carries nonnegative row multipliers that replay to a
    contradiction (see `check_certificate`).
    """
    poly = Polyhedron(track=certificate, cap=cap)
    for v in S.variables:
        poly.known.add(v)
    rows = list(S.rows())
    # pair up opposite non-strict rows into equalities
    index: dict = {}
    for row, rhs, strict, key in rows:
        if not strict:
            index.setdefault((row, rhs), key)
    twin: dict = {}
    used = set()
    ok = True
    for row, rhs, strict, key in rows:
        if key in used:
            continue
        coeffs = {v: Fraction(c) for v, c in zip(S.variables, row) if c}
        lin = Lin(coeffs, -rhs)
        origin = {key: F1}
        other = None if strict else index.get((tuple(-c for c in row), -rhs))
        if other is not None and other != key and other not in used:
            used.update((key, other))
            twin[key] = other
            ok = poly.add(lin, EQ, origin) and ok
        else:
            used.add(key)
            ok = poly.add(lin, LT if strict else LE, origin) and ok
        if not ok:
            break
    if ok and box is not None:
        B = Fraction(box)
        for i, v in enumerate(S.variables):
            poly.add(Lin.var(v).shift(-B), LE, {("box", i, 1): F1})
            poly.add((-Lin.var(v)).shift(-B), LE, {("box", i, -1): F1})
    witness = poly.solve() if ok else None
    if witness is not None:
        witness = {v: witness.get(v, F0) for v in S.variables}
        return Feasibility(True, witness, peak_rows=poly.peak)
    cert = None
    if certificate:
        cert = _fold_twins(getattr(poly, "conflict", None) or {}, twin)
    return Feasibility(False, certificate=cert, peak_rows=poly.peak)


def _fold_twins(origin: dict, twin: dict) -> dict:
    out: dict = {}
    for key, val in origin.items():
        if val < 0:
            key, val = twin[key], -val
        out[key] = out.get(key, F0) + val
    return {k: v for k, v in out.items() if v}


def check_certificate(S: LinearSystem, cert: Mapping, box=None) -> bool:
    """Replay an infeasibility certificate: a nonnegative row combination
    whose left side vanishes and whose right side is negative (or zero with
    a strict row involved)."""
    if not cert or any(val < 0 for val in cert.values()):
        return False
    lookup = {key: (row, rhs, strict) for row, rhs, strict, key in S.rows()}
    total = [F0] * len(S.variables)
    rhs_total = F0
    strict_used = False
    for key, lam in cert.items():
        if key[0] == "box":
            _, i, sign = key
            row = tuple(sign if j == i else 0 for j in range(len(S.variables)))
            rhs, strict = Fraction(box), False
        else:
            row, rhs, strict = lookup[key]
        for j, c in enumerate(row):
            total[j] += lam * c
        rhs_total += lam * rhs
        strict_used |= strict
    if any(total):
        return False
    return rhs_total < 0 or (rhs_total == 0 and strict_used)
