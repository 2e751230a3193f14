"""Translations between pointed l-group terms and MV terms, and the
satisfiability-preserving formula builders on top of them.

`build_S_pab` maps a pAb formula to a pure MV formula that is
satisfiable in [0,1] iff the source is satisfiable in R with -1;
`build_S_mv` maps an MV formula to an MV formula whose variables only
matter inside a small interval below 1/2.  Both pin the constants 1/2,
q (and r) with a chain of halving equations.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .linear import DEFAULT_C, witness_box
from .terms import (
    ADD, HALF, IMPL, JOIN, MEET, MINUS_ONE, NEG, NOT, ONE, OPLUS, OTIMES,
    ZERO, Atom, Binary, Const, Formula, Term, Unary, Var, add, band,
    eq, formula_depth, formula_size, formula_vars, impl, join, le, map_atoms,
    meet, mvnot, neg, oplus, ordered_vars, otimes, rename_formula, term_depth,
    term_vars,
)
from .transform import TseitinResult, tseitin

TAU_DEPTH_CAP = 12
SIZE_GUARD = 64

_HALF = Const(HALF)


class ReductionError(ValueError):
    pass


@dataclass(frozen=True)
class ReductionParams:
    M: int
    k: int
    c: int = DEFAULT_C

    def __post_init__(self):
        if self.M < 0 or self.k < 0:
            raise ValueError("M and k must be nonnegative")

    @property
    def chain(self) -> int:
        """Number of z variables, M + k + 1."""
        return self.M + self.k + 1

    @property
    def scale(self) -> int:
        return 2 ** self.chain


def default_params(F: Formula, c: int = DEFAULT_C, M: Optional[int] = None) -> ReductionParams:
    """k = deepest term of F; M from the witness box unless given."""
    k = formula_depth(F)
    if M is None:
        M = witness_box(formula_size(F), c).M
    return ReductionParams(M, k, c)


def r_map(p: ReductionParams, a) -> Fraction:
    """a / 2^(M+k+1) + 1/2."""
    return Fraction(a) / p.scale + Fraction(1, 2)


def r_inv(p: ReductionParams, b) -> Fraction:
    return (Fraction(b) - Fraction(1, 2)) * p.scale


# -- group terms to MV terms --------------------------------------------------

def _plus(a: Term, b: Term, half: Term) -> Term:
    return otimes(oplus(a, b), oplus(half, otimes(a, b)))


def tau(t: Term, *, minus_one: Optional[str] = None, half: Term = _HALF,
        depth_cap: Optional[int] = TAU_DEPTH_CAP) -> Term:
    """MV[1/2] image of an Ab term that commutes with r_map on bounded inputs.

    The output tree doubles at every `+`, so raw use is capped at depth 12.
    `minus_one` names a variable standing for -1 (it is translated as a
    variable); `half` replaces the constant 1/2 in the output.
    """
    if depth_cap is not None and term_depth(t) > depth_cap:
        raise ReductionError(f"tau input deeper than {depth_cap}; flatten it first")
    memo: dict = {}

    def go(s: Term) -> Term:
        hit = memo.get(s)
        if hit is not None:
            return hit
        if isinstance(s, Var):
            out = s
        elif isinstance(s, Const):
            if s.symbol == ZERO:
                out = half
            elif s.symbol == MINUS_ONE and minus_one is not None:
                out = Var(minus_one)
            else:
                raise ReductionError(f"tau is undefined on the constant {s.symbol}")
        elif isinstance(s, Unary):
            if s.op != NEG:
                raise ReductionError(f"tau expects a group term, found {s.op!r}")
            out = mvnot(go(s.child))
        elif s.op == ADD:
            out = _plus(go(s.left), go(s.right), half)
        elif s.op in (MEET, JOIN):
            out = Binary(s.op, go(s.left), go(s.right))
        else:
            raise ReductionError(f"tau expects a group term, found {s.op!r}")
        memo[s] = out
        return out

    return go(t)


def tau_prime(F: Formula, **kw) -> Formula:
    return map_atoms(F, lambda a: Atom(tau(a.left, **kw), a.rel, tau(a.right, **kw)))


def tau_q(t: Term, q: str, *, half: Term = _HALF) -> Term:
    """Like tau, but -1 becomes q and every variable x becomes (x \\/ q) /\\ 1/2."""
    if q in term_vars(t):
        raise ReductionError(f"variable {q!r} already occurs in the term")
    qv = Var(q)
    memo: dict = {}

    def go(s: Term) -> Term:
        hit = memo.get(s)
        if hit is not None:
            return hit
        if isinstance(s, Var):
            out = meet(join(s, qv), half)
        elif isinstance(s, Const):
            if s.symbol == ZERO:
                out = half
            elif s.symbol == MINUS_ONE:
                out = qv
            else:
                raise ReductionError(f"tau_q is undefined on the constant {s.symbol}")
        elif isinstance(s, Unary):
            if s.op != NEG:
                raise ReductionError(f"tau_q expects a group term, found {s.op!r}")
            out = mvnot(go(s.child))
        elif s.op == ADD:
            out = _plus(go(s.left), go(s.right), half)
        elif s.op in (MEET, JOIN):
            out = Binary(s.op, go(s.left), go(s.right))
        else:
            raise ReductionError(f"tau_q expects a group term, found {s.op!r}")
        memo[s] = out
        return out

    return go(t)


def tau_q_prime(F: Formula, q: str, **kw) -> Formula:
    return map_atoms(F, lambda a: Atom(tau_q(a.left, q, **kw), a.rel, tau_q(a.right, q, **kw)))


# -- MV terms to group terms --------------------------------------------------

def desugar(t: Term) -> Term:
    """Rewrite ~a as a -> 0 and a (+) b as (a -> 0) -> b."""
    zero = Const(ZERO)
    memo: dict = {}

    def go(s: Term) -> Term:
        if isinstance(s, (Var, Const)):
            return s
        hit = memo.get(s)
        if hit is not None:
            return hit
        if isinstance(s, Unary):
            if s.op != NOT:
                raise ReductionError(f"expected an MV term, found {s.op!r}")
            out = impl(go(s.child), zero)
        elif s.op == OPLUS:
            out = impl(impl(go(s.left), zero), go(s.right))
        else:
            out = Binary(s.op, go(s.left), go(s.right))
        memo[s] = out
        return out

    return go(t)


def delta(t: Term) -> Term:
    """pAb image of an MV term: f_delta(t)(a - 1) + 1 = f_t(a) on [0,1]."""
    zero, m1 = Const(ZERO), Const(MINUS_ONE)
    memo: dict = {}

    def go(s: Term) -> Term:
        hit = memo.get(s)
        if hit is not None:
            return hit
        if isinstance(s, Var):
            out = meet(join(s, m1), zero)
        elif isinstance(s, Const):
            if s.symbol == ZERO:
                out = m1
            elif s.symbol == ONE:
                out = zero
            else:
                raise ReductionError(f"delta is undefined on the constant {s.symbol}")
        elif isinstance(s, Unary) or s.op == OPLUS:
            out = go(desugar(s))
        elif s.op == IMPL:
            out = meet(add(go(s.right), neg(go(s.left))), zero)
        elif s.op == OTIMES:
            out = join(add(go(s.left), go(s.right)), m1)
        elif s.op in (MEET, JOIN):
            out = Binary(s.op, go(s.left), go(s.right))
        else:
            raise ReductionError(f"delta expects an MV term, found {s.op!r}")
        memo[s] = out
        return out

    return go(t)


def delta_prime(F: Formula) -> Formula:
    return map_atoms(F, lambda a: Atom(delta(a.left), a.rel, delta(a.right)))


def sigma_q(t: Term, q: str, *, half: Term = _HALF) -> Term:
    """Linear-size MV[1/2] term agreeing with tau_q(delta(t)) on [0,1]."""
    if q in term_vars(t):
        raise ReductionError(f"variable {q!r} already occurs in the term")
    qv = Var(q)
    memo: dict = {}

    def go(s: Term) -> Term:
        hit = memo.get(s)
        if hit is not None:
            return hit
        if isinstance(s, Var):
            out = meet(join(s, qv), half)
        elif isinstance(s, Const):
            if s.symbol == ONE:
                out = half
            elif s.symbol == ZERO:
                out = qv
            else:
                raise ReductionError(f"sigma_q is undefined on the constant {s.symbol}")
        elif isinstance(s, Unary) or s.op == OPLUS:
            out = go(desugar(s))
        elif s.op == IMPL:
            out = meet(otimes(impl(go(s.left), go(s.right)), half), half)
        elif s.op == OTIMES:
            out = join(otimes(oplus(go(s.left), go(s.right)), half), qv)
        elif s.op in (MEET, JOIN):
            out = Binary(s.op, go(s.left), go(s.right))
        else:
            raise ReductionError(f"sigma_q expects an MV term, found {s.op!r}")
        memo[s] = out
        return out

    return go(t)


def sigma_q_prime(F: Formula, q: str, **kw) -> Formula:
    return map_atoms(F, lambda a: Atom(sigma_q(a.left, q, **kw), a.rel, sigma_q(a.right, q, **kw)))


# -- the gadget ---------------------------------------------------------------

@dataclass(frozen=True)
class GadgetVars:
    z_names: tuple[str, ...]
    q_name: str = "q"
    r_name: Optional[str] = None

    @classmethod
    def for_params(cls, p: ReductionParams, with_r: bool) -> "GadgetVars":
        return cls(tuple(f"z{i}" for i in range(1, p.chain + 1)), "q", "r" if with_r else None)

    @property
    def names(self) -> tuple[str, ...]:
        return self.z_names + (self.q_name,) + ((self.r_name,) if self.r_name else ())


def gadget_atoms(p: ReductionParams, g: GadgetVars) -> list[Atom]:
    """z1 = ~z1, [r = ~(z1 (+) z_{k+1})], q = ~(z1 (+) z_{M+k+1}), z_{i+1} (+) z_{i+1} = z_i."""
    z = [Var(n) for n in g.z_names]
    out = [eq(z[0], mvnot(z[0]))]
    if g.r_name is not None:
        out.append(eq(Var(g.r_name), mvnot(oplus(z[0], z[p.k]))))
    out.append(eq(Var(g.q_name), mvnot(oplus(z[0], z[p.chain - 1]))))
    for i in range(p.chain - 1):
        out.append(eq(oplus(z[i + 1], z[i + 1]), z[i]))
    return out


def gadget_formula(p: ReductionParams, with_r: bool = True) -> Formula:
    return band(*gadget_atoms(p, GadgetVars.for_params(p, with_r)))


def gadget_values(p: ReductionParams, with_r: bool = True, g: GadgetVars | None = None) -> dict[str, Fraction]:
    """The unique solution of the gadget equations in [0,1]."""
    g = g or GadgetVars.for_params(p, with_r)
    out = {name: Fraction(1, 2 ** i) for i, name in enumerate(g.z_names, start=1)}
    out[g.q_name] = Fraction(1, 2) - Fraction(1, 2 ** p.chain)
    if g.r_name is not None:
        out[g.r_name] = Fraction(1, 2) - Fraction(1, 2 ** (p.k + 1))
    return out


# -- the builders -------------------------------------------------------------

@dataclass
class Translation:
    formula: Formula
    params: ReductionParams
    gadget: GadgetVars
    source_vars: list[str]
    renaming: dict[str, str]
    source_size: int
    tseitin: Optional[TseitinResult] = None
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def output_size(self) -> int:
        return formula_size(self.formula)

    def report(self, *, kind: str, timings: bool = False) -> list[tuple[str, str]]:
        """Key/value pairs describing the translation, in a fixed order."""
        p = self.params
        rows = [
            ("translation", kind),
            ("source_size", str(self.source_size)),
            ("source_vars", " ".join(self.source_vars)),
            ("k", str(p.k)),
            ("M", str(p.M)),
            ("c", str(p.c)),
            ("chain", str(p.chain)),
            ("gadget", " ".join(self.gadget.names)),
            ("renamed", " ".join(f"{a}->{b}" for a, b in sorted(self.renaming.items())) or "none"),
            ("tseitin_vars", str(len(self.tseitin.defmap)) if self.tseitin else "0"),
            ("output_size", str(self.output_size)),
        ]
        if timings:
            rows += [(f"time_{stage}", f"{sec:.6f}") for stage, sec in self.timings.items()]
        return rows

    def mv_values(self, v: Mapping[str, Fraction]) -> dict[str, Fraction]:
        """Source variable values read off an assignment of the output."""
        return {x: Fraction(v[self.renaming.get(x, x)]) for x in self.source_vars}


def _avoid_reserved(F: Formula, reserved: set[str]) -> tuple[Formula, dict[str, str]]:
    taken = formula_vars(F) | reserved
    renaming = {}
    for x in sorted(formula_vars(F) & reserved):
        i = 0
        while f"{x}_{i}" in taken:
            i += 1
        renaming[x] = f"{x}_{i}"
        taken.add(renaming[x])
    if renaming:
        F = rename_formula(F, renaming)
    return F, renaming


def _guard(out: Formula, limit: int) -> None:
    if formula_size(out) > limit:
        raise ReductionError(f"output size {formula_size(out)} exceeds the guard {limit}")


def build_S_pab(F: Formula, p: ReductionParams) -> Translation:
    """pAb formula -> MV formula, equisatisfiable when F has a witness in [-2^M, 2^M]."""
    if formula_depth(F) > p.k:
        raise ReductionError(f"k = {p.k} is below the term depth {formula_depth(F)}")
    clock = {}
    t0 = time.perf_counter()
    g = GadgetVars.for_params(p, with_r=True)
    source_vars = ordered_vars(F)
    G, renaming = _avoid_reserved(F, set(g.names))
    t1 = time.perf_counter()
    flat = tseitin(G)
    t2 = time.perf_counter()
    z1 = Var(g.z_names[0])
    zeta = tau_prime(flat.formula, minus_one=g.q_name, half=z1, depth_cap=None)
    rv = Var(g.r_name)
    ranges = []
    for x in source_vars:
        xv = Var(renaming.get(x, x))
        ranges += [le(rv, xv), le(xv, mvnot(rv))]
    out = band(zeta, *gadget_atoms(p, g), *ranges)
    t3 = time.perf_counter()
    _guard(out, SIZE_GUARD * (p.M + p.k + formula_size(F)))
    clock.update(rename=t1 - t0, tseitin=t2 - t1, translate=t3 - t2)
    return Translation(out, p, g, source_vars, renaming, formula_size(F), flat, clock)


def build_S_mv(F: Formula, p: ReductionParams) -> Translation:
    """MV formula -> MV formula whose variables act only through (x \\/ q) /\\ z1."""
    clock = {}
    t0 = time.perf_counter()
    g = GadgetVars.for_params(p, with_r=False)
    source_vars = ordered_vars(F)
    G, renaming = _avoid_reserved(F, set(g.names))
    t1 = time.perf_counter()
    zeta = sigma_q_prime(G, g.q_name, half=Var(g.z_names[0]))
    out = band(zeta, *gadget_atoms(p, g))
    t2 = time.perf_counter()
    _guard(out, SIZE_GUARD * (p.M + p.k + 7 * formula_size(F)))
    clock.update(rename=t1 - t0, translate=t2 - t1)
    return Translation(out, p, g, source_vars, renaming, formula_size(F), None, clock)


def pab_witness(T: Translation, v: Mapping[str, Fraction]) -> dict[str, Fraction]:
    """Map a [0,1] witness of build_S_pab's output back to R: x = r^-1(v(x))."""
    return {x: r_inv(T.params, b) for x, b in T.mv_values(v).items()}


def mv_witness(T: Translation, v: Mapping[str, Fraction]) -> dict[str, Fraction]:
    """Map a witness of build_S_mv's output back: clamp into [q, 1/2], then r^-1 + 1."""
    q = gadget_values(T.params, with_r=False)["q"]
    half = Fraction(1, 2)
    return {x: r_inv(T.params, min(max(b, q), half)) + 1 for x, b in T.mv_values(v).items()}
