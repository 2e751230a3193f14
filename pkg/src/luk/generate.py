"""Seeded random terms and formulas for the property suites."""
from __future__ import annotations

import random
from fractions import Fraction

from .terms import (
    ADD, EQ, HALF, IMPL, JOIN, LE, LT, MEET, MINUS_ONE, NEG, NOT, ONE, OPLUS,
    OTIMES, ZERO, Atom, BAnd, Binary, BNot, BOr, Const, Formula,
    Term, Unary, Var, normalize,
)

GROUP_BINARY = (ADD, MEET, JOIN)
MV_BINARY = (OPLUS, OTIMES, IMPL, MEET, JOIN)
# the fragment translated clause by clause, without desugaring
DELTA_BINARY = (IMPL, OTIMES, MEET, JOIN)


def var_names(n: int) -> list[str]:
    return [f"x{i}" for i in range(1, n + 1)]


def random_term(rng: random.Random, depth: int, names, *, binary, unary=(), constants=(),
                leaf_bias: float = 0.3) -> Term:
    """Random term of depth at most `depth`, returned in reduced form."""

    def go(d: int) -> Term:
        if d == 0 or rng.random() < leaf_bias:
            pool = len(names) + len(constants)
            i = rng.randrange(pool)
            return Var(names[i]) if i < len(names) else Const(constants[i - len(names)])
        if unary and rng.random() < 0.2:
            return Unary(rng.choice(unary), go(d - 1))
        return Binary(rng.choice(binary), go(d - 1), go(d - 1))

    return normalize(go(depth))


def random_ab_term(rng, depth=4, n_vars=4) -> Term:
    return random_term(rng, depth, var_names(n_vars), binary=GROUP_BINARY, unary=(NEG,),
                       constants=(ZERO,))


def random_pab_term(rng, depth=3, n_vars=3) -> Term:
    return random_term(rng, depth, var_names(n_vars), binary=GROUP_BINARY, unary=(NEG,),
                       constants=(ZERO, MINUS_ONE))


def random_mv_term(rng, depth=3, n_vars=3, *, fragment: str = "full", half: bool = False) -> Term:
    """`fragment="delta"` restricts to ->, (*), /\\, \\/, 0, 1."""
    constants = (ZERO, ONE) + ((HALF,) if half else ())
    if fragment == "delta":
        return random_term(rng, depth, var_names(n_vars), binary=DELTA_BINARY,
                           constants=constants)
    return random_term(rng, depth, var_names(n_vars), binary=MV_BINARY, unary=(NOT,),
                       constants=constants)


def random_formula(rng: random.Random, make_term, n_atoms: int, *,
                   relations=(EQ, LE, LT), negation: bool = True) -> Formula:
    """Random boolean combination of `n_atoms` atoms over `make_term()` sides."""
    atoms = [Atom(make_term(), rng.choice(relations), make_term()) for _ in range(n_atoms)]

    def build(parts: list[Formula]) -> Formula:
        if len(parts) == 1:
            f = parts[0]
        else:
            cut = rng.randrange(1, len(parts))
            node = BAnd if rng.random() < 0.6 else BOr
            f = node(build(parts[:cut]), build(parts[cut:]))
        if negation and rng.random() < 0.15:
            f = BNot(f)
        return f

    return build(atoms)


def random_pab_formula(rng, *, n_vars=3, depth=3, max_atoms=4) -> Formula:
    return random_formula(rng, lambda: random_pab_term(rng, depth, n_vars),
                          rng.randint(1, max_atoms))


def random_mv_formula(rng, *, n_vars=2, depth=2, max_atoms=3, half=False,
                      relations=(EQ, LE, LT)) -> Formula:
    return random_formula(rng, lambda: random_mv_term(rng, depth, n_vars, half=half),
                          rng.randint(1, max_atoms), relations=relations)


def random_rational(rng: random.Random, lo, hi, max_den: int = 16) -> Fraction:
    """Uniform-ish rational in [lo, hi] with denominator at most max_den."""
    den = rng.randint(1, max_den)
    lo_n = -((-Fraction(lo) * den).__floor__())
    hi_n = (Fraction(hi) * den).__floor__()
    return Fraction(rng.randint(lo_n, hi_n), den)


def grid(step_den: int):
    """The points i / step_den of [0, 1]."""
    return [Fraction(i, step_den) for i in range(step_den + 1)]
