"""Exact evaluation of terms and open formulas in the four standard algebras."""
from __future__ import annotations

import enum
import re
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from .terms import (
    ADD, EQ, HALF, IMPL, JOIN, LE, LT, MEET, MINUS_ONE, NEG, ONE, OPLUS,
    OTIMES, ZERO, Atom, BAnd, BNot, BOr, Const, Formula, Signature,
    Term, Unary, Var, formula_terms, signature_violations,
)

Assignment = Mapping[str, Fraction]


class EvaluationError(ValueError):
    pass


class UnassignedVariable(EvaluationError):
    def __init__(self, name: str):
        super().__init__(f"variable {name!r} is not assigned")
        self.name = name


class RangeViolation(EvaluationError):
    def __init__(self, name: str, value):
        super().__init__(f"value {value} of {name!r} lies outside [0, 1]")
        self.name = name
        self.value = value


class AlgebraMismatch(EvaluationError):
    pass


class Algebra(enum.Enum):
    R = "R"
    RMINUS1 = "R-1"
    STDMV = "[0,1]"
    STDMVHALF = "[0,1]+1/2"

    @property
    def signature(self) -> Signature:
        return {
            Algebra.R: Signature.AB,
            Algebra.RMINUS1: Signature.PAB,
            Algebra.STDMV: Signature.MV,
            Algebra.STDMVHALF: Signature.MVHALF,
        }[self]

    @property
    def bounded(self) -> bool:
        return not self.signature.is_group

    @classmethod
    def for_signature(cls, sig: Signature) -> "Algebra":
        return {s.signature: s for s in cls}[sig]


_CONST_VALUES = {
    ZERO: Fraction(0),
    ONE: Fraction(1),
    MINUS_ONE: Fraction(-1),
    HALF: Fraction(1, 2),
}


def _apply(op: str, a: Fraction, b: Fraction) -> Fraction:
    if op == ADD:
        return a + b
    if op == MEET:
        return min(a, b)
    if op == JOIN:
        return max(a, b)
    if op == OTIMES:
        return max(Fraction(0), a + b - 1)
    if op == OPLUS:
        return min(Fraction(1), a + b)
    if op == IMPL:
        return min(Fraction(1), 1 - a + b)
    raise AssertionError(op)


def _eval(t: Term, v: Assignment, bounded: bool, cache: dict) -> Fraction:
    if isinstance(t, Var):
        try:
            value = v[t.name]
        except KeyError:
            raise UnassignedVariable(t.name) from None
        value = Fraction(value)
        if bounded and not 0 <= value <= 1:
            raise RangeViolation(t.name, value)
        return value
    if isinstance(t, Const):
        return _CONST_VALUES[t.symbol]
    # terms built by the translations share subtrees heavily
    key = id(t)
    hit = cache.get(key)
    if hit is not None and hit[0] is t:
        return hit[1]
    if isinstance(t, Unary):
        a = _eval(t.child, v, bounded, cache)
        value = -a if t.op == NEG else 1 - a
    else:
        value = _apply(t.op, _eval(t.left, v, bounded, cache),
                       _eval(t.right, v, bounded, cache))
    cache[key] = (t, value)
    return value


def _check_language(t: Term, A: Algebra) -> None:
    bad = signature_violations(t, A.signature)
    if bad:
        raise AlgebraMismatch(
            f"symbol {bad[0]!r} has no interpretation in {A.value}")


def eval_term(t: Term, v: Assignment, A: Algebra, *, check: bool = True) -> Fraction:
    """Value of the term function of `t` at `v` in `A`, exactly."""
    if check:
        _check_language(t, A)
    return _eval(t, v, A.bounded, {})


def holds(atom: Atom, v: Assignment, A: Algebra, cache=None) -> bool:
    cache = {} if cache is None else cache
    a = _eval(atom.left, v, A.bounded, cache)
    b = _eval(atom.right, v, A.bounded, cache)
    if atom.rel == EQ:
        return a == b
    if atom.rel == LE:
        return a <= b
    assert atom.rel == LT
    return a < b


def eval_formula(F: Formula, v: Assignment, A: Algebra) -> bool:
    for t in formula_terms(F):
        _check_language(t, A)
    cache: dict = {}

    def go(f: Formula) -> bool:
        if isinstance(f, Atom):
            return holds(f, v, A, cache)
        if isinstance(f, BNot):
            return not go(f.child)
        if isinstance(f, BAnd):
            return go(f.left) and go(f.right)
        assert isinstance(f, BOr)
        return go(f.left) or go(f.right)

    return go(F)


def is_designated(t: Term, v: Assignment, A: Algebra) -> bool:
    """Truth of `t` as a formula of the logic: 1 in MV-algebras, >= 0 in groups."""
    value = eval_term(t, v, A)
    if A.bounded:
        return value == 1
    return value >= 0


# -- assignment files ---------------------------------------------------------

_ASSIGN_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(-?\d+(?:/\d+)?)\s*$")


def parse_assignment(text: str) -> dict[str, Fraction]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        m = _ASSIGN_RE.match(body)
        if m is None:
            raise ValueError(f"line {lineno}: expected 'name = p/q', got {raw!r}")
        out[m.group(1)] = Fraction(m.group(2))
    return out


def read_assignment(path) -> dict[str, Fraction]:
    return parse_assignment(Path(path).read_text(encoding="utf-8"))


def format_assignment(v: Assignment) -> str:
    return "".join(f"{name} = {Fraction(v[name])}\n" for name in sorted(v))
