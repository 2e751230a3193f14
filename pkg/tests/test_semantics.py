import itertools
import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings, strategies as st

from luk.generate import grid, random_mv_term, random_rational
from luk.semantics import (
    AlgebraMismatch, Algebra, RangeViolation, UnassignedVariable, eval_formula,
    eval_term, format_assignment, is_designated, parse_assignment,
)
from luk.syntax import parse_formula, parse_term
from luk.terms import Signature


def mv(text):
    return parse_term(text, Signature.MVHALF)


def pab(text):
    return parse_term(text, Signature.PAB)


def test_otimes():
    assert eval_term(mv("x (*) y"), {"x": Q(7, 10), "y": Q(3, 5)}, Algebra.STDMV) == Q(3, 10)


def test_not():
    assert eval_term(mv("~x"), {"x": Q(1, 4)}, Algebra.STDMV) == Q(3, 4)


def test_clamp_in_group():
    assert eval_term(pab("(x \\/ -1) /\\ 0"), {"x": Q(-3)}, Algebra.RMINUS1) == -1


def test_half_plus_half():
    assert eval_term(mv("1/2 (+) 1/2"), {}, Algebra.STDMVHALF) == 1


@pytest.mark.parametrize("text, sig, v, A", [
    ("x = ~x", Signature.MV, {"x": Q(1, 2)}, Algebra.STDMV),
    ("x + x = -1", Signature.PAB, {"x": Q(-1, 2)}, Algebra.RMINUS1),
    ("!(x < 0)", Signature.PAB, {"x": Q(0)}, Algebra.RMINUS1),
])
def test_formulas_hold(text, sig, v, A):
    assert eval_formula(parse_formula(text, sig), v, A)


def test_designated():
    assert is_designated(mv("1"), {}, Algebra.STDMV)
    assert is_designated(pab("x"), {"x": Q(0)}, Algebra.RMINUS1)
    assert not is_designated(pab("x"), {"x": Q(-1, 3)}, Algebra.RMINUS1)


def test_errors():
    with pytest.raises(UnassignedVariable):
        eval_term(mv("x (*) y"), {"x": Q(0)}, Algebra.STDMV)
    with pytest.raises(RangeViolation):
        eval_term(mv("~x"), {"x": Q(3, 2)}, Algebra.STDMV)
    with pytest.raises(AlgebraMismatch):
        eval_term(pab("x + -1"), {"x": Q(0)}, Algebra.STDMV)


def test_defined_operations_on_grid():
    ops = {n: mv(t) for n, t in [
        ("oplus", "a (+) b"), ("oplus_def", "~(~a (*) ~b)"),
        ("impl", "a -> b"), ("impl_def", "~a (+) b"),
        ("meet", "a /\\ b"), ("meet_def", "a (*) (a -> b)"),
        ("join", "a \\/ b"), ("join_def", "(a -> b) -> b"),
    ]}
    for a, b in itertools.product(grid(16), repeat=2):
        v = {"a": a, "b": b}
        val = {n: eval_term(t, v, Algebra.STDMV) for n, t in ops.items()}
        for n in ("oplus", "impl", "meet", "join"):
            assert val[n] == val[n + "_def"], (n, a, b)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_mv_values_stay_in_unit_interval(seed):
    rng = random.Random(seed)
    t = random_mv_term(rng, 4, 3, half=True)
    v = {f"x{i}": random_rational(rng, 0, 1) for i in range(1, 4)}
    assert 0 <= eval_term(t, v, Algebra.STDMVHALF) <= 1


@settings(max_examples=200, deadline=None)
@given(st.lists(st.fractions(min_value=-10, max_value=10, max_denominator=20), min_size=3, max_size=3))
def test_lattice_group_laws(triple):
    a, b, c = triple
    v = {"a": a, "b": b, "c": c}
    for op in ("+", "/\\", "\\/"):
        comm = (pab(f"a {op} b"), pab(f"b {op} a"))
        assoc = (pab(f"(a {op} b) {op} c"), pab(f"a {op} (b {op} c)"))
        for s, t in (comm, assoc):
            assert eval_term(s, v, Algebra.R) == eval_term(t, v, Algebra.R)


def test_assignment_files_round_trip():
    v = {"x": Q(-1, 2), "y": Q(3)}
    assert parse_assignment(format_assignment(v)) == v
    with pytest.raises(ValueError):
        parse_assignment("x = 0.5\n")
