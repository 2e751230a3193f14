import random

import pytest
from hypothesis import given, settings, strategies as st

from luk.generate import random_ab_term, random_mv_term, random_pab_formula
from luk.semantics import Algebra, eval_term
from luk.syntax import parse_formula, parse_term
from luk.terms import (
    ADD, NEG, NOT, Binary, Const, FreshNames, Signature, Unary, Var, atom_count,
    band, bnot, bor, conjuncts, fits, formula_size, is_reduced, normalize,
    operator_count, smallest_signature, term_depth, term_size,
)
from luk.generate import random_rational

x, y, z = Var("x"), Var("y"), Var("z")


def ab(text):
    return parse_term(text, Signature.PAB)


def test_normalize_removes_double_minus():
    assert normalize(Unary(NEG, Unary(NEG, x))) == x


def test_normalize_removes_double_not_above_binary():
    t = Unary(NOT, Unary(NOT, Binary("(+)", x, y)))
    assert normalize(t) == Binary("(+)", x, y)


def test_normalize_rewrites_inside():
    t = Binary(ADD, x, Unary(NEG, Unary(NEG, y)))
    assert normalize(t) == Binary(ADD, x, y)


def test_normalize_keeps_mixed_unaries():
    # -~x is not a double negation of one kind
    t = Unary(NEG, Unary(NOT, x))
    assert normalize(t) == t


@pytest.mark.parametrize("text, size", [("x", 1), ("(x + y) /\\ 0", 3), ("-1 + (x \\/ -1)", 3)])
def test_term_size_counts_leaves(text, size):
    assert term_size(ab(text)) == size


@pytest.mark.parametrize("text, depth", [("0", 0), ("-x", 1), ("(x + y) \\/ z", 2)])
def test_term_depth(text, depth):
    assert term_depth(ab(text)) == depth


@pytest.mark.parametrize("text, size", [
    ("x = 0", 2),
    ("(x = 0) & ((x + y) = z)", 5),
    ("!(x < -1)", 2),
])
def test_formula_size(text, size):
    assert formula_size(parse_formula(text, Signature.PAB)) == size


@pytest.mark.parametrize("text, count", [
    ("x = y", 1),
    ("(x = y) | (x = y)", 2),
    ("!(x = y) & (z < 0)", 2),
])
def test_atom_count(text, count):
    assert atom_count(parse_formula(text, Signature.PAB)) == count


def test_bnot_cancels():
    f = parse_formula("x = y", Signature.AB)
    assert bnot(bnot(f)) == f


def test_band_is_balanced_and_flattens_back():
    parts = [parse_formula(f"x = x{i}", Signature.AB) for i in range(1000)]
    assert conjuncts(band(*parts)) == parts


def test_bor_single():
    f = parse_formula("x = y", Signature.AB)
    assert bor(f) == f


def test_signatures():
    assert fits(ab("x + -1"), Signature.PAB)
    assert not fits(ab("x + -1"), Signature.AB)
    assert smallest_signature(parse_term("x (+) 1/2", Signature.MVHALF)) is Signature.MVHALF
    assert smallest_signature(Const("0")) is Signature.AB


def test_fresh_names_skip_taken():
    fresh = FreshNames("t", taken={"t0", "t2"})
    assert [fresh(), fresh(), fresh()] == ["t1", "t3", "t4"]


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_reduced_terms_have_few_operators(seed):
    t = random_ab_term(random.Random(seed))
    assert is_reduced(t)
    assert operator_count(t) <= 2 * term_size(t)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_normalize_preserves_value_and_shrinks(seed):
    rng = random.Random(seed)
    raw = random_ab_term(rng)
    # wrap some subterm in a double negation by hand
    t = Unary(NEG, Unary(NEG, raw))
    v = {f"x{i}": random_rational(rng, -4, 4) for i in range(1, 5)}
    assert eval_term(normalize(t), v, Algebra.R) == eval_term(t, v, Algebra.R)
    assert term_size(normalize(t)) <= term_size(t)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_formula_size_bounded_by_atoms_times_largest_side(seed):
    from luk.terms import atoms
    F = random_pab_formula(random.Random(seed))
    biggest = max(max(term_size(a.left), term_size(a.right)) for a in atoms(F))
    assert formula_size(F) <= atom_count(F) * 2 * biggest


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_mv_double_not_is_identity(seed):
    rng = random.Random(seed)
    t = random_mv_term(rng, 3, 2)
    v = {"x1": random_rational(rng, 0, 1), "x2": random_rational(rng, 0, 1)}
    assert eval_term(Unary(NOT, Unary(NOT, t)), v, Algebra.STDMV) == eval_term(t, v, Algebra.STDMV)
