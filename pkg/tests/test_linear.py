import itertools
import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from luk.generate import random_pab_formula, random_rational
from luk.linear import (
    REGIMES, FmBlowup, case_options, Lin, LinearSystem, Polyhedron, check_certificate,
    choose_value, extract_system, feasible, perturb_strict, regime,
    regime_at, small_witness_bound, witness_box,
)
from luk.semantics import Algebra, eval_formula
from luk.syntax import parse_formula
from luk.terms import EQ, LE, Signature, band, conjuncts
from luk.transform import dnf, nnf_trichotomy, tseitin


def system(rows, strict_rows=(), names=("x", "y", "z")):
    A = tuple(r for r, _ in rows)
    b = tuple(Q(v) for _, v in rows)
    B = tuple(r for r, _ in strict_rows)
    d = tuple(Q(v) for _, v in strict_rows)
    m = len((A + B)[0])
    return LinearSystem(tuple(names[:m]), A, b, B, d)


def test_lin_arithmetic():
    x, y = Lin.var("x"), Lin.var("y")
    e = (x + y - x).shift(3)
    assert e.coeffs == {"y": 1} and e.const == 3
    assert (-e).const == -3


@pytest.mark.parametrize("op", sorted(REGIMES))
def test_regimes_partition_the_plane(op):
    values = [Q(i, 4) for i in range(5)]
    a_, b_ = Lin.var("a"), Lin.var("b")
    for a, b in itertools.product(values, repeat=2):
        point = {"a": a, "b": b}
        holding = []
        for label in REGIMES[op]:
            val, side = regime(op, label, a_, b_)
            ok = all(_holds(lin, rel, point) for lin, rel in side)
            if ok:
                holding.append((label, _eval(val, point)))
        assert len(holding) == 1, (op, a, b, holding)
        assert holding[0][0] == regime_at(op, a, b)


def _eval(lin, point):
    return lin.const + sum(c * point[v] for v, c in lin.coeffs.items())


def _holds(lin, rel, point):
    v = _eval(lin, point)
    return v == 0 if rel == EQ else (v <= 0 if rel == LE else v < 0)


def test_extract_sum():
    S = extract_system([parse_formula("x + y = z", Signature.AB)])
    assert S.variables == ("x", "y", "z")
    assert set(zip(S.A, S.b)) == {((1, 1, -1), 0), ((-1, -1, 1), 0)}


def test_extract_minus_one():
    S = extract_system([parse_formula("x = -1", Signature.PAB)])
    assert set(zip(S.A, S.b)) == {((1,), -1), ((-1,), 1)}


def test_extract_meet_case_agrees_with_semantics():
    F = parse_formula("(x /\\ y) = z", Signature.AB)
    S = extract_system([F], {0: "left"})
    rng = random.Random(1)
    for _ in range(300):
        v = {n: Q(rng.randint(-3, 3)) for n in "xyz"}
        in_case = v["x"] <= v["y"]
        assert S.satisfied_by(v) == (in_case and eval_formula(F, v, Algebra.R))


@pytest.mark.parametrize("S, sat", [
    (system([((1,), 3), ((-1,), -3)]), True),
    (system([], [((1,), 0), ((-1,), 0)]), False),
    (system([((1, 1), 1), ((-1, 0), 0), ((0, -1), 0)], [((-1, -1), -1)]), False),
])
def test_feasible_examples(S, sat):
    res = feasible(S, certificate=True)
    assert res.sat == sat
    if sat:
        assert S.satisfied_by(res.witness)
        assert res.witness == {"x": 3}
    else:
        assert check_certificate(S, res.certificate)


def test_bad_certificates_are_rejected():
    S = system([((1,), 0)], [((-1,), 0)])
    assert not check_certificate(S, {("A", 0): Q(1)})
    assert not check_certificate(S, {("A", 0): Q(-1), ("B", 0): Q(1)})
    assert not check_certificate(S, {})


def test_witness_is_the_simplest_rational():
    S = system([], [((3,), 2), ((-2,), -1)])  # 1/2 < x < 2/3
    assert feasible(S).witness == {"x": Q(3, 5)}


@pytest.mark.parametrize("lo, lo_open, hi, hi_open, want", [
    (None, False, None, False, 0),
    (Q(-5, 2), True, Q(-1), True, -2),
    (Q(1, 3), True, Q(1, 2), True, Q(2, 5)),
    (Q(7), False, None, False, 7),
    (Q(0), True, Q(1), True, Q(1, 2)),
])
def test_choose_value(lo, lo_open, hi, hi_open, want):
    assert choose_value(lo, lo_open, hi, hi_open) == want


def test_box_keeps_witness_inside():
    S = system([((1, -1), -100)])  # x <= y - 100
    res = feasible(S, box=50)
    assert res.sat and all(abs(v) <= 50 for v in res.witness.values())
    res = feasible(S, box=40, certificate=True)
    assert not res.sat and check_certificate(S, res.certificate, box=40)


def test_row_cap():
    rng = random.Random(3)
    rows = [(tuple(rng.choice((-1, 1)) for _ in range(6)), 1) for _ in range(40)]
    S = system(rows, names=tuple("abcdef"))
    with pytest.raises(FmBlowup) as info:
        feasible(S, cap=50)
    assert info.value.cap == 50


def test_polyhedron_equalities_and_conflicts():
    P = Polyhedron()
    x, y = Lin.var("x"), Lin.var("y")
    assert P.add(x - y.shift(1), EQ)      # x = y + 1
    assert P.add(y.shift(-2), LE)         # y <= 2
    w = P.solve()
    assert w["x"] == w["y"] + 1
    Q_ = P.copy()
    assert not (Q_.add((-x).shift(4), LE) and Q_.feasible())  # x >= 4 contradicts
    assert P.feasible()


@pytest.mark.parametrize("m, k, want", [(1, 3, 3), (2, 2, 16), (3, 1, 27)])
def test_small_witness_bound(m, k, want):
    assert small_witness_bound(m, k) == want


@pytest.mark.parametrize("N, c, M", [(1, 1, 2), (2, 20, 277), (1, 20, 119)])
def test_witness_box(N, c, M):
    assert witness_box(N, c).M == M
    assert witness_box(N, c).bound == 2 ** M


def test_witness_box_is_the_exact_ceiling():
    # 2^M >= (3cN)^(cN) > 2^(M-1)
    for N in range(1, 6):
        for c in (1, 2, 20):
            M = witness_box(N, c).M
            assert 2 ** M >= (3 * c * N) ** (c * N) > 2 ** (M - 1)


def test_perturb_strict():
    S = system([((1, 1), 1)], [((-1, 0), 0), ((0, -1), 0)])
    w = feasible(S).witness
    T = perturb_strict(S, w)
    assert not T.B and T.satisfied_by(w)
    for (row, d), d2 in zip(zip(S.B, S.d), T.b[len(S.A):]):
        assert d - 1 <= d2 < d


def test_dump():
    S = system([((1, -2), 3)], [((0, 1), Q(1, 2))])
    assert S.dump() == "vars x y\n1 -2 <= 3\n0 1 < 1/2\n"


def _random_system(rng, m):
    n = rng.randint(1, 6)
    A = [tuple(rng.randint(-3, 3) for _ in range(m)) for _ in range(n)]
    b = [random_rational(rng, -3, 3, 2) for _ in range(n)]
    strict = rng.sample(range(n), rng.randint(0, n))
    rows = [(A[i], b[i]) for i in range(n) if i not in strict]
    srows = [(A[i], b[i]) for i in strict]
    return system(rows, srows, names=("x", "y", "z")) if (rows or srows) else None


def _linprog_feasible(S):
    """Maximize a slack t on the strict rows; strict rows hold iff t > 0."""
    m = len(S.variables)
    A = [list(r) + [0] for r in S.A] + [list(r) + [1] for r in S.B]
    b = [float(v) for v in S.b] + [float(v) for v in S.d]
    res = linprog([0] * m + [-1], A_ub=A, b_ub=b,
                  bounds=[(None, None)] * m + [(None, 1)], method="highs")
    if res.status == 2:
        return False
    assert res.status == 0
    return -res.fun > 1e-9 if S.B else True


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(1, 3))
def test_fm_agrees_with_linprog(seed, m):
    S = _random_system(random.Random(seed), m)
    if S is None:
        return
    res = feasible(S, certificate=True)
    assert res.sat == _linprog_feasible(S)
    if res.sat:
        assert S.satisfied_by(res.witness)
    else:
        assert check_certificate(S, res.certificate)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_grid_hits_imply_sat(seed):
    rng = random.Random(seed)
    S = _random_system(rng, 2)
    if S is None:
        return
    res = feasible(S)
    pts = [Q(i, 4) for i in range(-16, 17)]
    hit = any(S.satisfied_by({"x": a, "y": b}) for a, b in itertools.product(pts, repeat=2))
    if hit:
        assert res.sat
    if res.sat:
        assert S.satisfied_by(res.witness)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_extracted_rows_are_small(seed):
    rng = random.Random(seed)
    F = random_pab_formula(rng)
    for atoms_ in dnf(nnf_trichotomy(F)):
        flat = tseitin(band(*atoms_))
        atoms = conjuncts(flat.formula)
        cases = {i: rng.choice(case_options(a)) for i, a in enumerate(atoms)
                 if case_options(a)}
        S = extract_system(atoms, cases)
        assert S.entry_bound <= 3 or not S.n_rows
        for row in S.A + S.B:
            assert sum(1 for c in row if c) <= 3
