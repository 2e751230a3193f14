import itertools
import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings, strategies as st

from luk import suites
from luk.decide import (
    SAT, UNSAT, SplitCapExceeded, check_witness, decide, decide_mv, decide_pab, propagate,
)
from luk.generate import random_pab_formula
from luk.reduction import GadgetVars, ReductionParams, gadget_atoms, gadget_formula, gadget_values
from luk.semantics import Algebra, eval_formula
from luk.syntax import parse_formula
from luk.terms import Signature, formula_vars
from luk.transform import DnfBlowup


def pab(text):
    return parse_formula(text, Signature.PAB)


def mv(text):
    return parse_formula(text, Signature.MV)


@pytest.mark.parametrize("src, status, witness", [
    ("x + x = -1", SAT, {"x": Q(-1, 2)}),
    ("(x \\/ 0) = -1", UNSAT, None),
    ("x < y & y < x", UNSAT, None),
])
def test_decide_pab_examples(src, status, witness):
    v = decide_pab(pab(src))
    assert v.status == status
    if witness is not None:
        assert v.witness == witness


@pytest.mark.parametrize("src, status", [
    ("z = ~z", SAT),
    ("x (*) x = 1 & x = ~x", UNSAT),
    ("x <= ~x", SAT),
])
def test_decide_mv_examples(src, status):
    F = mv(src)
    v = decide_mv(F)
    assert v.status == status
    if v.sat:
        assert check_witness(F, v.witness, Algebra.STDMV)
    if src == "z = ~z":
        assert v.witness == {"z": Q(1, 2)}


def test_mv_half_uses_the_half_algebra():
    F = parse_formula("x = 1/2 (*) 1/2", Signature.MVHALF)
    v = decide_mv(F)
    assert v.sat and v.witness == {"x": 0}


def test_decide_dispatches_on_signature():
    assert decide(pab("x + x = -1"), Signature.PAB).sat
    assert not decide(mv("x (*) x = 1 & x = ~x"), Signature.MV).sat


def test_check_witness_rejects_bad_and_unassigned():
    F = mv("x (*) x = 1 & x = ~x")
    for a in (Q(0), Q(1, 2), Q(1)):
        assert not check_witness(F, {"x": a}, Algebra.STDMV)
    assert not check_witness(mv("x = y"), {"x": Q(0)}, Algebra.STDMV)
    assert not check_witness(mv("x = x"), {"x": Q(2)}, Algebra.STDMV)


def test_gadget_check_witness():
    p = ReductionParams(M=3, k=2)
    assert check_witness(gadget_formula(p), gadget_values(p), Algebra.STDMV)


@pytest.mark.parametrize("length", [1, 2, 64, 512])
def test_propagation_solves_gadget_chains(length):
    p = ReductionParams(length - 1, 0)
    g = GadgetVars.for_params(p, with_r=True)
    prop = propagate(gadget_atoms(p, g), bounded=True)
    want = gadget_values(p)
    assert {x: prop.value(x, {}) for x in g.names} == want


def test_long_gadget_decides_quickly():
    p = ReductionParams(M=300, k=4)
    v = decide_mv(gadget_formula(p))
    assert v.witness == gadget_values(p)


def test_witness_restricted_to_source_variables():
    F = pab("(x /\\ y) + (x \\/ y) = -1 & x < y")
    v = decide_pab(F)
    assert v.sat and set(v.witness) == {"x", "y"}
    assert check_witness(F, v.witness, Algebra.RMINUS1)


def test_split_cap():
    atoms = " & ".join(f"(x{i} /\\ y{i}) (+) (x{i} \\/ ~y{i}) = x{i} (*) ~y{i}" for i in range(8))
    with pytest.raises(SplitCapExceeded):
        decide_mv(mv(atoms + " & x0 = 1 & x0 = 0"), split_cap=2, propagate=False)


def test_dnf_cap():
    F = pab(" & ".join(f"(x{i} = 0 | x{i} = -1)" for i in range(6)))
    with pytest.raises(DnfBlowup):
        decide_pab(F, dnf_cap=16)
    assert decide_pab(F).sat


def test_seed_changes_order_not_status():
    rng = random.Random(11)
    for _ in range(20):
        F = random_pab_formula(rng)
        base = decide_pab(F)
        for seed in (1, 2):
            v = decide_pab(F, seed=seed)
            assert v.status == base.status
            assert decide_pab(F, seed=seed).witness == v.witness


def _pab_grid_hit(F):
    names = sorted(formula_vars(F))
    pts = [Q(i, 2) for i in range(-6, 7)]
    for vals in itertools.product(pts, repeat=len(names)):
        if eval_formula(F, dict(zip(names, vals)), Algebra.RMINUS1):
            return True
    return False


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_pab_oracle_against_grid(seed):
    F = random_pab_formula(random.Random(seed), n_vars=2, depth=2, max_atoms=3)
    v = decide_pab(F)
    if v.sat:
        assert check_witness(F, v.witness, Algebra.RMINUS1)
    if _pab_grid_hit(F):
        assert v.sat


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_mv_oracle_against_grid(seed):
    res = suites.check_brute_force(random.Random(seed), {})
    assert res.ok, res.detail


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_bounded_witnesses(seed):
    res = suites.check_bounded(random.Random(seed), {})
    assert res.ok, res.detail
