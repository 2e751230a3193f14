import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings, strategies as st

from luk import suites
from luk.decide import check_witness, decide_mv
from luk.reduction import (
    ReductionError, ReductionParams, build_S_mv, build_S_pab, default_params, delta,
    gadget_formula, gadget_values, mv_witness, pab_witness, r_inv, r_map, sigma_q,
    tau, tau_prime, tau_q,
)
from luk.semantics import Algebra, eval_term
from luk.syntax import parse_formula, parse_term, print_formula, print_term
from luk.terms import BAnd, BNot, Signature, conjuncts


def ab(text):
    return parse_term(text, Signature.AB)


def pab(text):
    return parse_term(text, Signature.PAB)


def mv(text):
    return parse_term(text, Signature.MV)


@pytest.mark.parametrize("a, want", [(0, Q(1, 2)), (4, Q(3, 4)), (-4, Q(1, 4))])
def test_r_map(a, want):
    p = ReductionParams(M=2, k=1)
    assert r_map(p, a) == want
    assert r_inv(p, want) == a


@pytest.mark.parametrize("src, want", [
    ("0", "1/2"),
    ("-x", "~x"),
    ("x /\\ y", "(x /\\ y)"),
    ("x + y", "((x (+) y) (*) (1/2 (+) (x (*) y)))"),
])
def test_tau(src, want):
    assert print_term(tau(ab(src))) == want


def test_tau_prime_keeps_the_skeleton():
    F = BAnd(BNot(BNot(parse_formula("x = 0", Signature.AB))),
             parse_formula("y = 0", Signature.AB))
    want = BAnd(BNot(BNot(parse_formula("x = 1/2", Signature.MVHALF))),
                parse_formula("y = 1/2", Signature.MVHALF))
    assert tau_prime(F) == want


def test_tau_rejects_deep_terms():
    t = ab("x")
    for _ in range(13):
        t = ab(f"({print_term(t)}) + x")
    with pytest.raises(ReductionError):
        tau(t)
    tau(t, depth_cap=None)


@pytest.mark.parametrize("src, want", [
    ("-1", "q"),
    ("0", "1/2"),
    ("x", "((x \\/ q) /\\ 1/2)"),
])
def test_tau_q(src, want):
    assert print_term(tau_q(pab(src), "q")) == want


def test_tau_q_refuses_a_clash():
    with pytest.raises(ReductionError):
        tau_q(pab("q + x"), "q")


@pytest.mark.parametrize("src, want", [
    ("0", "-1"),
    ("1", "0"),
    ("x -> y", "((y + -x) /\\ 0)"),
])
def test_delta(src, want):
    out = delta(mv(src))
    if src == "x -> y":
        # (delta y - delta x) /\ 0 where delta x = x - 1
        v = {"x": Q(1, 3), "y": Q(1, 5)}
        assert eval_term(out, {k: w - 1 for k, w in v.items()}, Algebra.RMINUS1) == \
            min(Q(1, 5) - Q(1, 3), 0)
    else:
        assert print_term(out) == want


@pytest.mark.parametrize("src, want", [("1", "1/2"), ("0", "q")])
def test_sigma_constants(src, want):
    assert print_term(sigma_q(mv(src), "q")) == want


def test_sigma_implication_shape():
    out = sigma_q(mv("x -> y"), "q")
    sx = print_term(sigma_q(mv("x"), "q"))
    sy = print_term(sigma_q(mv("y"), "q"))
    assert print_term(out) == f"((({sx} -> {sy}) (*) 1/2) /\\ 1/2)"


def test_gadget_values():
    p = ReductionParams(M=1, k=0)
    g = gadget_values(p)
    assert g == {"z1": Q(1, 2), "z2": Q(1, 4), "q": Q(1, 4), "r": Q(0)}
    assert check_witness(gadget_formula(p), g, Algebra.STDMV)


@pytest.mark.parametrize("M, k", [(0, 0), (2, 1), (3, 5)])
def test_gadget_is_uniquely_solved(M, k):
    p = ReductionParams(M, k)
    v = decide_mv(gadget_formula(p))
    assert v.sat and v.witness == gadget_values(p)
    assert v.witness[f"z{p.chain}"] == Q(1, 2 ** p.chain)


def test_build_S_pab_minus_one():
    F = parse_formula("x = -1", Signature.PAB)
    T = build_S_pab(F, ReductionParams(M=1, k=0))
    got = {print_formula(a) for a in conjuncts(T.formula)}
    assert {"z1 = ~z1", "q = ~(z1 (+) z2)", "r = ~(z1 (+) z1)", "(z2 (+) z2) = z1",
            "r <= x", "x <= ~r"} <= got
    # -1 is reached through a Tseitin variable pinned to q
    assert {"x = t0", "t0 = q"} <= got
    v = decide_mv(T.formula)
    assert v.sat and pab_witness(T, v.witness) == {"x": -1}


def test_build_S_pab_zero_goes_to_z1():
    T = build_S_pab(parse_formula("x = 0", Signature.PAB), ReductionParams(1, 0))
    assert {"x = t0", "t0 = z1"} <= {print_formula(a) for a in conjuncts(T.formula)}


def test_build_S_pab_checks_k():
    F = parse_formula("x + (y + z) = 0", Signature.AB)
    with pytest.raises(ReductionError):
        build_S_pab(F, ReductionParams(M=1, k=0))


def test_reserved_names_are_renamed():
    F = parse_formula("q + z1 = r", Signature.AB)
    T = build_S_pab(F, default_params(F, M=1))
    assert T.renaming == {"q": "q_0", "r": "r_0", "z1": "z1_0"}
    v = decide_mv(T.formula)
    w = pab_witness(T, v.witness)
    assert set(w) == {"q", "z1", "r"} and w["q"] + w["z1"] == w["r"]


@pytest.mark.parametrize("src, sat", [("x = ~x", True), ("0 = 1", False)])
def test_build_S_mv(src, sat):
    F = parse_formula(src, Signature.MV)
    T = build_S_mv(F, ReductionParams(M=2, k=1))
    v = decide_mv(T.formula)
    assert v.sat == sat == decide_mv(F).sat
    if sat:
        assert check_witness(F, mv_witness(T, v.witness), Algebra.STDMV)


def test_default_params_use_the_witness_box():
    F = parse_formula("x = -1", Signature.PAB)
    p = default_params(F)
    assert (p.M, p.k, p.c) == (277, 0, 20)
    assert default_params(F, c=1).M == 6


@pytest.mark.parametrize("name", ["tau", "delta", "etau", "tseitin-tau", "etau-q"])
@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32))
def test_translation_properties(name, seed):
    res = suites.SUITES[name].check(random.Random(seed), {})
    assert res.ok, res.detail


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2 ** 32))
def test_sigma_property(seed):
    res = suites.check_sigma(random.Random(seed), {})
    assert res.ok, res.detail
