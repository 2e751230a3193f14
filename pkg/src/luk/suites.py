"""Randomized invariant suites for the translations and the oracles.

Each suite checks one property on `count` independently seeded
instances.  Instance i draws from its own generator seeded by
(suite, seed, i), so results do not depend on how instances are spread
over worker processes.  `LUK_THREADS` caps the number of workers.
"""
from __future__ import annotations

import itertools
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .decide import check_witness, decide_mv, decide_pab, propagate
from .generate import (
    grid, random_ab_term, random_formula, random_mv_formula, random_mv_term,
    random_pab_formula, random_rational, var_names,
)
from .linear import LinearSystem, feasible, small_witness_bound, witness_box
from .reduction import (
    ReductionParams, build_S_mv, build_S_pab, delta, delta_prime, desugar,
    gadget_atoms, gadget_formula, gadget_values, GadgetVars, mv_witness,
    pab_witness, r_map, sigma_q, tau, tau_prime, tau_q, tau_q_prime,
)
from .semantics import Algebra, eval_formula, eval_term
from .syntax import print_formula, print_term
from .terms import EQ, LE, formula_depth, formula_size, term_depth, term_size, term_vars
from .transform import tseitin

HALF = Fraction(1, 2)


@dataclass
class CaseResult:
    ok: bool
    detail: str = ""
    tags: tuple[str, ...] = ()


@dataclass
class SuiteResult:
    name: str
    count: int
    passed: int
    failures: list[tuple[int, str]] = field(default_factory=list)
    tags: dict[str, int] = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return self.passed == self.count

    def report(self, *, timings: bool = False) -> list[tuple[str, str]]:
        rows = [("suite", self.name), ("count", str(self.count)),
                ("passed", str(self.passed)), ("failed", str(self.count - self.passed))]
        rows += [(f"tag_{k}", str(v)) for k, v in sorted(self.tags.items())]
        rows += [(f"failure_{i}", detail) for i, detail in self.failures]
        if timings:
            rows.append(("elapsed", f"{self.elapsed:.3f}"))
        return rows


def _assign(names, values) -> dict[str, Fraction]:
    return dict(zip(names, values))


# -- term translations --------------------------------------------------------

def check_tau(rng: random.Random, opts: dict) -> CaseResult:
    """tau commutes with r on the box and lands near 1/2."""
    phi = random_ab_term(rng, depth=opts.get("depth", 4), n_vars=4)
    l = term_depth(phi)
    k = rng.randint(l, max(l, 4))
    M = rng.randint(0, 6)
    p = ReductionParams(M, k)
    names = sorted(term_vars(phi))
    a = {x: random_rational(rng, -2 ** M, 2 ** M) for x in names}
    lhs = eval_term(tau(phi), {x: r_map(p, v) for x, v in a.items()}, Algebra.STDMVHALF)
    rhs = r_map(p, eval_term(phi, a, Algebra.R))
    width = Fraction(1, 2 ** (k - l + 1))
    ok = lhs == rhs and HALF - width <= lhs <= HALF + width
    return CaseResult(ok, "" if ok else f"{print_term(phi)} at {a}: {lhs} vs {rhs}")


def check_delta(rng: random.Random, opts: dict) -> CaseResult:
    """delta(phi) evaluated at a - 1, plus 1, is phi at a."""
    phi = random_mv_term(rng, opts.get("depth", 4), 4)
    a = {x: random_rational(rng, 0, 1) for x in sorted(term_vars(phi))}
    lhs = eval_term(delta(phi), {x: v - 1 for x, v in a.items()}, Algebra.RMINUS1) + 1
    rhs = eval_term(phi, a, Algebra.STDMV)
    return CaseResult(lhs == rhs, "" if lhs == rhs else f"{print_term(phi)} at {a}: {lhs} vs {rhs}")


def check_sigma(rng: random.Random, opts: dict) -> CaseResult:
    """sigma_q(phi) and tau_q(delta(phi)) agree on a grid; sigma stays small."""
    phi = random_mv_term(rng, opts.get("depth", 3), 3)
    s = sigma_q(phi, "q")
    composed = tau_q(delta(phi), "q")
    bound = 7 * term_size(desugar(phi))
    if term_size(s) > bound:
        return CaseResult(False, f"{print_term(phi)}: size {term_size(s)} > {bound}")
    names = sorted(term_vars(phi))
    points = grid(opts.get("grid", 8))
    qs = [g for g in points if g <= HALF]
    for values in itertools.product(points, repeat=len(names)):
        for q in qs:
            v = _assign(names, values)
            v["q"] = q
            x = eval_term(s, v, Algebra.STDMVHALF, check=False)
            y = eval_term(composed, v, Algebra.STDMVHALF, check=False)
            if x != y:
                return CaseResult(False, f"{print_term(phi)} at {v}: {x} vs {y}")
    return CaseResult(True)


# -- formula translations -----------------------------------------------------

def _ab_formula(rng: random.Random):
    return random_formula(rng, lambda: random_ab_term(rng, depth=3, n_vars=3),
                          rng.randint(1, 3))


def _box_point(rng: random.Random, names, M: int) -> dict[str, Fraction]:
    # small integers make equalities hold now and then
    if rng.random() < 0.5:
        return {x: Fraction(rng.randint(-2, 2)) for x in names}
    return {x: random_rational(rng, -2 ** M, 2 ** M) for x in names}


def check_etau(rng: random.Random, opts: dict) -> CaseResult:
    """F holds at a iff tau'(F) holds at r(a)."""
    F = _ab_formula(rng)
    p = ReductionParams(rng.randint(1, 4), formula_depth(F))
    a = _box_point(rng, var_names(3), p.M)
    x = eval_formula(F, a, Algebra.R)
    y = eval_formula(tau_prime(F), {n: r_map(p, v) for n, v in a.items()}, Algebra.STDMVHALF)
    return CaseResult(x == y, "" if x == y else f"{print_formula(F)} at {a}",
                      ("holds",) if x else ())


def check_tseitin_tau(rng: random.Random, opts: dict) -> CaseResult:
    """Sending each Tseitin variable x_t to tau(t) keeps tau' truth values."""
    F = _ab_formula(rng)
    p = ReductionParams(rng.randint(1, 4), formula_depth(F))
    a = _box_point(rng, var_names(3), p.M)
    b = {n: r_map(p, v) for n, v in a.items()}
    flat = tseitin(F)
    ext = dict(b)
    for name, t in flat.defmap.items():
        ext[name] = eval_term(tau(t), b, Algebra.STDMVHALF)
    x = eval_formula(tau_prime(F), b, Algebra.STDMVHALF)
    y = eval_formula(tau_prime(flat.formula), ext, Algebra.STDMVHALF)
    return CaseResult(x == y, "" if x == y else f"{print_formula(F)} at {a}",
                      ("holds",) if x else ())


def check_etau_q(rng: random.Random, opts: dict) -> CaseResult:
    """delta'(F) at a in [-1,0] iff tau_q'(delta'(F)) at r(a), q = r(-1)."""
    F = random_mv_formula(rng, n_vars=2, depth=2, relations=(EQ, LE))
    p = ReductionParams(rng.randint(0, 3), rng.randint(0, 3))
    a = {x: random_rational(rng, -1, 0, max_den=4) for x in var_names(2)}
    D = delta_prime(F)
    v = {x: r_map(p, val) for x, val in a.items()}
    v["q"] = r_map(p, -1)
    x = eval_formula(D, a, Algebra.RMINUS1)
    y = eval_formula(tau_q_prime(D, "q"), v, Algebra.STDMVHALF)
    return CaseResult(x == y, "" if x == y else f"{print_formula(F)} at {a}",
                      ("holds",) if x else ())


# -- the gadget ---------------------------------------------------------------

def _gadget_pairs(max_chain: int) -> list[tuple[int, int]]:
    return [(L - 1 - k, k) for L in range(1, max_chain + 1) for k in range(L)]


def check_bonus(rng: random.Random, opts: dict) -> CaseResult:
    """The gadget has exactly the closed-form solution.

    Instance 0 runs propagation alone on a chain of `long_chain` links;
    the others solve short gadgets by search, with randomized branch order.
    """
    i = opts["_index"]
    if i == 0:
        L = opts.get("long_chain", 512)
        p = ReductionParams(L - 1, 0)
        g = GadgetVars.for_params(p, with_r=True)
        prop = propagate(gadget_atoms(p, g), bounded=True)
        want = gadget_values(p, with_r=True)
        got = {x: prop.value(x, {}) for x in g.names}
        return CaseResult(got == want, "" if got == want else f"chain {L}: propagation differs")
    pairs = _gadget_pairs(opts.get("max_chain", 8))
    M, k = pairs[(i - 1) % len(pairs)]
    p = ReductionParams(M, k)
    want = gadget_values(p, with_r=True)
    seed = rng.randrange(2 ** 32)
    for use_propagation in (True, False):
        v = decide_mv(gadget_formula(p), propagate=use_propagation, seed=seed)
        if not v.sat or v.witness != want:
            return CaseResult(False, f"M={M} k={k} propagate={use_propagation}: {v.witness}")
    return CaseResult(True)


# -- the oracles --------------------------------------------------------------

def certified_M(witness) -> int:
    """Smallest M with every witness value inside [-2^M, 2^M]."""
    m = max([abs(x) for x in witness.values()] + [1])
    M = 0
    while 2 ** M < m:
        M += 1
    return M


def check_main(rng: random.Random, opts: dict) -> CaseResult:
    """decide_pab(F) agrees with decide_mv(build_S_pab(F)); witnesses map back."""
    F = random_pab_formula(rng)
    v = decide_pab(F)
    if v.sat:
        bound = 2 ** witness_box(formula_size(F), opts.get("c", 20)).M
        if any(abs(x) > bound for x in v.witness.values()):
            return CaseResult(False, f"{print_formula(F)}: witness outside the box")
    M = certified_M(v.witness) if v.sat else 0
    T = build_S_pab(F, ReductionParams(M, formula_depth(F)))
    w = decide_mv(T.formula)
    if w.status != v.status:
        return CaseResult(False, f"{print_formula(F)}: {v.status} vs {w.status}")
    if w.sat:
        back = pab_witness(T, w.witness)
        if not check_witness(F, back, Algebra.RMINUS1):
            return CaseResult(False, f"{print_formula(F)}: mapped witness {back} fails")
    return CaseResult(True, tags=(v.status.lower(),))


def check_self(rng: random.Random, opts: dict) -> CaseResult:
    """decide_mv(F) agrees with decide_mv(build_S_mv(F)); witnesses map back."""
    F = random_mv_formula(rng)
    v = decide_mv(F)
    T = build_S_mv(F, ReductionParams(opts.get("M", 2), formula_depth(F)))
    w = decide_mv(T.formula)
    if w.status != v.status:
        return CaseResult(False, f"{print_formula(F)}: {v.status} vs {w.status}")
    if w.sat:
        back = mv_witness(T, w.witness)
        if not check_witness(F, back, Algebra.STDMV):
            return CaseResult(False, f"{print_formula(F)}: mapped witness {back} fails")
    return CaseResult(True, tags=(v.status.lower(),))


def check_bounded(rng: random.Random, opts: dict) -> CaseResult:
    """Every pAb witness lies in the box of the size-based bound."""
    F = random_pab_formula(rng)
    v = decide_pab(F)
    if not v.sat:
        return CaseResult(True, tags=("unsat",))
    bound = 2 ** witness_box(formula_size(F), opts.get("c", 20)).M
    ok = all(abs(x) <= bound for x in v.witness.values())
    return CaseResult(ok, "" if ok else f"{print_formula(F)}: {v.witness}", ("sat",))


def _random_system(rng: random.Random, m: int, k: int) -> LinearSystem:
    n = rng.randint(1, 2 * m + 2)
    A = tuple(tuple(rng.randint(-k, k) for _ in range(m)) for _ in range(n))
    b = tuple(random_rational(rng, -k, k, max_den=3) for _ in range(n))
    return LinearSystem(tuple(var_names(m)), A, b)


def check_small_lp(rng: random.Random, opts: dict) -> CaseResult:
    """Witnesses of feasible systems with entries in [-k, k] stay within (mk)^m."""
    m, k = rng.randint(1, 4), rng.randint(1, 3)
    for _ in range(200):
        S = _random_system(rng, m, k)
        res = feasible(S)
        if res.sat:
            break
    else:
        return CaseResult(False, f"no feasible system drawn for m={m} k={k}")
    bound = small_witness_bound(m, k)
    ok = S.satisfied_by(res.witness) and all(abs(x) <= bound for x in res.witness.values())
    return CaseResult(ok, "" if ok else f"m={m} k={k}: {res.witness}\n{S.dump()}")


def _grid_search(F, names, step: int):
    points = grid(step)
    for values in itertools.product(points, repeat=len(names)):
        v = _assign(names, values)
        if eval_formula(F, v, Algebra.STDMVHALF):
            return v
    return None


def check_brute_force(rng: random.Random, opts: dict) -> CaseResult:
    """decide_mv against exhaustive search on the grid of step 1/64.

    Grid-UNSAT with oracle-SAT is accepted only for an off-grid witness
    that check_witness accepts.
    """
    step = opts.get("grid", 64)
    F = random_mv_formula(rng, n_vars=2, half=True)
    names = var_names(2)
    v = decide_mv(F)
    hit = _grid_search(F, names, step)
    if hit is not None and not v.sat:
        return CaseResult(False, f"{print_formula(F)}: grid finds {hit}, oracle says UNSAT")
    if v.sat:
        A = Algebra.STDMVHALF
        if not check_witness(F, v.witness, A):
            return CaseResult(False, f"{print_formula(F)}: witness fails")
        if hit is None:
            on_grid = all((x * step).denominator == 1 for x in v.witness.values())
            if on_grid:
                return CaseResult(False, f"{print_formula(F)}: on-grid witness missed by the grid")
            return CaseResult(True, tags=("off_grid",))
    return CaseResult(True, tags=(v.status.lower(),))


# -- registry and runner ------------------------------------------------------

@dataclass(frozen=True)
class Suite:
    name: str
    check: Callable[[random.Random, dict], CaseResult]
    count: int
    summary: str


SUITES: dict[str, Suite] = {s.name: s for s in [
    Suite("tau", check_tau, 300, "tau commutes with r and stays near 1/2"),
    Suite("etau", check_etau, 200, "atom-level equivalence of F and tau'(F)"),
    Suite("tseitin-tau", check_tseitin_tau, 200, "tau' of the Tseitin variant"),
    Suite("bonus", check_bonus, len(_gadget_pairs(8)) + 1, "the gadget's unique solution"),
    Suite("delta", check_delta, 300, "delta shifts MV terms into [-1, 0]"),
    Suite("sigma", check_sigma, 100, "sigma_q equals tau_q after delta, with linear size"),
    Suite("etau-q", check_etau_q, 200, "delta'(F) against tau_q'(delta'(F)) near 1/2"),
    Suite("main", check_main, 200, "pAb oracle against the MV oracle on build_S_pab"),
    Suite("self", check_self, 200, "MV oracle against itself on build_S_mv"),
    Suite("bounded", check_bounded, 200, "pAb witnesses inside the size-based box"),
    Suite("small-lp", check_small_lp, 100, "small witnesses of integer systems"),
    Suite("brute-force", check_brute_force, 100, "MV oracle against grid search"),
]}


def _run_one(args) -> CaseResult:
    name, seed, i, opts = args
    rng = random.Random(f"{name}:{seed}:{i}")
    try:
        return SUITES[name].check(rng, dict(opts, _index=i))
    except Exception as exc:  # a crash counts as a failed instance
        return CaseResult(False, f"{type(exc).__name__}: {exc}")


def thread_cap() -> int:
    raw = os.environ.get("LUK_THREADS")
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


def run_suite(name: str, *, count: int | None = None, seed: int = 0,
              threads: int | None = None, **opts) -> SuiteResult:
    """Run a named suite; instance order and results are seed-determined."""
    if name not in SUITES:
        raise KeyError(name)
    count = SUITES[name].count if count is None else count
    threads = min(threads or thread_cap(), thread_cap(), max(count, 1))
    jobs = [(name, seed, i, opts) for i in range(count)]
    start = time.perf_counter()
    if threads > 1:
        with ProcessPoolExecutor(threads) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=max(1, count // (4 * threads))))
    else:
        results = [_run_one(job) for job in jobs]
    out = SuiteResult(name, count, sum(r.ok for r in results))
    for i, r in enumerate(results):
        if not r.ok:
            out.failures.append((i, r.detail))
        for tag in r.tags:
            out.tags[tag] = out.tags.get(tag, 0) + 1
    out.elapsed = time.perf_counter() - start
    return out
