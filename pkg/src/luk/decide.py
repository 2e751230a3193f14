"""Decision procedures for the existential theories of R with -1 and of [0,1].

Both oracles share one pipeline: negations are pushed into atoms, the
formula is expanded to DNF, each disjunct is flattened, forced values
are propagated, and the remaining piecewise-linear atoms are split into
linear regimes depth-first.

Definitions are visited bottom-up so each regime's equality can be
solved for the defined variable.  Every node is pruned with
Fourier-Motzkin, reusing the parent's witness when it already fits.
An infeasible node reports which split levels it depends on, and the
search backjumps past levels that played no part.
"""
from __future__ import annotations

import itertools
import random
import time
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .linear import (
    DEFAULT_ROW_CAP, REGIMES, FmBlowup, Lin, Polyhedron, extract_system,
    feasible, linearize, regime_at,
)
from .semantics import Algebra, EvaluationError, eval_formula, eval_term, holds
from .terms import (
    ADD, EQ, IMPL, JOIN, LE, LT, MEET, NEG, OPLUS, OTIMES, Atom, Binary,
    Const, Formula, Signature, Term, Unary, Var, band, conjuncts, fits,
    formula_vars, ordered_vars, subterms,
)
from .transform import DEFAULT_DNF_CAP, DnfBlowup, TseitinNames, dnf, nnf_trichotomy, tseitin

DEFAULT_SPLIT_CAP = 2 ** 16

SAT = "SAT"
UNSAT = "UNSAT"

F0, F1, HALF = Fraction(0), Fraction(1), Fraction(1, 2)


class SplitCapExceeded(RuntimeError):
    def __init__(self, cap: int):
        super().__init__(f"case splitting exceeded {cap} branches")
        self.cap = cap


class OracleError(AssertionError):
    """The oracle produced a witness that does not check; a bug, never expected."""


@dataclass
class Verdict:
    status: str
    witness: Optional[dict[str, Fraction]] = None
    stats: dict = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.status == SAT


def check_witness(F: Formula, v: Mapping[str, Fraction], A: Algebra) -> bool:
    try:
        return eval_formula(F, v, A)
    except EvaluationError:
        return False


# -- unit propagation ---------------------------------------------------------

class Conflict(Exception):
    pass


@dataclass
class Propagation:
    atoms: list[Atom]
    known: dict[str, Fraction]
    alias: dict[str, str]

    def value(self, x: str, rest: Mapping[str, Fraction]) -> Fraction:
        rep = self.alias.get(x, x)
        if rep in self.known:
            return self.known[rep]
        return rest.get(rep, F0)


def _rename_term(t: Term, find) -> Term:
    if isinstance(t, Var):
        return Var(find(t.name))
    if isinstance(t, Const):
        return t
    if isinstance(t, Unary):
        return Unary(t.op, _rename_term(t.child, find))
    return Binary(t.op, _rename_term(t.left, find), _rename_term(t.right, find))


def _leaf_vars(t: Term) -> set[str]:
    return {s.name for s in subterms(t) if isinstance(s, Var)}


def _invert(e: Term, t: Fraction, known: dict, bounded: bool):
    """Facts (var, value) forced by `e = t` when t is known."""
    if isinstance(e, Unary) and isinstance(e.child, Var):
        x = e.child.name
        if x in known:
            return []
        return [(x, -t if e.op == NEG else 1 - t)]
    if not isinstance(e, Binary):
        return []
    a, b = e.left, e.right
    if not (isinstance(a, (Var, Const)) and isinstance(b, (Var, Const))):
        return []

    def val(s):
        if isinstance(s, Const):
            return eval_term(s, {}, Algebra.STDMVHALF if bounded else Algebra.RMINUS1, check=False)
        return known.get(s.name)

    va, vb = val(a), val(b)
    op = e.op
    if isinstance(a, Var) and isinstance(b, Var) and a.name == b.name and va is None:
        x = a.name
        if op == ADD:
            return [(x, t / 2)]
        if op == OPLUS and t < 1:
            return [(x, t / 2)]
        if op == OTIMES and t > 0:
            return [(x, (t + 1) / 2)]
        if op in (MEET, JOIN):
            return [(x, t)]
        return []
    if (va is None) == (vb is None):
        return []
    left_unknown = va is None
    x = (a if left_unknown else b).name
    c = vb if left_unknown else va
    if op == ADD:
        return [(x, t - c)]
    if op == OPLUS:
        return [(x, t - c)] if t < 1 else []
    if op == OTIMES:
        return [(x, t + 1 - c)] if t > 0 else []
    if op == IMPL:
        if t == 1:
            return []
        # t = 1 - a + b
        return [(x, 1 + c - t)] if left_unknown else [(x, t - 1 + c)]
    if op == MEET:
        if t < c:
            return [(x, t)]
        if t > c:
            raise Conflict()
        return []
    if op == JOIN:
        if t > c:
            return [(x, t)]
        if t < c:
            raise Conflict()
        return []
    return []


def propagate(atoms: list[Atom], *, bounded: bool) -> Propagation:
    """Merge variables equated to each other and push forced values to a fixpoint.

    Raises Conflict if the conjunction is refuted along the way.
    """
    A = Algebra.STDMVHALF if bounded else Algebra.RMINUS1
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        root = x
        while parent.get(root, root) != root:
            root = parent[root]
        while parent.get(x, x) != root:
            parent[x], x = root, parent[x]
        return root

    rest = []
    for a in atoms:
        if a.rel == EQ and isinstance(a.left, Var) and isinstance(a.right, Var):
            ra, rb = find(a.left.name), find(a.right.name)
            if ra != rb:
                # keep the smaller name as representative, for determinism
                lo, hi = sorted((ra, rb))
                parent[hi] = lo
        else:
            rest.append(a)
    work = []
    for a in rest:
        a = Atom(_rename_term(a.left, find), a.rel, _rename_term(a.right, find))
        if isinstance(a.left, Var) and isinstance(a.right, Var) and a.left == a.right:
            if a.rel == LT:
                raise Conflict()
            continue
        work.append(a)

    known: dict[str, Fraction] = {}
    mentions: dict[str, list[int]] = defaultdict(list)
    atom_vars = []
    for i, a in enumerate(work):
        vs = _leaf_vars(a.left) | _leaf_vars(a.right)
        atom_vars.append(vs)
        for x in vs:
            mentions[x].append(i)
    alive = [True] * len(work)
    queue = list(range(len(work)))[::-1]

    def assign(x: str, value: Fraction):
        if bounded and not 0 <= value <= 1:
            raise Conflict()
        old = known.get(x)
        if old is not None:
            if old != value:
                raise Conflict()
            return
        known[x] = value
        queue.extend(mentions[x])

    while queue:
        i = queue.pop()
        if not alive[i]:
            continue
        a = work[i]
        if atom_vars[i] <= known.keys():
            if not eval_formula(a, known, A):
                raise Conflict()
            alive[i] = False
            continue
        if a.rel != EQ:
            continue
        for side, other in ((a.left, a.right), (a.right, a.left)):
            if not isinstance(side, Var):
                continue
            x = side.name
            if x not in known:
                if _leaf_vars(other) <= known.keys():
                    assign(x, eval_term(other, known, A, check=False))
                elif isinstance(other, Unary) and other.child == side:
                    assign(x, HALF if other.op != NEG else F0)
            else:
                for y, value in _invert(other, known[x], known, bounded):
                    assign(y, value)
            break
    alias = {x: find(x) for x in parent}
    return Propagation([a for a, ok in zip(work, alive) if ok], known, alias)


# -- regime search ------------------------------------------------------------

def _on_cycle(pending: dict[str, Atom]) -> str:
    """A definition lying on a dependency cycle, linear ones preferred."""
    u = next(iter(pending))
    path: list[str] = []
    while u not in path:
        path.append(u)
        u = next(x for x in sorted(_leaf_vars(pending[u].right)) if x in pending)
    cycle = path[path.index(u):]

    def piecewise(v: str) -> bool:
        node = pending[v].right
        return isinstance(node, Binary) and node.op in REGIMES

    return min(cycle, key=lambda v: (piecewise(v), v))


class _Search:
    """Regime search over a flat conjunction.

    Atoms `u = f(args)` are definitions: once a regime of f is chosen, u
    becomes an affine function of the remaining free ("base") variables.
    Definitions are decided bottom-up, so Fourier-Motzkin only ever sees
    base variables.  Other atoms are constraints, switched on as soon as
    all their variables are determined.  At every node the base witness
    is extended by evaluating the undecided definitions; if that already
    satisfies every constraint the search stops.
    """

    def __init__(self, atoms: list[Atom], fixed: dict[str, Fraction], A: Algebra,
                 split_cap: int, row_cap: int, rng: Optional[random.Random], stats: dict):
        self.A = A
        self.bounded = A.bounded
        self.fixed = fixed
        self.split_cap = split_cap
        self.row_cap = row_cap
        self.rng = rng
        self.stats = stats
        self.cache: dict = {}
        self.atoms = atoms
        self._classify()

    def _classify(self) -> None:
        pending: dict[str, Atom] = {}
        constraints = []
        fresh = (f"_p{i}" for i in itertools.count())

        def constrain(a: Atom) -> None:
            # a piecewise constraint gets its own defined variable
            node = next((t for t in (a.left, a.right)
                         if isinstance(t, Binary) and t.op in REGIMES), None)
            if node is None:
                constraints.append(a)
                return
            w = next(fresh)
            pending[w] = Atom(Var(w), EQ, node)
            if node is a.left:
                constraints.append(Atom(Var(w), a.rel, a.right))
            else:
                constraints.append(Atom(a.left, a.rel, Var(w)))

        for a in self.atoms:
            u = a.left.name if isinstance(a.left, Var) else None
            if (a.rel == EQ and u is not None and not isinstance(a.right, Var)
                    and u not in self.fixed and u not in pending):
                pending[u] = a
            else:
                constrain(a)
        # topological order; a definition caught in a cycle becomes a constraint
        order: list[tuple[str, Atom]] = []
        done = {x for a in self.atoms for x in _leaf_vars(a.left) | _leaf_vars(a.right)
                if x not in pending}
        while pending:
            progress = False
            for u, a in list(pending.items()):
                if _leaf_vars(a.right) <= done:
                    order.append((u, a))
                    done.add(u)
                    del pending[u]
                    progress = True
            if not progress:
                u = _on_cycle(pending)
                a = pending.pop(u)
                done.add(u)
                constrain(a)
        self.order = self._cone_order(order, constraints)
        self.constraints = constraints
        defined = {u for u, _ in order}
        every = set(defined)
        for a in constraints + [a for _, a in order]:
            every |= _leaf_vars(a.left) | _leaf_vars(a.right)
        self.names = sorted(every)
        self.base = [x for x in self.names if x not in self.fixed and x not in defined]
        position = {u: i for i, (u, _) in enumerate(order)}
        self.activate: dict[int, list[Atom]] = defaultdict(list)
        for a in constraints:
            vs = _leaf_vars(a.left) | _leaf_vars(a.right)
            self.activate[max((position[x] for x in vs if x in position), default=-1)].append(a)

    @staticmethod
    def _cone_order(order: list[tuple[str, Atom]], constraints: list[Atom]):
        """Reorder definitions so each constraint's cone is decided in one run.

        Smaller cones go first, which switches constraints on early.
        """
        defs = dict(order)
        rank = {u: i for i, (u, _) in enumerate(order)}

        def cone(vs) -> set[str]:
            seen: set[str] = set()
            stack = [x for x in vs if x in defs]
            while stack:
                u = stack.pop()
                if u not in seen:
                    seen.add(u)
                    stack.extend(x for x in _leaf_vars(defs[u].right) if x in defs)
            return seen

        cones = [cone(_leaf_vars(a.left) | _leaf_vars(a.right)) for a in constraints]
        out: list[tuple[str, Atom]] = []
        placed: set[str] = set()
        for c in sorted(cones, key=len):
            for u in sorted(c - placed, key=rank.__getitem__):
                out.append((u, defs[u]))
            placed |= c
        out.extend((u, a) for u, a in order if u not in placed)
        return out

    def run(self) -> Optional[dict[str, Fraction]]:
        poly = Polyhedron(track=True, cap=self.row_cap)
        poly.known.update(self.base)
        root = frozenset({-1})
        ok = all(poly.add(Lin.var(x).shift(-self.fixed[x]), EQ, root, pivot=x)
                 for x in self.names if x in self.fixed)
        if self.bounded:
            for x in self.base:
                ok = ok and poly.add(Lin.var(x).shift(-1), LE, root) and poly.add(-Lin.var(x), LE, root)
        for a in self.activate[-1]:
            ok = ok and all(poly.add(lin, rel, root) for lin, rel in linearize(a))
        if not ok:
            return None
        cases, _ = self._dfs(poly, 0, {}, None)
        if cases is None:
            return None
        return self._leaf(cases)

    def _extend(self, values: dict[str, Fraction], start: int) -> dict[str, Fraction]:
        for u, a in self.order[start:]:
            values[u] = eval_term(a.right, values, self.A, check=False)
        return values

    def _dfs(self, poly: Polyhedron, i: int, cases: dict, hint):
        """Returns (cases, None) on success, else (None, conflict levels).

        The conflict holds the decision levels whose rows took part in
        refuting every leaf below; a level outside it can be skipped by
        jumping back past it.
        """
        everything = frozenset(range(-1, i))
        base = poly.solve(self.cache, hint)
        self.stats["fm_rows_peak"] = max(self.stats.get("fm_rows_peak", 0), poly.peak)
        if base is None:
            return None, poly.conflict or everything
        hint = dict(base)
        values = self._extend(base, i)
        if all(holds(a, values, self.A) for a in self.constraints):
            full = dict(cases)
            for j in range(i, len(self.order)):
                node = self.order[j][1].right
                if isinstance(node, Binary) and node.op in REGIMES:
                    a = eval_term(node.left, values, self.A, check=False)
                    b = eval_term(node.right, values, self.A, check=False)
                    full[j] = regime_at(node.op, a, b)
            return full, None
        if i == len(self.order):
            return None, everything
        u, atom = self.order[i]
        node = atom.right
        if isinstance(node, Binary) and node.op in REGIMES:
            labels = list(REGIMES[node.op])
            if self.rng is not None:
                self.rng.shuffle(labels)
            else:
                a = eval_term(node.left, values, self.A, check=False)
                b = eval_term(node.right, values, self.A, check=False)
                first = regime_at(node.op, a, b)
                labels.sort(key=lambda lab: lab != first)
        else:
            labels = [None]
        here = frozenset({i})
        conflict: set[int] = set()
        for label in labels:
            if label is not None:
                self.stats["branches"] = self.stats.get("branches", 0) + 1
                if self.stats["branches"] > self.split_cap:
                    raise SplitCapExceeded(self.split_cap)
            child = poly.copy()
            *guards, (lin, _) = linearize(atom, label)
            ok = (all(child.add(g, rel, here) for g, rel in guards)
                  and child.add(lin, EQ, here, pivot=u))
            for c in self.activate[i]:
                ok = ok and all(child.add(g, rel, here) for g, rel in linearize(c))
            if ok:
                if label is not None:
                    cases[i] = label
                found, why = self._dfs(child, i + 1, cases, hint)
                if found is not None:
                    return found, None
                cases.pop(i, None)
            else:
                why = child.conflict
            if why is None:
                why = everything | here
            if i not in why:
                return None, why
            conflict |= why - here
        return None, frozenset(conflict)

    def _leaf(self, cases: dict) -> dict[str, Fraction]:
        atoms = [a for _, a in self.order] + self.constraints
        fixed = {x: self.fixed[x] for x in self.names if x in self.fixed}
        S = extract_system(atoms, cases, fixed=fixed, box=(0, 1) if self.bounded else None)
        res = feasible(S, cap=self.row_cap)
        if not res.sat:
            raise OracleError("regime accepted by the search but its system is infeasible")
        return dict(res.witness)


# -- the oracles --------------------------------------------------------------

def _decide(F: Formula, A: Algebra, *, dnf_cap: int, split_cap: int, row_cap: int,
            propagate_units: bool, seed: Optional[int]) -> Verdict:
    start = time.perf_counter()
    bounded = A.bounded
    rng = random.Random(seed) if seed is not None else None
    source = ordered_vars(F)
    disjuncts = dnf(nnf_trichotomy(F), dnf_cap)
    names = TseitinNames(taken=formula_vars(F))
    stats = {"disjuncts": len(disjuncts), "explored": 0, "branches": 0, "fm_rows_peak": 0}
    for atoms in disjuncts:
        stats["explored"] += 1
        flat = tseitin(band(*atoms), names)
        flat_atoms = conjuncts(flat.skeleton) + flat.definitions
        if propagate_units:
            try:
                prop = propagate(flat_atoms, bounded=bounded)
            except Conflict:
                continue
        else:
            prop = Propagation(flat_atoms, {}, {})
        search = _Search(prop.atoms, prop.known, A, split_cap, row_cap, rng, stats)
        values = search.run()
        if values is None:
            continue
        witness = {x: prop.value(x, values) for x in source}
        if not check_witness(F, witness, A):
            raise OracleError(f"witness {witness} fails the source formula")
        stats["elapsed"] = time.perf_counter() - start
        return Verdict(SAT, witness, stats)
    stats["elapsed"] = time.perf_counter() - start
    return Verdict(UNSAT, None, stats)


def decide_pab(F: Formula, *, dnf_cap: int = DEFAULT_DNF_CAP, split_cap: int = DEFAULT_SPLIT_CAP,
               row_cap: int = DEFAULT_ROW_CAP, propagate: bool = True,
               seed: Optional[int] = None) -> Verdict:
    """Is the existential closure of F true in R with -1?"""
    return _decide(F, Algebra.RMINUS1, dnf_cap=dnf_cap, split_cap=split_cap, row_cap=row_cap,
                   propagate_units=propagate, seed=seed)


def decide_mv(F: Formula, *, dnf_cap: int = DEFAULT_DNF_CAP, split_cap: int = DEFAULT_SPLIT_CAP,
              row_cap: int = DEFAULT_ROW_CAP, propagate: bool = True,
              seed: Optional[int] = None) -> Verdict:
    """Is the existential closure of F true in [0,1] (with 1/2 if F uses it)?"""
    if not fits(F, Signature.MVHALF):
        raise ValueError("decide_mv expects an MV formula")
    A = Algebra.STDMV if fits(F, Signature.MV) else Algebra.STDMVHALF
    return _decide(F, A, dnf_cap=dnf_cap, split_cap=split_cap, row_cap=row_cap,
                   propagate_units=propagate, seed=seed)


def decide(F: Formula, sig: Signature, **kw) -> Verdict:
    if sig.is_group:
        return decide_pab(F, **kw)
    return decide_mv(F, **kw)


__all__ = [
    "SAT", "UNSAT", "Verdict", "decide", "decide_pab", "decide_mv", "check_witness",
    "propagate", "Propagation", "Conflict", "SplitCapExceeded", "OracleError",
    "DnfBlowup", "FmBlowup", "DEFAULT_SPLIT_CAP",
]
