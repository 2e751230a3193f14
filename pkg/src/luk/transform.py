"""Formula rewrites: Tseitin flattening, negation normal form, DNF."""
from __future__ import annotations

from dataclasses import dataclass, field

from .terms import (
    EQ, LE, LT, Atom, BAnd, Binary, BNot, BOr, Const, Formula, FreshNames,
    Term, Unary, Var, band, bor, formula_vars, subterms,
)

DEFAULT_DNF_CAP = 4096


class DnfBlowup(RuntimeError):
    def __init__(self, cap: int):
        super().__init__(f"DNF exceeds the cap of {cap} disjuncts")
        self.cap = cap


class TseitinNames:
    """Shared subterm-to-variable table.

    Passing one instance to several `tseitin` calls gives identical
    subterms the same fresh variable in all of them.
    """

    def __init__(self, taken=(), prefix: str = "t"):
        self.fresh = FreshNames(prefix, taken)
        self.names: dict[Term, str] = {}
        self.definitions: dict[str, Atom] = {}

    def name_of(self, t: Term) -> str:
        if isinstance(t, Var):
            return t.name
        name = self.names.get(t)
        if name is None:
            name = self.fresh()
            self.names[t] = name
            self.definitions[name] = Atom(Var(name), EQ, self._flat(t))
        return name

    def _flat(self, t: Term) -> Term:
        if isinstance(t, Const):
            return t
        if isinstance(t, Unary):
            return Unary(t.op, self._ref(t.child))
        return Binary(t.op, self._ref(t.left), self._ref(t.right))

    def _ref(self, t: Term) -> Var:
        return t if isinstance(t, Var) else Var(self.names[t])


@dataclass
class TseitinResult:
    formula: Formula
    skeleton: Formula
    definitions: list[Atom]
    defmap: dict[str, Term] = field(default_factory=dict)

    def extend(self, v: dict, evaluate) -> dict:
        """Extend an assignment by x_t := evaluate(t, v) for each fresh x_t."""
        out = dict(v)
        for name, t in self.defmap.items():
            out[name] = evaluate(t, v)
        return out


def tseitin(F: Formula, names: TseitinNames | None = None) -> TseitinResult:
    """Flatten `F` so that every atom carries at most one function symbol.

    Every non-variable subterm (constants included) gets a variable named
    by first occurrence in a post-order, left-to-right walk.
    """
    if names is None:
        names = TseitinNames(taken=formula_vars(F))
    used: dict[str, None] = {}

    def visit(t: Term) -> Var:
        for s in subterms(t):
            if not isinstance(s, Var):
                used.setdefault(names.name_of(s))
        return Var(names.name_of(t))

    def rebuild(f: Formula) -> Formula:
        if isinstance(f, Atom):
            return Atom(visit(f.left), f.rel, visit(f.right))
        if isinstance(f, BNot):
            return BNot(rebuild(f.child))
        return type(f)(rebuild(f.left), rebuild(f.right))

    skeleton = rebuild(F)
    order = sorted(used, key=_name_key)
    definitions = [names.definitions[n] for n in order]
    inverse = {n: t for t, n in names.names.items()}
    defmap = {n: inverse[n] for n in order}
    formula = band(skeleton, *definitions) if definitions else skeleton
    return TseitinResult(formula, skeleton, definitions, defmap)


def _name_key(name: str):
    head = name.rstrip("0123456789")
    tail = name[len(head):]
    return (head, int(tail) if tail else -1)


def nnf_trichotomy(F: Formula) -> Formula:
    """Push boolean negations into atoms and remove them by trichotomy.

    Equivalent to `F` in every totally ordered structure.
    """

    def go(f: Formula, positive: bool) -> Formula:
        if isinstance(f, BNot):
            return go(f.child, not positive)
        if isinstance(f, Atom):
            if positive:
                return f
            if f.rel == EQ:
                return BOr(Atom(f.left, LT, f.right), Atom(f.right, LT, f.left))
            if f.rel == LE:
                return Atom(f.right, LT, f.left)
            return Atom(f.right, LE, f.left)
        left, right = go(f.left, positive), go(f.right, positive)
        conj = isinstance(f, BAnd) == positive
        return BAnd(left, right) if conj else BOr(left, right)

    return go(F, True)


def dnf(F: Formula, cap: int = DEFAULT_DNF_CAP) -> list[list[Atom]]:
    """Disjuncts of a negation-free formula, each a list of atoms.

    Distribution runs left to right without deduplication.
    """

    def go(f: Formula) -> list[list[Atom]]:
        if isinstance(f, Atom):
            return [[f]]
        if isinstance(f, BNot):
            raise ValueError("dnf expects a negation-free formula")
        left, right = go(f.left), go(f.right)
        if isinstance(f, BOr):
            out = left + right
        else:
            if len(left) * len(right) > cap:
                raise DnfBlowup(cap)
            out = [a + b for a in left for b in right]
        if len(out) > cap:
            raise DnfBlowup(cap)
        return out

    return go(F)


def dnf_formula(disjuncts: list[list[Atom]]) -> Formula:
    return bor(*(band(*d) for d in disjuncts))
