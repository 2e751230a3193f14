"""Term and open-formula ASTs for the four signatures Ab, pAb, MV and MV[1/2].

Terms are immutable trees.  Operator and constant symbols are the same
strings the concrete syntax uses, so printing needs no lookup table.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterator, Union

# binary term operators
ADD = "+"
MEET = "/\\"
JOIN = "\\/"
OPLUS = "(+)"
OTIMES = "(*)"
IMPL = "->"
# unary term operators
NEG = "-"
NOT = "~"
# constants
ZERO = "0"
ONE = "1"
MINUS_ONE = "-1"
HALF = "1/2"

BINARY_OPS = (ADD, MEET, JOIN, OPLUS, OTIMES, IMPL)
UNARY_OPS = (NEG, NOT)
CONSTANTS = (ZERO, ONE, MINUS_ONE, HALF)

# relations of atoms
EQ = "="
LE = "<="
LT = "<"
RELATIONS = (EQ, LE, LT)


class Signature(enum.Enum):
    AB = "ab"
    PAB = "pab"
    MV = "mv"
    MVHALF = "mvhalf"

    @property
    def operators(self) -> frozenset[str]:
        if self in (Signature.AB, Signature.PAB):
            return frozenset({ADD, NEG, MEET, JOIN})
        return frozenset({OPLUS, OTIMES, NOT, IMPL, MEET, JOIN})

    @property
    def constants(self) -> frozenset[str]:
        return {
            Signature.AB: frozenset({ZERO}),
            Signature.PAB: frozenset({ZERO, MINUS_ONE}),
            Signature.MV: frozenset({ZERO, ONE}),
            Signature.MVHALF: frozenset({ZERO, ONE, HALF}),
        }[self]

    @property
    def is_group(self) -> bool:
        return self in (Signature.AB, Signature.PAB)

    def permits(self, symbol: str) -> bool:
        return symbol in self.operators or symbol in self.constants


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    symbol: str

    def __post_init__(self):
        if self.symbol not in CONSTANTS:
            raise ValueError(f"unknown constant {self.symbol!r}")


@dataclass(frozen=True)
class Unary:
    op: str
    child: "Term"

    def __post_init__(self):
        if self.op not in UNARY_OPS:
            raise ValueError(f"unknown unary operator {self.op!r}")


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Term"
    right: "Term"

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown binary operator {self.op!r}")


Term = Union[Var, Const, Unary, Binary]


@dataclass(frozen=True)
class Atom:
    left: Term
    rel: str
    right: Term

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")


@dataclass(frozen=True)
class BNot:
    child: "Formula"


@dataclass(frozen=True)
class BAnd:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class BOr:
    left: "Formula"
    right: "Formula"


Formula = Union[Atom, BNot, BAnd, BOr]


# -- builders -----------------------------------------------------------------

def var(name: str) -> Var:
    return Var(name)


def const(symbol: str) -> Const:
    return Const(symbol)


def neg(t: Term) -> Term:
    """Group negation, cancelling a direct double negation."""
    if isinstance(t, Unary) and t.op == NEG:
        return t.child
    return Unary(NEG, t)


def mvnot(t: Term) -> Term:
    """MV negation, cancelling a direct double negation."""
    if isinstance(t, Unary) and t.op == NOT:
        return t.child
    return Unary(NOT, t)


def add(a: Term, b: Term) -> Binary:
    return Binary(ADD, a, b)


def meet(a: Term, b: Term) -> Binary:
    return Binary(MEET, a, b)


def join(a: Term, b: Term) -> Binary:
    return Binary(JOIN, a, b)


def oplus(a: Term, b: Term) -> Binary:
    return Binary(OPLUS, a, b)


def otimes(a: Term, b: Term) -> Binary:
    return Binary(OTIMES, a, b)


def impl(a: Term, b: Term) -> Binary:
    return Binary(IMPL, a, b)


def eq(a: Term, b: Term) -> Atom:
    return Atom(a, EQ, b)


def le(a: Term, b: Term) -> Atom:
    return Atom(a, LE, b)


def lt(a: Term, b: Term) -> Atom:
    return Atom(a, LT, b)


def bnot(f: Formula) -> Formula:
    if isinstance(f, BNot):
        return f.child
    return BNot(f)


def _balanced(node, fs):
    if not fs:
        raise ValueError("empty boolean combination")
    if len(fs) == 1:
        return fs[0]
    mid = len(fs) // 2
    return node(_balanced(node, fs[:mid]), _balanced(node, fs[mid:]))


def band(*fs: Formula) -> Formula:
    """Conjunction of one or more formulas, as a balanced tree.

    Gadget chains produce thousands of conjuncts; a balanced tree keeps
    every recursive traversal shallow.
    """
    return _balanced(BAnd, list(fs))


def bor(*fs: Formula) -> Formula:
    return _balanced(BOr, list(fs))


def conjuncts(f: Formula) -> list[Formula]:
    """Flatten nested conjunctions into a list, left to right."""
    out, stack = [], [f]
    while stack:
        g = stack.pop()
        if isinstance(g, BAnd):
            stack.append(g.right)
            stack.append(g.left)
        else:
            out.append(g)
    return out


# -- normalization ------------------------------------------------------------

def normalize(t: Term) -> Term:
    """Return the reduced form of `t` (no `--` and no `~~` anywhere)."""
    if isinstance(t, (Var, Const)):
        return t
    if isinstance(t, Unary):
        child = normalize(t.child)
        if isinstance(child, Unary) and child.op == t.op:
            return child.child
        return Unary(t.op, child)
    return Binary(t.op, normalize(t.left), normalize(t.right))


def normalize_formula(f: Formula) -> Formula:
    """Reduce every term and drop consecutive boolean negations."""
    if isinstance(f, Atom):
        return Atom(normalize(f.left), f.rel, normalize(f.right))
    if isinstance(f, BNot):
        child = normalize_formula(f.child)
        if isinstance(child, BNot):
            return child.child
        return BNot(child)
    return type(f)(normalize_formula(f.left), normalize_formula(f.right))


def is_reduced(t: Term) -> bool:
    if isinstance(t, (Var, Const)):
        return True
    if isinstance(t, Unary):
        if isinstance(t.child, Unary) and t.child.op == t.op:
            return False
        return is_reduced(t.child)
    return is_reduced(t.left) and is_reduced(t.right)


# -- traversal and metrics ----------------------------------------------------

def subterms(t: Term) -> Iterator[Term]:
    """Post-order traversal, children before parents."""
    if isinstance(t, Unary):
        yield from subterms(t.child)
    elif isinstance(t, Binary):
        yield from subterms(t.left)
        yield from subterms(t.right)
    yield t


def atoms(f: Formula) -> Iterator[Atom]:
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Atom):
            yield g
        elif isinstance(g, BNot):
            stack.append(g.child)
        else:
            stack.append(g.right)
            stack.append(g.left)


def formula_terms(f: Formula) -> Iterator[Term]:
    for a in atoms(f):
        yield a.left
        yield a.right


def term_size(t: Term) -> int:
    """Number of leaf occurrences (variables and constants)."""
    if isinstance(t, (Var, Const)):
        return 1
    if isinstance(t, Unary):
        return term_size(t.child)
    return term_size(t.left) + term_size(t.right)


def term_depth(t: Term) -> int:
    if isinstance(t, (Var, Const)):
        return 0
    if isinstance(t, Unary):
        return term_depth(t.child) + 1
    return max(term_depth(t.left), term_depth(t.right)) + 1


def operator_count(t: Term) -> int:
    if isinstance(t, (Var, Const)):
        return 0
    if isinstance(t, Unary):
        return operator_count(t.child) + 1
    return operator_count(t.left) + operator_count(t.right) + 1


def formula_size(f: Formula) -> int:
    return sum(term_size(a.left) + term_size(a.right) for a in atoms(f))


def atom_count(f: Formula) -> int:
    return sum(1 for _ in atoms(f))


def formula_depth(f: Formula) -> int:
    """Maximal depth of a term occurring in `f`."""
    return max(term_depth(t) for t in formula_terms(f))


def term_vars(t: Term) -> set[str]:
    return {s.name for s in subterms(t) if isinstance(s, Var)}


def formula_vars(f: Formula) -> set[str]:
    out: set[str] = set()
    for t in formula_terms(f):
        out |= term_vars(t)
    return out


def ordered_vars(f: Formula) -> list[str]:
    """Variables in order of first occurrence, left to right."""
    seen: dict[str, None] = {}
    for t in formula_terms(f):
        for s in subterms(t):
            if isinstance(s, Var):
                seen.setdefault(s.name)
    # subterms() is post-order, which still visits leaves left to right
    return list(seen)


def symbols(t: Term) -> Iterator[str]:
    for s in subterms(t):
        if isinstance(s, Const):
            yield s.symbol
        elif isinstance(s, (Unary, Binary)):
            yield s.op


def signature_violations(t: Term, sig: Signature) -> list[str]:
    return sorted({s for s in symbols(t) if not sig.permits(s)})


def fits(f: Formula | Term, sig: Signature) -> bool:
    terms = formula_terms(f) if isinstance(f, (Atom, BNot, BAnd, BOr)) else [f]
    return all(not signature_violations(t, sig) for t in terms)


def smallest_signature(f: Formula | Term) -> Signature | None:
    """The smallest of the four signatures containing every symbol used."""
    for sig in Signature:
        if fits(f, sig):
            return sig
    return None


# -- substitution -------------------------------------------------------------

def map_term(t: Term, leaf) -> Term:
    """Rebuild `t`, replacing each leaf `s` by `leaf(s)`."""
    if isinstance(t, (Var, Const)):
        return leaf(t)
    if isinstance(t, Unary):
        return Unary(t.op, map_term(t.child, leaf))
    return Binary(t.op, map_term(t.left, leaf), map_term(t.right, leaf))


def map_atoms(f: Formula, fn) -> Formula:
    """Rebuild `f`, replacing each atom `a` by the formula `fn(a)`."""
    if isinstance(f, Atom):
        return fn(f)
    if isinstance(f, BNot):
        return BNot(map_atoms(f.child, fn))
    return type(f)(map_atoms(f.left, fn), map_atoms(f.right, fn))


def map_formula_terms(f: Formula, fn) -> Formula:
    return map_atoms(f, lambda a: Atom(fn(a.left), a.rel, fn(a.right)))


def substitute(t: Term, mapping: dict) -> Term:
    """Replace leaves found in `mapping` (keyed by Var or Const nodes)."""
    return map_term(t, lambda s: mapping.get(s, s))


def substitute_formula(f: Formula, mapping: dict) -> Formula:
    return map_formula_terms(f, lambda t: substitute(t, mapping))


def rename_formula(f: Formula, renaming: dict[str, str]) -> Formula:
    return substitute_formula(f, {Var(a): Var(b) for a, b in renaming.items()})


class FreshNames:
    """Deterministic fresh-name supply: prefix + counter, skipping taken names."""

    def __init__(self, prefix: str, taken=()):
        self.prefix = prefix
        self.taken = set(taken)
        self._counter = itertools.count()

    def __call__(self) -> str:
        while True:
            name = f"{self.prefix}{next(self._counter)}"
            if name not in self.taken:
                self.taken.add(name)
                return name
