"""Concrete syntax: tokenizer, recursive-descent parser and printer.

Grammar (whitespace-insensitive)::

    formula := conj { "|" conj }
    conj    := lit { "&" lit }
    lit     := "!" lit | "(" formula ")" | atom
    atom    := term rel term            rel := "=" | "<=" | "<"
    term    := lterm { op lterm }       (left associative, one level)
    lterm   := "-" lterm | "~" lterm | "(" term ")" | var | const
    op      := "+" | "\\/" | "/\\" | "(+)" | "(*)" | "->"
    const   := "0" | "1" | "-1" | "1/2"

A parenthesis at literal position may open either a formula or a term;
the parser tries the atom reading first and backtracks.
"""
from __future__ import annotations

import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .terms import (
    BINARY_OPS, CONSTANTS, HALF, MINUS_ONE, NEG, NOT, ONE, RELATIONS, ZERO,
    Atom, BAnd, Binary, BNot, Const, Formula, Signature, Term, Unary, Var,
    band, bor, formula_terms, normalize, normalize_formula,
    signature_violations,
)


class LukSyntaxError(ValueError):
    """Base class of everything the parser raises."""


class ParseError(LukSyntaxError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class SignatureError(LukSyntaxError):
    def __init__(self, symbol: str, sig: Signature, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(
            f"{where}operator {symbol!r} is not in the language {sig.value}")
        self.symbol = symbol
        self.signature = sig
        self.line = line


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<sym>\(\+\)|\(\*\)|->|/\\|\\/|<=|-1(?![\d/])|[()=<&|!+\-~])
  | (?P<num>\d+(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # "sym", "num", "ident", "end"
    text: str
    pos: int


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            line, col = _line_col(text, pos)
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), pos))
        pos = m.end()
    out.append(Token("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.furthest: ParseError | None = None
        self.furthest_pos = -1

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        line, col = _line_col(self.text, tok.pos)
        err = ParseError(message, line, col)
        if self.furthest is None or tok.pos >= self.furthest_pos:
            self.furthest, self.furthest_pos = err, tok.pos
        return err

    def accept(self, text: str) -> bool:
        if self.tok.kind == "sym" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")

    # formulas

    def formula(self) -> Formula:
        parts = [self.conj()]
        while self.accept("|"):
            parts.append(self.conj())
        return bor(*parts)

    def conj(self) -> Formula:
        parts = [self.lit()]
        while self.accept("&"):
            parts.append(self.lit())
        return band(*parts)

    def lit(self) -> Formula:
        if self.accept("!"):
            return BNot(self.lit())
        if self.tok.kind == "sym" and self.tok.text == "(":
            start = self.i
            try:
                return self.atom()
            except ParseError:
                self.i = start
            self.expect("(")
            f = self.formula()
            self.expect(")")
            return f
        return self.atom()

    def atom(self) -> Atom:
        left = self.term()
        tok = self.tok
        if tok.kind == "sym" and tok.text in RELATIONS:
            self.i += 1
            return Atom(left, tok.text, self.term())
        raise self.error(f"expected a relation, found {tok.text or 'end of input'!r}")

    # terms

    def term(self) -> Term:
        t = self.lterm()
        while self.tok.kind == "sym" and self.tok.text in BINARY_OPS:
            op = self.tok.text
            self.i += 1
            t = Binary(op, t, self.lterm())
        return t

    def lterm(self) -> Term:
        tok = self.tok
        if tok.kind == "sym":
            if tok.text in (NEG, NOT):
                self.i += 1
                return Unary(tok.text, self.lterm())
            if tok.text == MINUS_ONE:
                self.i += 1
                return Const(MINUS_ONE)
            if tok.text == "(":
                self.i += 1
                t = self.term()
                self.expect(")")
                return t
        elif tok.kind == "ident":
            self.i += 1
            return Var(tok.text)
        elif tok.kind == "num":
            if tok.text not in CONSTANTS:
                raise self.error(f"numeral {tok.text!r} is not a constant")
            self.i += 1
            return Const(tok.text)
        raise self.error(f"expected a term, found {tok.text or 'end of input'!r}")


def _check(f: Formula, sig: Signature, line: int | None) -> None:
    for t in formula_terms(f):
        bad = signature_violations(t, sig)
        if bad:
            raise SignatureError(bad[0], sig, line)


def _parse(text: str, rule: str):
    p = _Parser(text)
    try:
        result = getattr(p, rule)()
        if p.tok.kind != "end":
            raise p.error(f"unexpected {p.tok.text!r}")
    except ParseError:
        raise p.furthest from None
    return result


def parse_term(text: str, sig: Signature) -> Term:
    t = normalize(_parse(text, "term"))
    bad = signature_violations(t, sig)
    if bad:
        raise SignatureError(bad[0], sig)
    return t


def parse_formula(text: str, sig: Signature, *, line: int | None = None) -> Formula:
    """Parse one open formula and return it in reduced form.

    `line` only shifts reported positions, for callers reading files.
    """
    try:
        f = _parse(text, "formula")
    except ParseError as err:
        if line is None:
            raise
        raise ParseError(err.message, line + err.line - 1, err.column) from None
    f = normalize_formula(f)
    _check(f, sig, line)
    return f


# -- printing -----------------------------------------------------------------

def print_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return t.symbol
    if isinstance(t, Unary):
        child = print_term(t.child)
        if isinstance(t.child, Const) and t.child.symbol in (MINUS_ONE, ONE):
            child = f"({child})"
        return t.op + child
    return f"({print_term(t.left)} {t.op} {print_term(t.right)})"


def print_formula(f: Formula) -> str:
    return _print_formula(f, top=True)


def _print_formula(f: Formula, top: bool = False) -> str:
    if isinstance(f, Atom):
        text = f"{print_term(f.left)} {f.rel} {print_term(f.right)}"
        return text if top else f"({text})"
    if isinstance(f, BNot):
        return "!" + _print_formula(f.child)
    sep = " & " if isinstance(f, BAnd) else " | "
    text = _print_formula(f.left) + sep + _print_formula(f.right)
    return text if top else f"({text})"


# -- formula files ------------------------------------------------------------

_LANG_RE = re.compile(r"#lang\s+(\w+)\s*$")


@dataclass
class FormulaFile:
    signature: Signature
    formulas: list[Formula]
    lines: list[int]


def parse_formula_file(text: str) -> FormulaFile:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty file; expected '#lang <tag>'", 1, 1)
    m = _LANG_RE.match(lines[0].strip())
    if m is None:
        raise ParseError("first line must be '#lang ab|pab|mv|mvhalf'", 1, 1)
    try:
        sig = Signature(m.group(1))
    except ValueError:
        raise ParseError(f"unknown language tag {m.group(1)!r}", 1, 7) from None
    formulas, where = [], []
    for lineno, raw in enumerate(lines[1:], start=2):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        formulas.append(parse_formula(body, sig, line=lineno))
        where.append(lineno)
    return FormulaFile(sig, formulas, where)


def read_formula_file(path) -> FormulaFile:
    return parse_formula_file(Path(path).read_text(encoding="utf-8"))


def format_formula_file(sig: Signature, formulas, comments=()) -> str:
    out = [f"#lang {sig.value}"]
    out.extend(f"# {c}" for c in comments)
    out.extend(print_formula(f) for f in formulas)
    return "\n".join(out) + "\n"


def write_atomically(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


__all__ = [
    "LukSyntaxError", "ParseError", "SignatureError", "tokenize",
    "parse_term", "parse_formula", "print_term", "print_formula",
    "FormulaFile", "parse_formula_file", "read_formula_file",
    "format_formula_file", "write_atomically",
    "ZERO", "ONE", "HALF", "MINUS_ONE",
]
