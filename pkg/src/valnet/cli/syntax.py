"""The textual network format: tokenizer, parser and printer.

Grammar (one statement after another, whitespace-insensitive)::

    calculus <name>
    var <Name> { v1 v2 ... }
    rel <name> ( V1 V2 ... )
    val <target> <calculus> dense [ x1 x2 ... ]
    val <target> <calculus> { m : { (v1 v2) ... } ; ... ; m : * }
    observe <Var> <value>
    retract <Var>
    propagate [normalized|unnormalized]
    query <Var>
    reset

``#`` starts a comment.  Dense tables are row-major over the target's
declared variable order; numbers may be written as fractions (``1/6``) and
Boolean entries as ``true``/``false``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Union

from ..calculi import MASS, CalculusRegistry, registry as default_registry


class ParseError(ValueError):
    """A diagnostic with a 1-based line/column; ``code`` classifies it."""

    def __init__(self, message: str, line: int = 0, column: int = 0, code: str = "syntax"):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column
        self.code = code

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.code}: {self.message}"


@dataclass(frozen=True)
class CalculusStmt:
    name: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class VarStmt:
    name: str
    frame: tuple[str, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class RelStmt:
    name: str
    variables: tuple[str, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class DenseValStmt:
    target: str
    calculus: str
    values: tuple[float | bool, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class MassValStmt:
    """``entries`` pairs a mass with a tuple of configurations (label tuples), or ``None`` for ``*``."""

    target: str
    calculus: str
    entries: tuple[tuple[float, tuple[tuple[str, ...], ...] | None], ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ObserveStmt:
    variable: str
    value: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class RetractStmt:
    variable: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class PropagateStmt:
    mode: str | None = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class QueryStmt:
    variable: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ResetStmt:
    line: int = field(default=0, compare=False)


Statement = Union[
    CalculusStmt, VarStmt, RelStmt, DenseValStmt, MassValStmt,
    ObserveStmt, RetractStmt, PropagateStmt, QueryStmt, ResetStmt,
]


@dataclass(frozen=True)
class NetworkDocument:
    statements: tuple[Statement, ...] = ()

    def __iter__(self) -> Iterator[Statement]:
        return iter(self.statements)

    def __len__(self) -> int:
        return len(self.statements)


# --- tokenizer ----------------------------------------------------------------------

_TOKEN = re.compile(r"(?P<comment>#[^\n]*)|(?P<ws>\s+)|(?P<punct>[{}()\[\];:*])|(?P<word>[^\s{}()\[\];:*#]+)")


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    column: int
    punct: bool


def tokenize(text: str) -> list[Token]:
    out = []
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        kind = m.lastgroup
        if kind in ("word", "punct"):
            out.append(Token(m.group(), line, m.start() - line_start + 1, kind == "punct"))
        chunk = m.group()
        n = chunk.count("\n")
        if n:
            line += n
            line_start = m.start() + chunk.rfind("\n") + 1
    return out


# --- parser -------------------------------------------------------------------------

KEYWORDS = ("calculus", "var", "rel", "val", "observe", "retract", "propagate", "query", "reset")


class _Parser:
    def __init__(self, text: str, registry: CalculusRegistry, variables, relations):
        self.tokens = tokenize(text)
        self.pos = 0
        self.registry = registry
        self.variables: dict[str, tuple[str, ...]] = dict(variables)
        self.relations: dict[str, tuple[str, ...]] = dict(relations)
        end_line = text.count("\n") + 1
        self._eof = Token("", end_line, len(text) - text.rfind("\n"), True)

    # token helpers

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self, what: str) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError(f"unexpected end of input, expected {what}", self._eof.line, self._eof.column, "eof")
        self.pos += 1
        return tok

    def expect(self, punct: str) -> Token:
        tok = self.next(repr(punct))
        if tok.text != punct:
            raise ParseError(f"expected {punct!r}, found {tok.text!r}", tok.line, tok.column)
        return tok

    def word(self, what: str) -> Token:
        tok = self.next(what)
        if tok.punct:
            raise ParseError(f"expected {what}, found {tok.text!r}", tok.line, tok.column)
        return tok

    def at(self, punct: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.text == punct

    # statements

    def parse(self) -> NetworkDocument:
        out = []
        while self.peek() is not None:
            out.append(self.statement())
        return NetworkDocument(tuple(out))

    def statement(self) -> Statement:
        kw = self.word("a statement keyword")
        handler = getattr(self, f"_{kw.text}", None) if kw.text in KEYWORDS else None
        if handler is None:
            raise ParseError(f"unknown statement {kw.text!r}", kw.line, kw.column)
        return handler(kw)

    def _calculus(self, kw: Token) -> CalculusStmt:
        name = self.word("a calculus name")
        self._calculus_kind(name)
        return CalculusStmt(name.text, kw.line)

    def _var(self, kw: Token) -> VarStmt:
        name = self.word("a variable name")
        self._fresh(name)
        self.expect("{")
        frame = []
        while not self.at("}"):
            tok = self.word("a frame value or '}'")
            if tok.text in frame:
                raise ParseError(f"frame value {tok.text!r} repeated", tok.line, tok.column, "duplicate-name")
            frame.append(tok.text)
        self.expect("}")
        if not frame:
            raise ParseError(f"variable {name.text!r} has an empty frame", name.line, name.column)
        self.variables[name.text] = tuple(frame)
        return VarStmt(name.text, tuple(frame), kw.line)

    def _rel(self, kw: Token) -> RelStmt:
        name = self.word("a relation name")
        self._fresh(name)
        self.expect("(")
        names = []
        while not self.at(")"):
            tok = self.word("a variable name or ')'")
            self._variable(tok)
            if tok.text in names:
                raise ParseError(f"variable {tok.text!r} repeated in relation", tok.line, tok.column, "arity")
            names.append(tok.text)
        self.expect(")")
        if not names:
            raise ParseError(f"relation {name.text!r} links no variables", name.line, name.column, "arity")
        self.relations[name.text] = tuple(names)
        return RelStmt(name.text, tuple(names), kw.line)

    def _val(self, kw: Token) -> Statement:
        target = self.word("a variable or relation name")
        order = self._target(target)
        calc = self.word("a calculus name")
        kind = self._calculus_kind(calc)
        tok = self.peek()
        if tok is not None and tok.text == "dense":
            self.pos += 1
            if kind == MASS:
                raise ParseError(f"calculus {calc.text!r} takes set-valued masses, not a dense table",
                                 tok.line, tok.column, "arity")
            return self._dense(kw, target, order, calc)
        if tok is not None and tok.text == "{":
            if kind != MASS:
                raise ParseError(f"calculus {calc.text!r} takes a dense table", tok.line, tok.column, "arity")
            return self._masses(kw, target, order, calc)
        t = tok or self._eof
        raise ParseError(f"expected 'dense' or '{{', found {t.text!r}", t.line, t.column,
                         "eof" if tok is None else "syntax")

    def _dense(self, kw, target, order, calc) -> DenseValStmt:
        open_ = self.expect("[")
        values = []
        boolean = calc.text == "boolean"
        while not self.at("]"):
            tok = self.word("a value or ']'")
            values.append(_boolean(tok) if boolean else _number(tok))
        self.expect("]")
        expected = math.prod(len(self.variables[v]) for v in order)
        if len(values) != expected:
            raise ParseError(
                f"{target.text!r} needs {expected} values, got {len(values)}", open_.line, open_.column, "arity"
            )
        return DenseValStmt(target.text, calc.text, tuple(values), kw.line)

    def _masses(self, kw, target, order, calc) -> MassValStmt:
        self.expect("{")
        entries = []
        total = 0.0
        while not self.at("}"):
            mtok = self.word("a mass")
            m = _number(mtok)
            if not 0.0 <= m <= 1.0:
                raise ParseError(f"mass {m} outside [0, 1]", mtok.line, mtok.column, "mass-range")
            total += m
            if total > 1.0 + 1e-9:
                raise ParseError(f"masses sum to {total:.6g} > 1", mtok.line, mtok.column, "mass-range")
            self.expect(":")
            if self.at("*"):
                self.pos += 1
                entries.append((m, None))
            else:
                entries.append((m, self._config_set(order)))
            if self.at(";"):
                self.pos += 1
        self.expect("}")
        return MassValStmt(target.text, calc.text, tuple(entries), kw.line)

    def _config_set(self, order) -> tuple[tuple[str, ...], ...]:
        open_ = self.expect("{")
        configs = []
        while not self.at("}"):
            if self.at("("):
                start = self.expect("(")
                labels = []
                while not self.at(")"):
                    labels.append(self.word("a frame value or ')'"))
                self.expect(")")
            else:
                start = self.word("a configuration")
                labels = [start]
            if len(labels) != len(order):
                raise ParseError(
                    f"configuration has {len(labels)} values, {len(order)} expected", start.line, start.column, "arity"
                )
            for var, tok in zip(order, labels):
                if tok.text not in self.variables[var]:
                    raise ParseError(f"{tok.text!r} is not in the frame of {var!r}", tok.line, tok.column,
                                     "unknown-name")
            configs.append(tuple(t.text for t in labels))
        self.expect("}")
        if not configs:
            raise ParseError("focal sets must be non-empty", open_.line, open_.column, "arity")
        return tuple(dict.fromkeys(configs))

    def _observe(self, kw: Token) -> ObserveStmt:
        var = self.word("a variable name")
        self._variable(var)
        value = self.word("a frame value")
        if value.text not in self.variables[var.text]:
            raise ParseError(f"{value.text!r} is not in the frame of {var.text!r}", value.line, value.column,
                             "unknown-name")
        return ObserveStmt(var.text, value.text, kw.line)

    def _retract(self, kw: Token) -> RetractStmt:
        var = self.word("a variable name")
        self._variable(var)
        return RetractStmt(var.text, kw.line)

    def _propagate(self, kw: Token) -> PropagateStmt:
        tok = self.peek()
        if tok is not None and tok.text in ("normalized", "unnormalized"):
            self.pos += 1
            return PropagateStmt(tok.text, kw.line)
        return PropagateStmt(None, kw.line)

    def _query(self, kw: Token) -> QueryStmt:
        var = self.word("a variable name")
        self._variable(var)
        return QueryStmt(var.text, kw.line)

    def _reset(self, kw: Token) -> ResetStmt:
        return ResetStmt(kw.line)

    # name checks

    def _fresh(self, tok: Token) -> None:
        if tok.text in KEYWORDS:
            raise ParseError(f"{tok.text!r} is a keyword", tok.line, tok.column)
        if tok.text in self.variables or tok.text in self.relations:
            raise ParseError(f"name {tok.text!r} is already declared", tok.line, tok.column, "duplicate-name")

    def _variable(self, tok: Token) -> None:
        if tok.text not in self.variables:
            raise ParseError(f"unknown variable {tok.text!r}", tok.line, tok.column, "unknown-name")

    def _target(self, tok: Token) -> tuple[str, ...]:
        if tok.text in self.relations:
            return self.relations[tok.text]
        if tok.text in self.variables:
            return (tok.text,)
        raise ParseError(f"unknown variable or relation {tok.text!r}", tok.line, tok.column, "unknown-name")

    def _calculus_kind(self, tok: Token) -> str:
        if tok.text not in self.registry:
            raise ParseError(f"unknown calculus {tok.text!r}", tok.line, tok.column, "unknown-name")
        return self.registry.get(tok.text).kind


def _number(tok: Token) -> float:
    try:
        return float(Fraction(tok.text)) if "/" in tok.text else float(tok.text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"expected a number, found {tok.text!r}", tok.line, tok.column) from None


def _boolean(tok: Token) -> bool:
    lowered = tok.text.lower()
    if lowered in ("true", "t", "1"):
        return True
    if lowered in ("false", "f", "0"):
        return False
    raise ParseError(f"expected true or false, found {tok.text!r}", tok.line, tok.column)


def parse(
    text: str,
    *,
    registry: CalculusRegistry | None = None,
    variables: dict[str, tuple[str, ...]] | None = None,
    relations: dict[str, tuple[str, ...]] | None = None,
) -> NetworkDocument:
    """Parse a document.  ``variables``/``relations`` pre-declare names (used by the REPL)."""
    return _Parser(text, registry or default_registry, variables or {}, relations or {}).parse()


# --- printer ------------------------------------------------------------------------


def _fmt_number(x: float | bool) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    return repr(float(x))


def format_statement(stmt: Statement) -> str:
    if isinstance(stmt, CalculusStmt):
        return f"calculus {stmt.name}"
    if isinstance(stmt, VarStmt):
        return f"var {stmt.name} {{ {' '.join(stmt.frame)} }}"
    if isinstance(stmt, RelStmt):
        return f"rel {stmt.name} ( {' '.join(stmt.variables)} )"
    if isinstance(stmt, DenseValStmt):
        return f"val {stmt.target} {stmt.calculus} dense [ {' '.join(_fmt_number(x) for x in stmt.values)} ]"
    if isinstance(stmt, MassValStmt):
        parts = []
        for m, configs in stmt.entries:
            body = "*" if configs is None else "{ " + " ".join("(" + " ".join(c) + ")" for c in configs) + " }"
            parts.append(f"{_fmt_number(m)} : {body}")
        return f"val {stmt.target} {stmt.calculus} {{ {' ; '.join(parts)} }}"
    if isinstance(stmt, ObserveStmt):
        return f"observe {stmt.variable} {stmt.value}"
    if isinstance(stmt, RetractStmt):
        return f"retract {stmt.variable}"
    if isinstance(stmt, PropagateStmt):
        return "propagate" + (f" {stmt.mode}" if stmt.mode else "")
    if isinstance(stmt, QueryStmt):
        return f"query {stmt.variable}"
    if isinstance(stmt, ResetStmt):
        return "reset"
    raise TypeError(f"not a statement: {stmt!r}")


def format_document(doc: NetworkDocument | Iterable[Statement]) -> str:
    return "".join(format_statement(s) + "\n" for s in doc)
