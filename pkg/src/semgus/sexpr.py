"""SMT-LIB style s-expression reader and printer.

The lexical conventions follow SMT-LIB 2.6: ``;`` comments, decimal
numerals, ``#x``/``#b`` bitvector literals, double-quoted strings with
``""`` escapes, ``:keyword`` atoms and ``|quoted symbols|``.  ``true`` and
``false`` read as boolean literals.  Printing is canonical (single spaces,
no line breaks) and ``read(print(e)) == [e]`` for every well-formed value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

from .errors import (
    BadTokenError,
    Location,
    UnbalancedParensError,
    UnterminatedStringError,
)

__all__ = [
    "SExpr",
    "Symbol",
    "Numeral",
    "StringLit",
    "BitVecLit",
    "BoolLit",
    "Keyword",
    "SList",
    "read_sexprs",
    "read_one",
    "print_sexpr",
]


@dataclass(frozen=True)
class Symbol:
    name: str
    loc: Location | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Numeral:
    value: int
    loc: Location | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class StringLit:
    value: str
    loc: Location | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BitVecLit:
    width: int
    value: int
    loc: Location | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("bitvector width must be positive")
        if not 0 <= self.value < (1 << self.width):
            raise ValueError(f"bitvector value {self.value} does not fit in {self.width} bits")


@dataclass(frozen=True)
class BoolLit:
    value: bool
    loc: Location | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Keyword:
    name: str
    loc: Location | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SList:
    items: tuple["SExpr", ...]
    loc: Location | None = field(default=None, compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, i):
        return self.items[i]


SExpr = Union[Symbol, Numeral, StringLit, BitVecLit, BoolLit, Keyword, SList]

# Characters legal in an unquoted SMT-LIB simple symbol.
_SYMBOL_EXTRA = set("~!@$%^&*_-+=<>.?/")
_WHITESPACE = set(" \t\r\n")
_DELIMS = set("()|\";")


def _is_symbol_char(c: str) -> bool:
    return c.isalnum() or c in _SYMBOL_EXTRA


def _is_numeral_token(tok: str) -> bool:
    body = tok[1:] if tok.startswith("-") else tok
    return bool(body) and body.isdigit() and body.isascii()


class _Reader:
    def __init__(self, text: str, filename: str | None = None):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1
        self.filename = filename

    def loc(self) -> Location:
        return Location(self.line, self.col, self.filename)

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def _peek(self) -> str | None:
        return self.text[self.pos] if self.pos < len(self.text) else None

    def _skip_trivia(self) -> None:
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c in _WHITESPACE:
                self._advance()
            elif c == ";":
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self._advance()
            else:
                return

    def read_all(self) -> list[SExpr]:
        out = []
        while True:
            self._skip_trivia()
            if self.pos >= len(self.text):
                return out
            out.append(self._read_expr())

    def _read_expr(self) -> SExpr:
        loc = self.loc()
        c = self._peek()
        if c == "(":
            self._advance()
            items = []
            while True:
                self._skip_trivia()
                nxt = self._peek()
                if nxt is None:
                    raise UnbalancedParensError("unclosed '('", loc)
                if nxt == ")":
                    self._advance()
                    return SList(tuple(items), loc)
                items.append(self._read_expr())
        if c == ")":
            raise UnbalancedParensError("unexpected ')'", loc)
        return self._read_atom()

    def _read_atom(self) -> SExpr:
        loc = self.loc()
        c = self._peek()
        if c == '"':
            return self._read_string(loc)
        if c == "|":
            return self._read_quoted_symbol(loc)
        if c == ":":
            self._advance()
            name = self._take_symbol_chars()
            if not name:
                raise BadTokenError("':' must be followed by a keyword name", loc)
            return Keyword(name, loc)
        if c == "#":
            return self._read_hash_literal(loc)
        tok = self._take_symbol_chars()
        if not tok:
            raise BadTokenError(f"unexpected character {c!r}", loc)
        if _is_numeral_token(tok):
            return Numeral(int(tok), loc)
        if tok == "true":
            return BoolLit(True, loc)
        if tok == "false":
            return BoolLit(False, loc)
        return Symbol(tok, loc)

    def _take_symbol_chars(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and _is_symbol_char(self.text[self.pos]):
            self._advance()
        return self.text[start:self.pos]

    def _read_string(self, loc: Location) -> StringLit:
        self._advance()  # opening quote
        chars = []
        while True:
            c = self._peek()
            if c is None:
                raise UnterminatedStringError("unterminated string literal", loc)
            if c == '"':
                self._advance()
                # SMT-LIB escape: doubled quote continues the string
                if self._peek() == '"':
                    chars.append('"')
                    self._advance()
                    continue
                return StringLit("".join(chars), loc)
            chars.append(c)
            self._advance()

    def _read_quoted_symbol(self, loc: Location) -> Symbol:
        self._advance()  # opening bar
        chars = []
        while True:
            c = self._peek()
            if c is None:
                raise UnterminatedStringError("unterminated |...| symbol", loc)
            if c == "|":
                self._advance()
                name = "".join(chars)
                if not name:
                    raise BadTokenError("empty |...| symbol", loc)
                return Symbol(name, loc)
            if c == "\\":
                raise BadTokenError("'\\' is not allowed inside |...| symbols", loc)
            chars.append(c)
            self._advance()

    def _read_hash_literal(self, loc: Location) -> BitVecLit:
        self._advance()  # '#'
        kind = self._peek()
        if kind not in ("x", "b"):
            raise BadTokenError("'#' must start a #x or #b literal", loc)
        self._advance()
        digits = self._take_symbol_chars()
        if kind == "x":
            if not digits or any(d not in "0123456789abcdefABCDEF" for d in digits):
                raise BadTokenError(f"bad hexadecimal literal #x{digits}", loc)
            return BitVecLit(4 * len(digits), int(digits, 16), loc)
        if not digits or any(d not in "01" for d in digits):
            raise BadTokenError(f"bad binary literal #b{digits}", loc)
        return BitVecLit(len(digits), int(digits, 2), loc)


def read_sexprs(text: str, filename: str | None = None) -> list[SExpr]:
    """Read every top-level expression in ``text``, in order."""
    return _Reader(text, filename).read_all()


def read_one(text: str, filename: str | None = None) -> SExpr:
    """Read exactly one expression; error when there are zero or several."""
    exprs = read_sexprs(text, filename)
    if len(exprs) != 1:
        raise BadTokenError(
            f"expected exactly one expression, found {len(exprs)}",
            Location(1, 1, filename),
        )
    return exprs[0]


def _symbol_needs_quoting(name: str) -> bool:
    if not name:
        return True
    if any(not _is_symbol_char(c) for c in name):
        return True
    # would be re-read as a different atom kind
    return _is_numeral_token(name) or name in ("true", "false")


def print_sexpr(expr: SExpr) -> str:
    """Render ``expr`` canonically; re-reading yields an equal value."""
    if isinstance(expr, SList):
        return "(" + " ".join(print_sexpr(x) for x in expr.items) + ")"
    if isinstance(expr, Symbol):
        if _symbol_needs_quoting(expr.name):
            return "|" + expr.name + "|"
        return expr.name
    if isinstance(expr, Numeral):
        return str(expr.value)
    if isinstance(expr, BoolLit):
        return "true" if expr.value else "false"
    if isinstance(expr, StringLit):
        return '"' + expr.value.replace('"', '""') + '"'
    if isinstance(expr, BitVecLit):
        if expr.width % 4 == 0:
            return "#x" + format(expr.value, "0{}x".format(expr.width // 4))
        return "#b" + format(expr.value, "0{}b".format(expr.width))
    if isinstance(expr, Keyword):
        return ":" + expr.name
    raise TypeError(f"not an SExpr: {expr!r}")


def walk(expr: SExpr) -> Iterator[SExpr]:
    """Pre-order traversal of an expression tree."""
    yield expr
    if isinstance(expr, SList):
        for item in expr.items:
            yield from walk(item)
