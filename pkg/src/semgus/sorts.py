"""Sorts for relation signatures, formulas and runtime values."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import SortMismatchError, UnresolvedNameError
from .sexpr import Numeral, SExpr, SList, Symbol, print_sexpr


@dataclass(frozen=True)
class IntSort:
    def __str__(self) -> str:
        return "Int"


@dataclass(frozen=True)
class BoolSort:
    def __str__(self) -> str:
        return "Bool"


@dataclass(frozen=True)
class StringSort:
    def __str__(self) -> str:
        return "String"


@dataclass(frozen=True)
class BitVecSort:
    width: int

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("BitVec width must be positive")

    def __str__(self) -> str:
        return f"(_ BitVec {self.width})"


@dataclass(frozen=True)
class TermSort:
    term_type: str

    def __str__(self) -> str:
        return self.term_type


Sort = Union[IntSort, BoolSort, StringSort, BitVecSort, TermSort]

INT = IntSort()
BOOL = BoolSort()
STRING = StringSort()


def parse_sort(expr: SExpr, term_types: set[str] | frozenset[str] = frozenset()) -> Sort:
    """Interpret a sort s-expression; term-type names become :class:`TermSort`."""
    if isinstance(expr, Symbol):
        if expr.name == "Int":
            return INT
        if expr.name == "Bool":
            return BOOL
        if expr.name == "String":
            return STRING
        if expr.name in term_types:
            return TermSort(expr.name)
        raise UnresolvedNameError(f"unknown sort {expr.name}", expr.loc)
    if (
        isinstance(expr, SList)
        and len(expr) == 3
        and expr[0] == Symbol("_")
        and expr[1] == Symbol("BitVec")
        and isinstance(expr[2], Numeral)
        and expr[2].value > 0
    ):
        return BitVecSort(expr[2].value)
    raise SortMismatchError(f"malformed sort {print_sexpr(expr)}", getattr(expr, "loc", None))


def sort_to_sexpr(sort: Sort) -> SExpr:
    if isinstance(sort, IntSort):
        return Symbol("Int")
    if isinstance(sort, BoolSort):
        return Symbol("Bool")
    if isinstance(sort, StringSort):
        return Symbol("String")
    if isinstance(sort, BitVecSort):
        return SList((Symbol("_"), Symbol("BitVec"), Numeral(sort.width)))
    if isinstance(sort, TermSort):
        return Symbol(sort.term_type)
    raise TypeError(f"not a sort: {sort!r}")
