"""Program terms of the user-defined language, possibly containing holes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import ArityMismatchError, SortMismatchError, UnresolvedNameError
from .problem import Grammar, SynthesisProblem
from .sexpr import SExpr, SList, Symbol, print_sexpr


@dataclass(frozen=True)
class Node:
    op: str
    children: tuple["ProgramTerm", ...] = ()


@dataclass(frozen=True)
class Hole:
    nonterminal: str


ProgramTerm = Union[Node, Hole]


def is_complete(term: ProgramTerm) -> bool:
    if isinstance(term, Hole):
        return False
    return all(is_complete(c) for c in term.children)


def term_size(term: ProgramTerm) -> int:
    """Node count, holes excluded."""
    if isinstance(term, Hole):
        return 0
    return 1 + sum(term_size(c) for c in term.children)


def term_height(term: ProgramTerm) -> int:
    """Height of a complete term; a leaf has height 1."""
    if isinstance(term, Hole):
        return 0
    if not term.children:
        return 1
    return 1 + max(term_height(c) for c in term.children)


def count_holes(term: ProgramTerm) -> int:
    if isinstance(term, Hole):
        return 1
    return sum(count_holes(c) for c in term.children)


def term_to_sexpr(term: ProgramTerm) -> SExpr:
    """Nullary nodes print as bare symbols, e.g. ``$r``; holes as nonterminals."""
    if isinstance(term, Hole):
        return Symbol(term.nonterminal)
    if not term.children:
        return Symbol(term.op)
    return SList((Symbol(term.op),) + tuple(term_to_sexpr(c) for c in term.children))


def print_term(term: ProgramTerm) -> str:
    return print_sexpr(term_to_sexpr(term))


def term_from_sexpr(expr: SExpr, problem: SynthesisProblem,
                    expected_term_type: str | None = None) -> ProgramTerm:
    """Parse a term; symbols naming a term type become holes.

    Checks constructor arities and child term types against the problem's
    declarations.
    """
    term, tt = _parse(expr, problem)
    if expected_term_type is not None and tt is not None and tt != expected_term_type:
        raise SortMismatchError(
            f"term has type {tt}, expected {expected_term_type}",
            getattr(expr, "loc", None),
        )
    return term


def _parse(expr: SExpr, problem: SynthesisProblem) -> tuple[ProgramTerm, str | None]:
    loc = getattr(expr, "loc", None)
    if isinstance(expr, Symbol):
        if problem.has_constructor(expr.name):
            tt, ctor = problem.constructor(expr.name)
            if ctor.arity != 0:
                raise ArityMismatchError(
                    f"constructor {expr.name} takes {ctor.arity} children", loc)
            return Node(expr.name), tt.name
        if problem.has_term_type(expr.name):
            return Hole(expr.name), expr.name
        raise UnresolvedNameError(f"unknown constructor or term type {expr.name}", loc)
    if isinstance(expr, SList) and expr.items and isinstance(expr[0], Symbol):
        opname = expr[0].name
        if not problem.has_constructor(opname):
            raise UnresolvedNameError(f"unknown constructor {opname}", loc)
        tt, ctor = problem.constructor(opname)
        args = expr.items[1:]
        if len(args) != ctor.arity:
            raise ArityMismatchError(
                f"constructor {opname} takes {ctor.arity} children, got {len(args)}", loc)
        children = []
        for child_expr, child_tt in zip(args, ctor.children):
            child, actual_tt = _parse(child_expr, problem)
            if actual_tt is not None and actual_tt != child_tt:
                raise SortMismatchError(
                    f"child of {opname} has type {actual_tt}, expected {child_tt}",
                    getattr(child_expr, "loc", None),
                )
            children.append(child)
        return Node(opname, tuple(children)), tt.name
    raise UnresolvedNameError(f"cannot read {print_sexpr(expr)} as a term", loc)


def derives_from(term: ProgramTerm, grammar: Grammar, nonterminal: str,
                 problem: SynthesisProblem) -> bool:
    """Independent recognizer: does ``grammar`` derive ``term`` from ``nonterminal``?"""
    if isinstance(term, Hole):
        return term.nonterminal == nonterminal
    for prod in grammar.productions(nonterminal):
        if prod.operator != term.op or len(prod.children) != len(term.children):
            continue
        if all(derives_from(c, grammar, nt, problem)
               for c, nt in zip(term.children, prod.children)):
            return True
    return False
