"""Constrained Horn Clause model and desugaring of ``define-funs-rec`` semantics.

A semantic definition is a set of mutually recursive Bool-valued functions,
one per semantic relation, whose bodies pattern-match on term constructors.
Each match arm contributes one CHC per top-level alternative: an optional
``exists`` block of auxiliary variables followed by a conjunction whose
relation applications form the CHC body and whose remaining conjuncts form
the quantifier-free constraint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import (
    ArityMismatchError,
    CommandFormatError,
    DuplicateArmError,
    DuplicateDeclarationError,
    IllSortedError,
    Location,
    NonExhaustiveMatchError,
    SortMismatchError,
    UnknownConstructorError,
    UnresolvedNameError,
)
from .problem import SemanticRelation, TermTypeDecl
from .sexpr import (
    BitVecLit,
    BoolLit,
    Keyword,
    Numeral,
    SExpr,
    SList,
    StringLit,
    Symbol,
    print_sexpr,
)
from .sorts import BOOL, INT, STRING, BitVecSort, BoolSort, IntSort, Sort, StringSort, TermSort, parse_sort

# Supported quantifier-free operator families.
BOOL_OPS = frozenset({"and", "or", "not", "=>", "ite", "="})
INT_ARITH = frozenset({"+", "-", "*", "div", "mod"})
INT_CMP = frozenset({"<", "<=", ">", ">="})
BV_BINARY = frozenset({"bvadd", "bvsub", "bvmul", "bvand", "bvor", "bvxor",
                       "bvshl", "bvlshr", "bvashr"})
BV_UNARY = frozenset({"bvnot", "bvneg"})
BV_CMP = frozenset({"bvult", "bvule", "bvsgt", "bvslt"})
STR_OPS = frozenset({"str.++", "str.len", "str.at", "str.contains"})

ALL_OPS = BOOL_OPS | INT_ARITH | INT_CMP | BV_BINARY | BV_UNARY | BV_CMP | STR_OPS


@dataclass(frozen=True)
class RelationApp:
    """One relation application in a CHC body; every argument is a variable."""

    relation: str
    args: tuple[str, ...]
    term_var: str
    loc: Location | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Chc:
    """One Horn clause for ``constructor`` defining ``head_relation``.

    ``head_args`` instantiate the relation signature (they are exactly the
    declared parameter names); ``child_vars`` bind the matched constructor's
    children; ``auxiliaries`` come from the leading ``exists`` block.
    """

    head_relation: str
    head_args: tuple[str, ...]
    constructor: str
    child_vars: tuple[str, ...]
    body: tuple[RelationApp, ...]
    constraint: SExpr
    auxiliaries: tuple[tuple[str, Sort], ...]
    loc: Location | None = field(default=None, compare=False, repr=False)

    def constraint_conjuncts(self) -> list[SExpr]:
        c = self.constraint
        if isinstance(c, BoolLit) and c.value:
            return []
        if isinstance(c, SList) and c.items and c.items[0] == Symbol("and"):
            return list(c.items[1:])
        return [c]


def conjoin(conjuncts: list[SExpr]) -> SExpr:
    if not conjuncts:
        return BoolLit(True)
    if len(conjuncts) == 1:
        return conjuncts[0]
    return SList((Symbol("and"),) + tuple(conjuncts))


# ---------------------------------------------------------------------------
# Formula sort inference
# ---------------------------------------------------------------------------

def formula_sort(f: SExpr, env: Mapping[str, Sort]) -> Sort:
    """Infer the sort of a quantifier-free formula; reject ill-sorted terms."""
    if isinstance(f, Symbol):
        sort = env.get(f.name)
        if sort is None:
            raise IllSortedError(f"unbound variable {f.name}", f.loc)
        return sort
    if isinstance(f, Numeral):
        return INT
    if isinstance(f, BoolLit):
        return BOOL
    if isinstance(f, StringLit):
        return STRING
    if isinstance(f, BitVecLit):
        return BitVecSort(f.width)
    if isinstance(f, Keyword):
        raise IllSortedError(f"keyword {f.name} is not a term", f.loc)

    assert isinstance(f, SList)
    bv = _indexed_bv_literal(f)
    if bv is not None:
        return BitVecSort(bv[1])
    if not f.items or not isinstance(f.items[0], Symbol):
        raise IllSortedError(f"malformed application {print_sexpr(f)}", f.loc)
    op = f.items[0].name
    sorts = [formula_sort(a, env) for a in f.items[1:]]
    return op_result_sort(op, sorts, f.loc)


def op_result_sort(op: str, sorts: list[Sort], loc: Location | None = None) -> Sort:
    """Result sort of applying ``op`` to arguments of the given sorts."""
    args = sorts  # arity checks reference argument count

    if op == "ite":
        if len(args) != 3:
            raise IllSortedError("ite takes exactly 3 arguments", loc)
        if not isinstance(sorts[0], BoolSort):
            raise IllSortedError("ite condition must be Bool", loc)
        if sorts[1] != sorts[2]:
            raise IllSortedError(
                f"ite branches differ: {sorts[1]} vs {sorts[2]}", loc)
        return sorts[1]
    if op == "=":
        _need(len(args) >= 2, "= takes at least 2 arguments", loc)
        if any(s != sorts[0] for s in sorts):
            raise IllSortedError(f"= arguments differ in sort in {print_sexpr(f)}", loc)
        if isinstance(sorts[0], TermSort):
            raise IllSortedError("= is not defined on term sorts", loc)
        return BOOL
    if op in ("and", "or"):
        _all_of(sorts, BoolSort, op, loc)
        return BOOL
    if op == "not":
        _need(len(args) == 1, "not takes exactly 1 argument", loc)
        _all_of(sorts, BoolSort, op, loc)
        return BOOL
    if op == "=>":
        _need(len(args) >= 2, "=> takes at least 2 arguments", loc)
        _all_of(sorts, BoolSort, op, loc)
        return BOOL
    if op in INT_ARITH:
        if op in ("div", "mod"):
            _need(len(args) == 2, f"{op} takes exactly 2 arguments", loc)
        else:
            _need(len(args) >= 1, f"{op} needs arguments", loc)
        _all_of(sorts, IntSort, op, loc)
        return INT
    if op in INT_CMP:
        _need(len(args) == 2, f"{op} takes exactly 2 arguments", loc)
        _all_of(sorts, IntSort, op, loc)
        return BOOL
    if op in BV_BINARY or op in BV_CMP:
        _need(len(args) == 2, f"{op} takes exactly 2 arguments", loc)
        w = _same_bv_width(sorts, op, loc)
        return BOOL if op in BV_CMP else BitVecSort(w)
    if op in BV_UNARY:
        _need(len(args) == 1, f"{op} takes exactly 1 argument", loc)
        w = _same_bv_width(sorts, op, loc)
        return BitVecSort(w)
    if op == "str.++":
        _need(len(args) >= 2, "str.++ takes at least 2 arguments", loc)
        _all_of(sorts, StringSort, op, loc)
        return STRING
    if op == "str.len":
        _need(len(args) == 1, "str.len takes exactly 1 argument", loc)
        _all_of(sorts, StringSort, op, loc)
        return INT
    if op == "str.at":
        _need(len(args) == 2, "str.at takes exactly 2 arguments", loc)
        if not isinstance(sorts[0], StringSort) or not isinstance(sorts[1], IntSort):
            raise IllSortedError("str.at takes (String, Int)", loc)
        return STRING
    if op == "str.contains":
        _need(len(args) == 2, "str.contains takes exactly 2 arguments", loc)
        _all_of(sorts, StringSort, op, loc)
        return BOOL
    raise IllSortedError(f"unsupported operator {op}", loc)


def _need(cond: bool, msg: str, loc: Location | None):
    if not cond:
        raise IllSortedError(msg, loc)


def _all_of(sorts, cls, op: str, loc: Location | None):
    for s in sorts:
        if not isinstance(s, cls):
            raise IllSortedError(f"{op} argument has sort {s}", loc)


def _same_bv_width(sorts, op: str, loc: Location | None) -> int:
    widths = set()
    for s in sorts:
        if not isinstance(s, BitVecSort):
            raise IllSortedError(f"{op} argument has sort {s}", loc)
        widths.add(s.width)
    if len(widths) != 1:
        raise IllSortedError(f"{op} arguments have mixed widths {sorted(widths)}", loc)
    return widths.pop()


def _indexed_bv_literal(f: SList) -> tuple[int, int] | None:
    """Recognize ``(_ bvN w)``; returns (value, width)."""
    if (len(f) == 3 and f[0] == Symbol("_") and isinstance(f[1], Symbol)
            and f[1].name.startswith("bv") and f[1].name[2:].isdigit()
            and isinstance(f[2], Numeral)):
        value = int(f[1].name[2:])
        width = f[2].value
        if width > 0 and 0 <= value < (1 << width):
            return value, width
    return None


def formula_free_vars(f: SExpr) -> list[str]:
    """Free variables in source order (operators and literals excluded)."""
    out: list[str] = []
    seen: set[str] = set()

    def go(e: SExpr):
        if isinstance(e, Symbol):
            if e.name not in seen:
                seen.add(e.name)
                out.append(e.name)
            return
        if isinstance(e, SList):
            if _indexed_bv_literal(e) is not None:
                return
            if e.items and isinstance(e.items[0], Symbol):
                for a in e.items[1:]:
                    go(a)
            else:
                for a in e.items:
                    go(a)

    go(f)
    return out


# ---------------------------------------------------------------------------
# Desugaring match bodies into CHCs
# ---------------------------------------------------------------------------

def desugar_match(
    relation: SemanticRelation,
    match_expr: SExpr,
    term_types: Mapping[str, TermTypeDecl],
    relations: Mapping[str, SemanticRelation],
) -> list[Chc]:
    """Desugar one relation's ``(match t (...))`` body into CHCs, arm order kept."""
    loc = getattr(match_expr, "loc", None)
    if not (isinstance(match_expr, SList) and len(match_expr) == 3
            and match_expr[0] == Symbol("match")):
        raise CommandFormatError(
            f"semantic body of {relation.name} must be (match <term> (<arms>))", loc)
    scrutinee = match_expr[1]
    term_param_name = relation.params[relation.term_index][0]
    if scrutinee != Symbol(term_param_name):
        raise CommandFormatError(
            f"match scrutinee must be the term parameter {term_param_name}",
            getattr(scrutinee, "loc", loc))
    arms = match_expr[2]
    if not isinstance(arms, SList):
        raise CommandFormatError("match arms must be a parenthesized list", loc)

    decl = term_types[relation.term_type]
    ctors = {c.operator: c for c in decl.constructors}
    chcs: list[Chc] = []
    seen_ops: set[str] = set()

    for arm in arms.items:
        if not (isinstance(arm, SList) and len(arm) >= 2):
            raise CommandFormatError(
                "match arm must be (<pattern> <alternative>...)", getattr(arm, "loc", loc))
        op, child_vars = _parse_pattern(arm[0])
        if op not in ctors:
            raise UnknownConstructorError(
                f"{op} is not a constructor of {decl.name}", getattr(arm[0], "loc", loc))
        if op in seen_ops:
            raise DuplicateArmError(f"duplicate match arm for {op}", getattr(arm[0], "loc", loc))
        seen_ops.add(op)
        ctor = ctors[op]
        if len(child_vars) != ctor.arity:
            raise ArityMismatchError(
                f"pattern for {op} binds {len(child_vars)} variables, arity is {ctor.arity}",
                getattr(arm[0], "loc", loc))
        if len(set(child_vars)) != len(child_vars):
            raise DuplicateDeclarationError(
                f"pattern for {op} repeats a variable", getattr(arm[0], "loc", loc))
        for v in child_vars:
            if v in (p for p, _ in relation.params):
                raise DuplicateDeclarationError(
                    f"pattern variable {v} shadows a relation parameter",
                    getattr(arm[0], "loc", loc))
        for alternative in arm.items[1:]:
            chcs.append(_desugar_alternative(
                relation, ctor, child_vars, alternative, relations, term_types))

    missing = tuple(c.operator for c in decl.constructors if c.operator not in seen_ops)
    if missing:
        raise NonExhaustiveMatchError(
            f"match on {decl.name} misses constructors: {', '.join(missing)}",
            missing, loc)
    return chcs


def _parse_pattern(pat: SExpr) -> tuple[str, tuple[str, ...]]:
    if isinstance(pat, Symbol):
        return pat.name, ()
    if (isinstance(pat, SList) and pat.items
            and all(isinstance(x, Symbol) for x in pat.items)):
        return pat[0].name, tuple(x.name for x in pat.items[1:])
    raise CommandFormatError(
        f"malformed match pattern {print_sexpr(pat)}", getattr(pat, "loc", None))


def _desugar_alternative(
    relation: SemanticRelation,
    ctor,
    child_vars: tuple[str, ...],
    alt: SExpr,
    relations: Mapping[str, SemanticRelation],
    term_types: Mapping[str, TermTypeDecl],
) -> Chc:
    loc = getattr(alt, "loc", None)
    term_type_names = frozenset(term_types)

    auxiliaries: list[tuple[str, Sort]] = []
    body_expr = alt
    if isinstance(alt, SList) and alt.items and alt.items[0] == Symbol("exists"):
        if len(alt) != 3 or not isinstance(alt[1], SList):
            raise CommandFormatError("exists block must be (exists ((v Sort)...) <body>)", loc)
        for binder in alt[1].items:
            if not (isinstance(binder, SList) and len(binder) == 2
                    and isinstance(binder[0], Symbol)):
                raise CommandFormatError(
                    f"malformed exists binder {print_sexpr(binder)}", loc)
            auxiliaries.append((binder[0].name, parse_sort(binder[1], term_type_names)))
        body_expr = alt[2]

    conjuncts = (list(body_expr.items[1:])
                 if isinstance(body_expr, SList) and body_expr.items
                 and body_expr.items[0] == Symbol("and")
                 else [body_expr])

    head_args = tuple(p for p, _ in relation.params)
    term_var = relation.params[relation.term_index][0]
    var_sorts: dict[str, Sort] = dict(relation.params)
    for v, tt in zip(child_vars, ctor.children):
        var_sorts[v] = TermSort(tt)
    for v, s in auxiliaries:
        if v in var_sorts:
            raise DuplicateDeclarationError(f"exists variable {v} shadows another variable", loc)
        var_sorts[v] = s
    term_vars = set(child_vars) | {term_var}

    body: list[RelationApp] = []
    constraint_conjuncts: list[SExpr] = []
    fresh_equalities: list[SExpr] = []
    fresh_count = 0

    for conj in conjuncts:
        _reject_nested_exists(conj)
        if (isinstance(conj, SList) and conj.items
                and isinstance(conj.items[0], Symbol)
                and conj.items[0].name in relations):
            callee = relations[conj.items[0].name]
            args = conj.items[1:]
            if len(args) != len(callee.params):
                raise ArityMismatchError(
                    f"{callee.name} takes {len(callee.params)} arguments, got {len(args)}",
                    getattr(conj, "loc", loc))
            arg_names: list[str] = []
            app_term_var = None
            for i, arg in enumerate(args):
                want_sort = callee.params[i][1]
                if i == callee.term_index:
                    if not (isinstance(arg, Symbol) and arg.name in term_vars):
                        raise UnresolvedNameError(
                            f"term argument of {callee.name} must be the matched term "
                            f"or a bound child variable, got {print_sexpr(arg)}",
                            getattr(arg, "loc", loc))
                    have = var_sorts[arg.name]
                    if have != want_sort:
                        raise SortMismatchError(
                            f"{callee.name} expects a {want_sort} term, got {have}",
                            getattr(arg, "loc", loc))
                    app_term_var = arg.name
                    arg_names.append(arg.name)
                    continue
                if isinstance(arg, Symbol) and arg.name in var_sorts:
                    if var_sorts[arg.name] != want_sort:
                        raise SortMismatchError(
                            f"argument {arg.name} of {callee.name} has sort "
                            f"{var_sorts[arg.name]}, expected {want_sort}",
                            getattr(arg, "loc", loc))
                    arg_names.append(arg.name)
                elif isinstance(arg, Symbol):
                    raise UnresolvedNameError(
                        f"variable {arg.name} is not a parameter, child variable or "
                        f"exists-bound auxiliary", getattr(arg, "loc", loc))
                else:
                    # non-variable argument: bind a fresh auxiliary to it
                    fresh = f"%{callee.params[i][0]}{fresh_count}"
                    fresh_count += 1
                    auxiliaries.append((fresh, want_sort))
                    var_sorts[fresh] = want_sort
                    fresh_equalities.append(
                        SList((Symbol("="), Symbol(fresh), arg)))
                    arg_names.append(fresh)
            body.append(RelationApp(callee.name, tuple(arg_names), app_term_var,
                                    getattr(conj, "loc", None)))
        else:
            constraint_conjuncts.append(conj)

    constraint = conjoin(constraint_conjuncts + fresh_equalities)
    data_env = {v: s for v, s in var_sorts.items() if not isinstance(s, TermSort)}
    sort = formula_sort(constraint, data_env)
    if not isinstance(sort, BoolSort):
        raise IllSortedError(
            f"CHC constraint for {ctor.operator} has sort {sort}, expected Bool", loc)

    return Chc(
        head_relation=relation.name,
        head_args=head_args,
        constructor=ctor.operator,
        child_vars=tuple(child_vars),
        body=tuple(body),
        constraint=constraint,
        auxiliaries=tuple(auxiliaries),
        loc=loc,
    )


def _reject_nested_exists(conj: SExpr) -> None:
    if isinstance(conj, SList):
        if conj.items and conj.items[0] == Symbol("exists"):
            raise CommandFormatError(
                "exists is only allowed as the leading block of an alternative",
                conj.loc)
        for item in conj.items:
            _reject_nested_exists(item)
