"""Interpret a sequence of commands into a validated :class:`SynthesisProblem`.

Recognized commands: ``declare-term-types``, ``define-funs-rec``,
``synth-fun``, ``constraint``, ``check-synth``, plus ``set-info`` and other
``set-*`` commands, which are preserved as metadata.
"""

from __future__ import annotations

from .chc import Chc, desugar_match, op_result_sort, _indexed_bv_literal
from .errors import (
    AbsentSynthTargetError,
    ArityMismatchError,
    CommandFormatError,
    DuplicateDeclarationError,
    EmptySemanticsError,
    IllSortedError,
    MissingCheckSynthError,
    SortMismatchError,
    UnknownCommandError,
    UnresolvedNameError,
)
from .problem import (
    Constructor,
    Grammar,
    Production,
    SemanticRelation,
    SynthesisProblem,
    SynthTarget,
    TermTypeDecl,
)
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
    read_sexprs,
)
from .sorts import (
    BOOL,
    INT,
    STRING,
    BitVecSort,
    BoolSort,
    Sort,
    TermSort,
    parse_sort,
    sort_to_sexpr,
)

__all__ = ["analyze", "analyze_text", "load_problem", "print_semgus", "constraint_sort"]


def load_problem(path: str) -> SynthesisProblem:
    with open(path, encoding="utf-8") as fh:
        return analyze_text(fh.read(), filename=path)


def analyze_text(text: str, filename: str | None = None) -> SynthesisProblem:
    return analyze(read_sexprs(text, filename))


def analyze(commands: list[SExpr]) -> SynthesisProblem:
    """Interpret commands in order and return a fully cross-referenced problem."""
    state = _Analyzer()
    for command in commands:
        state.command(command)
    return state.finish()


class _Analyzer:
    def __init__(self):
        self.term_types: list[TermTypeDecl] = []
        self.tt_by_name: dict[str, TermTypeDecl] = {}
        self.ctor_owner: dict[str, str] = {}
        self.relations: list[SemanticRelation] = []
        self.rel_by_name: dict[str, SemanticRelation] = {}
        self.chcs: list[Chc] = []
        self.target: SynthTarget | None = None
        self.constraints: list[SExpr] = []
        self.metadata: dict[str, SExpr] = {}
        self.saw_check_synth = False

    # -- command dispatch ---------------------------------------------------

    def command(self, expr: SExpr) -> None:
        loc = getattr(expr, "loc", None)
        if not (isinstance(expr, SList) and expr.items
                and isinstance(expr.items[0], Symbol)):
            raise UnknownCommandError(
                f"top-level form is not a command: {print_sexpr(expr)}", loc)
        head = expr.items[0].name
        handler = {
            "declare-term-types": self._declare_term_types,
            "define-funs-rec": self._define_funs_rec,
            "synth-fun": self._synth_fun,
            "constraint": self._constraint,
            "check-synth": self._check_synth,
        }.get(head)
        if handler is not None:
            handler(expr)
        elif head == "set-info":
            self._set_info(expr)
        elif head.startswith("set-"):
            self._set_other(expr)
        else:
            raise UnknownCommandError(f"unknown command {head}", loc)

    def finish(self) -> SynthesisProblem:
        if self.target is None:
            raise AbsentSynthTargetError("no synth-fun command in input")
        if not self.saw_check_synth:
            raise MissingCheckSynthError("missing (check-synth) command")
        for tt in self.term_types:
            if not tt.constructors:
                raise EmptySemanticsError(f"term type {tt.name} has no constructors")
            for ctor in tt.constructors:
                if not any(chc.constructor == ctor.operator for chc in self.chcs):
                    raise EmptySemanticsError(
                        f"constructor {ctor.operator} of {tt.name} has no semantics")
        return SynthesisProblem(
            term_types=tuple(self.term_types),
            relations=tuple(self.relations),
            chcs=tuple(self.chcs),
            target=self.target,
            constraints=tuple(self.constraints),
            metadata=self.metadata,
            check_synth=self.saw_check_synth,
        )

    # -- declare-term-types ---------------------------------------------------

    def _declare_term_types(self, expr: SList) -> None:
        loc = expr.loc
        if len(expr) != 3 or not isinstance(expr[1], SList) or not isinstance(expr[2], SList):
            raise CommandFormatError(
                "declare-term-types takes a list of (Name arity) and a list of "
                "production groups", loc)
        heads = expr[1].items
        groups = expr[2].items
        if len(heads) != len(groups):
            raise ArityMismatchError(
                f"{len(heads)} term types declared but {len(groups)} production "
                f"groups given", loc)

        names: list[str] = []
        for head in heads:
            if not (isinstance(head, SList) and len(head) == 2
                    and isinstance(head[0], Symbol) and isinstance(head[1], Numeral)):
                raise CommandFormatError(
                    f"term type declaration must be (Name arity): {print_sexpr(head)}",
                    getattr(head, "loc", loc))
            name, arity = head[0].name, head[1].value
            if arity != 0:
                raise ArityMismatchError(
                    f"term type {name} has arity {arity}; only arity 0 is supported",
                    head.loc)
            if name in self.tt_by_name or name in names:
                raise DuplicateDeclarationError(f"term type {name} already declared", head.loc)
            names.append(name)

        known = set(self.tt_by_name) | set(names)
        for name, group in zip(names, groups):
            if not isinstance(group, SList):
                raise CommandFormatError(
                    f"production group for {name} must be a list", getattr(group, "loc", loc))
            ctors: list[Constructor] = []
            for prod in group.items:
                op, children = self._parse_constructor(prod, known)
                if op in self.ctor_owner:
                    raise DuplicateDeclarationError(
                        f"constructor {op} already declared for term type "
                        f"{self.ctor_owner[op]}", getattr(prod, "loc", loc))
                self.ctor_owner[op] = name
                ctors.append(Constructor(op, children))
            decl = TermTypeDecl(name, 0, tuple(ctors))
            self.term_types.append(decl)
            self.tt_by_name[name] = decl

    def _parse_constructor(self, prod: SExpr, known: set[str]) -> tuple[str, tuple[str, ...]]:
        if isinstance(prod, Symbol):
            return prod.name, ()
        if (isinstance(prod, SList) and prod.items
                and all(isinstance(x, Symbol) for x in prod.items)):
            children = []
            for child in prod.items[1:]:
                if child.name not in known:
                    raise UnresolvedNameError(
                        f"unknown term type {child.name} in constructor "
                        f"{prod.items[0].name}", child.loc)
                children.append(child.name)
            return prod.items[0].name, tuple(children)
        raise CommandFormatError(
            f"malformed constructor declaration {print_sexpr(prod)}",
            getattr(prod, "loc", None))

    # -- define-funs-rec ---------------------------------------------------------

    def _define_funs_rec(self, expr: SList) -> None:
        loc = expr.loc
        if len(expr) != 3 or not isinstance(expr[1], SList) or not isinstance(expr[2], SList):
            raise CommandFormatError(
                "define-funs-rec takes a declaration list and a body list", loc)
        decls = expr[1].items
        bodies = expr[2].items
        if len(decls) != len(bodies):
            raise ArityMismatchError(
                f"{len(decls)} functions declared but {len(bodies)} bodies given", loc)

        new_relations: list[tuple[SemanticRelation, dict]] = []
        for decl in decls:
            rel, pending = self._parse_relation_decl(decl)
            if rel.name in self.rel_by_name:
                raise DuplicateDeclarationError(
                    f"semantic relation {rel.name} already declared", getattr(decl, "loc", loc))
            self.rel_by_name[rel.name] = rel
            self.relations.append(rel)
            new_relations.append((rel, pending))

        for (rel, pending), body in zip(new_relations, bodies):
            match_expr, annos = self._strip_annotations(body)
            annos = {**pending, **annos}
            rel2 = self._apply_modes(rel, annos, getattr(body, "loc", loc))
            if rel2 is not rel:
                self.rel_by_name[rel2.name] = rel2
                self.relations[self.relations.index(rel)] = rel2
                rel = rel2
            self.chcs.extend(
                desugar_match(rel, match_expr, self.tt_by_name, self.rel_by_name))

    def _parse_relation_decl(self, decl: SExpr) -> tuple[SemanticRelation, dict]:
        loc = getattr(decl, "loc", None)
        if not (isinstance(decl, SList) and len(decl) >= 3
                and isinstance(decl[0], Symbol) and isinstance(decl[1], SList)):
            raise CommandFormatError(
                f"malformed relation declaration {print_sexpr(decl)}", loc)
        name = decl[0].name
        params: list[tuple[str, Sort]] = []
        seen: set[str] = set()
        for binder in decl[1].items:
            if not (isinstance(binder, SList) and len(binder) == 2
                    and isinstance(binder[0], Symbol)):
                raise CommandFormatError(
                    f"malformed parameter {print_sexpr(binder)}", getattr(binder, "loc", loc))
            pname = binder[0].name
            if pname in seen:
                raise DuplicateDeclarationError(
                    f"parameter {pname} repeated in {name}", binder.loc)
            seen.add(pname)
            params.append((pname, parse_sort(binder[1], set(self.tt_by_name))))
        ret = decl[2]
        if ret != Symbol("Bool"):
            raise SortMismatchError(
                f"semantic relation {name} must return Bool", getattr(ret, "loc", loc))

        term_indices = [i for i, (_, s) in enumerate(params) if isinstance(s, TermSort)]
        if len(term_indices) != 1:
            raise SortMismatchError(
                f"relation {name} must have exactly one term-sorted parameter, "
                f"found {len(term_indices)}", loc)

        # mode annotations may trail the return sort in the declaration
        pending = self._parse_mode_attributes(decl.items[3:], loc)
        rel = SemanticRelation(
            name=name,
            params=tuple(params),
            term_index=term_indices[0],
            input_indices=(),
            output_indices=(),
        )
        return rel, pending

    def _strip_annotations(self, body: SExpr) -> tuple[SExpr, dict]:
        """Unwrap ``(! inner :input (...) :output (...))``."""
        if (isinstance(body, SList) and body.items and body.items[0] == Symbol("!")
                and len(body) >= 2):
            annos = self._parse_mode_attributes(body.items[2:], body.loc)
            return body[1], annos
        return body, {}

    def _parse_mode_attributes(self, items, loc) -> dict:
        annos: dict = {}
        i = 0
        items = list(items)
        while i < len(items):
            kw = items[i]
            if not isinstance(kw, Keyword):
                raise CommandFormatError(
                    f"expected a keyword attribute, got {print_sexpr(kw)}",
                    getattr(kw, "loc", loc))
            if kw.name in ("input", "output"):
                if i + 1 >= len(items) or not isinstance(items[i + 1], SList):
                    raise CommandFormatError(
                        f":{kw.name} must be followed by a variable list", kw.loc)
                names = []
                for v in items[i + 1].items:
                    if not isinstance(v, Symbol):
                        raise CommandFormatError(
                            f":{kw.name} list must contain variables", kw.loc)
                    names.append(v.name)
                annos[kw.name] = names
                i += 2
            else:
                # unknown attribute with an optional value; keep reading
                i += 2 if i + 1 < len(items) and not isinstance(items[i + 1], Keyword) else 1
        return annos

    def _apply_modes(self, rel: SemanticRelation, annos: dict, loc) -> SemanticRelation:
        if not annos:
            return rel
        index_of = {p: i for i, (p, _) in enumerate(rel.params)}

        def resolve(kind: str) -> tuple[int, ...]:
            out = []
            for v in annos.get(kind, []):
                if v not in index_of:
                    raise UnresolvedNameError(
                        f":{kind} variable {v} is not a parameter of {rel.name}", loc)
                if index_of[v] == rel.term_index:
                    raise SortMismatchError(
                        f"term parameter {v} cannot carry a mode annotation", loc)
                out.append(index_of[v])
            return tuple(out)

        inputs = resolve("input")
        outputs = resolve("output")
        if set(inputs) & set(outputs):
            raise DuplicateDeclarationError(
                f"parameters of {rel.name} annotated both input and output", loc)
        missing = [rel.params[i][0] for i in range(len(rel.params))
                   if i != rel.term_index and i not in inputs and i not in outputs]
        if missing:
            raise CommandFormatError(
                f"parameters of {rel.name} missing a mode annotation: "
                f"{', '.join(missing)}", loc)
        return SemanticRelation(rel.name, rel.params, rel.term_index, inputs, outputs)

    # -- synth-fun -------------------------------------------------------------

    def _synth_fun(self, expr: SList) -> None:
        loc = expr.loc
        if self.target is not None:
            raise DuplicateDeclarationError("multiple synth-fun commands", loc)
        if not (len(expr) in (4, 6) and isinstance(expr[1], Symbol)
                and isinstance(expr[2], SList)):
            raise CommandFormatError(
                "synth-fun takes a name, an argument list, a term type and an "
                "optional grammar", loc)
        if expr[2].items:
            raise CommandFormatError(
                "synthesis targets take no arguments in this format", expr[2].loc)
        name = expr[1].name
        if not isinstance(expr[3], Symbol) or expr[3].name not in self.tt_by_name:
            raise UnresolvedNameError(
                f"unknown term type {print_sexpr(expr[3])} in synth-fun",
                getattr(expr[3], "loc", loc))
        term_type = expr[3].name
        grammar = None
        if len(expr) == 6:
            grammar = self._parse_grammar(expr[4], expr[5], term_type)
        self.target = SynthTarget(name, term_type, grammar)

    def _parse_grammar(self, nt_decls: SExpr, rule_groups: SExpr, target_tt: str) -> Grammar:
        loc = getattr(nt_decls, "loc", None)
        if not isinstance(nt_decls, SList) or not isinstance(rule_groups, SList):
            raise CommandFormatError("malformed grammar", loc)
        nts: list[tuple[str, str]] = []
        for d in nt_decls.items:
            if not (isinstance(d, SList) and len(d) == 2 and isinstance(d[0], Symbol)
                    and isinstance(d[1], Symbol)):
                raise CommandFormatError(
                    f"nonterminal declaration must be (Name TermType): {print_sexpr(d)}",
                    getattr(d, "loc", loc))
            if d[1].name not in self.tt_by_name:
                raise UnresolvedNameError(f"unknown term type {d[1].name}", d[1].loc)
            nts.append((d[0].name, d[1].name))
        if len({n for n, _ in nts}) != len(nts):
            raise DuplicateDeclarationError("duplicate nonterminal in grammar", loc)
        if not nts:
            raise CommandFormatError("grammar declares no nonterminals", loc)

        nt_tt = dict(nts)
        rules: dict[str, tuple[Production, ...]] = {}
        for group in rule_groups.items:
            if not (isinstance(group, SList) and len(group) == 3
                    and isinstance(group[0], Symbol) and isinstance(group[1], Symbol)
                    and isinstance(group[2], SList)):
                raise CommandFormatError(
                    f"grammar rule group must be (Name TermType (<productions>)): "
                    f"{print_sexpr(group)}", getattr(group, "loc", loc))
            nt = group[0].name
            if nt not in nt_tt:
                raise UnresolvedNameError(f"rules given for undeclared nonterminal {nt}",
                                          group[0].loc)
            if group[1].name != nt_tt[nt]:
                raise SortMismatchError(
                    f"nonterminal {nt} declared with term type {nt_tt[nt]}, "
                    f"rules say {group[1].name}", group[1].loc)
            if nt in rules:
                raise DuplicateDeclarationError(f"duplicate rule group for {nt}", group.loc)
            prods = []
            for p in group[2].items:
                prods.append(self._parse_grammar_production(p, nt, nt_tt))
            rules[nt] = tuple(prods)
        for nt, _ in nts:
            rules.setdefault(nt, ())

        start = nts[0][0]
        if nt_tt[start] != target_tt:
            raise SortMismatchError(
                f"grammar start symbol {start} has term type {nt_tt[start]}, "
                f"target needs {target_tt}", loc)
        return Grammar(tuple(nts), rules, start)

    def _parse_grammar_production(self, p: SExpr, nt: str,
                                  nt_tt: dict[str, str]) -> Production:
        loc = getattr(p, "loc", None)
        if isinstance(p, Symbol):
            op, children = p.name, []
        elif isinstance(p, SList) and p.items and all(isinstance(x, Symbol) for x in p.items):
            op, children = p[0].name, [x.name for x in p.items[1:]]
        else:
            raise CommandFormatError(f"malformed grammar production {print_sexpr(p)}", loc)
        if op not in self.ctor_owner:
            raise UnresolvedNameError(f"unknown constructor {op} in grammar", loc)
        owner = self.ctor_owner[op]
        if owner != nt_tt[nt]:
            raise SortMismatchError(
                f"constructor {op} belongs to {owner}, not {nt_tt[nt]}", loc)
        ctor = next(c for c in self.tt_by_name[owner].constructors if c.operator == op)
        if len(children) != ctor.arity:
            raise ArityMismatchError(
                f"production {op} takes {ctor.arity} children, got {len(children)}", loc)
        for child_nt, want_tt in zip(children, ctor.children):
            if child_nt not in nt_tt:
                raise UnresolvedNameError(
                    f"unknown nonterminal {child_nt} in production {op}", loc)
            if nt_tt[child_nt] != want_tt:
                raise SortMismatchError(
                    f"child {child_nt} of {op} has term type {nt_tt[child_nt]}, "
                    f"expected {want_tt}", loc)
        return Production(op, tuple(children))

    # -- constraints ----------------------------------------------------------

    def _constraint(self, expr: SList) -> None:
        if len(expr) != 2:
            raise CommandFormatError("constraint takes exactly one formula", expr.loc)
        if self.target is None:
            raise AbsentSynthTargetError(
                "constraint appears before synth-fun", expr.loc)
        formula = expr[1]
        env = {self.target.name: TermSort(self.target.term_type)}
        sort = constraint_sort(formula, env, self.rel_by_name, set(self.tt_by_name))
        if not isinstance(sort, BoolSort):
            raise SortMismatchError(
                f"constraint has sort {sort}, expected Bool", getattr(formula, "loc", expr.loc))
        self.constraints.append(formula)

    def _check_synth(self, expr: SList) -> None:
        if len(expr) != 1:
            raise CommandFormatError("check-synth takes no arguments", expr.loc)
        self.saw_check_synth = True

    # -- metadata --------------------------------------------------------------

    def _set_info(self, expr: SList) -> None:
        if len(expr) != 3 or not isinstance(expr[1], Keyword):
            raise CommandFormatError("set-info takes a keyword and a value", expr.loc)
        self.metadata[expr[1].name] = expr[2]

    def _set_other(self, expr: SList) -> None:
        head = expr.items[0]
        assert isinstance(head, Symbol)
        if head.name == "set-logic" and len(expr) == 2:
            self.metadata["logic"] = expr[1]
        else:
            self.metadata[head.name] = SList(tuple(expr.items[1:]))


# ---------------------------------------------------------------------------
# Constraint formulas: quantifiers and relation applications allowed
# ---------------------------------------------------------------------------

def constraint_sort(formula: SExpr, env: dict[str, Sort],
                    relations: dict[str, SemanticRelation],
                    term_types: set[str]) -> Sort:
    """Sort-check a specification constraint.

    Unlike CHC constraints, these may contain ``forall``/``exists`` binders
    and applications of declared semantic relations.
    """
    if isinstance(formula, Symbol):
        sort = env.get(formula.name)
        if sort is None:
            raise UnresolvedNameError(f"unbound variable {formula.name}", formula.loc)
        return sort
    if isinstance(formula, Numeral):
        return INT
    if isinstance(formula, BoolLit):
        return BOOL
    if isinstance(formula, StringLit):
        return STRING
    if isinstance(formula, BitVecLit):
        return BitVecSort(formula.width)
    if not isinstance(formula, SList):
        raise IllSortedError(f"malformed constraint {print_sexpr(formula)}",
                             getattr(formula, "loc", None))
    bv = _indexed_bv_literal(formula)
    if bv is not None:
        return BitVecSort(bv[1])
    if not formula.items or not isinstance(formula.items[0], Symbol):
        raise IllSortedError(f"malformed constraint {print_sexpr(formula)}", formula.loc)
    head = formula.items[0].name

    if head in ("forall", "exists"):
        if len(formula) != 3 or not isinstance(formula[1], SList):
            raise CommandFormatError(f"malformed {head} binder", formula.loc)
        inner = dict(env)
        for binder in formula[1].items:
            if not (isinstance(binder, SList) and len(binder) == 2
                    and isinstance(binder[0], Symbol)):
                raise CommandFormatError(
                    f"malformed binder {print_sexpr(binder)}", formula.loc)
            inner[binder[0].name] = parse_sort(binder[1], term_types)
        body_sort = constraint_sort(formula[2], inner, relations, term_types)
        if not isinstance(body_sort, BoolSort):
            raise SortMismatchError(f"{head} body must be Bool", formula.loc)
        return BOOL

    if head in relations:
        rel = relations[head]
        args = formula.items[1:]
        if len(args) != len(rel.params):
            raise ArityMismatchError(
                f"{head} takes {len(rel.params)} arguments, got {len(args)}", formula.loc)
        for i, arg in enumerate(args):
            want = rel.params[i][1]
            got = constraint_sort(arg, env, relations, term_types)
            if got != want:
                raise SortMismatchError(
                    f"argument {i + 1} of {head} has sort {got}, expected {want}",
                    getattr(arg, "loc", formula.loc))
        return BOOL

    sorts = [constraint_sort(a, env, relations, term_types) for a in formula.items[1:]]
    return op_result_sort(head, sorts, formula.loc)


# ---------------------------------------------------------------------------
# Canonical printing back to command text
# ---------------------------------------------------------------------------

def print_semgus(problem: SynthesisProblem) -> str:
    """Render the problem as command text that re-analyzes to an equal problem."""
    lines: list[str] = []
    logic = problem.metadata.get("logic")
    if logic is not None:
        lines.append(f"(set-logic {print_sexpr(logic)})")
    for key, value in problem.metadata.items():
        if key == "logic":
            continue
        lines.append(f"(set-info :{key} {print_sexpr(value)})")

    heads = SList(tuple(SList((Symbol(tt.name), Numeral(0))) for tt in problem.term_types))
    groups = SList(tuple(
        SList(tuple(
            SList((Symbol(c.operator),) + tuple(Symbol(ch) for ch in c.children))
            for c in tt.constructors))
        for tt in problem.term_types))
    lines.append(print_sexpr(SList((Symbol("declare-term-types"), heads, groups))))

    if problem.relations:
        decls = []
        bodies = []
        for rel in problem.relations:
            params = SList(tuple(
                SList((Symbol(p), sort_to_sexpr(s))) for p, s in rel.params))
            decls.append(SList((Symbol(rel.name), params, Symbol("Bool"))))
            bodies.append(_print_relation_body(problem, rel))
        lines.append(print_sexpr(SList((
            Symbol("define-funs-rec"), SList(tuple(decls)), SList(tuple(bodies))))))

    target = problem.target
    synth = [Symbol("synth-fun"), Symbol(target.name), SList(()), Symbol(target.term_type)]
    if target.grammar is not None:
        g = target.grammar
        synth.append(SList(tuple(
            SList((Symbol(n), Symbol(tt))) for n, tt in g.nonterminals)))
        synth.append(SList(tuple(
            SList((Symbol(n), Symbol(tt), SList(tuple(
                Symbol(p.operator) if not p.children
                else SList((Symbol(p.operator),) + tuple(Symbol(c) for c in p.children))
                for p in g.rules[n]))))
            for n, tt in g.nonterminals)))
    lines.append(print_sexpr(SList(tuple(synth))))

    for c in problem.constraints:
        lines.append(print_sexpr(SList((Symbol("constraint"), c))))
    lines.append("(check-synth)")
    return "\n".join(lines) + "\n"


def _print_relation_body(problem: SynthesisProblem, rel: SemanticRelation) -> SExpr:
    term_var = rel.params[rel.term_index][0]
    chcs = [c for c in problem.chcs if c.head_relation == rel.name]
    arm_order: list[str] = []
    by_ctor: dict[str, list[Chc]] = {}
    for chc in chcs:
        if chc.constructor not in by_ctor:
            arm_order.append(chc.constructor)
            by_ctor[chc.constructor] = []
        by_ctor[chc.constructor].append(chc)

    arms = []
    for op in arm_order:
        alt_chcs = by_ctor[op]
        pattern = SList((Symbol(op),) + tuple(Symbol(v) for v in alt_chcs[0].child_vars))
        alts = [_print_alternative(c) for c in alt_chcs]
        arms.append(SList((pattern,) + tuple(alts)))

    match = SList((Symbol("match"), Symbol(term_var), SList(tuple(arms))))
    annotated = [Symbol("!"), match]
    if rel.has_modes:
        annotated += [Keyword("input"),
                      SList(tuple(Symbol(rel.params[i][0]) for i in rel.input_indices)),
                      Keyword("output"),
                      SList(tuple(Symbol(rel.params[i][0]) for i in rel.output_indices))]
    return SList(tuple(annotated))


def _print_alternative(chc: Chc) -> SExpr:
    conjuncts: list[SExpr] = [
        SList((Symbol(app.relation),) + tuple(Symbol(a) for a in app.args))
        for app in chc.body
    ]
    conjuncts.extend(chc.constraint_conjuncts())
    if not conjuncts:
        body: SExpr = BoolLit(True)
    elif len(conjuncts) == 1:
        body = conjuncts[0]
    else:
        body = SList((Symbol("and"),) + tuple(conjuncts))
    if chc.auxiliaries:
        binders = SList(tuple(
            SList((Symbol(v), sort_to_sexpr(s))) for v, s in chc.auxiliaries))
        return SList((Symbol("exists"), binders, body))
    return body


def constraint_has_forall(formula: SExpr) -> bool:
    if isinstance(formula, SList):
        if formula.items and formula.items[0] == Symbol("forall"):
            return True
        return any(constraint_has_forall(x) for x in formula.items)
    return False


def constraint_free_vars(formula: SExpr) -> list[str]:
    """Free variables of a constraint, quantified binders excluded."""
    out: list[str] = []

    def go(e: SExpr, bound: frozenset[str]):
        if isinstance(e, Symbol):
            if e.name not in bound and e.name not in out:
                out.append(e.name)
            return
        if isinstance(e, SList) and e.items:
            if e.items[0] in (Symbol("forall"), Symbol("exists")) and len(e) == 3:
                binders = {b[0].name for b in e[1].items
                           if isinstance(b, SList) and isinstance(b[0], Symbol)}
                go(e[2], bound | binders)
                return
            if _indexed_bv_literal(e) is not None:
                return
            start = 1 if isinstance(e.items[0], Symbol) else 0
            for item in e.items[start:]:
                go(item, bound)

    go(formula, frozenset())
    return out
