"""SyGuS v2 interop: embed SyGuS problems into the relational format and
invert the embedding on the statically detectable functional fragment.

The embedding gives every grammar nonterminal a term type whose
constructors are its productions, plus a single-output semantic relation
computing the production's SMT term from child outputs.  A constraint
formula with applications of the synthesized function gains one
existential output per application:
``exists o1..on. phi(o1..on) and Sem(g, i1, o1) and ... and Sem(g, in, on)``,
universally closed over the declared variables that occur in it.

The inverse succeeds only when every reachable relation has one output,
every constructor has one CHC, and each CHC operationalizes to assignments
and child calls alone (no guards, no recursion).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .analyzer import analyze
from .chc import ALL_OPS, op_result_sort
from .errors import (
    ArityMismatchError,
    CommandFormatError,
    DuplicateDeclarationError,
    HigherOrderConstraintError,
    Location,
    SortMismatchError,
    UnknownCommandError,
    UnresolvedNameError,
    UnsupportedTheoryError,
)
from .operational import Compute, Guard, Invoke, SELF, operationalize_chc
from .problem import SynthesisProblem
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
from .sorts import BitVecSort, BoolSort, IntSort, Sort, StringSort, parse_sort, sort_to_sexpr
from .verify import substitute_vars

_SYMBOL_OK = set("~!@$%^&*_-+=<>.?/")


@dataclass(frozen=True)
class SygusGrammar:
    nonterminals: tuple[tuple[str, Sort], ...]
    rules: dict[str, tuple[SExpr, ...]]  # nonterminal -> gterms

    @property
    def start(self) -> str:
        return self.nonterminals[0][0]


@dataclass(frozen=True)
class SygusProblem:
    logic: str | None
    name: str
    args: tuple[tuple[str, Sort], ...]
    ret_sort: Sort
    grammar: SygusGrammar | None
    declared_vars: tuple[tuple[str, Sort], ...]
    constraints: tuple[SExpr, ...]


@dataclass(frozen=True)
class NotInFragment:
    reason: str


# ---------------------------------------------------------------------------
# SyGuS surface parsing (v2 core subset)
# ---------------------------------------------------------------------------


def load_sygus(path: str) -> SygusProblem:
    with open(path, encoding="utf-8") as fh:
        return parse_sygus(fh.read(), filename=path)


def parse_sygus(text: str, filename: str | None = None) -> SygusProblem:
    commands = read_sexprs(text, filename)
    logic = None
    fun = None
    declared: list[tuple[str, Sort]] = []
    constraints: list[SExpr] = []
    saw_check = False
    for cmd in commands:
        if not (isinstance(cmd, SList) and cmd.items and isinstance(cmd.items[0], Symbol)):
            raise UnknownCommandError(f"not a command: {print_sexpr(cmd)}",
                                      getattr(cmd, "loc", None))
        head = cmd.items[0].name
        if head == "set-logic":
            if len(cmd) != 2 or not isinstance(cmd[1], Symbol):
                raise CommandFormatError("malformed set-logic", cmd.loc)
            logic = cmd[1].name
        elif head == "synth-fun":
            if fun is not None:
                raise DuplicateDeclarationError("multiple synth-fun commands", cmd.loc)
            fun = _parse_synth_fun(cmd)
        elif head == "declare-var":
            if len(cmd) != 3 or not isinstance(cmd[1], Symbol):
                raise CommandFormatError("malformed declare-var", cmd.loc)
            name = cmd[1].name
            if any(n == name for n, _ in declared):
                raise DuplicateDeclarationError(f"variable {name} already declared",
                                                cmd.loc)
            declared.append((name, _data_sort(cmd[2])))
        elif head == "constraint":
            if len(cmd) != 2:
                raise CommandFormatError("constraint takes exactly one formula", cmd.loc)
            constraints.append(cmd[1])
        elif head == "check-synth":
            saw_check = True
        elif head.startswith("set-"):
            continue  # options and info entries are irrelevant here
        else:
            raise UnknownCommandError(f"unknown command {head}", cmd.loc)
    if fun is None:
        raise CommandFormatError("no synth-fun command in SyGuS input", None)
    name, args, ret, grammar = fun
    problem = SygusProblem(logic, name, args, ret, grammar,
                           tuple(declared), tuple(constraints))
    for c in constraints:
        _check_sygus_constraint(c, problem)
    return problem


def _data_sort(expr: SExpr) -> Sort:
    sort = parse_sort(expr, frozenset())
    return sort


def _parse_synth_fun(cmd: SList):
    if len(cmd) not in (4, 6) or not isinstance(cmd[1], Symbol) \
            or not isinstance(cmd[2], SList):
        raise CommandFormatError(
            "synth-fun takes a name, arguments, a return sort and an optional "
            "grammar", cmd.loc)
    name = cmd[1].name
    args = []
    for binder in cmd[2].items:
        if not (isinstance(binder, SList) and len(binder) == 2
                and isinstance(binder[0], Symbol)):
            raise CommandFormatError(f"malformed argument {print_sexpr(binder)}", cmd.loc)
        args.append((binder[0].name, _data_sort(binder[1])))
    ret = _data_sort(cmd[3])
    grammar = None
    if len(cmd) == 6:
        grammar = _parse_sygus_grammar(cmd[4], cmd[5])
    return name, tuple(args), ret, grammar


def _parse_sygus_grammar(decls: SExpr, groups: SExpr) -> SygusGrammar:
    if not isinstance(decls, SList) or not isinstance(groups, SList) or not decls.items:
        raise CommandFormatError("malformed grammar", getattr(decls, "loc", None))
    nts: list[tuple[str, Sort]] = []
    for d in decls.items:
        if not (isinstance(d, SList) and len(d) == 2 and isinstance(d[0], Symbol)):
            raise CommandFormatError(f"malformed nonterminal {print_sexpr(d)}", d.loc)
        nts.append((d[0].name, _data_sort(d[1])))
    by_name = dict(nts)
    rules: dict[str, tuple[SExpr, ...]] = {}
    for g in groups.items:
        if not (isinstance(g, SList) and len(g) == 3 and isinstance(g[0], Symbol)
                and isinstance(g[2], SList)):
            raise CommandFormatError(f"malformed rule group {print_sexpr(g)}", g.loc)
        nt = g[0].name
        if nt not in by_name:
            raise UnresolvedNameError(f"rules for undeclared nonterminal {nt}", g.loc)
        if _data_sort(g[1]) != by_name[nt]:
            raise SortMismatchError(f"rule group sort differs for {nt}", g.loc)
        rules[nt] = tuple(g[2].items)
    for nt, _ in nts:
        rules.setdefault(nt, ())
    return SygusGrammar(tuple(nts), rules)


def _check_sygus_constraint(c: SExpr, p: SygusProblem) -> Sort:
    env = dict(p.declared_vars)

    def check(e: SExpr) -> Sort:
        if isinstance(e, Symbol):
            if e.name == p.name:
                raise HigherOrderConstraintError(
                    f"{p.name} used without arguments", e.loc)
            if e.name not in env:
                raise UnresolvedNameError(f"unbound variable {e.name}", e.loc)
            return env[e.name]
        if isinstance(e, Numeral):
            return IntSort()
        if isinstance(e, BoolLit):
            return BoolSort()
        if isinstance(e, StringLit):
            return StringSort()
        if isinstance(e, BitVecLit):
            return BitVecSort(e.width)
        if not (isinstance(e, SList) and e.items and isinstance(e.items[0], Symbol)):
            raise CommandFormatError(f"malformed constraint {print_sexpr(e)}",
                                     getattr(e, "loc", None))
        head = e.items[0].name
        if head == p.name:
            if len(e.items) - 1 != len(p.args):
                raise ArityMismatchError(
                    f"{p.name} takes {len(p.args)} arguments", e.loc)
            for arg, (_, want) in zip(e.items[1:], p.args):
                got = check(arg)
                if got != want:
                    raise SortMismatchError(
                        f"argument of {p.name} has sort {got}, expected {want}", e.loc)
            return p.ret_sort
        sorts = [check(a) for a in e.items[1:]]
        return op_result_sort(head, sorts, e.loc)

    got = check(c)
    if not isinstance(got, BoolSort):
        raise SortMismatchError("constraint must be Bool", getattr(c, "loc", None))
    return got


# ---------------------------------------------------------------------------
# SyGuS -> relational embedding
# ---------------------------------------------------------------------------


def sygus_to_semgus(p: SygusProblem) -> SynthesisProblem:
    """Build the equivalent relational problem and analyze it."""
    for _, sort in p.args + ((None, p.ret_sort),):
        _require_data_sort(sort)
    if p.grammar is None:
        raise UnsupportedTheoryError(
            "synth-fun without a grammar cannot be embedded into a finite "
            "term universe")
    return analyze(sygus_commands(p))


def _require_data_sort(sort: Sort) -> None:
    if not isinstance(sort, (IntSort, BoolSort, BitVecSort, StringSort)):
        raise UnsupportedTheoryError(f"unsupported sort {sort}")


def sygus_commands(p: SygusProblem) -> list[SExpr]:
    """The embedding as a list of commands (also used by the translator CLI)."""
    grammar = p.grammar
    assert grammar is not None
    arg_names = [a for a, _ in p.args]

    # constructors per nonterminal, with problem-unique operator names
    used_ops: set[str] = set()
    ctors: dict[str, list[tuple[str, SExpr, list[str]]]] = {}
    for nt, _sort in grammar.nonterminals:
        entries = []
        for gterm in grammar.rules[nt]:
            op = _ctor_name(gterm, used_ops)
            children = _nt_occurrences(gterm, grammar)
            entries.append((op, gterm, children))
        ctors[nt] = entries

    decl_heads = SList(tuple(SList((Symbol(nt), Numeral(0)))
                             for nt, _ in grammar.nonterminals))
    decl_groups = SList(tuple(
        SList(tuple(
            SList((Symbol(op),) + tuple(Symbol(c) for c in children))
            for op, _g, children in ctors[nt]))
        for nt, _ in grammar.nonterminals))

    rel_decls = []
    rel_bodies = []
    for nt, sort in grammar.nonterminals:
        params = [SList((Symbol("t"), Symbol(nt)))]
        params += [SList((Symbol(a), sort_to_sexpr(s))) for a, s in p.args]
        params += [SList((Symbol("out"), sort_to_sexpr(sort)))]
        rel_decls.append(SList((Symbol(_rel_name(nt)), SList(tuple(params)),
                                Symbol("Bool"))))
        arms = []
        for op, gterm, children in ctors[nt]:
            child_vars = [f"t{i + 1}" for i in range(len(children))]
            pattern = SList((Symbol(op),) + tuple(Symbol(v) for v in child_vars))
            out_vars = [f"o{i + 1}" for i in range(len(children))]
            occurrence = iter(out_vars)
            rhs = _replace_nts(gterm, grammar, occurrence)
            conjuncts = [
                SList((Symbol(_rel_name(children[i])), Symbol(child_vars[i]))
                      + tuple(Symbol(a) for a in arg_names) + (Symbol(out_vars[i]),))
                for i in range(len(children))
            ]
            conjuncts.append(SList((Symbol("="), Symbol("out"), rhs)))
            body: SExpr = conjuncts[0] if len(conjuncts) == 1 \
                else SList((Symbol("and"),) + tuple(conjuncts))
            if out_vars:
                child_sorts = [dict(grammar.nonterminals)[c] for c in children]
                binders = SList(tuple(
                    SList((Symbol(v), sort_to_sexpr(s)))
                    for v, s in zip(out_vars, child_sorts)))
                body = SList((Symbol("exists"), binders, body))
            arms.append(SList((pattern, body)))
        match = SList((Symbol("match"), Symbol("t"), SList(tuple(arms))))
        rel_bodies.append(SList((
            Symbol("!"), match,
            Keyword("input"), SList(tuple(Symbol(a) for a in arg_names)),
            Keyword("output"), SList((Symbol("out"),)),
        )))

    commands: list[SExpr] = []
    if p.logic:
        commands.append(SList((Symbol("set-logic"), Symbol(p.logic))))
    commands.append(SList((Symbol("declare-term-types"), decl_heads, decl_groups)))
    commands.append(SList((Symbol("define-funs-rec"), SList(tuple(rel_decls)),
                           SList(tuple(rel_bodies)))))
    commands.append(SList((Symbol("synth-fun"), Symbol(p.name), SList(()),
                           Symbol(grammar.start))))
    for c in p.constraints:
        commands.append(SList((Symbol("constraint"),
                               _embed_constraint(c, p, grammar))))
    commands.append(SList((Symbol("check-synth"),)))
    return commands


def _rel_name(nt: str) -> str:
    return f"{nt}.Sem"


def _ctor_name(gterm: SExpr, used: set[str]) -> str:
    if isinstance(gterm, SList) and gterm.items and isinstance(gterm.items[0], Symbol):
        base = gterm.items[0].name
    else:
        base = print_sexpr(gterm)
    base = "$" + "".join(ch if (ch.isalnum() or ch in _SYMBOL_OK) else "_"
                         for ch in base)
    name = base
    n = 1
    while name in used:
        n += 1
        name = f"{base}~{n}"
    used.add(name)
    return name


def _nt_occurrences(gterm: SExpr, grammar: SygusGrammar) -> list[str]:
    nts = {n for n, _ in grammar.nonterminals}
    out: list[str] = []

    def go(e: SExpr):
        if isinstance(e, Symbol):
            if e.name in nts:
                out.append(e.name)
        elif isinstance(e, SList):
            for item in e.items:
                go(item)

    go(gterm)
    return out


def _replace_nts(gterm: SExpr, grammar: SygusGrammar, names) -> SExpr:
    nts = {n for n, _ in grammar.nonterminals}
    if isinstance(gterm, Symbol) and gterm.name in nts:
        return Symbol(next(names))
    if isinstance(gterm, SList):
        return SList(tuple(_replace_nts(x, grammar, names) for x in gterm.items))
    return gterm


def _embed_constraint(c: SExpr, p: SygusProblem, grammar: SygusGrammar) -> SExpr:
    """phi(g(i))...  ->  forall vars. exists o. phi(o) and Sem(g, i, o)..."""
    apps: list[tuple[str, SExpr]] = []
    taken = {n for n, _ in p.declared_vars} | {a for a, _ in p.args}

    def fresh_out() -> str:
        base = f"o{len(apps) + 1}"
        name = base
        while name in taken:
            name += "!"
        taken.add(name)
        return name

    def strip(e: SExpr) -> SExpr:
        if isinstance(e, SList) and e.items and e.items[0] == Symbol(p.name):
            args = tuple(strip(a) for a in e.items[1:])
            out = fresh_out()
            apps.append((out, SList((Symbol(_rel_name(grammar.start)),
                                     Symbol(p.name)) + args + (Symbol(out),))))
            return Symbol(out)
        if isinstance(e, SList):
            return SList(tuple(strip(x) for x in e.items))
        return e

    body = strip(c)
    if apps:
        conjuncts = [body] + [atom for _, atom in apps]
        inner: SExpr = SList((Symbol("and"),) + tuple(conjuncts))
        binders = SList(tuple(SList((Symbol(o), sort_to_sexpr(p.ret_sort)))
                              for o, _ in apps))
        inner = SList((Symbol("exists"), binders, inner))
    else:
        inner = body
    free = [v for v in _free_symbols(c) if v in dict(p.declared_vars)]
    if free:
        var_sorts = dict(p.declared_vars)
        binders = SList(tuple(SList((Symbol(v), sort_to_sexpr(var_sorts[v])))
                              for v in free))
        return SList((Symbol("forall"), binders, inner))
    return inner


def _free_symbols(e: SExpr) -> list[str]:
    out: list[str] = []

    def go(x: SExpr):
        if isinstance(x, Symbol):
            if x.name not in out:
                out.append(x.name)
        elif isinstance(x, SList):
            items = x.items[1:] if (x.items and isinstance(x.items[0], Symbol)) \
                else x.items
            for item in items:
                go(item)

    go(e)
    return out


# ---------------------------------------------------------------------------
# Relational problem -> SyGuS (limited fragment)
# ---------------------------------------------------------------------------


def semgus_to_sygus(problem: SynthesisProblem):
    """Invert the embedding; returns :class:`NotInFragment` when impossible."""
    target = problem.target
    reachable = _reachable_term_types(problem, target.term_type)

    relations = {}
    for tt in reachable:
        rels = problem.relations_for(tt)
        if len(rels) != 1:
            return NotInFragment(
                f"term type {tt} has {len(rels)} semantic relations, need exactly 1")
        rel = rels[0]
        if len(rel.output_indices) != 1:
            return NotInFragment(
                f"relation {rel.name} has {len(rel.output_indices)} output "
                f"positions, need exactly 1")
        if not rel.has_modes:
            return NotInFragment(f"relation {rel.name} lacks mode annotations")
        relations[tt] = rel

    root_rel = relations[target.term_type]
    arg_names = [root_rel.params[i][0] for i in root_rel.input_indices]
    arg_sorts = [root_rel.params[i][1] for i in root_rel.input_indices]
    for tt, rel in relations.items():
        sorts = [rel.params[i][1] for i in rel.input_indices]
        if sorts != arg_sorts:
            return NotInFragment(
                f"relation {rel.name} input sorts differ from the target's")

    rel_by_name = {r.name: r for r in problem.relations}
    nt_names = {tt for tt in reachable}
    if nt_names & set(arg_names):
        return NotInFragment("a term type name collides with a function argument")

    # reconstruct one SMT gterm template per constructor
    templates: dict[str, SExpr] = {}
    for tt in reachable:
        rel = relations[tt]
        decl = problem.term_type(tt)
        for ctor in decl.constructors:
            chcs = problem.chcs_for(rel.name, ctor.operator)
            if len(chcs) != 1:
                return NotInFragment(
                    f"constructor {ctor.operator} has {len(chcs)} CHCs, need exactly 1")
            for child_tt in ctor.children:
                if child_tt not in relations:
                    return NotInFragment(
                        f"constructor {ctor.operator} reaches term type {child_tt} "
                        f"outside the fragment")
            template = _reconstruct_template(problem, chcs[0], rel, rel_by_name,
                                             arg_names)
            if isinstance(template, NotInFragment):
                return template
            templates[ctor.operator] = template

    # grammar: one nonterminal per grammar symbol (or per term type)
    grammar = target.grammar
    if grammar is not None:
        nts = tuple((n, _output_sort(relations[tt])) for n, tt in grammar.nonterminals)
        rules = {}
        for n, tt in grammar.nonterminals:
            gterms = []
            for prod in grammar.rules[n]:
                gterms.append(_fill_template(templates[prod.operator], prod.children))
            rules[n] = tuple(gterms)
        start = grammar.start
        if start != grammar.nonterminals[0][0]:
            order = sorted(nts, key=lambda x: x[0] != start)
            nts = tuple(order)
    else:
        ordered = [target.term_type] + [tt for tt in reachable if tt != target.term_type]
        nts = tuple((tt, _output_sort(relations[tt])) for tt in ordered)
        rules = {}
        for tt in ordered:
            decl = problem.term_type(tt)
            rules[tt] = tuple(
                _fill_template(templates[c.operator], c.children)
                for c in decl.constructors)
    sygus_grammar = SygusGrammar(nts, rules)

    # invert the constraint embedding
    declared: list[tuple[str, Sort]] = []
    constraints = []
    for c in problem.constraints:
        inv = _invert_constraint(c, problem, root_rel, declared)
        if isinstance(inv, NotInFragment):
            return inv
        constraints.append(inv)

    logic = problem.metadata.get("logic")
    return SygusProblem(
        logic=logic.name if isinstance(logic, Symbol) else None,
        name=target.name,
        args=tuple(zip(arg_names, arg_sorts)),
        ret_sort=_output_sort(root_rel),
        grammar=sygus_grammar,
        declared_vars=tuple(declared),
        constraints=tuple(constraints),
    )


def _output_sort(rel) -> Sort:
    return rel.params[rel.output_indices[0]][1]


def _reachable_term_types(problem: SynthesisProblem, root: str) -> list[str]:
    seen = [root]
    work = [root]
    while work:
        tt = work.pop(0)
        for ctor in problem.term_type(tt).constructors:
            for child in ctor.children:
                if child not in seen:
                    seen.append(child)
                    work.append(child)
    return seen


def _child_placeholder(i: int) -> Symbol:
    return Symbol(f"!child{i}")


def _reconstruct_template(problem, chc, rel, rel_by_name, arg_names):
    """Replay the CHC's plan symbolically into an SMT term over inputs and
    child placeholders."""
    try:
        plan = operationalize_chc(chc, rel_by_name)
    except Exception as err:
        return NotInFragment(
            f"constructor {chc.constructor} is not operationalizable: {err}")
    mapping: dict[str, SExpr] = {}
    for pos, name in zip(rel.input_indices, arg_names):
        mapping[chc.head_args[pos]] = Symbol(name)
    invoked: set[int] = set()
    for ins in plan.instructions:
        if isinstance(ins, Guard):
            return NotInFragment(
                f"constructor {chc.constructor} needs a guard; semantics is "
                f"not total-functional")
        if isinstance(ins, Invoke):
            if ins.target == SELF:
                return NotInFragment(
                    f"constructor {chc.constructor} has recursive semantics")
            if ins.target in invoked:
                return NotInFragment(
                    f"constructor {chc.constructor} invokes a child twice")
            invoked.add(ins.target)
            if len(ins.out_vars) != 1:
                return NotInFragment(
                    f"child call in {chc.constructor} has several outputs")
            head_inputs = [chc.head_args[p] for p in rel.input_indices]
            if list(ins.in_vars) != head_inputs:
                return NotInFragment(
                    f"child call in {chc.constructor} does not pass the inputs "
                    f"through unchanged")
            mapping[ins.out_vars[0]] = _child_placeholder(ins.target)
        else:
            assert isinstance(ins, Compute)
            mapping[ins.var] = substitute_vars(ins.formula, mapping)
    if invoked != set(range(len(chc.child_vars))):
        return NotInFragment(
            f"constructor {chc.constructor} does not evaluate every child "
            f"exactly once")
    out_var = chc.head_args[rel.output_indices[0]]
    if out_var not in mapping:
        return NotInFragment(
            f"constructor {chc.constructor} does not compute its output "
            f"functionally")
    return mapping[out_var]


def _fill_template(template: SExpr, child_nts: tuple[str, ...]) -> SExpr:
    mapping = {f"!child{i}": Symbol(nt) for i, nt in enumerate(child_nts)}
    return substitute_vars(template, mapping)


def _invert_constraint(c: SExpr, problem, root_rel, declared):
    binders: list[tuple[str, Sort]] = []
    body = c
    if isinstance(c, SList) and len(c) == 3 and c.items[0] == Symbol("forall"):
        for b in c[1].items:
            if not (isinstance(b, SList) and len(b) == 2 and isinstance(b[0], Symbol)):
                return NotInFragment("malformed forall binder")
            binders.append((b[0].name, parse_sort(b[1], frozenset())))
        body = c[2]
    outs: list[str] = []
    if isinstance(body, SList) and len(body) == 3 and body.items[0] == Symbol("exists"):
        for b in body[1].items:
            outs.append(b[0].name)
        body = body[2]
    conjuncts = (list(body.items[1:])
                 if isinstance(body, SList) and body.items
                 and body.items[0] == Symbol("and") else [body])

    target_sym = Symbol(problem.target.name)
    mapping: dict[str, SExpr] = {}
    rest: list[SExpr] = []
    for conj in conjuncts:
        if (isinstance(conj, SList) and conj.items
                and isinstance(conj.items[0], Symbol)
                and problem.has_relation(conj.items[0].name)):
            rel = problem.relation(conj.items[0].name)
            if rel.name != root_rel.name:
                return NotInFragment(
                    f"constraint applies {rel.name}, not the target relation")
            args = conj.items[1:]
            if len(args) != len(rel.params) or args[rel.term_index] != target_sym:
                return NotInFragment("relation application is not on the target")
            in_args = [substitute_vars(args[i], mapping) for i in rel.input_indices]
            app = SList((target_sym,) + tuple(in_args))
            out_arg = args[rel.output_indices[0]]
            if isinstance(out_arg, Symbol) and out_arg.name in outs:
                if out_arg.name in mapping:
                    return NotInFragment("output variable bound twice")
                mapping[out_arg.name] = app
            else:
                rest.append(SList((Symbol("="), app, out_arg)))
        else:
            rest.append(conj)
    unresolved = [o for o in outs if o not in mapping]
    if unresolved:
        return NotInFragment(
            f"existential variables {unresolved} are not relation outputs")
    inverted = [substitute_vars(r, mapping) for r in rest]
    for name, sort in binders:
        if any(n == name for n, _ in declared):
            continue
        declared.append((name, sort))
    if not inverted:
        return NotInFragment("constraint contains no checkable condition")
    return inverted[0] if len(inverted) == 1 else \
        SList((Symbol("and"),) + tuple(inverted))


# ---------------------------------------------------------------------------
# SyGuS printing
# ---------------------------------------------------------------------------


def print_sygus(p: SygusProblem) -> str:
    lines = []
    if p.logic:
        lines.append(f"(set-logic {p.logic})")
    fun = [Symbol("synth-fun"), Symbol(p.name),
           SList(tuple(SList((Symbol(a), sort_to_sexpr(s))) for a, s in p.args)),
           sort_to_sexpr(p.ret_sort)]
    if p.grammar is not None:
        g = p.grammar
        fun.append(SList(tuple(SList((Symbol(n), sort_to_sexpr(s)))
                               for n, s in g.nonterminals)))
        fun.append(SList(tuple(
            SList((Symbol(n), sort_to_sexpr(s), SList(tuple(g.rules[n]))))
            for n, s in g.nonterminals)))
    lines.append(print_sexpr(SList(tuple(fun))))
    for v, s in p.declared_vars:
        lines.append(f"(declare-var {v} {print_sexpr(sort_to_sexpr(s))})")
    for c in p.constraints:
        lines.append(f"(constraint {print_sexpr(c)})")
    lines.append("(check-synth)")
    return "\n".join(lines) + "\n"
