"""Logical verification through an external SMT solver, and the CEGIS loop.

A concrete candidate term is verified by emitting one potentially recursive
SMT function per (node, relation) pair: the function body is the
disjunction of the node's CHCs, child relation applications become calls to
the child node's function, and self applications become recursive calls.
Ground specification constraints are asserted positively; universally
quantified constraints are skolemized and asserted negated, so ``unsat``
means the candidate is correct and a ``sat`` model yields a counterexample.
"""

from __future__ import annotations

import os
import shutil
import subprocess
import time
from dataclasses import dataclass, field
from typing import Union

from .analyzer import constraint_has_forall
from .errors import (
    EmptySemanticsError,
    MemoryBudgetExceeded,
    ModelParseError,
    SolverCrashError,
    SolverNotFoundError,
    UnsupportedConstraintError,
    UnsupportedSortError,
)
from .evaluator import Evaluator, Value, split_spec, value_from_sexpr, value_to_sexpr
from .operational import OperationalizationResult, operationalize_all
from .problem import SynthesisProblem
from .sexpr import SExpr, SList, Symbol, print_sexpr, read_sexprs
from .sorts import BitVecSort, BoolSort, IntSort, Sort, StringSort, TermSort, sort_to_sexpr, parse_sort
from .terms import Node, ProgramTerm, is_complete

SOLVER_ENV_VAR = "SEMGUS_SMT_SOLVER"


@dataclass
class SolverConfig:
    path: str
    args: list[str] = field(default_factory=list)
    time_limit_s: float = 10.0
    memory_mb: int | None = None

    def __post_init__(self):
        if self.time_limit_s <= 0:
            raise ValueError("time limit must be positive")


def default_solver_config(time_limit_s: float = 10.0) -> SolverConfig | None:
    """Locate an SMT solver: $SEMGUS_SMT_SOLVER, then z3 or cvc5 on PATH."""
    override = os.environ.get(SOLVER_ENV_VAR)
    if override:
        base = os.path.basename(override)
        args = ["-in"] if base.startswith("z3") else []
        return SolverConfig(override, args, time_limit_s)
    z3 = shutil.which("z3")
    if z3:
        return SolverConfig(z3, ["-in"], time_limit_s)
    cvc5 = shutil.which("cvc5")
    if cvc5:
        return SolverConfig(cvc5, ["--lang", "smt2"], time_limit_s)
    return None


# ---------------------------------------------------------------------------
# Verification results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Verified:
    pass


@dataclass(frozen=True)
class Refuted:
    counterexample: dict[str, Value]
    per_constraint: tuple[dict[str, Value], ...] = ()


@dataclass(frozen=True)
class Inconclusive:
    reason: str


VerificationResult = Union[Verified, Refuted, Inconclusive]


# ---------------------------------------------------------------------------
# Script emission
# ---------------------------------------------------------------------------


@dataclass
class SmtScript:
    commands: list[str]
    functions: list[str]                   # defined function names, stable order
    skolems: list[tuple[str, str, Sort]]   # (constant, source variable, sort)

    @property
    def text(self) -> str:
        return "\n".join(self.commands) + "\n"


def _fn_name(rel: str, k: int) -> str:
    return f"{rel}@n{k}"


def emit_smt_script(term: ProgramTerm, problem: SynthesisProblem) -> SmtScript:
    """Combined script: positive ground assertions plus negated universals."""
    ground = [c for c in problem.constraints if not constraint_has_forall(c)]
    universal = [c for c in problem.constraints if constraint_has_forall(c)]
    return _emit(term, problem, ground, universal)


def _emit(term: ProgramTerm, problem: SynthesisProblem,
          ground: list[SExpr], universal: list[SExpr]) -> SmtScript:
    if not is_complete(term):
        raise UnsupportedConstraintError("cannot verify a term containing holes")
    nodes, children_of = _index_nodes(term)

    root_rels: list[str] = []
    for c in ground + universal:
        for rel in _target_relations(c, problem):
            if rel not in root_rels:
                root_rels.append(rel)

    needed: dict[tuple[int, str], None] = {}
    work = [(0, r) for r in root_rels]
    while work:
        key = work.pop(0)
        if key in needed:
            continue
        needed[key] = None
        k, rel = key
        op = nodes[k].op
        chcs = problem.chcs_for(rel, op)
        if not chcs:
            raise EmptySemanticsError(f"constructor {op} has no CHCs for relation {rel}")
        relation = problem.relation(rel)
        for chc in chcs:
            term_var = chc.head_args[relation.term_index]
            for app in chc.body:
                target = (k if app.term_var == term_var
                          else children_of[k][chc.child_vars.index(app.term_var)])
                work.append((target, app.relation))

    decls: list[str] = []
    bodies: list[str] = []
    functions: list[str] = []
    for (k, rel) in sorted(needed, key=lambda p: (p[0], p[1])):
        name = _fn_name(rel, k)
        functions.append(name)
        relation = problem.relation(rel)
        params = []
        for i, (p, s) in enumerate(relation.params):
            if i == relation.term_index:
                continue
            if isinstance(s, TermSort):
                raise UnsupportedSortError(
                    f"relation {rel} has a term-sorted value parameter {p}")
            params.append(f"({p} {print_sexpr(sort_to_sexpr(s))})")
        decls.append(f"({name} ({' '.join(params)}) Bool)")
        bodies.append(_fn_body(problem, nodes, children_of, k, rel))

    commands = ["(set-option :produce-models true)", "(set-logic ALL)"]
    if decls:
        commands.append(
            "(define-funs-rec\n  (" + "\n   ".join(decls) + ")\n  ("
            + "\n   ".join(bodies) + "))")

    skolems: list[tuple[str, str, Sort]] = []
    negated: list[str] = []
    for ci, c in enumerate(universal):
        body, consts = _skolemize(c, ci, problem)
        skolems.extend(consts)
        negated.append(f"(not {body})")
    for const, _var, sort in skolems:
        commands.append(f"(declare-const {const} {print_sexpr(sort_to_sexpr(sort))})")
    for c in ground:
        commands.append(f"(assert {print_sexpr(_rewrite_apps(c, problem))})")
    if negated:
        commands.append(f"(assert {negated[0]})" if len(negated) == 1
                        else "(assert (or " + " ".join(negated) + "))")
    commands.append("(check-sat)")
    if skolems:
        commands.append("(get-model)")
    return SmtScript(commands, functions, skolems)


def _fn_body(problem: SynthesisProblem, nodes: list[Node],
             children_of: dict[int, list[int]], k: int, rel: str) -> str:
    node = nodes[k]
    relation = problem.relation(rel)
    alts = []
    for chc in problem.chcs_for(rel, node.op):
        term_var = chc.head_args[relation.term_index]
        conjuncts = []
        for app in chc.body:
            callee = problem.relation(app.relation)
            target = (k if app.term_var == term_var
                      else children_of[k][chc.child_vars.index(app.term_var)])
            args = [a for i, a in enumerate(app.args) if i != callee.term_index]
            name = _fn_name(app.relation, target)
            conjuncts.append(f"({name} {' '.join(args)})" if args else name)
        conjuncts.extend(print_sexpr(cc) for cc in chc.constraint_conjuncts())
        if not conjuncts:
            body = "true"
        elif len(conjuncts) == 1:
            body = conjuncts[0]
        else:
            body = "(and " + " ".join(conjuncts) + ")"
        if chc.auxiliaries:
            binders = " ".join(
                f"({v} {print_sexpr(sort_to_sexpr(s))})" for v, s in chc.auxiliaries)
            body = f"(exists ({binders}) {body})"
        alts.append(body)
    return alts[0] if len(alts) == 1 else "(or " + " ".join(alts) + ")"


def _index_nodes(term: ProgramTerm) -> tuple[list[Node], dict[int, list[int]]]:
    nodes: list[Node] = []
    children_of: dict[int, list[int]] = {}

    def walk(t: Node) -> int:
        k = len(nodes)
        nodes.append(t)
        children_of[k] = []
        for child in t.children:
            children_of[k].append(walk(child))
        return k

    walk(term)
    return nodes, children_of


def _target_relations(c: SExpr, problem: SynthesisProblem) -> list[str]:
    out: list[str] = []

    def go(e: SExpr):
        if isinstance(e, SList) and e.items:
            head = e.items[0]
            if isinstance(head, Symbol) and problem.has_relation(head.name):
                rel = problem.relation(head.name)
                if (len(e.items) == len(rel.params) + 1
                        and e.items[1 + rel.term_index] == Symbol(problem.target.name)
                        and head.name not in out):
                    out.append(head.name)
            for item in e.items:
                go(item)

    go(c)
    return out


def _rewrite_apps(e: SExpr, problem: SynthesisProblem) -> SExpr:
    """Replace relation applications on the target with root-function calls."""
    if not isinstance(e, SList) or not e.items:
        return e
    head = e.items[0]
    if isinstance(head, Symbol) and problem.has_relation(head.name):
        rel = problem.relation(head.name)
        if (len(e.items) == len(rel.params) + 1
                and e.items[1 + rel.term_index] == Symbol(problem.target.name)):
            args = [_rewrite_apps(a, problem)
                    for i, a in enumerate(e.items[1:]) if i != rel.term_index]
            name = Symbol(_fn_name(head.name, 0))
            return SList((name, *args)) if args else name
    return SList(tuple(_rewrite_apps(item, problem) for item in e.items))


def substitute_vars(e: SExpr, mapping: dict[str, SExpr]) -> SExpr:
    """Capture-aware substitution of free variables."""
    if isinstance(e, Symbol):
        return mapping.get(e.name, e)
    if not isinstance(e, SList) or not e.items:
        return e
    if e.items[0] in (Symbol("forall"), Symbol("exists")) and len(e) == 3:
        binders = e[1]
        shadowed = {b[0].name for b in binders.items
                    if isinstance(b, SList) and isinstance(b[0], Symbol)}
        inner = {k: v for k, v in mapping.items() if k not in shadowed}
        return SList((e.items[0], binders, substitute_vars(e[2], inner)), e.loc)
    return SList(tuple(substitute_vars(item, mapping) for item in e.items), e.loc)


def _skolemize(c: SExpr, index: int, problem: SynthesisProblem
               ) -> tuple[str, list[tuple[str, str, Sort]]]:
    """Replace a top-level forall with fresh constants; returns (body, consts)."""
    if (isinstance(c, SList) and len(c) == 3 and c.items[0] == Symbol("forall")
            and isinstance(c[1], SList)):
        consts = []
        mapping = {}
        for binder in c[1].items:
            var = binder[0].name
            sort = parse_sort(binder[1], {tt.name for tt in problem.term_types})
            const = f"cex!{index}!{var}"
            consts.append((const, var, sort))
            mapping[var] = Symbol(const)
        body = substitute_vars(c[2], mapping)
        return print_sexpr(_rewrite_apps(body, problem)), consts
    return print_sexpr(_rewrite_apps(c, problem)), []


# ---------------------------------------------------------------------------
# Solver subprocess
# ---------------------------------------------------------------------------


def run_solver(config: SolverConfig, script: str) -> tuple[str, str]:
    """One-shot query; returns (status, remaining stdout)."""
    try:
        proc = subprocess.run(
            [config.path, *config.args],
            input=script,
            capture_output=True,
            text=True,
            timeout=config.time_limit_s,
        )
    except FileNotFoundError as err:
        raise SolverNotFoundError(f"SMT solver not found: {config.path}") from err
    except subprocess.TimeoutExpired:
        return "timeout", ""
    lines = proc.stdout.splitlines()
    for i, line in enumerate(lines):
        tok = line.strip()
        if tok in ("sat", "unsat", "unknown"):
            return tok, "\n".join(lines[i + 1:])
        if tok.startswith("(error"):
            raise SolverCrashError(f"solver reported an error: {tok[:200]}")
    stderr = (proc.stderr or "").strip()
    raise SolverCrashError(
        f"no check-sat answer from solver (exit {proc.returncode}): "
        f"{(proc.stdout or stderr)[:200]}")


def _parse_model(text: str, skolems: list[tuple[str, str, Sort]]) -> dict[str, Value]:
    """Read ``(define-fun c () Sort value)`` entries for the skolem constants."""
    try:
        exprs = read_sexprs(text)
    except Exception as err:
        raise ModelParseError(f"unreadable model: {err}") from None
    values: dict[str, Value] = {}
    for e in exprs:
        if not isinstance(e, SList):
            continue
        entries = e.items
        if entries and entries[0] == Symbol("model"):
            entries = entries[1:]
        for entry in entries:
            if (isinstance(entry, SList) and len(entry) == 5
                    and entry[0] == Symbol("define-fun")
                    and isinstance(entry[1], Symbol)):
                v = value_from_sexpr(entry[4])
                if v is not None:
                    values[entry[1].name] = v
    out: dict[str, Value] = {}
    for const, _var, sort in skolems:
        if const in values:
            out[const] = values[const]
        else:
            out[const] = _default_value(sort)
    return out


def _default_value(sort: Sort) -> Value:
    if isinstance(sort, BoolSort):
        return False
    if isinstance(sort, BitVecSort):
        from .evaluator import BitVec
        return BitVec(sort.width, 0)
    if isinstance(sort, StringSort):
        return ""
    return 0


# ---------------------------------------------------------------------------
# verify_logical
# ---------------------------------------------------------------------------


def verify_logical(term: ProgramTerm, problem: SynthesisProblem,
                   config: SolverConfig | None = None) -> VerificationResult:
    """Check a candidate against the full specification with an SMT solver.

    ``unsat`` on the negated universal spec means Verified; ``sat`` yields a
    counterexample binding for the universally quantified variables.
    """
    if config is None:
        config = default_solver_config()
    if config is None:
        raise SolverNotFoundError(
            "no SMT solver found; set $SEMGUS_SMT_SOLVER or install z3/cvc5")
    ground = [c for c in problem.constraints if not constraint_has_forall(c)]
    universal = [c for c in problem.constraints if constraint_has_forall(c)]

    if ground:
        script = _emit(term, problem, ground, [])
        status, _rest = run_solver(config, script.text)
        if status == "unsat":
            return Refuted({})
        if status in ("unknown", "timeout"):
            return Inconclusive(f"solver returned {status} on ground constraints")

    if universal:
        script = _emit(term, problem, [], universal)
        status, rest = run_solver(config, script.text)
        if status == "unsat":
            return Verified()
        if status in ("unknown", "timeout"):
            return Inconclusive(f"solver returned {status} on the negated spec")
        model = _parse_model(rest, script.skolems)
        per_constraint: list[dict[str, Value]] = []
        for ci in range(len(universal)):
            binding = {var: model[const] for const, var, _s in script.skolems
                       if const == f"cex!{ci}!{var}"}
            per_constraint.append(binding)
        merged: dict[str, Value] = {}
        for binding in per_constraint:
            merged.update(binding)
        return Refuted(merged, tuple(per_constraint))

    return Verified()


# ---------------------------------------------------------------------------
# CEGIS
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CegisTraceEntry:
    iteration: int
    candidates_so_far: int
    verify_seconds: float
    counterexample: dict[str, Value]


def _universal_instance(problem: SynthesisProblem, formula: SExpr,
                        binding: dict[str, Value]) -> SExpr | None:
    """Instantiate a forall constraint at a counterexample.

    Variables occurring in relation output positions stay existential so the
    evaluator can bind them from computed outputs; the rest are replaced by
    the counterexample values.
    """
    if not (isinstance(formula, SList) and len(formula) == 3
            and formula.items[0] == Symbol("forall")):
        return None
    binders = [(b[0].name, b[1]) for b in formula[1].items]
    body = formula[2]

    out_vars: set[str] = set()

    def find_outputs(e: SExpr):
        if isinstance(e, SList) and e.items:
            head = e.items[0]
            if isinstance(head, Symbol) and problem.has_relation(head.name):
                rel = problem.relation(head.name)
                if len(e.items) == len(rel.params) + 1:
                    for i in rel.output_indices:
                        arg = e.items[1 + i]
                        if isinstance(arg, Symbol):
                            out_vars.add(arg.name)
            for item in e.items:
                find_outputs(item)

    find_outputs(body)
    mapping = {}
    existential = []
    for var, sort_expr in binders:
        if var in out_vars:
            existential.append(SList((Symbol(var), sort_expr)))
        elif var in binding:
            mapping[var] = value_to_sexpr(binding[var])
    instantiated = substitute_vars(body, mapping)
    if existential:
        return SList((Symbol("exists"), SList(tuple(existential)), instantiated))
    return instantiated


def cegis(problem: SynthesisProblem, strategy: str = "top-down",
          limits=None, hooks: tuple = (), config: SolverConfig | None = None,
          opres: OperationalizationResult | None = None):
    """Counterexample-guided synthesis: enumerate against examples, verify
    logically, feed refutations back as new examples, restart enumeration."""
    from .enumerators import (MemoryCap, SolveLimits, SolveOutcome,
                              _DeadlineReached, _ground_constraints_hold,
                              make_enumerator)

    limits = limits or SolveLimits()
    if config is None:
        config = default_solver_config()
    started = time.monotonic()
    deadline = started + limits.timeout_s if limits.timeout_s is not None else None
    count = 0
    cex_count = 0
    trace: list[CegisTraceEntry] = []

    def outcome(status, term=None, message=None) -> SolveOutcome:
        wall = time.monotonic() - started
        return SolveOutcome(status, term, count, wall,
                            count / wall if wall > 0 else 0.0,
                            cex_count, message, trace)

    if config is None:
        return outcome("inconclusive", message=(
            "no SMT solver found; set $SEMGUS_SMT_SOLVER or install z3/cvc5"))

    spec = split_spec(problem)
    if opres is None:
        opres = operationalize_all(problem)
    mode = "strict" if limits.strict else "first-match"
    evaluator = Evaluator(problem, opres, default_fuel=limits.fuel, mode=mode)
    prepared = evaluator.prepare(spec.direct)
    grammar = problem.grammar_or_universe()
    residuals: list[SExpr] = []
    refuted_terms: set[Node] = set()

    while True:
        cap = (MemoryCap(limits.memory_mb, deadline)
               if (limits.memory_mb or deadline is not None) else None)
        enum = make_enumerator(grammar, strategy, max_size=limits.max_size,
                               memory_cap=cap, hooks=hooks)
        candidate = None
        try:
            for term in enum:
                if deadline is not None and time.monotonic() > deadline:
                    return outcome("timeout")
                if limits.max_candidates is not None and count >= limits.max_candidates:
                    return outcome("budget")
                count += 1
                if term in refuted_terms:
                    continue
                if evaluator.failing_example(term, prepared, fuel=limits.fuel) is not None:
                    continue
                if not _ground_constraints_hold(evaluator, term,
                                                spec.ground + residuals, limits.fuel):
                    continue
                candidate = term
                break
        except MemoryBudgetExceeded as err:
            return outcome("memout", message=str(err))
        except _DeadlineReached:
            return outcome("timeout")
        if candidate is None:
            if getattr(enum, "exhausted_space", False) and limits.max_size is None:
                return outcome("exhausted")
            return outcome("budget" if limits.max_size is not None else "exhausted")

        t0 = time.monotonic()
        try:
            result = verify_logical(candidate, problem, config)
        except SolverNotFoundError as err:
            return outcome("inconclusive", message=str(err))
        verify_seconds = time.monotonic() - t0

        if isinstance(result, Verified):
            return outcome("solved", candidate)
        if isinstance(result, Inconclusive):
            return outcome("inconclusive", message=result.reason)

        cex_count += 1
        trace.append(CegisTraceEntry(cex_count, count, verify_seconds,
                                     result.counterexample))
        refuted_terms.add(candidate)
        for ci, u in enumerate(spec.universal):
            binding = (result.per_constraint[ci]
                       if ci < len(result.per_constraint) else result.counterexample)
            residual = _universal_instance(problem, u, binding)
            if residual is not None and residual not in residuals:
                residuals.append(residual)
