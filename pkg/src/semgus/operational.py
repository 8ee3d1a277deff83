"""Compile CHCs into executable evaluation plans.

Each CHC body conjunct becomes a dataflow node: relation applications
produce their output-annotated variables, oriented equalities ``v = f(..)``
become assignments, and everything else becomes a guard.  A deterministic
topological sort (ties broken by source order, guards scheduled as early
as possible) yields the instruction sequence.  CHCs outside the executable
fragment are rejected: no two nodes may write the same variable, every
variable read must be produced earlier or be a head input, and the output
variables must all be produced.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Union

from .chc import Chc, formula_free_vars
from .errors import (
    CyclicDataflowError,
    DoubleWriteError,
    Location,
    MissingModesError,
    OperationalizationError,
    UngroundedInputError,
)
from .problem import SemanticRelation, SynthesisProblem
from .sexpr import SExpr, SList, Symbol, print_sexpr
from .sorts import Sort

SELF = -1  # Invoke target: recurse on the term itself


@dataclass(frozen=True)
class Invoke:
    target: int  # child index, or SELF
    relation: str
    in_vars: tuple[str, ...]
    out_vars: tuple[str, ...]


@dataclass(frozen=True)
class Guard:
    formula: SExpr


@dataclass(frozen=True)
class Compute:
    var: str
    formula: SExpr


Instruction = Union[Invoke, Guard, Compute]


@dataclass(frozen=True)
class FlowNode:
    index: int
    kind: str  # "invoke" | "compute" | "guard"
    defines: frozenset[str]
    uses: frozenset[str]
    app_index: int = -1       # body application index for invokes
    target_var: str = ""      # compute target
    expr: SExpr | None = None  # compute rhs / guard formula


@dataclass
class DataflowGraph:
    nodes: list[FlowNode]
    edges: list[tuple[int, int]]  # (producer, consumer)
    head_inputs: tuple[str, ...]
    head_outputs: tuple[str, ...]


@dataclass(frozen=True)
class EvaluationPlan:
    relation: str
    constructor: str
    chc_index: int
    instructions: tuple[Instruction, ...]
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    var_sorts: tuple[tuple[str, Sort], ...]


@dataclass
class OperationalizationResult:
    plans: dict[tuple[str, str], list[EvaluationPlan]]
    errors: list[OperationalizationError]

    @property
    def ok(self) -> bool:
        return not self.errors


def build_dataflow(chc: Chc, relations: Mapping[str, SemanticRelation]) -> DataflowGraph:
    """Classify body conjuncts into producer/guard nodes and wire use-def edges."""
    head_rel = relations[chc.head_relation]
    if not head_rel.has_modes:
        raise MissingModesError(
            f"relation {head_rel.name} lacks :input/:output annotations", chc.loc)
    head_inputs = tuple(chc.head_args[i] for i in head_rel.input_indices)
    head_outputs = tuple(chc.head_args[i] for i in head_rel.output_indices)

    nodes: list[FlowNode] = []
    writers: dict[str, int] = {}

    def add_writer(var: str, node_index: int, loc: Location | None):
        if var in writers or var in head_inputs:
            raise DoubleWriteError(
                f"variable {var} is written more than once in a CHC for "
                f"{chc.constructor}", var, loc)
        writers[var] = node_index

    for app_index, app in enumerate(chc.body):
        callee = relations[app.relation]
        if not callee.has_modes:
            raise MissingModesError(
                f"relation {callee.name} lacks :input/:output annotations", app.loc)
        uses = frozenset(app.args[i] for i in callee.input_indices)
        defines = []
        for i in callee.output_indices:
            add_writer(app.args[i], len(nodes), app.loc)
            defines.append(app.args[i])
        if len(set(defines)) != len(defines):  # unreachable: add_writer catches it
            raise DoubleWriteError("repeated output variable", defines[0], app.loc)
        nodes.append(FlowNode(len(nodes), "invoke", frozenset(defines), uses,
                              app_index=app_index))

    for conj in chc.constraint_conjuncts():
        oriented = _orient_equality(conj, writers, head_inputs)
        if oriented is not None:
            var, rhs = oriented
            writers[var] = len(nodes)
            nodes.append(FlowNode(len(nodes), "compute", frozenset((var,)),
                                  frozenset(formula_free_vars(rhs)),
                                  target_var=var, expr=rhs))
        else:
            nodes.append(FlowNode(len(nodes), "guard", frozenset(),
                                  frozenset(formula_free_vars(conj)), expr=conj))

    edges = []
    for consumer in nodes:
        for var in consumer.uses:
            producer = writers.get(var)
            if producer is not None and producer != consumer.index:
                edges.append((producer, consumer.index))
    return DataflowGraph(nodes, edges, head_inputs, head_outputs)


def _orient_equality(conj: SExpr, writers: dict[str, int],
                     head_inputs: tuple[str, ...]):
    """``v = f(ws)`` (either orientation) is an assignment when ``v`` is fresh."""
    if not (isinstance(conj, SList) and len(conj) == 3 and conj[0] == Symbol("=")):
        return None

    def eligible(side: SExpr, other: SExpr):
        if (isinstance(side, Symbol) and side.name not in writers
                and side.name not in head_inputs
                and side.name not in formula_free_vars(other)):
            return side.name
        return None

    lhs, rhs = conj[1], conj[2]
    v = eligible(lhs, rhs)
    if v is not None:
        return v, rhs
    v = eligible(rhs, lhs)
    if v is not None:
        return v, lhs
    return None


def order_chc(graph: DataflowGraph, chc: Chc,
              relations: Mapping[str, SemanticRelation],
              chc_index: int = 0) -> EvaluationPlan:
    """Topologically order the dataflow graph into an instruction sequence."""
    defined = set(graph.head_inputs)
    producible = defined | {v for n in graph.nodes for v in n.defines}

    for node in graph.nodes:
        for var in sorted(node.uses):
            if var not in producible:
                raise UngroundedInputError(
                    f"variable {var} in a CHC for {chc.constructor} is never "
                    f"produced by any relation output or assignment", var, chc.loc)
    for var in graph.head_outputs:
        if var not in producible:
            raise UngroundedInputError(
                f"head output {var} of a CHC for {chc.constructor} is never "
                f"produced; the CHC is not executable", var, chc.loc)

    remaining = list(graph.nodes)
    order: list[FlowNode] = []

    def ready(node: FlowNode) -> bool:
        return node.uses <= defined

    while remaining:
        guards = [n for n in remaining if n.kind == "guard" and ready(n)]
        if guards:
            chosen = guards[0]
        else:
            candidates = [n for n in remaining if ready(n)]
            if not candidates:
                raise CyclicDataflowError(
                    f"cyclic dataflow in a CHC for {chc.constructor}",
                    tuple(n.index for n in remaining), chc.loc)
            chosen = candidates[0]
        remaining.remove(chosen)
        order.append(chosen)
        defined |= chosen.defines

    head_rel = relations[chc.head_relation]
    term_var = chc.head_args[head_rel.term_index]
    instructions: list[Instruction] = []
    for node in order:
        if node.kind == "invoke":
            app = chc.body[node.app_index]
            callee = relations[app.relation]
            target = SELF if app.term_var == term_var else chc.child_vars.index(app.term_var)
            instructions.append(Invoke(
                target=target,
                relation=app.relation,
                in_vars=tuple(app.args[i] for i in callee.input_indices),
                out_vars=tuple(app.args[i] for i in callee.output_indices),
            ))
        elif node.kind == "compute":
            instructions.append(Compute(node.target_var, node.expr))
        else:
            instructions.append(Guard(node.expr))

    var_sorts = tuple((p, s) for p, s in head_rel.params) + tuple(chc.auxiliaries)
    return EvaluationPlan(
        relation=chc.head_relation,
        constructor=chc.constructor,
        chc_index=chc_index,
        instructions=tuple(instructions),
        inputs=tuple(graph.head_inputs),
        outputs=tuple(graph.head_outputs),
        var_sorts=var_sorts,
    )


def operationalize_chc(chc: Chc, relations: Mapping[str, SemanticRelation],
                       chc_index: int = 0) -> EvaluationPlan:
    return order_chc(build_dataflow(chc, relations), chc, relations, chc_index)


def operationalize_all(problem: SynthesisProblem) -> OperationalizationResult:
    """One plan per CHC; a constructor's plans keep CHC declaration order."""
    relations = {r.name: r for r in problem.relations}
    plans: dict[tuple[str, str], list[EvaluationPlan]] = {}
    errors: list[OperationalizationError] = []
    for chc in problem.chcs:
        key = (chc.head_relation, chc.constructor)
        group = plans.setdefault(key, [])
        try:
            group.append(operationalize_chc(chc, relations, chc_index=len(group)))
        except OperationalizationError as err:
            errors.append(err)
    return OperationalizationResult(plans, errors)


def plan_to_text(plan: EvaluationPlan) -> str:
    """Debug rendering, one instruction per line."""
    lines = [f"plan {plan.relation}/{plan.constructor}#{plan.chc_index} "
             f"inputs=({' '.join(plan.inputs)}) outputs=({' '.join(plan.outputs)})"]
    for ins in plan.instructions:
        if isinstance(ins, Invoke):
            tgt = "self" if ins.target == SELF else f"child{ins.target}"
            lines.append(f"  invoke {tgt} {ins.relation} "
                         f"({' '.join(ins.in_vars)}) -> ({' '.join(ins.out_vars)})")
        elif isinstance(ins, Compute):
            lines.append(f"  compute {ins.var} := {print_sexpr(ins.formula)}")
        else:
            lines.append(f"  guard {print_sexpr(ins.formula)}")
    return "\n".join(lines)
