"""Execute program terms on concrete inputs via compiled evaluation plans.

Plans are flattened to slot-indexed instruction arrays with formula
closures resolved at compile time, so the per-candidate cost during
enumeration is a few dict lookups and list writes per instruction.  A fuel
budget (one unit per executed instruction) bounds potentially
nonterminating semantics such as while loops.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Callable, Mapping, Union

from .chc import formula_sort, _indexed_bv_literal
from .errors import (
    DivByZeroError,
    EvalError,
    IncompleteTermError,
    MissingPlanError,
    SortMismatchError,
    UnboundVariableError,
    UnsupportedConstraintError,
)
from .operational import (
    SELF,
    Compute,
    EvaluationPlan,
    Guard,
    Invoke,
    OperationalizationResult,
    operationalize_all,
)
from .problem import SemanticRelation, SynthesisProblem
from .sexpr import (
    BitVecLit,
    BoolLit,
    Numeral,
    SExpr,
    SList,
    StringLit,
    Symbol,
    print_sexpr,
)
from .sorts import BitVecSort, BoolSort, IntSort, Sort, StringSort
from .terms import Node, ProgramTerm, is_complete

# ---------------------------------------------------------------------------
# Runtime values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BitVec:
    width: int
    value: int

    def __post_init__(self):
        if not 0 <= self.value < (1 << self.width):
            raise ValueError(f"bitvector value {self.value} outside width {self.width}")

    def __str__(self) -> str:
        if self.width % 4 == 0:
            return "#x" + format(self.value, f"0{self.width // 4}x")
        return "#b" + format(self.value, f"0{self.width}b")


Value = Union[int, bool, str, BitVec]


def value_from_sexpr(expr: SExpr) -> Value | None:
    """Literal to runtime value; ``None`` when the expression is not a literal."""
    if isinstance(expr, Numeral):
        return expr.value
    if isinstance(expr, BoolLit):
        return expr.value
    if isinstance(expr, StringLit):
        return expr.value
    if isinstance(expr, BitVecLit):
        return BitVec(expr.width, expr.value)
    if isinstance(expr, SList):
        bv = _indexed_bv_literal(expr)
        if bv is not None:
            return BitVec(bv[1], bv[0])
        if (len(expr) == 2 and expr[0] == Symbol("-")
                and isinstance(expr[1], Numeral)):
            return -expr[1].value
    return None


def value_to_sexpr(value: Value) -> SExpr:
    if isinstance(value, bool):
        return BoolLit(value)
    if isinstance(value, BitVec):
        return BitVecLit(value.width, value.value)
    if isinstance(value, int):
        if value < 0:
            return SList((Symbol("-"), Numeral(-value)))
        return Numeral(value)
    if isinstance(value, str):
        return StringLit(value)
    raise TypeError(f"not a runtime value: {value!r}")


def value_sort(value: Value) -> Sort:
    from .sorts import BOOL, INT, STRING

    if isinstance(value, bool):
        return BOOL
    if isinstance(value, BitVec):
        return BitVecSort(value.width)
    if isinstance(value, int):
        return INT
    return STRING


def _raw(value: Value) -> int | bool | str:
    return value.value if isinstance(value, BitVec) else value


def _wrap(raw, sort: Sort) -> Value:
    if isinstance(sort, BitVecSort):
        return BitVec(sort.width, raw)
    return raw


def smt_div(a: int, b: int) -> int:
    """SMT-LIB Int division: remainder is always nonnegative."""
    if b == 0:
        raise DivByZeroError("div by zero")
    return a // b if b > 0 else -(a // -b)


def smt_mod(a: int, b: int) -> int:
    if b == 0:
        raise DivByZeroError("mod by zero")
    return a - b * smt_div(a, b)


# ---------------------------------------------------------------------------
# Dynamic formula evaluation (reference semantics)
# ---------------------------------------------------------------------------


def eval_formula(f: SExpr, env: Mapping[str, Value]) -> Value:
    """Evaluate a quantifier-free formula under a binding.

    Standard SMT-LIB semantics: Euclidean ``div``/``mod`` (division by zero
    raises), bitvector operations wrap modulo ``2^width``.  The binding must
    be well-sorted; ``and``/``or``/``ite`` evaluate lazily.
    """
    if isinstance(f, Symbol):
        try:
            return env[f.name]
        except KeyError:
            raise UnboundVariableError(f"unbound variable {f.name}", f.loc) from None
    lit = value_from_sexpr(f)
    if lit is not None:
        return lit
    if not isinstance(f, SList) or not f.items or not isinstance(f.items[0], Symbol):
        raise SortMismatchError(f"cannot evaluate {print_sexpr(f)}", getattr(f, "loc", None))
    op = f.items[0].name
    args = f.items[1:]

    if op == "ite":
        return eval_formula(args[1] if eval_formula(args[0], env) else args[2], env)
    if op == "and":
        return all(eval_formula(a, env) for a in args)
    if op == "or":
        return any(eval_formula(a, env) for a in args)
    if op == "not":
        return not eval_formula(args[0], env)
    if op == "=>":
        for a in args[:-1]:
            if not eval_formula(a, env):
                return True
        return bool(eval_formula(args[-1], env))

    vals = [eval_formula(a, env) for a in args]
    return apply_op(op, vals, getattr(f, "loc", None))


def apply_op(op: str, vals: list[Value], loc=None) -> Value:
    """Apply a non-lazy operator to evaluated arguments."""
    if op == "=":
        first = vals[0]
        return all(_values_equal(first, v, loc) for v in vals[1:])
    if op == "+":
        return sum(_ints(vals, op, loc))
    if op == "-":
        ints = _ints(vals, op, loc)
        if len(ints) == 1:
            return -ints[0]
        acc = ints[0]
        for v in ints[1:]:
            acc -= v
        return acc
    if op == "*":
        acc = 1
        for v in _ints(vals, op, loc):
            acc *= v
        return acc
    if op == "div":
        a, b = _ints(vals, op, loc)
        return smt_div(a, b)
    if op == "mod":
        a, b = _ints(vals, op, loc)
        return smt_mod(a, b)
    if op in ("<", "<=", ">", ">="):
        a, b = _ints(vals, op, loc)
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]
    if op.startswith("bv"):
        return _apply_bv(op, vals, loc)
    if op == "str.++":
        return "".join(_strs(vals, op, loc))
    if op == "str.len":
        return len(_strs(vals, op, loc)[0])
    if op == "str.at":
        s, i = vals
        if not isinstance(s, str) or isinstance(i, (bool, BitVec, str)):
            raise SortMismatchError("str.at takes (String, Int)", loc)
        return s[i] if 0 <= i < len(s) else ""
    if op == "str.contains":
        a, b = _strs(vals, op, loc)
        return b in a
    raise SortMismatchError(f"unsupported operator {op}", loc)


def _values_equal(a: Value, b: Value, loc) -> bool:
    # bool is an int subclass; keep the sorts apart explicitly
    if isinstance(a, bool) != isinstance(b, bool) or type(a) is not type(b):
        raise SortMismatchError("= compares values of different sorts", loc)
    return a == b


def _ints(vals, op, loc) -> list[int]:
    for v in vals:
        if isinstance(v, (bool, BitVec, str)) or not isinstance(v, int):
            raise SortMismatchError(f"{op} needs Int arguments", loc)
    return vals


def _strs(vals, op, loc) -> list[str]:
    for v in vals:
        if not isinstance(v, str):
            raise SortMismatchError(f"{op} needs String arguments", loc)
    return vals


def _apply_bv(op: str, vals, loc) -> Value:
    for v in vals:
        if not isinstance(v, BitVec):
            raise SortMismatchError(f"{op} needs BitVec arguments", loc)
    w = vals[0].width
    if any(v.width != w for v in vals):
        raise SortMismatchError(f"{op} arguments have mixed widths", loc)
    mask = (1 << w) - 1
    xs = [v.value for v in vals]
    if op == "bvnot":
        return BitVec(w, ~xs[0] & mask)
    if op == "bvneg":
        return BitVec(w, -xs[0] & mask)
    if op == "bvult":
        return xs[0] < xs[1]
    if op == "bvule":
        return xs[0] <= xs[1]
    if op == "bvslt":
        return _to_signed(xs[0], w) < _to_signed(xs[1], w)
    if op == "bvsgt":
        return _to_signed(xs[0], w) > _to_signed(xs[1], w)
    a, b = xs
    if op == "bvadd":
        return BitVec(w, (a + b) & mask)
    if op == "bvsub":
        return BitVec(w, (a - b) & mask)
    if op == "bvmul":
        return BitVec(w, (a * b) & mask)
    if op == "bvand":
        return BitVec(w, a & b)
    if op == "bvor":
        return BitVec(w, a | b)
    if op == "bvxor":
        return BitVec(w, a ^ b)
    if op == "bvshl":
        return BitVec(w, (a << b) & mask if b < w else 0)
    if op == "bvlshr":
        return BitVec(w, a >> b if b < w else 0)
    if op == "bvashr":
        if b >= w:
            return BitVec(w, mask if a >> (w - 1) else 0)
        if a >> (w - 1):
            return BitVec(w, ((a | ~mask) >> b) & mask)
        return BitVec(w, a >> b)
    raise SortMismatchError(f"unsupported operator {op}", loc)


def _to_signed(v: int, w: int) -> int:
    return v - (1 << w) if v >> (w - 1) else v


# ---------------------------------------------------------------------------
# Outcomes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalOk:
    outputs: dict[str, Value]


@dataclass(frozen=True)
class FuelExhausted:
    steps_used: int


@dataclass(frozen=True)
class GuardFailure:
    relation: str
    constructor: str


@dataclass(frozen=True)
class NondetAmbiguity:
    chc_indices: tuple[int, ...]


EvalOutcome = Union[EvalOk, FuelExhausted, GuardFailure, NondetAmbiguity]


class _FuelOut(Exception):
    pass


class _Ambiguous(Exception):
    def __init__(self, indices: tuple[int, ...]):
        self.indices = indices


# ---------------------------------------------------------------------------
# Plan compilation
# ---------------------------------------------------------------------------

_C_COMPUTE = 0
_C_GUARD = 1
_C_INVOKE = 2


class CompiledPlan:
    __slots__ = ("relation", "constructor", "chc_index", "nslots", "in_slots",
                 "out_slots", "steps", "tail_in_slots", "slot_of", "source")

    def __init__(self, plan: EvaluationPlan):
        self.relation = plan.relation
        self.constructor = plan.constructor
        self.chc_index = plan.chc_index
        self.source = plan
        slot_of: dict[str, int] = {}
        for var, _ in plan.var_sorts:
            slot_of.setdefault(var, len(slot_of))
        self.slot_of = slot_of
        self.nslots = len(slot_of)
        self.in_slots = tuple(slot_of[v] for v in plan.inputs)
        self.out_slots = tuple(slot_of[v] for v in plan.outputs)
        self.steps: list[tuple] = []
        self.tail_in_slots: tuple[int, ...] | None = None

    def compile(self, sorts: dict[str, Sort], op_dicts: dict[str, dict]) -> None:
        plan = self.source
        instrs = list(plan.instructions)
        tail = None
        if instrs and isinstance(instrs[-1], Invoke):
            last = instrs[-1]
            if (last.target == SELF and last.relation == plan.relation
                    and last.out_vars == plan.outputs):
                tail = last
                instrs = instrs[:-1]
        steps = []
        for ins in instrs:
            if isinstance(ins, Compute):
                fn = compile_formula(ins.formula, self.slot_of, sorts)
                steps.append((_C_COMPUTE, self.slot_of[ins.var], fn))
            elif isinstance(ins, Guard):
                fn = compile_formula(ins.formula, self.slot_of, sorts)
                steps.append((_C_GUARD, fn))
            else:
                steps.append((_C_INVOKE, ins.target, op_dicts[ins.relation],
                              tuple(self.slot_of[v] for v in ins.in_vars),
                              tuple(self.slot_of[v] for v in ins.out_vars)))
        self.steps = steps
        if tail is not None:
            self.tail_in_slots = tuple(self.slot_of[v] for v in tail.in_vars)


def compile_formula(f: SExpr, slot_of: Mapping[str, int],
                    sorts: Mapping[str, Sort]) -> Callable:
    """Compile to a closure over the slot state list; sorts resolve dispatch."""
    if isinstance(f, Symbol):
        s = slot_of[f.name]
        return lambda st: st[s]
    lit = value_from_sexpr(f)
    if lit is not None:
        raw = _raw(lit)
        return lambda st: raw
    assert isinstance(f, SList) and f.items and isinstance(f.items[0], Symbol)
    op = f.items[0].name
    fns = [compile_formula(a, slot_of, sorts) for a in f.items[1:]]

    if op == "ite":
        c, t, e = fns
        return lambda st: t(st) if c(st) else e(st)
    if op == "and":
        if len(fns) == 2:
            a, b = fns
            return lambda st: a(st) and b(st)
        return lambda st: all(fn(st) for fn in fns)
    if op == "or":
        if len(fns) == 2:
            a, b = fns
            return lambda st: a(st) or b(st)
        return lambda st: any(fn(st) for fn in fns)
    if op == "not":
        (a,) = fns
        return lambda st: not a(st)
    if op == "=>":
        def imp(st, fns=tuple(fns)):
            for fn in fns[:-1]:
                if not fn(st):
                    return True
            return fns[-1](st)
        return imp
    if op == "=":
        if len(fns) == 2:
            a, b = fns
            return lambda st: a(st) == b(st)
        return lambda st: len({fn(st) for fn in fns}) == 1
    if op == "+":
        if len(fns) == 2:
            a, b = fns
            return lambda st: a(st) + b(st)
        return lambda st: sum(fn(st) for fn in fns)
    if op == "-":
        if len(fns) == 1:
            (a,) = fns
            return lambda st: -a(st)
        if len(fns) == 2:
            a, b = fns
            return lambda st: a(st) - b(st)
        def sub(st, fns=tuple(fns)):
            acc = fns[0](st)
            for fn in fns[1:]:
                acc -= fn(st)
            return acc
        return sub
    if op == "*":
        if len(fns) == 2:
            a, b = fns
            return lambda st: a(st) * b(st)
        def mul(st, fns=tuple(fns)):
            acc = 1
            for fn in fns:
                acc *= fn(st)
            return acc
        return mul
    if op == "div":
        a, b = fns
        return lambda st: smt_div(a(st), b(st))
    if op == "mod":
        a, b = fns
        return lambda st: smt_mod(a(st), b(st))
    if op in ("<", "<=", ">", ">="):
        a, b = fns
        return {"<": lambda st: a(st) < b(st),
                "<=": lambda st: a(st) <= b(st),
                ">": lambda st: a(st) > b(st),
                ">=": lambda st: a(st) >= b(st)}[op]
    if op.startswith("bv"):
        return _compile_bv(op, f, fns, slot_of, sorts)
    if op == "str.++":
        if len(fns) == 2:
            a, b = fns
            return lambda st: a(st) + b(st)
        return lambda st: "".join(fn(st) for fn in fns)
    if op == "str.len":
        (a,) = fns
        return lambda st: len(a(st))
    if op == "str.at":
        a, b = fns
        def at(st):
            s, i = a(st), b(st)
            return s[i] if 0 <= i < len(s) else ""
        return at
    if op == "str.contains":
        a, b = fns
        return lambda st: b(st) in a(st)
    raise SortMismatchError(f"unsupported operator {op}", getattr(f, "loc", None))


def _compile_bv(op: str, f: SList, fns, slot_of, sorts) -> Callable:
    # width is static: infer it from the first argument
    arg_sort = formula_sort(f.items[1], sorts)
    if not isinstance(arg_sort, BitVecSort):
        raise SortMismatchError(f"{op} needs BitVec arguments", f.loc)
    w = arg_sort.width
    mask = (1 << w) - 1
    if op == "bvnot":
        (a,) = fns
        return lambda st: ~a(st) & mask
    if op == "bvneg":
        (a,) = fns
        return lambda st: -a(st) & mask
    a, b = fns
    if op == "bvadd":
        return lambda st: (a(st) + b(st)) & mask
    if op == "bvsub":
        return lambda st: (a(st) - b(st)) & mask
    if op == "bvmul":
        return lambda st: (a(st) * b(st)) & mask
    if op == "bvand":
        return lambda st: a(st) & b(st)
    if op == "bvor":
        return lambda st: a(st) | b(st)
    if op == "bvxor":
        return lambda st: a(st) ^ b(st)
    if op == "bvshl":
        return lambda st: (a(st) << s) & mask if (s := b(st)) < w else 0
    if op == "bvlshr":
        return lambda st: a(st) >> s if (s := b(st)) < w else 0
    if op == "bvashr":
        def ashr(st):
            x, s = a(st), b(st)
            neg = x >> (w - 1)
            if s >= w:
                return mask if neg else 0
            return ((x | ~mask) >> s) & mask if neg else x >> s
        return ashr
    if op == "bvult":
        return lambda st: a(st) < b(st)
    if op == "bvule":
        return lambda st: a(st) <= b(st)
    if op == "bvslt":
        return lambda st: _to_signed(a(st), w) < _to_signed(b(st), w)
    if op == "bvsgt":
        return lambda st: _to_signed(a(st), w) > _to_signed(b(st), w)
    raise SortMismatchError(f"unsupported operator {op}", f.loc)


# ---------------------------------------------------------------------------
# Examples and specification classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IOExample:
    """A ground relation instance: concrete values for every value position."""

    relation: str
    inputs: tuple[Value, ...]   # input positions, declaration order
    outputs: tuple[Value, ...]  # output positions, declaration order


@dataclass(frozen=True)
class ExamplesResult:
    passed: bool
    failing_index: int | None = None
    reason: str | None = None


@dataclass
class SpecSplit:
    """Constraints bucketed by how they can be checked.

    ``direct`` are ground relation applications on the target;
    ``ground`` are quantifier-free (possibly existential) formulas the
    evaluator can check; ``universal`` contain ``forall`` and need the
    logical verifier.
    """

    direct: list[IOExample]
    ground: list[SExpr]
    universal: list[SExpr]

    @property
    def has_logical_spec(self) -> bool:
        return bool(self.universal)


def split_spec(problem: SynthesisProblem) -> SpecSplit:
    from .analyzer import constraint_has_forall

    direct: list[IOExample] = []
    ground: list[SExpr] = []
    universal: list[SExpr] = []
    for c in problem.constraints:
        ex = _direct_example(c, problem)
        if ex is not None:
            direct.append(ex)
        elif constraint_has_forall(c):
            universal.append(c)
        else:
            ground.append(c)
    return SpecSplit(direct, ground, universal)


def _direct_example(c: SExpr, problem: SynthesisProblem) -> IOExample | None:
    if not (isinstance(c, SList) and c.items and isinstance(c.items[0], Symbol)
            and problem.has_relation(c.items[0].name)):
        return None
    rel = problem.relation(c.items[0].name)
    if len(c.items) != len(rel.params) + 1 or not rel.has_modes:
        return None
    args = c.items[1:]
    if args[rel.term_index] != Symbol(problem.target.name):
        return None
    values: dict[int, Value] = {}
    for i, arg in enumerate(args):
        if i == rel.term_index:
            continue
        v = value_from_sexpr(arg)
        if v is None:
            return None
        values[i] = v
    return IOExample(
        rel.name,
        tuple(values[i] for i in rel.input_indices),
        tuple(values[i] for i in rel.output_indices),
    )


# ---------------------------------------------------------------------------
# The evaluator proper
# ---------------------------------------------------------------------------

_UNBOUND = object()

FIRST_MATCH = "first-match"
STRICT = "strict"

DEFAULT_FUEL = 10**6


class Evaluator:
    """Shared, immutable plan table; each evaluation owns its private state."""

    def __init__(self, problem: SynthesisProblem,
                 opres: OperationalizationResult | None = None,
                 default_fuel: int = DEFAULT_FUEL,
                 mode: str = FIRST_MATCH):
        if opres is None:
            opres = operationalize_all(problem)
        self.problem = problem
        self.opres = opres
        self.default_fuel = default_fuel
        self.mode = mode

        # relation name -> {constructor -> [CompiledPlan in CHC order]}
        self.op_dicts: dict[str, dict[str, list[CompiledPlan]]] = {
            r.name: {} for r in problem.relations
        }
        compiled: list[tuple[CompiledPlan, EvaluationPlan]] = []
        for (rel, ctor), plans in opres.plans.items():
            for plan in plans:
                cp = CompiledPlan(plan)
                self.op_dicts[rel].setdefault(ctor, []).append(cp)
                compiled.append((cp, plan))
        for cp, plan in compiled:
            cp.compile(dict(plan.var_sorts), self.op_dicts)

        if sys.getrecursionlimit() < 20000:
            sys.setrecursionlimit(20000)

    # -- core engine -----------------------------------------------------------

    def _run(self, term: Node, op_dict: dict, in_vals: list, fuel: list):
        """Returns output raw values, or None when no alternative's guards hold."""
        while True:
            plans = op_dict.get(term.op)
            if not plans:
                raise MissingPlanError(
                    f"no executable semantics for constructor {term.op}")
            tail = None
            for plan in plans:
                state = [None] * plan.nslots
                for s, v in zip(plan.in_slots, in_vals):
                    state[s] = v
                failed = False
                for step in plan.steps:
                    fuel[0] -= 1
                    if fuel[0] < 0:
                        raise _FuelOut()
                    k = step[0]
                    if k == _C_COMPUTE:
                        state[step[1]] = step[2](state)
                    elif k == _C_GUARD:
                        if not step[1](state):
                            failed = True
                            break
                    else:
                        child = term.children[step[1]] if step[1] >= 0 else term
                        res = self._run(child, step[2],
                                        [state[i] for i in step[3]], fuel)
                        if res is None:
                            failed = True
                            break
                        for s, v in zip(step[4], res):
                            state[s] = v
                if failed:
                    continue
                if plan.tail_in_slots is not None:
                    fuel[0] -= 1
                    if fuel[0] < 0:
                        raise _FuelOut()
                    tail = [state[i] for i in plan.tail_in_slots]
                    break
                return [state[i] for i in plan.out_slots]
            if tail is None:
                return None
            in_vals = tail

    def _run_strict(self, term: Node, op_dict: dict, in_vals: list, fuel: list):
        plans = op_dict.get(term.op)
        if not plans:
            raise MissingPlanError(f"no executable semantics for constructor {term.op}")
        successes: list[tuple[int, list]] = []
        for plan in plans:
            state = [None] * plan.nslots
            for s, v in zip(plan.in_slots, in_vals):
                state[s] = v
            failed = False
            steps = list(plan.steps)
            if plan.tail_in_slots is not None:
                # strict mode does not use the tail-call shortcut
                steps = steps + [(_C_INVOKE, SELF, op_dict,
                                  plan.tail_in_slots, plan.out_slots)]
            for step in steps:
                fuel[0] -= 1
                if fuel[0] < 0:
                    raise _FuelOut()
                k = step[0]
                if k == _C_COMPUTE:
                    state[step[1]] = step[2](state)
                elif k == _C_GUARD:
                    if not step[1](state):
                        failed = True
                        break
                else:
                    child = term.children[step[1]] if step[1] >= 0 else term
                    res = self._run_strict(child, step[2],
                                           [state[i] for i in step[3]], fuel)
                    if res is None:
                        failed = True
                        break
                    for s, v in zip(step[4], res):
                        state[s] = v
            if not failed:
                successes.append((plan.chc_index, [state[i] for i in plan.out_slots]))
        if not successes:
            return None
        if len(successes) > 1:
            raise _Ambiguous(tuple(i for i, _ in successes))
        return successes[0][1]

    # -- public API ----------------------------------------------------------------

    def evaluate(self, term: ProgramTerm, relation: str,
                 inputs: Mapping[str, Value], fuel: int | None = None,
                 mode: str | None = None) -> EvalOutcome:
        """Run ``term`` under ``relation``; one fuel unit per instruction."""
        if not is_complete(term):
            raise IncompleteTermError("cannot evaluate a term containing holes")
        rel = self.problem.relation(relation)
        in_vals = []
        for i in rel.input_indices:
            name = rel.params[i][0]
            if name not in inputs:
                raise UnboundVariableError(f"input {name} not bound")
            in_vals.append(_raw(inputs[name]))
        budget = self.default_fuel if fuel is None else fuel
        cell = [budget]
        runner = self._run_strict if (mode or self.mode) == STRICT else self._run
        try:
            res = runner(term, self.op_dicts[relation], in_vals, cell)
        except _FuelOut:
            return FuelExhausted(budget)
        except _Ambiguous as amb:
            return NondetAmbiguity(amb.indices)
        except RecursionError:
            # deep non-tail recursion: report it as exhausting the step budget
            return FuelExhausted(budget - max(cell[0], 0))
        if res is None:
            return GuardFailure(relation, term.op)
        outputs = {}
        for (i, raw) in zip(rel.output_indices, res):
            name, sort = rel.params[i]
            outputs[name] = _wrap(raw, sort)
        return EvalOk(outputs)

    def evaluate_traced(self, term: ProgramTerm, relation: str,
                        inputs: Mapping[str, Value], fuel: int | None = None
                        ) -> tuple[EvalOutcome, int | None, dict[str, Value]]:
        """Like :meth:`evaluate`, but also report which of the root
        constructor's CHCs fired and the full root-level variable state
        (auxiliaries included).  Used by plan-vs-CHC oracles."""
        if not is_complete(term):
            raise IncompleteTermError("cannot evaluate a term containing holes")
        rel = self.problem.relation(relation)
        in_vals = [_raw(inputs[rel.params[i][0]]) for i in rel.input_indices]
        budget = self.default_fuel if fuel is None else fuel
        cell = [budget]
        op_dict = self.op_dicts[relation]
        plans = op_dict.get(term.op)
        if not plans:
            raise MissingPlanError(f"no executable semantics for constructor {term.op}")
        try:
            for plan in plans:
                state = [None] * plan.nslots
                for s, v in zip(plan.in_slots, in_vals):
                    state[s] = v
                failed = False
                for step in plan.steps:
                    cell[0] -= 1
                    if cell[0] < 0:
                        raise _FuelOut()
                    k = step[0]
                    if k == _C_COMPUTE:
                        state[step[1]] = step[2](state)
                    elif k == _C_GUARD:
                        if not step[1](state):
                            failed = True
                            break
                    else:
                        child = term.children[step[1]] if step[1] >= 0 else term
                        res = self._run(child, step[2],
                                        [state[i] for i in step[3]], cell)
                        if res is None:
                            failed = True
                            break
                        for s, v in zip(step[4], res):
                            state[s] = v
                if failed:
                    continue
                if plan.tail_in_slots is not None:
                    res = self._run(term, op_dict,
                                    [state[i] for i in plan.tail_in_slots], cell)
                    if res is None:
                        continue
                    for s, v in zip(plan.out_slots, res):
                        state[s] = v
                sorts = dict(plan.source.var_sorts)
                binding = {var: _wrap(state[slot], sorts[var])
                           for var, slot in plan.slot_of.items()
                           if state[slot] is not None}
                outputs = {rel.params[i][0]: binding[rel.params[i][0]]
                           for i in rel.output_indices}
                return EvalOk(outputs), plan.chc_index, binding
        except _FuelOut:
            return FuelExhausted(budget), None, {}
        except RecursionError:
            return FuelExhausted(budget - max(cell[0], 0)), None, {}
        return GuardFailure(relation, term.op), None, {}

    # -- example checking ----------------------------------------------------------

    def prepare(self, examples: list[IOExample]) -> list[tuple]:
        """Precompute raw value tuples for the candidate-checking hot loop."""
        prepared = []
        for ex in examples:
            rel = self.problem.relation(ex.relation)
            prepared.append((
                self.op_dicts[ex.relation],
                [_raw(v) for v in ex.inputs],
                [_raw(v) for v in ex.outputs],
                ex.relation,
            ))
        return prepared

    def failing_example(self, term: Node, prepared: list[tuple],
                        fuel: int | None = None) -> int | None:
        """Index of the first failing prepared example, or None when all pass."""
        budget = self.default_fuel if fuel is None else fuel
        run = self._run_strict if self.mode == STRICT else self._run
        for idx, (op_dict, in_vals, out_vals, _rel) in enumerate(prepared):
            cell = [budget]
            try:
                res = run(term, op_dict, list(in_vals), cell)
            except (_FuelOut, _Ambiguous, EvalError, RecursionError):
                return idx
            if res != out_vals:
                return idx
        return None

    def run_examples(self, term: ProgramTerm, examples: list[IOExample],
                     fuel: int | None = None) -> ExamplesResult:
        """Evaluate each example's inputs and compare outputs for equality."""
        if not is_complete(term):
            raise IncompleteTermError("cannot evaluate a term containing holes")
        for idx, ex in enumerate(examples):
            rel = self.problem.relation(ex.relation)
            inputs = {rel.params[i][0]: v
                      for i, v in zip(rel.input_indices, ex.inputs)}
            outcome = self.evaluate(term, ex.relation, inputs, fuel=fuel)
            if not isinstance(outcome, EvalOk):
                return ExamplesResult(False, idx, type(outcome).__name__)
            got = tuple(outcome.outputs[rel.params[i][0]] for i in rel.output_indices)
            if got != ex.outputs:
                return ExamplesResult(False, idx, f"expected {ex.outputs}, got {got}")
        return ExamplesResult(True)

    # -- evaluator-checkable constraint formulas --------------------------------------

    def check_formula(self, term: Node, formula: SExpr,
                      env: dict[str, Value] | None = None,
                      fuel: int | None = None) -> bool:
        """Check a ground (possibly existential) constraint against ``term``.

        Relation applications on the synthesis target are evaluated with the
        plan engine; existential variables in output positions are bound to
        the computed outputs.  Raises :class:`UnsupportedConstraintError` for
        shapes outside this fragment (the logical verifier handles those).
        """
        scope: dict[str, object] = dict(env) if env else {}
        return bool(self._check(term, formula, scope, fuel))

    def _check(self, term: Node, f: SExpr, scope: dict, fuel: int | None):
        if isinstance(f, SList) and f.items and isinstance(f.items[0], Symbol):
            head = f.items[0].name
            if head == "forall":
                raise UnsupportedConstraintError(
                    "universal constraint cannot be example-checked", f.loc)
            if head == "exists":
                inner = dict(scope)
                for binder in f[1].items:
                    inner[binder[0].name] = _UNBOUND
                return self._check(term, f[2], inner, fuel)
            if head == "and":
                atoms = [c for c in f.items[1:] if self._is_target_app(c)]
                rest = [c for c in f.items[1:] if not self._is_target_app(c)]
                for c in atoms + rest:
                    if not self._check(term, c, scope, fuel):
                        return False
                return True
            if head == "=>":
                for c in f.items[1:-1]:
                    if not self._check(term, c, scope, fuel):
                        return True
                return self._check(term, f.items[-1], scope, fuel)
            if head == "or":
                return any(self._check(term, c, dict(scope), fuel)
                           for c in f.items[1:])
            if head == "not":
                return not self._check(term, f.items[1], dict(scope), fuel)
            if head == "ite":
                branch = f[2] if self._check(term, f[1], scope, fuel) else f[3]
                return self._check(term, branch, scope, fuel)
            if self._is_target_app(f):
                return self._check_relation_atom(term, f, scope, fuel)
        return self._eval_value(f, scope)

    def _is_target_app(self, f: SExpr) -> bool:
        return (isinstance(f, SList) and f.items
                and isinstance(f.items[0], Symbol)
                and self.problem.has_relation(f.items[0].name))

    def _check_relation_atom(self, term: Node, f: SList, scope: dict, fuel):
        rel = self.problem.relation(f.items[0].name)
        if not rel.has_modes:
            raise UnsupportedConstraintError(
                f"relation {rel.name} lacks mode annotations", f.loc)
        args = f.items[1:]
        if args[rel.term_index] != Symbol(self.problem.target.name):
            raise UnsupportedConstraintError(
                "relation application is not on the synthesis target", f.loc)
        inputs = {}
        for i in rel.input_indices:
            inputs[rel.params[i][0]] = self._eval_value(args[i], scope)
        outcome = self.evaluate(term, rel.name, inputs, fuel=fuel)
        if not isinstance(outcome, EvalOk):
            return False
        for i in rel.output_indices:
            name = rel.params[i][0]
            arg = args[i]
            if isinstance(arg, Symbol) and scope.get(arg.name) is _UNBOUND:
                scope[arg.name] = outcome.outputs[name]
            else:
                want = self._eval_value(arg, scope)
                if _values_differ(want, outcome.outputs[name]):
                    return False
        return True

    def _eval_value(self, f: SExpr, scope: dict) -> Value:
        if isinstance(f, Symbol):
            v = scope.get(f.name, None)
            if v is _UNBOUND:
                raise UnsupportedConstraintError(
                    f"variable {f.name} used before any relation output binds it",
                    f.loc)
            if v is None:
                raise UnsupportedConstraintError(f"unbound variable {f.name}", f.loc)
            return v
        lit = value_from_sexpr(f)
        if lit is not None:
            return lit
        if isinstance(f, SList) and f.items and isinstance(f.items[0], Symbol):
            if self.problem.has_relation(f.items[0].name) or f.items[0].name in (
                    "forall", "exists"):
                raise UnsupportedConstraintError(
                    f"nested {f.items[0].name} in a value position", f.loc)
            vals = [self._eval_value(a, scope) for a in f.items[1:]]
            return apply_op(f.items[0].name, vals, f.loc)
        raise UnsupportedConstraintError(
            f"cannot evaluate {print_sexpr(f)}", getattr(f, "loc", None))


def _values_differ(a: Value, b: Value) -> bool:
    if isinstance(a, bool) != isinstance(b, bool) or type(a) is not type(b):
        return True
    return a != b


def evaluate(problem: SynthesisProblem, term: ProgramTerm, relation: str,
             inputs: Mapping[str, Value], fuel: int = DEFAULT_FUEL,
             mode: str = FIRST_MATCH) -> EvalOutcome:
    """One-shot convenience wrapper; builds a fresh plan table per call."""
    return Evaluator(problem, mode=mode).evaluate(term, relation, inputs, fuel=fuel)


def run_examples(problem: SynthesisProblem, term: ProgramTerm,
                 examples: list[IOExample], fuel: int = DEFAULT_FUEL) -> ExamplesResult:
    """One-shot convenience wrapper around :meth:`Evaluator.run_examples`."""
    return Evaluator(problem).run_examples(term, examples, fuel=fuel)
