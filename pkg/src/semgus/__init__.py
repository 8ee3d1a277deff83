"""Toolkit for SemGuS (Semantics-Guided Synthesis) problems.

Parses the s-expression problem format, compiles CHC semantics into
executable evaluation plans, verifies candidates against examples or with
an external SMT solver, and solves problems with baseline top-down and
bottom-up enumerators inside a CEGIS loop.
"""

from .analyzer import analyze, analyze_text, load_problem, print_semgus
from .chc import Chc, RelationApp, desugar_match, formula_sort
from .enumerators import (
    BottomUpEnumerator,
    HookChain,
    ProgramBank,
    SolveLimits,
    SolveOutcome,
    TopDownEnumerator,
    enumerate_bottom_up,
    enumerate_top_down,
    solve,
)
from .errors import Location, SemgusError
from .evaluator import (
    BitVec,
    EvalOk,
    Evaluator,
    ExamplesResult,
    FuelExhausted,
    GuardFailure,
    IOExample,
    NondetAmbiguity,
    eval_formula,
    evaluate,
    run_examples,
    split_spec,
)
from .jsonio import problem_to_json, problem_to_json_text
from .operational import (
    EvaluationPlan,
    build_dataflow,
    operationalize_all,
    order_chc,
    plan_to_text,
)
from .problem import (
    Constructor,
    Grammar,
    Production,
    SemanticRelation,
    SynthTarget,
    SynthesisProblem,
    TermTypeDecl,
    universe_grammar,
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
from .sorts import BitVecSort, BoolSort, IntSort, Sort, StringSort, TermSort
from .terms import Hole, Node, ProgramTerm, is_complete, print_term, term_from_sexpr
from .verify import (
    Inconclusive,
    Refuted,
    SmtScript,
    SolverConfig,
    VerificationResult,
    Verified,
    cegis,
    default_solver_config,
    emit_smt_script,
    verify_logical,
)

__version__ = "0.1.0"
