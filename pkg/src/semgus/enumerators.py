"""Baseline enumerative synthesis: top-down and bottom-up term streams.

Top-down search pops the minimum-priority partial program, yields it when
complete, and otherwise expands the leftmost hole with every production.
The priority is ``(size + holes, insertion order)``, which makes the
enumeration order a deterministic, testable contract.

Bottom-up search fills a program bank level by level (by size or height),
offering every constructed term to the registered hooks before insertion;
terms rooted at the start nonterminal are yielded lazily as constructed.
"""

from __future__ import annotations

import heapq
import itertools
import resource
import time
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .errors import (
    MemoryBudgetExceeded,
    NotOperationalizableError,
    UnsupportedConstraintError,
)
from .evaluator import DEFAULT_FUEL, Evaluator, split_spec
from .operational import operationalize_all
from .problem import Grammar, SynthesisProblem
from .terms import Hole, Node, ProgramTerm, count_holes, term_size

TOP_DOWN = "top-down"
BOTTOM_UP_SIZE = "bottom-up-size"
BOTTOM_UP_HEIGHT = "bottom-up-height"
STRATEGIES = (TOP_DOWN, BOTTOM_UP_SIZE, BOTTOM_UP_HEIGHT)


@dataclass(frozen=True)
class PartialProgram:
    term: ProgramTerm
    size: int        # node count, holes excluded
    hole_count: int

    @property
    def priority(self) -> int:
        return self.size + self.hole_count


class MemoryCap:
    """Best-effort soft resource guard, polled at push/insert points.

    Checks the resident-set soft cap and, when a deadline is set, the wall
    clock, so long bank-filling stretches between yields stay bounded.
    """

    def __init__(self, limit_mb: float | None, deadline: float | None = None,
                 poll_every: int = 2048):
        self.limit_kb = limit_mb * 1024 if limit_mb else None
        self.deadline = deadline
        self.poll_every = poll_every
        self._count = 0

    def tick(self) -> None:
        self._count += 1
        if self._count % self.poll_every:
            return
        if (self.limit_kb is not None and
                resource.getrusage(resource.RUSAGE_SELF).ru_maxrss > self.limit_kb):
            raise MemoryBudgetExceeded(
                f"resident set exceeded the {self.limit_kb / 1024:.0f} MiB soft cap")
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _DeadlineReached()


class _DeadlineReached(Exception):
    pass


# ---------------------------------------------------------------------------
# Top-down enumeration
# ---------------------------------------------------------------------------


class TopDownEnumerator:
    def __init__(self, grammar: Grammar, start: str | None = None,
                 max_size: int | None = None, memory_cap: MemoryCap | None = None):
        self.grammar = grammar
        self.start = start or grammar.start
        self.max_size = max_size
        self.memory_cap = memory_cap
        self.exhausted_space = False

    def __iter__(self) -> Iterator[Node]:
        heap: list[tuple[int, int, PartialProgram]] = []
        seq = itertools.count()
        cap = self.memory_cap

        def push(pp: PartialProgram):
            if self.max_size is not None and pp.priority > self.max_size:
                return
            if cap is not None:
                cap.tick()
            heapq.heappush(heap, (pp.priority, next(seq), pp))

        push(PartialProgram(Hole(self.start), 0, 1))
        while heap:
            _, _, pp = heapq.heappop(heap)
            if pp.hole_count == 0:
                yield pp.term  # type: ignore[misc]
                continue
            nt = _leftmost_hole(pp.term)
            for prod in self.grammar.productions(nt):
                filled = Node(prod.operator, tuple(Hole(c) for c in prod.children))
                push(PartialProgram(
                    _replace_leftmost(pp.term, filled),
                    pp.size + 1,
                    pp.hole_count - 1 + len(prod.children),
                ))
        self.exhausted_space = True


def _leftmost_hole(term: ProgramTerm) -> str:
    if isinstance(term, Hole):
        return term.nonterminal
    for child in term.children:
        nt = _leftmost_hole(child)
        if nt is not None:
            return nt
    return None


def _replace_leftmost(term: ProgramTerm, replacement: ProgramTerm) -> ProgramTerm:
    if isinstance(term, Hole):
        return replacement
    children = list(term.children)
    for i, child in enumerate(children):
        if count_holes(child):
            children[i] = _replace_leftmost(child, replacement)
            return Node(term.op, tuple(children))
    raise ValueError("no hole to replace")


def enumerate_top_down(grammar: Grammar, start: str | None = None,
                       max_candidates: int | None = None,
                       max_size: int | None = None) -> Iterator[Node]:
    stream = iter(TopDownEnumerator(grammar, start, max_size))
    if max_candidates is None:
        yield from stream
    else:
        yield from itertools.islice(stream, max_candidates)


# ---------------------------------------------------------------------------
# Bottom-up enumeration
# ---------------------------------------------------------------------------

# BankHook: (bank, term, metric value) -> admit?
BankHook = Callable[["ProgramBank", Node, int], bool]


@dataclass
class ProgramBank:
    metric: str  # "size" | "height"
    levels: dict[tuple[str, int], list[Node]] = field(default_factory=dict)

    def terms(self, nonterminal: str, value: int) -> list[Node]:
        return self.levels.get((nonterminal, value), [])

    def terms_up_to(self, nonterminal: str, value: int) -> list[Node]:
        out = []
        for v in range(1, value + 1):
            out.extend(self.terms(nonterminal, v))
        return out

    def add(self, nonterminal: str, value: int, term: Node) -> None:
        self.levels.setdefault((nonterminal, value), []).append(term)

    def total(self) -> int:
        return sum(len(v) for v in self.levels.values())


class HookChain:
    """Hooks compose in registration order; the first rejection wins."""

    def __init__(self, hooks: tuple[BankHook, ...] = ()):
        self.hooks: list[BankHook] = list(hooks)

    def register_hook(self, hook: BankHook) -> "HookChain":
        self.hooks.append(hook)
        return self

    def admit(self, bank: ProgramBank, term: Node, value: int) -> bool:
        return all(hook(bank, term, value) for hook in self.hooks)


class BottomUpEnumerator:
    def __init__(self, grammar: Grammar, start: str | None = None,
                 metric: str = "size", max_value: int | None = None,
                 memory_cap: MemoryCap | None = None):
        if metric not in ("size", "height"):
            raise ValueError(f"unknown metric {metric}")
        self.grammar = grammar
        self.start = start or grammar.start
        self.metric = metric
        self.max_value = max_value
        self.memory_cap = memory_cap
        self.hooks = HookChain()
        self.bank = ProgramBank(metric)
        self.exhausted_space = False

    def register_hook(self, hook: BankHook) -> "BottomUpEnumerator":
        self.hooks.register_hook(hook)
        return self

    def __iter__(self) -> Iterator[Node]:
        grammar = self.grammar
        bank = self.bank
        cap = self.memory_cap
        value = 0
        while True:
            value += 1
            if self.max_value is not None and value > self.max_value:
                return
            admitted_any = False
            for nt, _tt in grammar.nonterminals:
                for prod in grammar.rules[nt]:
                    for children in self._child_tuples(prod, value):
                        term = Node(prod.operator, children)
                        if cap is not None:
                            cap.tick()
                        if not self.hooks.admit(bank, term, value):
                            continue
                        bank.add(nt, value, term)
                        admitted_any = True
                        if nt == self.start:
                            yield term
            # With a frozen bank, no production can build past the horizon.
            if not admitted_any and value >= self._horizon():
                self.exhausted_space = True
                return

    def _horizon(self) -> int:
        top: dict[str, int] = {}
        for (nt, v), terms in self.bank.levels.items():
            if terms:
                top[nt] = max(top.get(nt, 0), v)
        horizon = 0
        for nt, _tt in self.grammar.nonterminals:
            for prod in self.grammar.rules[nt]:
                if not prod.children:
                    bound = 1
                elif any(c not in top for c in prod.children):
                    continue
                elif self.metric == "size":
                    bound = 1 + sum(top[c] for c in prod.children)
                else:
                    bound = 1 + max(top[c] for c in prod.children)
                horizon = max(horizon, bound)
        return horizon

    def _child_tuples(self, prod, value: int) -> Iterator[tuple[Node, ...]]:
        arity = len(prod.children)
        if arity == 0:
            if value == 1:
                yield ()
            return
        if self.metric == "size":
            for parts in _compositions(value - 1, arity):
                pools = [self.bank.terms(nt, v)
                         for nt, v in zip(prod.children, parts)]
                if all(pools):
                    yield from itertools.product(*pools)
        else:
            # height: children at most value-1 deep, at least one exactly value-1
            top = value - 1
            if top < 1:
                return
            for pivot in range(arity):
                pools = []
                for i, nt in enumerate(prod.children):
                    if i < pivot:
                        pools.append(self.bank.terms_up_to(nt, top - 1))
                    elif i == pivot:
                        pools.append(self.bank.terms(nt, top))
                    else:
                        pools.append(self.bank.terms_up_to(nt, top))
                if all(pools):
                    yield from itertools.product(*pools)


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All ways to write ``total`` as an ordered sum of ``parts`` positives."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_bottom_up(grammar: Grammar, start: str | None = None,
                        metric: str = "size", hook: BankHook | None = None,
                        max_candidates: int | None = None,
                        max_value: int | None = None) -> Iterator[Node]:
    enum = BottomUpEnumerator(grammar, start, metric, max_value)
    if hook is not None:
        enum.register_hook(hook)
    stream = iter(enum)
    if max_candidates is None:
        yield from stream
    else:
        yield from itertools.islice(stream, max_candidates)


def make_enumerator(grammar: Grammar, strategy: str,
                    max_size: int | None = None,
                    memory_cap: MemoryCap | None = None,
                    hooks: tuple[BankHook, ...] = ()):
    if strategy == TOP_DOWN:
        return TopDownEnumerator(grammar, max_size=max_size, memory_cap=memory_cap)
    if strategy == BOTTOM_UP_SIZE:
        enum = BottomUpEnumerator(grammar, metric="size", max_value=max_size,
                                  memory_cap=memory_cap)
    elif strategy == BOTTOM_UP_HEIGHT:
        enum = BottomUpEnumerator(grammar, metric="height", max_value=max_size,
                                  memory_cap=memory_cap)
    else:
        raise ValueError(f"unknown strategy {strategy}")
    for hook in hooks:
        enum.register_hook(hook)
    return enum


# ---------------------------------------------------------------------------
# Enumeration-based solving
# ---------------------------------------------------------------------------


@dataclass
class SolveLimits:
    max_candidates: int | None = None
    max_size: int | None = None
    timeout_s: float | None = None
    fuel: int = DEFAULT_FUEL
    memory_mb: float | None = None
    strict: bool = False


@dataclass
class SolveOutcome:
    status: str  # solved | exhausted | budget | timeout | memout | inconclusive
    term: Node | None = None
    candidates: int = 0
    wall_seconds: float = 0.0
    evals_per_second: float = 0.0
    cex_count: int = 0
    message: str | None = None
    trace: list = field(default_factory=list)


def solve(problem: SynthesisProblem, strategy: str = TOP_DOWN,
          limits: SolveLimits | None = None,
          hooks: tuple[BankHook, ...] = (),
          solver_config=None) -> SolveOutcome:
    """Search the target grammar (or the full universe) for a satisfying term.

    Example-only problems are solved by pure enumeration against the
    evaluator; problems with a universally quantified specification are
    wrapped in the CEGIS loop from :mod:`semgus.verify`.
    """
    limits = limits or SolveLimits()
    spec = split_spec(problem)
    opres = operationalize_all(problem)
    if opres.errors and (spec.direct or spec.ground or spec.universal):
        raise NotOperationalizableError(
            "cannot example-check candidates; plans failed: "
            + "; ".join(str(e) for e in opres.errors))

    if spec.has_logical_spec:
        from .verify import cegis
        return cegis(problem, strategy, limits=limits, hooks=hooks,
                     config=solver_config, opres=opres)

    mode = "strict" if limits.strict else "first-match"
    evaluator = Evaluator(problem, opres, default_fuel=limits.fuel, mode=mode)
    prepared = evaluator.prepare(spec.direct)
    grammar = problem.grammar_or_universe()
    started = time.monotonic()
    deadline = started + limits.timeout_s if limits.timeout_s is not None else None
    cap = (MemoryCap(limits.memory_mb, deadline)
           if (limits.memory_mb or deadline is not None) else None)
    enum = make_enumerator(grammar, strategy, max_size=limits.max_size,
                           memory_cap=cap, hooks=hooks)
    count = 0

    def outcome(status: str, term=None, message=None) -> SolveOutcome:
        wall = time.monotonic() - started
        return SolveOutcome(status, term, count, wall,
                            count / wall if wall > 0 else 0.0, 0, message)

    try:
        for term in enum:
            if deadline is not None and time.monotonic() > deadline:
                return outcome("timeout")
            if limits.max_candidates is not None and count >= limits.max_candidates:
                return outcome("budget")
            count += 1
            if evaluator.failing_example(term, prepared, fuel=limits.fuel) is not None:
                continue
            if not _ground_constraints_hold(evaluator, term, spec.ground, limits.fuel):
                continue
            return outcome("solved", term)
    except MemoryBudgetExceeded as err:
        return outcome("memout", message=str(err))
    except _DeadlineReached:
        return outcome("timeout")
    if getattr(enum, "exhausted_space", False) and limits.max_size is None:
        return outcome("exhausted")
    return outcome("budget" if limits.max_size is not None else "exhausted")


def _ground_constraints_hold(evaluator: Evaluator, term: Node,
                             ground: list, fuel: int) -> bool:
    for g in ground:
        try:
            if not evaluator.check_formula(term, g, fuel=fuel):
                return False
        except UnsupportedConstraintError:
            continue  # deferred to the logical verifier
    return True
