"""Domain model for analyzed synthesis problems.

Everything here is immutable after construction and safe to share across
workers.  Instances compare structurally, which the JSON round-trip tests
rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Mapping

from .errors import UnresolvedNameError
from .sexpr import SExpr
from .sorts import Sort, TermSort

if TYPE_CHECKING:  # pragma: no cover
    from .chc import Chc


@dataclass(frozen=True)
class Constructor:
    operator: str
    children: tuple[str, ...]  # child term-type names

    @property
    def arity(self) -> int:
        return len(self.children)


@dataclass(frozen=True)
class TermTypeDecl:
    name: str
    arity: int
    constructors: tuple[Constructor, ...]


@dataclass(frozen=True)
class SemanticRelation:
    """Signature of one semantic relation with input/output mode annotations.

    Exactly one parameter is term-sorted; it is the term under evaluation
    and is implicitly an input.  ``input_indices``/``output_indices``
    partition the remaining positions when mode annotations were given.
    """

    name: str
    params: tuple[tuple[str, Sort], ...]
    term_index: int
    input_indices: tuple[int, ...]
    output_indices: tuple[int, ...]

    @property
    def term_type(self) -> str:
        sort = self.params[self.term_index][1]
        assert isinstance(sort, TermSort)
        return sort.term_type

    @property
    def has_modes(self) -> bool:
        return bool(self.input_indices) or bool(self.output_indices)

    def input_params(self) -> list[tuple[str, Sort]]:
        return [self.params[i] for i in self.input_indices]

    def output_params(self) -> list[tuple[str, Sort]]:
        return [self.params[i] for i in self.output_indices]

    def value_params(self) -> list[tuple[str, Sort]]:
        return [p for i, p in enumerate(self.params) if i != self.term_index]


@dataclass(frozen=True)
class Production:
    operator: str
    children: tuple[str, ...]  # child nonterminal names


@dataclass(frozen=True)
class Grammar:
    nonterminals: tuple[tuple[str, str], ...]  # (name, term-type name)
    rules: Mapping[str, tuple[Production, ...]]
    start: str

    def term_type_of(self, nonterminal: str) -> str:
        for name, tt in self.nonterminals:
            if name == nonterminal:
                return tt
        raise UnresolvedNameError(f"unknown nonterminal {nonterminal}")

    def productions(self, nonterminal: str) -> tuple[Production, ...]:
        return self.rules[nonterminal]


@dataclass(frozen=True)
class SynthTarget:
    name: str
    term_type: str
    grammar: Grammar | None = None


@dataclass
class SynthesisProblem:
    term_types: tuple[TermTypeDecl, ...]
    relations: tuple[SemanticRelation, ...]
    chcs: tuple["Chc", ...]
    target: SynthTarget | None
    constraints: tuple[SExpr, ...]
    metadata: dict[str, SExpr] = field(default_factory=dict)
    check_synth: bool = True

    _tt_by_name: dict = field(default_factory=dict, init=False, compare=False, repr=False)
    _rel_by_name: dict = field(default_factory=dict, init=False, compare=False, repr=False)
    _ctor_index: dict = field(default_factory=dict, init=False, compare=False, repr=False)
    _chc_index: dict = field(default_factory=dict, init=False, compare=False, repr=False)

    def __post_init__(self):
        self._tt_by_name = {tt.name: tt for tt in self.term_types}
        self._rel_by_name = {r.name: r for r in self.relations}
        self._ctor_index = {
            c.operator: (tt, c) for tt in self.term_types for c in tt.constructors
        }
        self._chc_index = {}
        for chc in self.chcs:
            self._chc_index.setdefault((chc.head_relation, chc.constructor), []).append(chc)

    def term_type(self, name: str) -> TermTypeDecl:
        try:
            return self._tt_by_name[name]
        except KeyError:
            raise UnresolvedNameError(f"unknown term type {name}") from None

    def has_term_type(self, name: str) -> bool:
        return name in self._tt_by_name

    def relation(self, name: str) -> SemanticRelation:
        try:
            return self._rel_by_name[name]
        except KeyError:
            raise UnresolvedNameError(f"unknown semantic relation {name}") from None

    def has_relation(self, name: str) -> bool:
        return name in self._rel_by_name

    def constructor(self, operator: str) -> tuple[TermTypeDecl, Constructor]:
        try:
            return self._ctor_index[operator]
        except KeyError:
            raise UnresolvedNameError(f"unknown constructor {operator}") from None

    def has_constructor(self, operator: str) -> bool:
        return operator in self._ctor_index

    def relations_for(self, term_type: str) -> list[SemanticRelation]:
        return [r for r in self.relations if r.term_type == term_type]

    def chcs_for(self, relation: str, operator: str) -> list["Chc"]:
        return self._chc_index.get((relation, operator), [])

    def grammar_or_universe(self) -> Grammar:
        """The target grammar, or the full term universe rooted at the target type."""
        if self.target is None:
            raise UnresolvedNameError("problem has no synthesis target")
        if self.target.grammar is not None:
            return self.target.grammar
        return universe_grammar(self, self.target.term_type)


def universe_grammar(problem: SynthesisProblem, root_term_type: str) -> Grammar:
    """Grammar with one nonterminal per term type and all constructors as rules."""
    nts = tuple((tt.name, tt.name) for tt in problem.term_types)
    rules = {
        tt.name: tuple(Production(c.operator, c.children) for c in tt.constructors)
        for tt in problem.term_types
    }
    problem.term_type(root_term_type)  # existence check
    return Grammar(nts, rules, root_term_type)
