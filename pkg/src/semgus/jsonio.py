"""JSON intermediate representation: an event-tagged array.

The document starts with a ``{"$version": "1.0"}`` header object followed
by one event object per declaration, in a deterministic order.  Formulas
are nested arrays mirroring the s-expression structure; integers outside
the double-exact range are emitted as ``{"$int": "..."}`` strings.
"""

from __future__ import annotations

import json

from .problem import SynthesisProblem
from .sexpr import BitVecLit, BoolLit, Keyword, Numeral, SExpr, SList, StringLit, Symbol
from .sorts import Sort, sort_to_sexpr

JSON_VERSION = "1.0"
_EXACT = 1 << 53


def _int_json(v: int):
    return v if -_EXACT < v < _EXACT else {"$int": str(v)}


def sexpr_to_json(e: SExpr):
    if isinstance(e, Symbol):
        return e.name
    if isinstance(e, Numeral):
        return _int_json(e.value)
    if isinstance(e, BoolLit):
        return e.value
    if isinstance(e, StringLit):
        return {"$string": e.value}
    if isinstance(e, BitVecLit):
        return {"$bitvec": {"width": e.width, "value": _int_json(e.value)}}
    if isinstance(e, Keyword):
        return {"$keyword": e.name}
    if isinstance(e, SList):
        return [sexpr_to_json(x) for x in e.items]
    raise TypeError(f"not an SExpr: {e!r}")


def _sort_json(s: Sort):
    return sexpr_to_json(sort_to_sexpr(s))


def problem_to_json(problem: SynthesisProblem) -> list:
    """Event array; re-ingesting it reconstructs an equal problem."""
    if (not problem.term_types and not problem.relations and not problem.chcs
            and problem.target is None and not problem.constraints
            and not problem.metadata and not problem.check_synth):
        return []
    doc: list = [{"$version": JSON_VERSION,
                  "metadata": {k: sexpr_to_json(v)
                               for k, v in problem.metadata.items()}}]
    for tt in problem.term_types:
        doc.append({"$event": "declare-term-type", "name": tt.name, "arity": tt.arity})
    for tt in problem.term_types:
        for ctor in tt.constructors:
            doc.append({
                "$event": "define-constructor",
                "termType": tt.name,
                "operator": ctor.operator,
                "children": list(ctor.children),
            })
    for rel in problem.relations:
        doc.append({
            "$event": "declare-semantics-relation",
            "name": rel.name,
            "parameters": [{"name": p, "sort": _sort_json(s)} for p, s in rel.params],
            "termIndex": rel.term_index,
            "inputs": list(rel.input_indices),
            "outputs": list(rel.output_indices),
        })
    for chc in problem.chcs:
        doc.append({
            "$event": "chc",
            "relation": chc.head_relation,
            "headArgs": list(chc.head_args),
            "constructor": chc.constructor,
            "childVariables": list(chc.child_vars),
            "body": [{"relation": app.relation, "args": list(app.args)}
                     for app in chc.body],
            "constraint": sexpr_to_json(chc.constraint),
            "auxiliaries": [{"name": v, "sort": _sort_json(s)}
                            for v, s in chc.auxiliaries],
        })
    target = problem.target
    if target is not None:
        grammar = None
        if target.grammar is not None:
            g = target.grammar
            grammar = {
                "nonterminals": [[n, tt] for n, tt in g.nonterminals],
                "rules": {n: [{"operator": p.operator, "children": list(p.children)}
                              for p in g.rules[n]]
                          for n, _ in g.nonterminals},
                "start": g.start,
            }
        doc.append({"$event": "synth-fun", "name": target.name,
                    "termType": target.term_type, "grammar": grammar})
    for c in problem.constraints:
        doc.append({"$event": "constraint", "formula": sexpr_to_json(c)})
    if problem.check_synth:
        doc.append({"$event": "check-synth"})
    return doc


def problem_to_json_text(problem: SynthesisProblem, indent: int | None = 2) -> str:
    return json.dumps(problem_to_json(problem), indent=indent)


def problem_to_events(problem: SynthesisProblem) -> list[SExpr]:
    """The same event stream as the JSON document, as s-expressions."""
    events: list[SExpr] = [SList((Symbol("version"), StringLit(JSON_VERSION)))]
    for key, value in problem.metadata.items():
        events.append(SList((Symbol("metadata"), Keyword(key), value)))
    for tt in problem.term_types:
        events.append(SList((Symbol("declare-term-type"), Symbol(tt.name),
                             Numeral(tt.arity))))
    for tt in problem.term_types:
        for ctor in tt.constructors:
            events.append(SList((Symbol("define-constructor"), Symbol(tt.name),
                                 Symbol(ctor.operator))
                                + tuple(Symbol(c) for c in ctor.children)))
    for rel in problem.relations:
        events.append(SList((
            Symbol("declare-semantics-relation"), Symbol(rel.name),
            SList(tuple(SList((Symbol(p), sort_to_sexpr(s))) for p, s in rel.params)),
            Keyword("term-index"), Numeral(rel.term_index),
            Keyword("input"), SList(tuple(Numeral(i) for i in rel.input_indices)),
            Keyword("output"), SList(tuple(Numeral(i) for i in rel.output_indices)),
        )))
    for chc in problem.chcs:
        events.append(SList((
            Symbol("chc"), Symbol(chc.head_relation),
            SList(tuple(Symbol(a) for a in chc.head_args)),
            SList((Symbol(chc.constructor),) + tuple(Symbol(v) for v in chc.child_vars)),
            SList((Symbol("body"),) + tuple(
                SList((Symbol(app.relation),) + tuple(Symbol(a) for a in app.args))
                for app in chc.body)),
            SList((Symbol("constraint"), chc.constraint)),
            SList((Symbol("aux"),) + tuple(
                SList((Symbol(v), sort_to_sexpr(s))) for v, s in chc.auxiliaries)),
        )))
    target = problem.target
    if target is not None:
        synth: list[SExpr] = [Symbol("synth-fun"), Symbol(target.name),
                              Symbol(target.term_type)]
        if target.grammar is not None:
            g = target.grammar
            synth.append(SList(tuple(SList((Symbol(n), Symbol(tt)))
                                     for n, tt in g.nonterminals)))
            synth.append(SList(tuple(
                SList((Symbol(n),) + tuple(
                    SList((Symbol(p.operator),) + tuple(Symbol(c) for c in p.children))
                    for p in g.rules[n]))
                for n, _tt in g.nonterminals)))
        events.append(SList(tuple(synth)))
    for c in problem.constraints:
        events.append(SList((Symbol("constraint"), c)))
    if problem.check_synth:
        events.append(SList((Symbol("check-synth"),)))
    return events
