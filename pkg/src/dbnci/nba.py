"""Nondeterministic Büchi automata with propositional guards.

Automaton documents::

    {"states": ["q0", "q1"], "initial": ["q0"], "accepting": ["q1"],
     "transitions": [{"from": "q0", "guard": "true", "to": "q0"},
                     {"from": "q0", "guard": "indep(A; B)", "to": "q1"},
                     {"from": "q1", "guard": "true", "to": "q1"}]}

A guard denotes the set of letters (sets of propositions) satisfying it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .graphs import is_nontrivial, reachable, strongly_connected_components
from .ltl import Formula, Verdict, atoms, parse_ltl
from .model import ModelError, is_restricted
from .prefix import finite_truth


@dataclass(frozen=True)
class NBA:
    states: tuple
    initial: frozenset
    accepting: frozenset
    transitions: tuple

    def __post_init__(self):
        known = set(self.states)
        if len(known) != len(self.states):
            raise ModelError("duplicate automaton state")
        for group, what in ((self.initial, "initial"), (self.accepting, "accepting")):
            for q in group:
                if q not in known:
                    raise ModelError(f"unknown {what} state {q!r}")
        for src, _, dst in self.transitions:
            for q in (src, dst):
                if q not in known:
                    raise ModelError(f"transition uses unknown state {q!r}")

    def props(self) -> list:
        out = []
        for _, guard, _ in self.transitions:
            for p in atoms(guard):
                if p not in out:
                    out.append(p)
        return out


def guard_holds(guard: Formula, letter) -> bool:
    return finite_truth(guard, [letter])


def nba_from_doc(doc, variables=None, kind="structural") -> NBA:
    if not isinstance(doc, dict):
        raise ModelError("automaton document must be a JSON object")
    try:
        transitions = tuple(
            (tr["from"], parse_ltl(tr["guard"], variables, kind, temporal=False), tr["to"])
            for tr in doc.get("transitions", []))
        return NBA(tuple(doc["states"]), frozenset(doc.get("initial", [])),
                   frozenset(doc.get("accepting", [])), transitions)
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed automaton document: missing or bad field {exc}") from None


def parse_nba(text: str, variables=None, kind="structural") -> NBA:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(exc.msg, exc.lineno, exc.colno) from None
    return nba_from_doc(doc, variables, kind)


def _product(a: NBA, tr):
    n = len(tr)
    letters = tr.letters
    moves = {}
    for q in a.states:
        moves[q] = [(guard, dst) for src, guard, dst in a.transitions if src == q]

    def successors(node):
        q, i = node
        j = tr.next_position(i)
        return [(dst, j) for guard, dst in moves[q] if guard_holds(guard, letters[i])]

    roots = [(q, 0) for q in sorted(a.initial)] if n else []
    return roots, successors


def accepts_lasso(a: NBA, tr) -> bool:
    """Some run over prefix · period^ω visits an accepting state infinitely often."""
    declared = set(tr.props)
    for p in a.props():
        if p not in declared:
            raise ModelError(f"proposition {p} is not part of the trace")
    roots, successors = _product(a, tr)
    live = reachable(roots, successors)
    for comp in strongly_connected_components(sorted(live), successors):
        if is_nontrivial(comp, successors) and any(q in a.accepting for q, _ in comp):
            return True
    return False


def disjoint_union(a: NBA, b: NBA) -> NBA:
    def tag(side, q):
        return f"{side}:{q}"
    return NBA(
        tuple(tag(1, q) for q in a.states) + tuple(tag(2, q) for q in b.states),
        frozenset(tag(1, q) for q in a.initial) | frozenset(tag(2, q) for q in b.initial),
        frozenset(tag(1, q) for q in a.accepting) | frozenset(tag(2, q) for q in b.accepting),
        tuple((tag(1, s), g, tag(1, d)) for s, g, d in a.transitions)
        + tuple((tag(2, s), g, tag(2, d)) for s, g, d in b.transitions))


def check_nba(t, a: NBA, budget=None) -> Verdict:
    """Decide the structural NBA model-checking problem for a DBN-template."""
    from .repr_ts import find_lasso, restricted_trace

    props = [p.validate(t) for p in a.props()]
    for p in props:
        if p.kind != "structural":
            raise ModelError(f"{p} is not a structural proposition")
    restricted = is_restricted(t)
    tr = restricted_trace(t, props) if restricted else find_lasso(t, props, budget)
    return Verdict(accepts_lasso(a, tr), None, len(tr.prefix), len(tr.period),
                   len(tr.prefix_states) + len(tr.period_states), restricted)
