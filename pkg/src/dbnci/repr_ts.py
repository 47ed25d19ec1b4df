"""Deterministic transition system of representative BN-templates.

The state at time t > 0 is a BN-template over the variables W_1..W_n plus
auxiliary sources U[i,j]: W_i -> W_j iff the step template has W_i' -> W_j',
and U[i,j] is a parent of both W_i and W_j iff the unfolding has a
collision-free path between W_i^t and W_j^t whose interior avoids slice t.
d-separation in the state then coincides with d-separation at slice t of
the unfolding.  The state at time 0 is the initial template itself.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .dsep import d_separated
from .model import BNTemplate, DBNTemplate, ModelError, is_restricted

DEFAULT_STATE_BUDGET = 1_000_000


class StateBudgetExceeded(RuntimeError):
    def __init__(self, budget, visited):
        super().__init__(f"state budget of {budget} exceeded after visiting {visited} states")
        self.budget = budget
        self.visited = visited


def default_budget() -> int:
    return int(os.environ.get("DBNCI_STATE_BUDGET", DEFAULT_STATE_BUDGET))


@dataclass(frozen=True)
class ReprState:
    """``intra_edges`` are index pairs among W; ``u_edges`` are pairs i < j."""

    n: int
    intra_edges: frozenset
    u_edges: frozenset = frozenset()
    is_initial: bool = False

    def key(self):
        """Canonical encoding: the U-pair bit vector plus the initial flag."""
        if self.is_initial:
            return ("initial", tuple(sorted(self.intra_edges)))
        bits = 0
        for pos, (i, j) in enumerate(_pairs(self.n)):
            if (i, j) in self.u_edges:
                bits |= 1 << pos
        return ("u", bits)

    def materialize(self, t: DBNTemplate) -> BNTemplate:
        name = t.variables
        nodes = list(name)
        edges = {(name[a], name[b]) for a, b in self.intra_edges}
        for i, j in sorted(self.u_edges):
            u = u_node(name[i], name[j])
            nodes.append(u)
            edges.add((u, name[i]))
            edges.add((u, name[j]))
        return BNTemplate(tuple(nodes), frozenset(edges))


def u_node(a: str, b: str) -> str:
    return f"U[{a},{b}]"


def _pairs(n):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def initial_state(t: DBNTemplate) -> ReprState:
    return ReprState(t.n, t.initial_edges, frozenset(), True)


def successor(t: DBNTemplate, s: ReprState) -> ReprState:
    """Representative for the next time step.

    For each source A in U or V, collect the primed variables A reaches by
    current-state edges followed by one inter-slice step edge; every pair
    inside that set gets a fresh U'.
    """
    n = t.n
    children = {i: set() for i in range(n)}
    for a, b in s.intra_edges:
        children[a].add(b)
    into_next = {i: set() for i in range(n)}
    for a, b in t.inter_step_edges:
        into_next[a].add(b)

    def hits(start):
        seen = set(start)
        stack = list(start)
        while stack:
            for c in children[stack.pop()]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        out = set()
        for v in seen:
            out |= into_next[v]
        return out

    sources = [(i,) for i in range(n)] + [tuple(pair) for pair in s.u_edges]
    u_next = set()
    for src in sources:
        reached = sorted(hits(src))
        for x in range(len(reached)):
            for y in range(x + 1, len(reached)):
                u_next.add((reached[x], reached[y]))
    return ReprState(n, t.intra_step_edges, frozenset(u_next), False)


def label(t: DBNTemplate, s: ReprState, props) -> frozenset:
    """Propositions d-separated in the materialized state."""
    if not props:
        return frozenset()
    bn = s.materialize(t)
    return frozenset(p for p in props
                     if d_separated(bn, p.validate(t).x, p.y, p.z))


@dataclass(frozen=True)
class LassoTrace:
    """The word prefix · period^ω over sets of propositions."""

    prefix: tuple
    period: tuple
    props: tuple = ()
    prefix_states: tuple = field(default=(), compare=False)
    period_states: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(frozenset(x) for x in self.prefix))
        object.__setattr__(self, "period", tuple(frozenset(x) for x in self.period))
        if not self.period:
            raise ValueError("lasso period must be non-empty")
        if not self.props:
            found = set()
            for letter in self.prefix + self.period:
                found |= letter
            object.__setattr__(self, "props", tuple(sorted(found, key=str)))
        else:
            object.__setattr__(self, "props", tuple(self.props))

    @property
    def letters(self) -> tuple:
        return self.prefix + self.period

    def __len__(self):
        return len(self.prefix) + len(self.period)

    def next_position(self, i: int) -> int:
        return i + 1 if i + 1 < len(self) else len(self.prefix)

    def letter_at(self, time: int) -> frozenset:
        p = len(self.prefix)
        if time < p:
            return self.prefix[time]
        return self.period[(time - p) % len(self.period)]

    def minimal_period(self) -> int:
        """Smallest eventual period of the letter sequence."""
        q = len(self.period)
        for d in range(1, q + 1):
            if q % d == 0 and all(self.period[i] == self.period[i % d] for i in range(q)):
                return d
        return q

    def rotated(self) -> "LassoTrace":
        """Same infinite word with one period letter moved into the prefix."""
        first = self.period[0]
        return LassoTrace(self.prefix + (first,), self.period[1:] + (first,), self.props)


def find_lasso(t: DBNTemplate, props, budget=None) -> LassoTrace:
    """Run ``successor`` from the initial state until the first repeated state."""
    budget = default_budget() if budget is None else budget
    props = tuple(props)
    for p in props:
        p.validate(t)
    states = []
    seen = {}
    s = initial_state(t)
    while s.key() not in seen:
        if len(states) >= budget:
            raise StateBudgetExceeded(budget, len(states))
        seen[s.key()] = len(states)
        states.append(s)
        s = successor(t, s)
    loop = seen[s.key()]
    letters = [label(t, st, props) for st in states]
    return LassoTrace(tuple(letters[:loop]), tuple(letters[loop:]), props,
                      tuple(states[:loop]), tuple(states[loop:]))


def restricted_trace(t: DBNTemplate, props) -> LassoTrace:
    """Letters for times 0..|V|^2; the last one repeats forever."""
    if not is_restricted(t):
        raise ModelError("template is not restricted")
    props = tuple(props)
    horizon = t.n * t.n
    states = [initial_state(t)]
    for _ in range(horizon):
        states.append(successor(t, states[-1]))
    letters = [label(t, st, props) for st in states]
    return LassoTrace(tuple(letters[:horizon]), (letters[horizon],), props,
                      tuple(states[:horizon]), (states[horizon],))


def state_trace(t: DBNTemplate, props, steps: int) -> list:
    """Letters for times 0..steps by direct iteration (no lasso detection)."""
    s = initial_state(t)
    out = []
    for _ in range(steps + 1):
        out.append(label(t, s, props))
        s = successor(t, s)
    return out
