"""Domain types for DBN-templates, full DBNs and CI propositions.

Models are read from and written to a JSON document::

    {
      "variables": ["L", "O", "S", "H"],
      "initial_edges": [["L", "O"], ["H", "S"]],
      "step_edges": [["L", "L'"], ["O", "L'"], ["L'", "O'"], ...],
      "domains": {"L": [0, 1], ...},                       # optional
      "cpds": {"L'": {"parents": ["L", "O"],               # optional
                      "table": [{"given": [0, 0], "dist": ["1/5", "4/5"]}, ...]}},
      "propositions": ["indep(O; S | L)"]                  # optional
    }

A trailing apostrophe marks the primed (next-slice) copy of a variable.
Probabilities are parsed exactly: ``"1/5"``, ``"0.2"`` and ``0.2`` all
become ``Fraction(1, 5)``.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, NamedTuple

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class ModelError(ValueError):
    """Raised for malformed or invalid model documents."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class Slot(NamedTuple):
    """A variable of the step template: ``index`` in V, ``primed`` for V'."""

    index: int
    primed: bool


def _topological_order(nodes, edges):
    """Kahn's algorithm; returns None if the graph has a cycle."""
    indeg = {n: 0 for n in nodes}
    children = {n: [] for n in nodes}
    for a, b in edges:
        children[a].append(b)
        indeg[b] += 1
    ready = [n for n in nodes if indeg[n] == 0]
    order = []
    while ready:
        n = ready.pop()
        order.append(n)
        for c in children[n]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    if len(order) != len(indeg):
        return None
    return order


@dataclass(frozen=True)
class BNTemplate:
    """A DAG over hashable node identifiers."""

    nodes: tuple
    edges: frozenset

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", frozenset(self.edges))
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise ModelError("duplicate node in BN-template")
        for a, b in self.edges:
            if a not in known or b not in known:
                raise ModelError(f"edge ({a!r}, {b!r}) uses an unknown node")
        if _topological_order(self.nodes, self.edges) is None:
            raise ModelError("edge relation contains a cycle")
        parents = {n: set() for n in self.nodes}
        children = {n: set() for n in self.nodes}
        for a, b in self.edges:
            parents[b].add(a)
            children[a].add(b)
        object.__setattr__(self, "_parents", parents)
        object.__setattr__(self, "_children", children)

    def parents(self, node) -> set:
        return self._parents[node]

    def children(self, node) -> set:
        return self._children[node]

    def __contains__(self, node):
        return node in self._parents

    def ancestors(self, nodes: Iterable[Hashable]) -> set:
        """Ancestors of ``nodes``, the nodes themselves included."""
        seen = set(nodes)
        stack = list(seen)
        while stack:
            for p in self._parents[stack.pop()]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return seen

    def descendants(self, nodes: Iterable[Hashable]) -> set:
        """Descendants of ``nodes``, the nodes themselves included."""
        seen = set(nodes)
        stack = list(seen)
        while stack:
            for c in self._children[stack.pop()]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return seen

    def topological_order(self) -> list:
        return _topological_order(self.nodes, self.edges)


@dataclass(frozen=True)
class DBNTemplate:
    """Variables V with initial edges E0 over V and step edges into V'.

    ``initial_edges`` holds index pairs; ``step_edges`` holds
    ``(Slot, target_index)`` pairs, the target always being primed.
    """

    variables: tuple
    initial_edges: frozenset = frozenset()
    step_edges: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "initial_edges", frozenset(self.initial_edges))
        object.__setattr__(
            self, "step_edges",
            frozenset((Slot(*src), dst) for src, dst in self.step_edges))
        n = len(self.variables)
        if len(set(self.variables)) != n:
            raise ModelError("variable names must be unique")
        for name in self.variables:
            if not isinstance(name, str) or not _NAME_RE.match(name):
                raise ModelError(f"invalid variable name {name!r}")
        for a, b in self.initial_edges:
            if not (0 <= a < n and 0 <= b < n):
                raise ModelError(f"initial edge ({a}, {b}) out of range")
        for (src, primed), dst in self.step_edges:
            if not (0 <= src < n and 0 <= dst < n):
                raise ModelError(f"step edge ({src}, {dst}) out of range")
        if _topological_order(range(n), self.initial_edges) is None:
            raise ModelError("initial edges contain a cycle")
        if _topological_order(range(n), self.intra_step_edges) is None:
            raise ModelError("intra-slice step edges contain a cycle")

    @property
    def n(self) -> int:
        return len(self.variables)

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise ModelError(f"unknown variable {name!r}") from None

    @property
    def intra_step_edges(self) -> frozenset:
        """Pairs (i, j) with an edge W_i' -> W_j'."""
        return frozenset((s.index, d) for s, d in self.step_edges if s.primed)

    @property
    def inter_step_edges(self) -> frozenset:
        """Pairs (i, j) with an edge W_i -> W_j'."""
        return frozenset((s.index, d) for s, d in self.step_edges if not s.primed)

    def initial_parents(self, i: int) -> list:
        return sorted(a for a, b in self.initial_edges if b == i)

    def step_parents(self, i: int) -> list:
        return sorted(s for s, d in self.step_edges if d == i)

    def slot_name(self, slot: Slot) -> str:
        name = self.variables[slot.index]
        return name + "'" if slot.primed else name

    def parse_slot(self, text: str) -> Slot:
        primed = text.endswith("'")
        return Slot(self.index(text[:-1] if primed else text), primed)


def is_restricted(t: DBNTemplate) -> bool:
    """Every initial edge (X, Y) is mirrored by an intra-slice step edge (X', Y')."""
    return t.initial_edges <= t.intra_step_edges


def parse_rational(value) -> Fraction:
    if isinstance(value, bool):
        raise ModelError(f"not a probability: {value!r}")
    if isinstance(value, (int, str)):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ModelError(f"not a rational number: {value!r}") from None
    if isinstance(value, float):
        # JSON floats are decimal literals; recover the literal, not the binary double.
        return Fraction(repr(value))
    raise ModelError(f"not a rational number: {value!r}")


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class CPDTable:
    """Conditional distribution of one variable given its ordered parents.

    ``child`` and ``parents`` are Slots (initial CPDs use unprimed slots);
    ``rows`` maps a tuple of parent value indices to a tuple of Fractions
    over the child's domain.
    """

    child: Slot
    parents: tuple
    rows: dict = field(hash=False, compare=True)

    def prob(self, value: int, parent_values: tuple) -> Fraction:
        return self.rows[parent_values][value]


@dataclass(frozen=True)
class DBN:
    """A DBN-template together with finite domains and CPDs for every variable."""

    template: DBNTemplate
    domains: tuple
    initial_cpds: tuple
    step_cpds: tuple

    def __post_init__(self):
        t = self.template
        object.__setattr__(self, "domains", tuple(tuple(d) for d in self.domains))
        if len(self.domains) != t.n:
            raise ModelError("one domain per variable required")
        if len(self.initial_cpds) != t.n or len(self.step_cpds) != t.n:
            raise ModelError("one initial and one step CPD per variable required")
        for name, dom in zip(t.variables, self.domains):
            if len(dom) < 2 or len(set(dom)) != len(dom):
                raise ModelError(f"domain of {name} must list at least 2 distinct values")
        for i in range(t.n):
            _check_cpd(self, self.initial_cpds[i], Slot(i, False),
                       [Slot(p, False) for p in t.initial_parents(i)])
            _check_cpd(self, self.step_cpds[i], Slot(i, True), t.step_parents(i))

    @property
    def sizes(self) -> tuple:
        return tuple(len(d) for d in self.domains)

    @property
    def num_configurations(self) -> int:
        k = 1
        for s in self.sizes:
            k *= s
        return k


def _check_cpd(dbn, cpd, child, expected_parents):
    t = dbn.template
    cname = t.slot_name(child)
    if cpd.child != child:
        raise ModelError(f"CPD for {cname} stored under the wrong variable")
    if sorted(cpd.parents) != sorted(expected_parents) or len(set(cpd.parents)) != len(cpd.parents):
        raise ModelError(
            f"CPD parents of {cname} must be {[t.slot_name(p) for p in expected_parents]}")
    size = len(dbn.domains[child.index])
    for combo in itertools.product(*(range(len(dbn.domains[p.index])) for p in cpd.parents)):
        if combo not in cpd.rows:
            shown = [dbn.domains[p.index][v] for p, v in zip(cpd.parents, combo)]
            raise ModelError(f"CPD of {cname} is missing the row for parents {shown}")
    if len(cpd.rows) != len(list(itertools.product(
            *(range(len(dbn.domains[p.index])) for p in cpd.parents)))):
        raise ModelError(f"CPD of {cname} has rows for unknown parent values")
    for combo, row in cpd.rows.items():
        if len(row) != size:
            raise ModelError(f"CPD row of {cname} must have {size} entries")
        if any(p < 0 or p > 1 for p in row):
            raise ModelError(f"CPD row of {cname} has an entry outside [0, 1]")
        if sum(row) != 1:
            raise ModelError(f"CPD row of {cname} for parents {list(combo)} sums to {sum(row)}, not 1")


@dataclass(frozen=True)
class CIProposition:
    """(X ⫫ Y | Z) over variable names; ``kind`` is 'structural' or 'stochastic'."""

    x: frozenset
    y: frozenset
    z: frozenset = frozenset()
    kind: str = "structural"

    def __post_init__(self):
        for attr in ("x", "y", "z"):
            object.__setattr__(self, attr, frozenset(getattr(self, attr)))
        if not self.x or not self.y:
            raise ModelError("both sides of an independence proposition must be non-empty")
        if self.x & self.y or self.x & self.z or self.y & self.z:
            raise ModelError("variable sets of a proposition must be pairwise disjoint")
        if self.kind not in ("structural", "stochastic"):
            raise ModelError(f"unknown proposition kind {self.kind!r}")

    def __str__(self):
        text = f"indep({', '.join(sorted(self.x))}; {', '.join(sorted(self.y))}"
        if self.z:
            text += f" | {', '.join(sorted(self.z))}"
        return text + ")"

    def variables(self) -> frozenset:
        return self.x | self.y | self.z

    def validate(self, t: DBNTemplate):
        for name in sorted(self.variables()):
            t.index(name)
        return self

    def as_kind(self, kind: str) -> "CIProposition":
        return CIProposition(self.x, self.y, self.z, kind)


_PROP_RE = re.compile(r"\s*indep\s*\((?P<body>[^()]*)\)\s*\Z")


def _name_list(text: str, what: str) -> list:
    text = text.strip()
    if text.startswith("{") and text.endswith("}"):
        text = text[1:-1]
    names = [s for s in re.split(r"[\s,]+", text) if s]
    for s in names:
        if not _NAME_RE.match(s):
            raise ModelError(f"invalid variable name {s!r} in {what}")
    return names


def parse_proposition(text: str, variables=None, kind: str = "structural") -> CIProposition:
    """Parse ``indep(X... ; Y... [| Z...])``; names separated by commas or spaces."""
    m = _PROP_RE.match(text)
    if not m:
        raise ModelError(f"expected 'indep(X ; Y [| Z])', got {text!r}")
    body = m.group("body")
    if body.count(";") != 1 or body.count("|") > 1:
        raise ModelError(f"expected 'indep(X ; Y [| Z])', got {text!r}")
    xs, rest = body.split(";")
    ys, _, zs = rest.partition("|")
    x, y, z = _name_list(xs, "X"), _name_list(ys, "Y"), _name_list(zs, "Z")
    if variables is not None:
        for name in x + y + z:
            if name not in variables:
                raise ModelError(f"unknown variable {name!r} in {text.strip()!r}")
    return CIProposition(frozenset(x), frozenset(y), frozenset(z), kind)


# -- documents ---------------------------------------------------------------

_KEYS = {"variables", "initial_edges", "step_edges", "domains", "cpds", "propositions"}


def _pairs(doc, key):
    value = doc.get(key, [])
    if not isinstance(value, list) or not all(
            isinstance(e, list) and len(e) == 2 and all(isinstance(s, str) for s in e)
            for e in value):
        raise ModelError(f"'{key}' must be a list of [source, target] name pairs")
    return value


def template_from_doc(doc: dict) -> DBNTemplate:
    if not isinstance(doc, dict):
        raise ModelError("model document must be a JSON object")
    unknown = set(doc) - _KEYS
    if unknown:
        raise ModelError(f"unknown model fields: {sorted(unknown)}")
    names = doc.get("variables")
    if not isinstance(names, list) or not all(isinstance(s, str) for s in names):
        raise ModelError("'variables' must be a list of names")
    pos = {}
    for i, name in enumerate(names):
        if name in pos:
            raise ModelError(f"duplicate variable {name!r}")
        pos[name] = i

    def lookup(name, where):
        try:
            return pos[name]
        except KeyError:
            raise ModelError(f"unknown variable {name!r} in {where}") from None

    initial = set()
    for a, b in _pairs(doc, "initial_edges"):
        if a.endswith("'") or b.endswith("'"):
            raise ModelError(f"initial edge {a}->{b} may not use primed variables")
        initial.add((lookup(a, "initial_edges"), lookup(b, "initial_edges")))
    step = set()
    for a, b in _pairs(doc, "step_edges"):
        if not b.endswith("'"):
            raise ModelError(f"step edge {a}->{b}: step edge must target a primed variable")
        src = Slot(lookup(a.rstrip("'"), "step_edges"), a.endswith("'"))
        step.add((src, lookup(b[:-1], "step_edges")))
    return DBNTemplate(tuple(names), frozenset(initial), frozenset(step))


def _cpd_from_doc(t, domains, slot, spec):
    cname = t.slot_name(slot)
    if not isinstance(spec, dict) or set(spec) - {"parents", "table"}:
        raise ModelError(f"CPD of {cname} must be an object with 'parents' and 'table'")
    parents = tuple(t.parse_slot(p) for p in spec.get("parents", []))
    if not slot.primed and any(p.primed for p in parents):
        raise ModelError(f"initial CPD of {cname} may not have primed parents")
    rows = {}
    table = spec.get("table")
    if not isinstance(table, list):
        raise ModelError(f"CPD of {cname} needs a 'table' list")
    for row in table:
        given = row.get("given", []) if isinstance(row, dict) else None
        dist = row.get("dist") if isinstance(row, dict) else None
        if not isinstance(given, list) or not isinstance(dist, list) or len(given) != len(parents):
            raise ModelError(f"malformed CPD row for {cname}: {row!r}")
        key = []
        for p, value in zip(parents, given):
            dom = domains[p.index]
            if value not in dom:
                raise ModelError(f"value {value!r} not in the domain of {t.slot_name(p)}")
            key.append(dom.index(value))
        key = tuple(key)
        if key in rows:
            raise ModelError(f"duplicate CPD row for {cname} given {given}")
        rows[key] = tuple(parse_rational(q) for q in dist)
    return CPDTable(slot, parents, rows)


def model_from_doc(doc: dict):
    """Build a DBNTemplate, or a DBN when every variable has both CPDs."""
    t = template_from_doc(doc)
    raw_domains = doc.get("domains", {})
    if not isinstance(raw_domains, dict):
        raise ModelError("'domains' must map variable names to value lists")
    for name in raw_domains:
        t.index(name)
    domains = tuple(tuple(raw_domains.get(name, [0, 1])) for name in t.variables)
    cpds = doc.get("cpds")
    if not cpds:
        return t
    if not isinstance(cpds, dict):
        raise ModelError("'cpds' must map variable names to CPD objects")
    slots = {}
    for key, spec in cpds.items():
        slot = t.parse_slot(key)
        slots[slot] = _cpd_from_doc(t, domains, slot, spec)
    for i, name in enumerate(t.variables):
        for slot in (Slot(i, False), Slot(i, True)):
            if slot not in slots:
                raise ModelError(f"missing CPD for {t.slot_name(slot)}")
    return DBN(t, domains,
               tuple(slots[Slot(i, False)] for i in range(t.n)),
               tuple(slots[Slot(i, True)] for i in range(t.n)))


def parse_dbn(text: str):
    """Parse a model document; see the module docstring for the format."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(exc.msg, exc.lineno, exc.colno) from None
    return model_from_doc(doc)


def load_model(path):
    """Read a model file; returns ``(model, propositions)``."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    model = parse_dbn(text)
    t = model.template if isinstance(model, DBN) else model
    props = [parse_proposition(p, t.variables) for p in json.loads(text).get("propositions", [])]
    return model, props


def model_to_doc(model, propositions=()) -> dict:
    t = model.template if isinstance(model, DBN) else model
    name = t.variables
    doc = {
        "variables": list(name),
        "initial_edges": [[name[a], name[b]] for a, b in sorted(t.initial_edges)],
        "step_edges": [[t.slot_name(s), name[d] + "'"] for s, d in sorted(t.step_edges)],
    }
    if isinstance(model, DBN):
        doc["domains"] = {v: list(d) for v, d in zip(name, model.domains)}
        cpds = {}
        for cpd in model.initial_cpds + model.step_cpds:
            cpds[t.slot_name(cpd.child)] = {
                "parents": [t.slot_name(p) for p in cpd.parents],
                "table": [
                    {"given": [model.domains[p.index][v] for p, v in zip(cpd.parents, key)],
                     "dist": [format_rational(q) for q in row]}
                    for key, row in sorted(cpd.rows.items())
                ],
            }
        doc["cpds"] = cpds
    if propositions:
        doc["propositions"] = [str(p) for p in propositions]
    return doc


def dump_dbn(model, propositions=()) -> str:
    return json.dumps(model_to_doc(model, propositions), indent=2)
