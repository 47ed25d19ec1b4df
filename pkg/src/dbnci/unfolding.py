"""Finite unfoldings of DBN-templates and the DBN <-> Markov chain correspondence.

Joint configurations are numbered in mixed radix with variable 0 the least
significant digit: configuration ``c`` assigns variable ``i`` the value
index ``(c // (s_0 * ... * s_{i-1})) % s_i``.  For binary variables this is
the binary expansion of ``c``.

Markov chains are column-stochastic: ``matrix[l][m]`` is the probability of
moving to configuration ``l`` from configuration ``m``.  Chain files store
that matrix row by row::

    {"size": 2, "matrix": [["1/3", "2/3"], ["2/3", "1/3"]], "init": ["1", "0"]}
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .dsep import d_separated
from .model import (DBN, BNTemplate, CPDTable, DBNTemplate, ModelError, Slot,
                    format_rational, parse_rational, _topological_order)

DEFAULT_ORACLE_HORIZON = 64


class UnfoldedNode(NamedTuple):
    name: str
    slice: int

    def __str__(self):
        return f"{self.name}^{self.slice}"


def unfold(t: DBNTemplate, horizon: int) -> BNTemplate:
    """The BN-template over slices 0..horizon."""
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    name = t.variables
    nodes = [UnfoldedNode(v, s) for s in range(horizon + 1) for v in name]
    edges = {(UnfoldedNode(name[a], 0), UnfoldedNode(name[b], 0)) for a, b in t.initial_edges}
    for s in range(1, horizon + 1):
        for src, dst in t.step_edges:
            edges.add((UnfoldedNode(name[src.index], s if src.primed else s - 1),
                       UnfoldedNode(name[dst], s)))
    return BNTemplate(tuple(nodes), frozenset(edges))


def oracle_letter(t: DBNTemplate, props, time: int, max_horizon=DEFAULT_ORACLE_HORIZON) -> frozenset:
    """Propositions whose slice-``time`` instance is d-separated in the unfolding.

    Brute force by construction; ``max_horizon=None`` lifts the size cap.
    """
    if max_horizon is not None and time > max_horizon:
        raise ValueError(f"oracle horizon {time} exceeds the cap {max_horizon}")
    bn = unfold(t, time)

    def at(names):
        return {UnfoldedNode(v, time) for v in names}

    out = set()
    for p in props:
        p.validate(t)
        if d_separated(bn, at(p.x), at(p.y), at(p.z)):
            out.add(p)
    return frozenset(out)


def oracle_trace(t: DBNTemplate, props, steps: int, max_horizon=DEFAULT_ORACLE_HORIZON) -> list:
    return [oracle_letter(t, props, s, max_horizon) for s in range(steps + 1)]


# -- configurations -------------------------------------------------------------

def radices(sizes) -> list:
    out, r = [], 1
    for s in sizes:
        out.append(r)
        r *= s
    return out


def encode(values, sizes) -> int:
    return sum(v * r for v, r in zip(values, radices(sizes)))


def decode(config: int, sizes) -> tuple:
    out = []
    for s in sizes:
        out.append(config % s)
        config //= s
    return tuple(out)


def _branch(order, cpds, sizes, fixed_prev):
    """Enumerate assignments of ``order`` with their probabilities.

    ``fixed_prev`` holds previous-slice values (or None for slice 0);
    yields ``(values, probability)`` over the current slice.
    """
    n = len(sizes)
    partial = [(([None] * n), Fraction(1))]
    for i in order:
        cpd: CPDTable = cpds[i]
        grown = []
        for values, prob in partial:
            key = tuple(values[p.index] if (p.primed or fixed_prev is None) else fixed_prev[p.index]
                        for p in cpd.parents)
            row = cpd.rows[key]
            for v, q in enumerate(row):
                if q:
                    nv = list(values)
                    nv[i] = v
                    grown.append((nv, prob * q))
        partial = grown
    return partial


def initial_distribution(d: DBN) -> dict:
    """Sparse joint distribution of slice 0: configuration -> probability."""
    t = d.template
    order = _topological_order(range(t.n), t.initial_edges)
    out = {}
    for values, prob in _branch(order, d.initial_cpds, d.sizes, None):
        c = encode(values, d.sizes)
        out[c] = out.get(c, 0) + prob
    return out


def next_distribution(d: DBN, prev_config: int) -> dict:
    """Sparse distribution of the next configuration given the current one."""
    t = d.template
    order = _topological_order(range(t.n), t.intra_step_edges)
    prev = decode(prev_config, d.sizes)
    out = {}
    for values, prob in _branch(order, d.step_cpds, d.sizes, prev):
        c = encode(values, d.sizes)
        out[c] = out.get(c, 0) + prob
    return out


# -- Markov chains ---------------------------------------------------------------

@dataclass(frozen=True)
class MarkovChain:
    size: int
    matrix: tuple
    init: tuple

    def __post_init__(self):
        matrix = tuple(tuple(Fraction(q) for q in row) for row in self.matrix)
        init = tuple(Fraction(q) for q in self.init)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "init", init)
        k = self.size
        if k < 1 or len(matrix) != k or any(len(row) != k for row in matrix) or len(init) != k:
            raise ModelError(f"chain of size {k} needs a {k}x{k} matrix and {k} initial entries")
        if any(q < 0 for row in matrix for q in row) or any(q < 0 for q in init):
            raise ModelError("chain entries must be non-negative")
        bad = [m for m in range(k) if sum(matrix[l][m] for l in range(k)) != 1]
        if bad:
            sums = [str(sum(matrix[l][m] for l in range(k))) for m in bad]
            raise ModelError(f"columns {bad} of the chain sum to {sums}, not 1")
        if sum(init) != 1:
            raise ModelError(f"initial vector sums to {sum(init)}, not 1")

    def step(self, vec):
        k = self.size
        return tuple(sum(self.matrix[l][m] * vec[m] for m in range(k) if vec[m]) for l in range(k))

    def distribution(self, n: int):
        vec = self.init
        for _ in range(n):
            vec = self.step(vec)
        return vec


def chain_from_doc(doc) -> MarkovChain:
    try:
        return MarkovChain(
            int(doc["size"]),
            tuple(tuple(parse_rational(q) for q in row) for row in doc["matrix"]),
            tuple(parse_rational(q) for q in doc["init"]))
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed Markov chain document: {exc}") from None


def load_chain(path) -> MarkovChain:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelError(exc.msg, exc.lineno, exc.colno) from None
    return chain_from_doc(doc)


def chain_to_doc(m: MarkovChain) -> dict:
    return {"size": m.size,
            "matrix": [[format_rational(q) for q in row] for row in m.matrix],
            "init": [format_rational(q) for q in m.init]}


def dbn_to_markov_chain(d: DBN) -> MarkovChain:
    k = d.num_configurations
    cols = [next_distribution(d, m) for m in range(k)]
    matrix = tuple(tuple(cols[m].get(l, Fraction(0)) for m in range(k)) for l in range(k))
    init = initial_distribution(d)
    return MarkovChain(k, matrix, tuple(init.get(c, Fraction(0)) for c in range(k)))


def _bit_conditionals(dist, bits):
    """Chain-rule factorisation of a distribution over ``bits``-bit labels,
    most significant bit first.

    Returns ``{(i, higher_bits): (Pr[b_i=0 | ...], Pr[b_i=1 | ...])}`` where
    ``higher_bits`` are the values of bits i+1..bits-1.  Contexts of
    probability zero get the uniform row.
    """
    half = Fraction(1, 2)
    out = {}
    for i in reversed(range(bits)):
        for higher in itertools.product((0, 1), repeat=bits - 1 - i):
            prefix = sum(b << (i + 1 + j) for j, b in enumerate(higher))
            mass = [Fraction(0), Fraction(0)]
            for low in range(1 << (i + 1)):
                mass[(low >> i) & 1] += dist[prefix | low]
            total = mass[0] + mass[1]
            out[i, higher] = (half, half) if total == 0 else (mass[0] / total, mass[1] / total)
    return out


def markov_chain_to_dbn(m: MarkovChain) -> DBN:
    """Encode a chain with ceil(log2 K) binary variables X0 (least significant) ...

    The chain is padded with absorbing states up to a power of two.  Each
    X_i' depends on every X_j and on the more significant X_j' (j > i).
    """
    bits = max(1, (m.size - 1).bit_length())
    size = 1 << bits
    cols = []
    for c in range(size):
        if c < m.size:
            cols.append([m.matrix[l][c] for l in range(m.size)] + [Fraction(0)] * (size - m.size))
        else:
            cols.append([Fraction(int(l == c)) for l in range(size)])
    init = list(m.init) + [Fraction(0)] * (size - m.size)

    names = tuple(f"X{i}" for i in range(bits))
    initial_edges = {(j, i) for i in range(bits) for j in range(i + 1, bits)}
    step_edges = {(Slot(j, False), i) for i in range(bits) for j in range(bits)}
    step_edges |= {(Slot(j, True), i) for i in range(bits) for j in range(i + 1, bits)}
    t = DBNTemplate(names, frozenset(initial_edges), frozenset(step_edges))

    init_cond = _bit_conditionals(init, bits)
    initial_cpds = []
    for i in range(bits):
        parents = tuple(Slot(j, False) for j in range(i + 1, bits))
        rows = {higher: init_cond[i, higher]
                for higher in itertools.product((0, 1), repeat=bits - 1 - i)}
        initial_cpds.append(CPDTable(Slot(i, False), parents, rows))

    step_cond = [_bit_conditionals(cols[c], bits) for c in range(size)]
    step_cpds = []
    for i in range(bits):
        parents = tuple(Slot(j, False) for j in range(bits)) + tuple(
            Slot(j, True) for j in range(i + 1, bits))
        rows = {}
        for prev in itertools.product((0, 1), repeat=bits):
            c = encode(prev, [2] * bits)
            for higher in itertools.product((0, 1), repeat=bits - 1 - i):
                rows[prev + higher] = step_cond[c][i, higher]
        step_cpds.append(CPDTable(Slot(i, True), parents, rows))
    return DBN(t, ((0, 1),) * bits, tuple(initial_cpds), tuple(step_cpds))
