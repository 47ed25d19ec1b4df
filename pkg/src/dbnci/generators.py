"""Instance families: prime bridges, unary-DFA intersection, Skolem embedding.

Also random samplers used by the test-suite and by ``dbnci generate random``.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from fractions import Fraction

from .model import (DBN, CIProposition, CPDTable, DBNTemplate, ModelError, Slot,
                    _topological_order)
from .stochastic import distribution_at
from .unfolding import MarkovChain, encode


def first_primes(k: int) -> list:
    primes = []
    candidate = 2
    while len(primes) < k:
        if all(candidate % p for p in primes if p * p <= candidate):
            primes.append(candidate)
        candidate += 1
    return primes


def gen_prime_bridges(k: int):
    """Islands X_0..X_k joined by bridges W_{i,0..p_i-1} of prime length p_i.

    X_0 and X_k are d-connected given {W_{1,0}, ..., W_{k,0}} exactly at
    the times divisible by every p_i, and independent at all other times.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    names = [f"X{i}" for i in range(k + 1)]
    bridges = []
    for i, p in enumerate(first_primes(k), start=1):
        bridges.append([f"W{i}_{r}" for r in range(p)])
        names.extend(bridges[-1])
    pos = {v: j for j, v in enumerate(names)}
    initial = set()
    step = {(Slot(pos["X0"], False), pos["X0"]), (Slot(pos[f"X{k}"], False), pos[f"X{k}"])}
    for i, ring in enumerate(bridges, start=1):
        initial.add((pos[f"X{i - 1}"], pos[ring[0]]))
        initial.add((pos[f"X{i}"], pos[ring[0]]))
        for r, w in enumerate(ring):
            step.add((Slot(pos[w], False), pos[ring[(r + 1) % len(ring)]]))
    t = DBNTemplate(tuple(names), frozenset(initial), frozenset(step))
    prop = CIProposition(frozenset(["X0"]), frozenset([f"X{k}"]),
                         frozenset(ring[0] for ring in bridges))
    return t, prop


# -- unary DFAs ------------------------------------------------------------------

@dataclass(frozen=True)
class UnaryDFA:
    """``states[0]`` is initial; ``delta`` maps each state to its a-successor."""

    states: tuple
    delta: dict
    accepting: frozenset

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(str(q) for q in self.states))
        object.__setattr__(self, "delta", {str(a): str(b) for a, b in self.delta.items()})
        object.__setattr__(self, "accepting", frozenset(str(q) for q in self.accepting))
        known = set(self.states)
        if not self.states or len(known) != len(self.states):
            raise ModelError("a DFA needs distinct, non-empty states")
        if set(self.delta) != known or not set(self.delta.values()) <= known:
            raise ModelError("DFA transition function must be total over its states")
        if not self.accepting <= known:
            raise ModelError("accepting states must be DFA states")

    def accepts(self, length: int) -> bool:
        q = self.states[0]
        for _ in range(length):
            q = self.delta[q]
        return q in self.accepting


def dfas_from_doc(doc) -> list:
    try:
        return [UnaryDFA(tuple(d["states"]), dict(d["delta"]), frozenset(d.get("accepting", [])))
                for d in doc["dfas"]]
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed DFA document: {exc}") from None


def dfas_to_doc(dfas) -> dict:
    return {"dfas": [{"states": list(d.states), "delta": dict(d.delta),
                      "accepting": sorted(d.accepting)} for d in dfas]}


def load_dfas(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return dfas_from_doc(json.load(fh))


def gen_dfa_intersection(dfas):
    """Template whose X_0, X_k are d-connected given F at t iff every DFA accepts a^t."""
    if not dfas:
        raise ValueError("at least one DFA is required")
    k = len(dfas)
    names = [f"X{i}" for i in range(k + 1)]
    qname = {}
    for i, dfa in enumerate(dfas, start=1):
        for q in dfa.states:
            qname[i, q] = f"Q{i}_{q}"
            names.append(qname[i, q])
    pos = {v: j for j, v in enumerate(names)}
    if len(pos) != len(names):
        raise ModelError("DFA state names collide after renaming")
    initial = set()
    step = {(Slot(pos["X0"], False), pos["X0"]), (Slot(pos[f"X{k}"], False), pos[f"X{k}"])}
    accepting = set()
    for i, dfa in enumerate(dfas, start=1):
        start = pos[qname[i, dfa.states[0]]]
        initial.add((pos[f"X{i - 1}"], start))
        initial.add((pos[f"X{i}"], start))
        for q in dfa.states:
            step.add((Slot(pos[qname[i, q]], False), pos[qname[i, dfa.delta[q]]]))
        accepting |= {qname[i, q] for q in dfa.accepting}
    t = DBNTemplate(tuple(names), frozenset(initial), frozenset(step))
    return t, CIProposition(frozenset(["X0"]), frozenset([f"X{k}"]), frozenset(accepting))


# -- Skolem embedding --------------------------------------------------------------

@dataclass(frozen=True)
class SkolemInstance:
    """A doubly stochastic chain M with initial vector v and its DBN encoding.

    Chain state 0 is the distinguished state alpha (bits X=1, Z=0); chain
    state c >= 1 is encoded with X=0 and Z = binary(c - 1).
    """

    chain: MarkovChain
    dbn: DBN
    z_bits: int

    @property
    def k(self) -> int:
        return self.chain.size - 1

    @property
    def init(self) -> tuple:
        return self.chain.init


def _conditional_rows(dist, chain_order, pos, context_key):
    """Pr[bit at chain_order[pos] | earlier bits] for every earlier-bit pattern.

    ``dist`` maps full bit patterns (tuples in ``chain_order``) to
    probabilities; zero-probability contexts get the uniform row.
    """
    half = Fraction(1, 2)
    rows = {}
    for earlier in itertools.product((0, 1), repeat=pos):
        mass = [Fraction(0), Fraction(0)]
        for pattern, q in dist.items():
            if pattern[:pos] == earlier:
                mass[pattern[pos]] += q
        total = mass[0] + mass[1]
        rows[context_key + earlier] = (half, half) if total == 0 else (mass[0] / total, mass[1] / total)
    return rows


def gen_skolem_embedding(m: MarkovChain, v=None) -> SkolemInstance:
    """DBN over bits X, Z0.., Y whose X/Y dependence tracks e_alpha^T M^n v - 1/(k+1).

    Y is a fresh fair coin at every step.  With Y = 1 the state bits follow
    M; with Y = 0 they jump to the uniform distribution.  Invalid encodings
    are absorbing.
    """
    size = m.size
    if size < 2:
        raise ModelError("the chain needs at least two states")
    v = tuple(Fraction(q) for q in (m.init if v is None else v))
    bad_rows = [(l, str(sum(m.matrix[l]))) for l in range(size) if sum(m.matrix[l]) != 1]
    if bad_rows:
        raise ModelError(f"uniform vector is not stationary: row sums {bad_rows} differ from 1")
    if len(v) != size or any(q < 0 for q in v) or sum(v) != 1:
        raise ModelError(f"initial vector must be a distribution over {size} states (sum {sum(v)})")
    chain = MarkovChain(size, m.matrix, v)
    k = size - 1
    z_bits = max(1, (k - 1).bit_length())
    names = ("X",) + tuple(f"Z{j}" for j in range(z_bits)) + ("Y",)
    X, Y = 0, z_bits + 1
    chain_order = [X] + [1 + j for j in reversed(range(z_bits))]   # most significant first

    def pattern_of(c):
        bits = {X: 1 if c == 0 else 0}
        for j in range(z_bits):
            bits[1 + j] = ((c - 1) >> j) & 1 if c else 0
        return tuple(bits[b] for b in chain_order)

    valid = {pattern_of(c): c for c in range(size)}
    patterns = list(itertools.product((0, 1), repeat=len(chain_order)))
    uniform = Fraction(1, size)

    initial_edges = {(Y, b) for b in chain_order}
    initial_edges |= {(chain_order[a], chain_order[b])
                      for a in range(len(chain_order)) for b in range(a + 1, len(chain_order))}
    step_edges = {(Slot(Y, True), b) for b in chain_order}
    step_edges |= {(Slot(chain_order[a], True), chain_order[b])
                   for a in range(len(chain_order)) for b in range(a + 1, len(chain_order))}
    step_edges |= {(Slot(a, False), b) for a in chain_order for b in chain_order}
    t = DBNTemplate(names, frozenset(initial_edges), frozenset(step_edges))

    half = (Fraction(1, 2), Fraction(1, 2))
    initial_cpds = {Y: CPDTable(Slot(Y, False), (), {(): half})}
    step_cpds = {Y: CPDTable(Slot(Y, True), (), {(): half})}
    init_given_y = {
        1: {pattern_of(c): v[c] for c in range(size)},
        0: {pattern_of(c): uniform for c in range(size)},
    }
    for pos, b in enumerate(chain_order):
        parents = (Slot(Y, False),) + tuple(Slot(a, False) for a in chain_order[:pos])
        rows = {}
        for y in (0, 1):
            rows.update(_conditional_rows(init_given_y[y], chain_order, pos, (y,)))
        initial_cpds[b] = CPDTable(Slot(b, False), parents, rows)

        parents = ((Slot(Y, True),) + tuple(Slot(a, False) for a in chain_order)
                   + tuple(Slot(a, True) for a in chain_order[:pos]))
        rows = {}
        for y in (0, 1):
            for prev in patterns:
                if prev not in valid:
                    nxt = {prev: Fraction(1)}
                elif y == 1:
                    c = valid[prev]
                    nxt = {pattern_of(j): m.matrix[j][c] for j in range(size)}
                else:
                    nxt = {pattern_of(j): uniform for j in range(size)}
                rows.update(_conditional_rows(nxt, chain_order, pos, (y,) + prev))
        step_cpds[b] = CPDTable(Slot(b, True), parents, rows)

    dbn = DBN(t, ((0, 1),) * len(names),
              tuple(initial_cpds[i] for i in range(len(names))),
              tuple(step_cpds[i] for i in range(len(names))))
    return SkolemInstance(chain, dbn, z_bits)


def skolem_closed_form(inst: SkolemInstance, n: int) -> Fraction:
    """2^-n (e_alpha^T M^n v - 1/(k+1)), by explicit matrix powers."""
    size = inst.chain.size
    M = inst.chain.matrix
    power = [[Fraction(int(i == j)) for j in range(size)] for i in range(size)]
    for _ in range(n):
        power = [[sum(power[i][l] * M[l][j] for l in range(size)) for j in range(size)]
                 for i in range(size)]
    top = sum(power[0][c] * inst.init[c] for c in range(size))
    return (top - Fraction(1, size)) / (1 << n)


class SkolemIdentityError(AssertionError):
    pass


def conditional_difference(inst: SkolemInstance, n: int) -> Fraction:
    """Pr[X=1 | Y=1] - Pr[X=1 | Y=0] at step n, from the DBN's distribution."""
    d = inst.dbn
    dist = distribution_at(d, n)
    X, Y = 0, inst.z_bits + 1
    joint = dist.marginal([X, Y])
    p_y1 = joint.get((0, 1), 0) + joint.get((1, 1), 0)
    p_y0 = joint.get((0, 0), 0) + joint.get((1, 0), 0)
    if p_y1 == 0 or p_y0 == 0:
        raise ModelError("conditioning on Y has probability zero")
    return joint.get((1, 1), 0) / p_y1 - joint.get((1, 0), 0) / p_y0


def verify_skolem_difference(inst: SkolemInstance, n: int) -> Fraction:
    if n < 0:
        raise ValueError("n must be non-negative")
    got = conditional_difference(inst, n)
    want = skolem_closed_form(inst, n)
    if got != want:
        raise SkolemIdentityError(f"step {n}: DBN gives {got}, closed form gives {want}")
    return got


# -- random instances ---------------------------------------------------------------

def random_template(n: int, rng: random.Random, p: float = 0.3, restricted: bool = False) -> DBNTemplate:
    order = list(range(n))
    rng.shuffle(order)
    initial, intra, inter = set(), set(), set()
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < p:
                initial.add((order[a], order[b]))
            if rng.random() < p:
                intra.add((order[a], order[b]))
    if restricted:
        intra |= initial
    for a in range(n):
        for b in range(n):
            if rng.random() < p:
                inter.add((a, b))
    step = {(Slot(a, True), b) for a, b in intra} | {(Slot(a, False), b) for a, b in inter}
    return DBNTemplate(tuple(f"V{i}" for i in range(n)), frozenset(initial), frozenset(step))


def random_distribution(size: int, rng: random.Random, denominator: int) -> tuple:
    """Multiples of 1/denominator summing to 1 (zeros allowed)."""
    cuts = sorted(rng.randint(0, denominator) for _ in range(size - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [denominator])]
    return tuple(Fraction(q, denominator) for q in parts)


def random_dbn(t: DBNTemplate, rng: random.Random, sizes=None, denominator=None) -> DBN:
    sizes = sizes or (2,) * t.n
    domains = tuple(tuple(range(s)) for s in sizes)

    def table(child, parents):
        den = denominator or rng.randint(2, 9)
        rows = {key: random_distribution(sizes[child.index], rng, den)
                for key in itertools.product(*(range(sizes[p.index]) for p in parents))}
        return CPDTable(child, tuple(parents), rows)

    initial = tuple(table(Slot(i, False), [Slot(p, False) for p in t.initial_parents(i)])
                    for i in range(t.n))
    step = tuple(table(Slot(i, True), t.step_parents(i)) for i in range(t.n))
    return DBN(t, domains, initial, step)


def random_doubly_stochastic(size: int, rng: random.Random, terms: int = 3) -> tuple:
    """Rational convex combination of random permutation matrices."""
    weights = random_distribution(terms, rng, rng.randint(terms, 12))
    matrix = [[Fraction(0)] * size for _ in range(size)]
    for w in weights:
        perm = list(range(size))
        rng.shuffle(perm)
        for col, row in enumerate(perm):
            matrix[row][col] += w
    return tuple(tuple(r) for r in matrix)


def random_dfa(rng: random.Random, max_states: int = 5) -> UnaryDFA:
    m = rng.randint(1, max_states)
    states = tuple(f"s{j}" for j in range(m))
    delta = {q: rng.choice(states) for q in states}
    accepting = frozenset(q for q in states if rng.random() < 0.4)
    return UnaryDFA(states, delta, accepting)


def random_proposition(t: DBNTemplate, rng: random.Random, max_side: int = 2):
    """A random proposition over disjoint subsets, or None for |V| < 2."""
    names = list(t.variables)
    if len(names) < 2:
        return None
    rng.shuffle(names)
    nx = rng.randint(1, min(max_side, len(names) - 1))
    ny = rng.randint(1, min(max_side, len(names) - nx))
    rest = names[nx + ny:]
    z = [v for v in rest if rng.random() < 0.4]
    return CIProposition(frozenset(names[:nx]), frozenset(names[nx:nx + ny]), frozenset(z))


def configuration_index(d: DBN, values) -> int:
    return encode(values, d.sizes)

