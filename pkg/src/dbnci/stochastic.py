"""Exact-rational stochastic CI on full DBNs over a bounded horizon.

Whether F (X ⊥ Y) ever holds is as hard as the Skolem problem, so formulas
over stochastic propositions get a three-valued verdict from a finite
prefix of the trace; ``unknown`` is a legitimate answer.
"""

from __future__ import annotations

import enum
import threading
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction

from .ltl import Formula, atoms
from .model import DBN, CIProposition, ModelError
from .prefix import finite_truth, prefix_verdict
from .unfolding import decode, initial_distribution, next_distribution

MAX_CONFIGURATIONS = 1 << 20


class ConfigurationLimitExceeded(ModelError):
    pass


@dataclass(frozen=True)
class RationalDistribution:
    """Probabilities of the joint configurations (mixed-radix order)."""

    values: tuple
    sizes: tuple

    def marginal(self, indices) -> dict:
        """Map value-index tuples of ``indices`` to their probability."""
        out = {}
        for c, q in enumerate(self.values):
            if q:
                full = decode(c, self.sizes)
                key = tuple(full[i] for i in indices)
                out[key] = out.get(key, 0) + q
        return out


class _Cache:
    """Per-DBN prefix of the distribution sequence; writers are serialized."""

    def __init__(self, capacity=32):
        self.capacity = capacity
        self.lock = threading.Lock()
        self.entries = OrderedDict()

    def get(self, d):
        with self.lock:
            entry = self.entries.get(d)
            if entry is None:
                entry = {"dists": [], "moves": {}}
                self.entries[d] = entry
                if len(self.entries) > self.capacity:
                    self.entries.popitem(last=False)
            else:
                self.entries.move_to_end(d)
            return entry


_cache = _Cache()


def _check_size(d, limit):
    if limit is not None and d.num_configurations > limit:
        raise ConfigurationLimitExceeded(
            f"{d.num_configurations} joint configurations exceed the limit {limit}")


def _sparse_sequence(d: DBN, t: int):
    entry = _cache.get(d)
    with _cache.lock:
        dists = entry["dists"]
        moves = entry["moves"]
        if not dists:
            dists.append(initial_distribution(d))
        while len(dists) <= t:
            cur = dists[-1]
            nxt = {}
            for m, p in cur.items():
                if m not in moves:
                    moves[m] = next_distribution(d, m)
                for l, q in moves[m].items():
                    nxt[l] = nxt.get(l, 0) + p * q
            dists.append(nxt)
        return dists[t]


def distribution_at(d: DBN, t: int, max_configurations=MAX_CONFIGURATIONS) -> RationalDistribution:
    """Joint distribution of slice ``t``: M^t v for the equivalent chain."""
    if t < 0:
        raise ValueError("time must be non-negative")
    _check_size(d, max_configurations)
    sparse = _sparse_sequence(d, t)
    k = d.num_configurations
    return RationalDistribution(tuple(sparse.get(c, Fraction(0)) for c in range(k)), d.sizes)


def ci_holds(dist: RationalDistribution, xs, ys, zs) -> bool:
    """Exact test of Pr(x, y | z) = Pr(x | z) Pr(y | z) wherever Pr(z) > 0."""
    xs, ys, zs = list(xs), list(ys), list(zs)
    joint = dist.marginal(xs + ys + zs)
    nx, ny = len(xs), len(ys)
    pz, pxz, pyz = {}, {}, {}
    for key, q in joint.items():
        x, y, z = key[:nx], key[nx:nx + ny], key[nx + ny:]
        pz[z] = pz.get(z, 0) + q
        pxz[x, z] = pxz.get((x, z), 0) + q
        pyz[y, z] = pyz.get((y, z), 0) + q
    for z, q in pz.items():
        for (x, zx), a in pxz.items():
            if zx != z:
                continue
            for (y, zy), b in pyz.items():
                if zy != z:
                    continue
                if joint.get(x + y + z, 0) * q != a * b:
                    return False
    return True


def stochastic_ci(d: DBN, p: CIProposition, t: int, max_configurations=MAX_CONFIGURATIONS) -> bool:
    tpl = d.template
    p.validate(tpl)
    xs, ys, zs = (sorted(tpl.index(v) for v in names) for names in (p.x, p.y, p.z))
    return ci_holds(distribution_at(d, t, max_configurations), xs, ys, zs)


def stochastic_trace(d: DBN, props, horizon: int, max_configurations=MAX_CONFIGURATIONS) -> list:
    """Letters for t = 0..horizon."""
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    props = [p.validate(d.template) for p in props]
    return [frozenset(p for p in props if stochastic_ci(d, p, t, max_configurations))
            for t in range(horizon + 1)]


class Outcome(enum.Enum):
    VIOLATED_AT = "violated_at"
    HOLDS_UP_TO = "holds_up_to"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class BoundedVerdict:
    """``decided`` marks verdicts no extension of the prefix can change.

    ``violated_at(t)`` is always decided.  ``holds_up_to`` is decided when
    every extension satisfies the formula (``time`` is then the deciding
    position); otherwise it reports a formula true on the finite prefix
    whose infinite truth is still open.  ``unknown`` is neither.
    """

    outcome: Outcome
    horizon: int
    time: int | None = None
    decided: bool = False

    def __str__(self):
        if self.outcome is Outcome.VIOLATED_AT:
            return f"violated_at({self.time})"
        if self.outcome is Outcome.HOLDS_UP_TO:
            tag = "decided" if self.decided else "undecided"
            return f"holds_up_to({self.horizon}) [{tag}]"
        return "unknown"


def bounded_verdict(f: Formula, word) -> BoundedVerdict:
    horizon = len(word) - 1
    value, at = prefix_verdict(f, word)
    if value is False:
        return BoundedVerdict(Outcome.VIOLATED_AT, horizon, at, True)
    if value is True:
        return BoundedVerdict(Outcome.HOLDS_UP_TO, horizon, at, True)
    if finite_truth(f, word):
        return BoundedVerdict(Outcome.HOLDS_UP_TO, horizon)
    return BoundedVerdict(Outcome.UNKNOWN, horizon)


def bounded_check(d: DBN, f: Formula, horizon: int, max_configurations=MAX_CONFIGURATIONS):
    """Three-valued check of ``f`` on the trace prefix of length horizon + 1."""
    props = []
    for p in atoms(f):
        if p.kind != "stochastic":
            raise ModelError(f"{p} is not a stochastic proposition")
        if p not in props:
            props.append(p)
    word = stochastic_trace(d, props, horizon, max_configurations)
    return bounded_verdict(f, word)


def soundness_exceptions(d: DBN, props, horizon: int) -> list:
    """Pairs (t, p) where p is structurally independent but fails stochastically.

    Structural independence implies independence in every DBN of the
    template's family, so a correct toolchain always returns an empty list.
    """
    from .repr_ts import initial_state, label, successor

    tpl = d.template
    structural = [p.as_kind("structural") for p in props]
    out = []
    s = initial_state(tpl)
    for t in range(horizon + 1):
        for p in label(tpl, s, structural):
            if not stochastic_ci(d, p, t):
                out.append((t, p.as_kind("stochastic")))
        s = successor(tpl, s)
    return out
