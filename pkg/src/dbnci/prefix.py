"""Three-valued LTL semantics of finite prefixes.

A prefix decides a formula positively (negatively) when every (no) infinite
extension satisfies it.  The formula is progressed through the prefix
letters and the residual obligation is tested for validity and
satisfiability with a tableau over elementary formulas, so the verdicts
are exact rather than syntactic approximations.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product

from .graphs import is_nontrivial, reachable, strongly_connected_components
from .ltl import (FALSE, TRUE, And, Atom, Eventually, FalseF, Formula, Globally,
                  Implies, Next, Not, Or, TrueF, Until, subformulas)

MAX_ELEMENTARY = 18


def _key(f):
    return repr(f)


def neg(f: Formula) -> Formula:
    if isinstance(f, TrueF):
        return FALSE
    if isinstance(f, FalseF):
        return TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def _flatten(f, cls, out):
    if isinstance(f, cls):
        _flatten(f.left, cls, out)
        _flatten(f.right, cls, out)
    else:
        out.append(f)


def _nary(cls, unit, zero, a, b):
    parts = []
    _flatten(a, cls, parts)
    _flatten(b, cls, parts)
    uniq = {}
    for p in parts:
        if p == zero:
            return zero
        if p != unit:
            uniq[_key(p)] = p
    keys = set(uniq)
    for k, p in uniq.items():
        if isinstance(p, Not) and _key(p.arg) in keys:
            return zero
    items = [uniq[k] for k in sorted(uniq)]
    if not items:
        return unit
    f = items[-1]
    for p in reversed(items[:-1]):
        f = cls(p, f)
    return f


def conj(a: Formula, b: Formula) -> Formula:
    return _nary(And, TRUE, FALSE, a, b)


def disj(a: Formula, b: Formula) -> Formula:
    return _nary(Or, FALSE, TRUE, a, b)


def progress(f: Formula, letter) -> Formula:
    """The obligation on the suffix after reading ``letter``."""
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Atom):
        return TRUE if f.prop in letter else FALSE
    if isinstance(f, Not):
        return neg(progress(f.arg, letter))
    if isinstance(f, And):
        return conj(progress(f.left, letter), progress(f.right, letter))
    if isinstance(f, Or):
        return disj(progress(f.left, letter), progress(f.right, letter))
    if isinstance(f, Implies):
        return disj(neg(progress(f.left, letter)), progress(f.right, letter))
    if isinstance(f, Next):
        return f.arg
    if isinstance(f, Until):
        return disj(progress(f.right, letter), conj(progress(f.left, letter), f))
    if isinstance(f, Eventually):
        return disj(progress(f.arg, letter), f)
    if isinstance(f, Globally):
        return conj(progress(f.arg, letter), f)
    raise TypeError(f"unknown formula node {f!r}")


def finite_truth(f: Formula, word, i: int = 0) -> bool:
    """Satisfaction on the finite word itself (X and U need a witness inside it)."""
    n = len(word)
    if i >= n:
        return False
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Atom):
        return f.prop in word[i]
    if isinstance(f, Not):
        return not finite_truth(f.arg, word, i)
    if isinstance(f, And):
        return finite_truth(f.left, word, i) and finite_truth(f.right, word, i)
    if isinstance(f, Or):
        return finite_truth(f.left, word, i) or finite_truth(f.right, word, i)
    if isinstance(f, Implies):
        return (not finite_truth(f.left, word, i)) or finite_truth(f.right, word, i)
    if isinstance(f, Next):
        return finite_truth(f.arg, word, i + 1)
    if isinstance(f, Eventually):
        return any(finite_truth(f.arg, word, j) for j in range(i, n))
    if isinstance(f, Globally):
        return all(finite_truth(f.arg, word, j) for j in range(i, n))
    if isinstance(f, Until):
        for j in range(i, n):
            if finite_truth(f.right, word, j):
                return True
            if not finite_truth(f.left, word, j):
                return False
        return False
    raise TypeError(f"unknown formula node {f!r}")


# -- satisfiability -------------------------------------------------------------

class FormulaTooLarge(ValueError):
    pass


@lru_cache(maxsize=4096)
def satisfiable(f: Formula) -> bool:
    """Is there an infinite word over the atoms of ``f`` satisfying ``f``?

    States assign truth values to the elementary formulas (atoms and the
    X-obligations of X, U, F, G nodes); every other subformula's value is
    determined by them.  ``f`` is satisfiable iff a state satisfying ``f``
    reaches a cycle that fulfils every pending eventuality.
    """
    subs = subformulas(f)
    atoms_ = [g for g in subs if isinstance(g, Atom)]
    nexts = [g for g in subs if isinstance(g, (Next, Until, Eventually, Globally))]
    elem = len(atoms_) + len(nexts)
    if elem > MAX_ELEMENTARY:
        raise FormulaTooLarge(f"{elem} elementary formulas exceed the limit {MAX_ELEMENTARY}")
    obligation = {g: (g.arg if isinstance(g, Next) else g) for g in nexts}
    atom_pos = {g: i for i, g in enumerate(atoms_)}
    next_pos = {g: i for i, g in enumerate(nexts)}

    def truth(state):
        a_vals, x_vals = state
        val = {}
        for g in subs:
            if isinstance(g, TrueF):
                v = True
            elif isinstance(g, FalseF):
                v = False
            elif isinstance(g, Atom):
                v = a_vals[atom_pos[g]]
            elif isinstance(g, Not):
                v = not val[g.arg]
            elif isinstance(g, And):
                v = val[g.left] and val[g.right]
            elif isinstance(g, Or):
                v = val[g.left] or val[g.right]
            elif isinstance(g, Implies):
                v = (not val[g.left]) or val[g.right]
            elif isinstance(g, Next):
                v = x_vals[next_pos[g]]
            elif isinstance(g, Until):
                v = val[g.right] or (val[g.left] and x_vals[next_pos[g]])
            elif isinstance(g, Eventually):
                v = val[g.arg] or x_vals[next_pos[g]]
            elif isinstance(g, Globally):
                v = val[g.arg] and x_vals[next_pos[g]]
            val[g] = v
        return val

    states = list(product(product((False, True), repeat=len(atoms_)),
                          product((False, True), repeat=len(nexts))))
    vals = {s: truth(s) for s in states}
    by_requirement = {}
    for s in states:
        req = tuple(vals[s][obligation[g]] for g in nexts)
        by_requirement.setdefault(req, []).append(s)

    def successors(s):
        return by_requirement.get(s[1], ())

    # a true U/F and a false G each promise something that must eventually happen
    eventualities = [g for g in nexts if isinstance(g, (Until, Eventually, Globally))]

    def fulfils(s, g):
        if isinstance(g, Globally):
            return vals[s][g] or not vals[s][g.arg]
        goal = g.right if isinstance(g, Until) else g.arg
        return (not vals[s][g]) or vals[s][goal]

    initial = [s for s in states if vals[s][f]]
    live = reachable(initial, successors)
    for comp in strongly_connected_components(sorted(live), successors):
        if not is_nontrivial(comp, successors):
            continue
        if all(any(fulfils(s, g) for s in comp) for g in eventualities):
            return True
    return False


def valid(f: Formula) -> bool:
    return not satisfiable(neg(f))


def prefix_verdict(f: Formula, word):
    """Three-valued verdict for the finite ``word``.

    Returns ``(value, decided_at)`` where ``value`` is True (every
    extension satisfies f), False (none does) or None (undecided), and
    ``decided_at`` is the earliest position whose letter settled it.
    """
    if not satisfiable(f):
        return False, 0
    if valid(f):
        return True, 0
    residual = f
    for t, letter in enumerate(word):
        residual = progress(residual, letter)
        if not satisfiable(residual):
            return False, t
        if valid(residual):
            return True, t
    return None, None
