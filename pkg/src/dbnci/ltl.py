"""LTL over CI propositions: syntax tree, parser and evaluation on lassos.

Grammar (loosest binding first)::

    formula := or ('->' formula)?
    or      := and ('|' and)*
    and     := until ('&' until)*
    until   := unary ('U' until)?
    unary   := ('!' | 'X' | 'F' | 'G') unary | atom
    atom    := 'true' | 'false' | indep(...) | '(' formula ')'
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import CIProposition, ModelError, parse_proposition


class Formula:
    """Base class of LTL syntax-tree nodes."""

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True, eq=True)
class TrueF(Formula):
    def __str__(self):
        return "true"


@dataclass(frozen=True, eq=True)
class FalseF(Formula):
    def __str__(self):
        return "false"


@dataclass(frozen=True, eq=True)
class Atom(Formula):
    prop: CIProposition

    def __str__(self):
        return str(self.prop)


@dataclass(frozen=True, eq=True)
class Not(Formula):
    arg: Formula

    def __str__(self):
        return f"!{_wrap(self.arg)}"


@dataclass(frozen=True, eq=True)
class And(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"({self.left} & {self.right})"


@dataclass(frozen=True, eq=True)
class Or(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"({self.left} | {self.right})"


@dataclass(frozen=True, eq=True)
class Implies(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"({self.left} -> {self.right})"


@dataclass(frozen=True, eq=True)
class Next(Formula):
    arg: Formula

    def __str__(self):
        return f"X {_wrap(self.arg)}"


@dataclass(frozen=True, eq=True)
class Until(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"({self.left} U {self.right})"


@dataclass(frozen=True, eq=True)
class Eventually(Formula):
    arg: Formula

    def __str__(self):
        return f"F {_wrap(self.arg)}"


@dataclass(frozen=True, eq=True)
class Globally(Formula):
    arg: Formula

    def __str__(self):
        return f"G {_wrap(self.arg)}"


TRUE = TrueF()
FALSE = FalseF()

_UNARY = (Not, Next, Eventually, Globally)
_BINARY = (And, Or, Implies, Until)
TEMPORAL = (Next, Until, Eventually, Globally)


def _wrap(f):
    return str(f) if isinstance(f, (Atom, TrueF, FalseF, *_UNARY)) else f"({f})"


def children(f: Formula) -> tuple:
    if isinstance(f, _UNARY):
        return (f.arg,)
    if isinstance(f, _BINARY):
        return (f.left, f.right)
    return ()


def subformulas(f: Formula) -> list:
    """Every distinct subformula, children before parents."""
    out, seen = [], set()

    def visit(g):
        if g in seen:
            return
        for c in children(g):
            visit(c)
        seen.add(g)
        out.append(g)

    visit(f)
    return out


def atoms(f: Formula) -> list:
    return [g.prop for g in subformulas(f) if isinstance(g, Atom)]


def is_propositional(f: Formula) -> bool:
    return not any(isinstance(g, TEMPORAL) for g in subformulas(f))


def expand(f: Formula) -> Formula:
    """Rewrite F and G into the core operators (F g = true U g, G g = !F !g)."""
    if isinstance(f, Eventually):
        return Until(TRUE, expand(f.arg))
    if isinstance(f, Globally):
        return Not(Until(TRUE, Not(expand(f.arg))))
    if isinstance(f, _UNARY):
        return type(f)(expand(f.arg))
    if isinstance(f, _BINARY):
        return type(f)(expand(f.left), expand(f.right))
    return f


# -- parsing -----------------------------------------------------------------

class LTLSyntaxError(ModelError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<indep>indep\s*\([^()]*\))
  | (?P<op>->|&&|\|\||[!&|()UXFG~])
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
""", re.VERBOSE)


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise LTLSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "op":
                value = {"&&": "&", "||": "|", "~": "!"}.get(value, value)
            elif kind == "word" and value in ("U", "X", "F", "G"):
                kind = "op"
            out.append((kind, value, pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, variables, kind, temporal):
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = variables
        self.kind = kind
        self.temporal = temporal

    def peek(self):
        return self.tokens[self.i]

    def take(self, value=None):
        tok = self.tokens[self.i]
        if value is not None and tok[1] != value:
            raise LTLSyntaxError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def formula(self):
        left = self.disjunction()
        if self.peek()[1] == "->":
            self.take()
            return Implies(left, self.formula())
        return left

    def disjunction(self):
        f = self.conjunction()
        while self.peek()[1] == "|":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self):
        f = self.until()
        while self.peek()[1] == "&":
            self.take()
            f = And(f, self.until())
        return f

    def until(self):
        left = self.unary()
        if self.peek()[1] == "U":
            tok = self.take()
            self._temporal(tok)
            return Until(left, self.until())
        return left

    def _temporal(self, tok):
        if not self.temporal:
            raise LTLSyntaxError(f"temporal operator {tok[1]!r} not allowed here", tok[2])

    def unary(self):
        kind, value, pos = self.peek()
        if value == "!":
            self.take()
            return Not(self.unary())
        if value in ("X", "F", "G") and kind == "op":
            self.take()
            self._temporal((kind, value, pos))
            return {"X": Next, "F": Eventually, "G": Globally}[value](self.unary())
        return self.primary()

    def primary(self):
        kind, value, pos = self.take()
        if kind == "indep":
            try:
                return Atom(parse_proposition(value, self.variables, self.kind))
            except ModelError as exc:
                raise LTLSyntaxError(str(exc), pos) from None
        if kind == "word" and value in ("true", "false"):
            return TRUE if value == "true" else FALSE
        if value == "(":
            f = self.formula()
            self.take(")")
            return f
        raise LTLSyntaxError(f"unexpected {value or 'end of input'!r}", pos)


def parse_ltl(text: str, variables=None, kind: str = "structural", temporal: bool = True) -> Formula:
    """Parse an LTL formula; ``variables`` (if given) restricts atom names."""
    p = _Parser(text, variables, kind, temporal)
    f = p.formula()
    kind_, value, pos = p.peek()
    if kind_ != "end":
        raise LTLSyntaxError(f"unexpected {value!r}", pos)
    return f


# -- evaluation on lassos -------------------------------------------------------

def _tables(tr, f):
    """Truth value of every subformula at every lasso position."""
    n = len(tr)
    letters = tr.letters
    nxt = [tr.next_position(i) for i in range(n)]
    declared = set(tr.props)
    val = {}
    for g in subformulas(f):
        if isinstance(g, TrueF):
            v = [True] * n
        elif isinstance(g, FalseF):
            v = [False] * n
        elif isinstance(g, Atom):
            if g.prop not in declared:
                raise ModelError(f"proposition {g.prop} is not part of the trace")
            v = [g.prop in letters[i] for i in range(n)]
        elif isinstance(g, Not):
            v = [not x for x in val[g.arg]]
        elif isinstance(g, And):
            v = [a and b for a, b in zip(val[g.left], val[g.right])]
        elif isinstance(g, Or):
            v = [a or b for a, b in zip(val[g.left], val[g.right])]
        elif isinstance(g, Implies):
            v = [(not a) or b for a, b in zip(val[g.left], val[g.right])]
        elif isinstance(g, Next):
            a = val[g.arg]
            v = [a[nxt[i]] for i in range(n)]
        elif isinstance(g, (Until, Eventually)):
            hold = val[g.left] if isinstance(g, Until) else [True] * n
            goal = val[g.right] if isinstance(g, Until) else val[g.arg]
            v = _fixpoint(n, nxt, lambda i, v: goal[i] or (hold[i] and v[nxt[i]]), False)
        elif isinstance(g, Globally):
            a = val[g.arg]
            v = _fixpoint(n, nxt, lambda i, v: a[i] and v[nxt[i]], True)
        else:
            raise TypeError(f"unknown formula node {g!r}")
        val[g] = v
    return val


def _fixpoint(n, nxt, update, start):
    """Backward sweeps until stable: least fixpoint from False, greatest from True."""
    v = [start] * n
    changed = True
    while changed:
        changed = False
        for i in reversed(range(n)):
            new = update(i, v)
            if new != v[i]:
                v[i] = new
                changed = True
    return v


def eval_lasso(tr, f: Formula) -> bool:
    """Does the infinite word prefix · period^ω satisfy ``f``?"""
    return _tables(tr, f)[f][0]


def eval_positions(tr, f: Formula) -> list:
    """Truth of ``f`` at each lasso position."""
    return _tables(tr, f)[f]


@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: int | None = None
    prefix_length: int = 0
    period_length: int = 0
    state_count: int = 0
    restricted: bool = False


def _witness(tr, f, holds):
    """Earliest witness for F / counterexample for G at the top level."""
    if isinstance(f, Eventually) and holds:
        want = True
    elif isinstance(f, Globally) and not holds:
        want = False
    else:
        return None
    vals = eval_positions(tr, f.arg)
    return next(i for i, v in enumerate(vals) if v == want)


def check_lasso(tr, f: Formula, restricted=False) -> Verdict:
    holds = eval_lasso(tr, f)
    return Verdict(holds, _witness(tr, f, holds), len(tr.prefix), len(tr.period),
                   len(tr.prefix_states) + len(tr.period_states), restricted)


def check_ltl(t, f: Formula, budget=None) -> Verdict:
    """Decide the structural LTL model-checking problem for a DBN-template."""
    from .model import is_restricted
    from .repr_ts import find_lasso, restricted_trace

    props = []
    for p in atoms(f):
        if p.kind != "structural":
            raise ModelError(f"{p} is not a structural proposition")
        if p not in props:
            props.append(p.validate(t))
    restricted = is_restricted(t)
    tr = restricted_trace(t, props) if restricted else find_lasso(t, props, budget)
    return check_lasso(tr, f, restricted)
