import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dbnci.generators import gen_dfa_intersection, random_dfa
from dbnci.ltl import Eventually, Globally, Atom, eval_lasso
from dbnci.model import CIProposition, ModelError
from dbnci.nba import NBA, accepts_lasso, check_nba, disjoint_union, nba_from_doc, parse_nba
from dbnci.repr_ts import LassoTrace, find_lasso

A = CIProposition({"A"}, {"B"})
B = CIProposition({"A"}, {"C"})
PROPS = (A, B)
VARS = ("A", "B", "C")


def automaton(kind, guard="indep(A;B)"):
    docs = {
        "G": {"states": ["q"], "initial": ["q"], "accepting": ["q"],
              "transitions": [{"from": "q", "guard": guard, "to": "q"}]},
        "F": {"states": ["q0", "q1"], "initial": ["q0"], "accepting": ["q1"],
              "transitions": [{"from": "q0", "guard": "true", "to": "q0"},
                              {"from": "q0", "guard": guard, "to": "q1"},
                              {"from": "q1", "guard": "true", "to": "q1"}]},
        "GF": {"states": ["q0", "q1"], "initial": ["q0"], "accepting": ["q1"],
               "transitions": [{"from": "q0", "guard": f"!({guard})", "to": "q0"},
                               {"from": "q0", "guard": guard, "to": "q1"},
                               {"from": "q1", "guard": f"!({guard})", "to": "q0"},
                               {"from": "q1", "guard": guard, "to": "q1"}]},
        "FG": {"states": ["q0", "q1"], "initial": ["q0"], "accepting": ["q1"],
               "transitions": [{"from": "q0", "guard": "true", "to": "q0"},
                               {"from": "q0", "guard": guard, "to": "q1"},
                               {"from": "q1", "guard": guard, "to": "q1"}]},
    }
    return nba_from_doc(docs[kind])


def lasso(prefix, period):
    return LassoTrace(tuple(map(frozenset, prefix)), tuple(map(frozenset, period)), PROPS)


def test_parse_examples():
    g = parse_nba(json.dumps({"states": ["q"], "initial": ["q"], "accepting": ["q"],
                              "transitions": [{"from": "q", "guard": "indep(O;S|L)", "to": "q"}]}))
    assert g.props() == [CIProposition({"O"}, {"S"}, {"L"})]
    assert len(automaton("F").transitions) == 3


@pytest.mark.parametrize("doc", [
    {"states": ["q"], "initial": ["q"], "transitions": [{"from": "p", "guard": "true", "to": "q"}]},
    {"states": ["q"], "initial": ["r"]},
    {"states": ["q"], "transitions": [{"from": "q", "guard": "X indep(A;B)", "to": "q"}]},
    {"states": ["q"], "transitions": [{"from": "q", "to": "q"}]},
    {"initial": []},
])
def test_parse_errors(doc):
    with pytest.raises(ModelError):
        nba_from_doc(doc)


def test_syntax_error_position():
    with pytest.raises(ModelError) as info:
        parse_nba('{"states": [\n}')
    assert info.value.line == 2


def test_acceptance_examples(fig1):
    g = nba_from_doc({"states": ["q"], "initial": ["q"], "accepting": ["q"],
                      "transitions": [{"from": "q", "guard": "indep(O;S|L)", "to": "q"}]})
    p = g.props()[0]
    assert accepts_lasso(g, find_lasso(fig1, [p]))
    assert not accepts_lasso(automaton("F"), lasso([set()], [{B}]))
    alternating = lasso([], [set(), {A}])
    assert accepts_lasso(automaton("GF"), alternating)
    assert not accepts_lasso(automaton("FG"), alternating)


def test_check_nba(fig1):
    g = nba_from_doc({"states": ["q"], "initial": ["q"], "accepting": ["q"],
                      "transitions": [{"from": "q", "guard": "indep(O;S|L)", "to": "q"}]})
    assert check_nba(fig1, g).holds
    empty = NBA(("q",), frozenset(), frozenset({"q"}), ())
    assert not check_nba(fig1, empty).holds


def test_check_nba_on_dfa_instances():
    rng = random.Random(21)
    for _ in range(20):
        dfas = [random_dfa(rng) for _ in range(rng.randint(1, 3))]
        t, p = gen_dfa_intersection(dfas)
        text = str(p)
        a = nba_from_doc({"states": ["q0", "q1"], "initial": ["q0"], "accepting": ["q1"],
                          "transitions": [{"from": "q0", "guard": "true", "to": "q0"},
                                          {"from": "q0", "guard": f"!{text}", "to": "q1"},
                                          {"from": "q1", "guard": "true", "to": "q1"}]},
                         t.variables)
        # F (d-connection) holds iff the DFAs accept a common word a^t
        bound = 1
        for d in dfas:
            bound *= len(d.states)
        expected = any(all(d.accepts(n) for d in dfas) for n in range(bound + 6))
        assert check_nba(t, a).holds == expected


letters = st.frozensets(st.sampled_from(PROPS))
lassos = st.builds(lambda p, q: LassoTrace(tuple(p), tuple(q), PROPS),
                   st.lists(letters, max_size=6), st.lists(letters, min_size=1, max_size=6))
kinds = st.sampled_from(["G", "F", "GF", "FG"])
guards = st.sampled_from(["indep(A;B)", "indep(A;C)", "indep(A;B) | indep(A;C)",
                          "indep(A;B) & !indep(A;C)"])


@settings(max_examples=300, deadline=None)
@given(lassos, kinds, kinds, guards, guards)
def test_rotation_and_union(tr, k1, k2, g1, g2):
    a1, a2 = automaton(k1, g1), automaton(k2, g2)
    r1 = accepts_lasso(a1, tr)
    assert accepts_lasso(a1, tr.rotated()) == r1
    assert accepts_lasso(disjoint_union(a1, a2), tr) == (r1 or accepts_lasso(a2, tr))


@settings(max_examples=200, deadline=None)
@given(lassos)
def test_agrees_with_ltl(tr):
    a = Atom(A)
    assert accepts_lasso(automaton("G"), tr) == eval_lasso(tr, Globally(a))
    assert accepts_lasso(automaton("F"), tr) == eval_lasso(tr, Eventually(a))
    assert accepts_lasso(automaton("GF"), tr) == eval_lasso(tr, Globally(Eventually(a)))
    assert accepts_lasso(automaton("FG"), tr) == eval_lasso(tr, Eventually(Globally(a)))


def test_undeclared_guard_atom():
    tr = LassoTrace((), (frozenset(),), (B,))
    with pytest.raises(ModelError):
        accepts_lasso(automaton("G"), tr)
