import random

import pytest

from dbnci.generators import gen_prime_bridges, random_proposition, random_template
from dbnci.model import CIProposition, DBNTemplate, ModelError, Slot
from dbnci.repr_ts import (LassoTrace, ReprState, StateBudgetExceeded, default_budget, find_lasso,
                           initial_state, label, restricted_trace, state_trace, successor)
from dbnci.unfolding import oracle_trace


def test_initial_states(fig1, fig4):
    s = initial_state(fig4)
    assert s.is_initial and not s.intra_edges and not s.u_edges
    assert initial_state(fig1).intra_edges == {(0, 1), (3, 2)}


def test_three_slice_successors(fig4):
    s0 = initial_state(fig4)
    s1 = successor(fig4, s0)
    assert s1.intra_edges == {(0, 1)} and s1.u_edges == frozenset() and not s1.is_initial
    s2 = successor(fig4, s1)
    assert s2.u_edges == {(0, 2)}
    s3 = successor(fig4, s2)
    assert s3.u_edges == {(0, 1), (0, 2), (1, 2)}
    assert successor(fig4, s3) == s3


def test_initial_state_differs_from_encoded_states():
    t = DBNTemplate(("A", "B"))
    s0 = initial_state(t)
    s1 = successor(t, s0)
    assert s0.key() != s1.key()
    assert s1 == ReprState(2, frozenset())
    assert find_lasso(t, []).prefix == (frozenset(),)


def test_empty_step_relation_forgets_everything():
    t = DBNTemplate(("A", "B", "C"), frozenset({(0, 1), (1, 2)}))
    s = successor(t, initial_state(t))
    assert not s.intra_edges and not s.u_edges


def test_materialized_state_has_source_u_nodes(fig4):
    s = successor(fig4, successor(fig4, initial_state(fig4)))
    bn = s.materialize(fig4)
    assert ("U[W1,W3]", "W1") in bn.edges and ("U[W1,W3]", "W3") in bn.edges
    assert not bn.parents("U[W1,W3]")


def test_labels(fig1):
    p = CIProposition({"O"}, {"S"}, {"L"})
    s = initial_state(fig1)
    for _ in range(20):
        assert label(fig1, s, [p]) == {p}
        assert label(fig1, s, []) == frozenset()
        s = successor(fig1, s)


def test_bridge_k1_alternates():
    t, p = gen_prime_bridges(1)
    letters = state_trace(t, [p], 4)
    assert [p in x for x in letters] == [False, True, False, True, False]
    assert letters == oracle_trace(t, [p], 4)


def test_lassos(fig1, fig4):
    tr = find_lasso(fig4, [])
    assert len(tr.prefix_states) == 3 and len(tr.period_states) == 1
    assert len(find_lasso(fig1, []).period) == 1
    t, p = gen_prime_bridges(2)
    assert find_lasso(t, [p]).minimal_period() == 6


@pytest.mark.parametrize("k, product", [(1, 2), (2, 6), (3, 30)])
def test_bridge_period_is_prime_product(k, product):
    t, p = gen_prime_bridges(k)
    tr = find_lasso(t, [p])
    assert tr.minimal_period() == product
    # the d-connected times are exactly the multiples of the product
    assert all((p in tr.letter_at(i)) == (i % product != 0) for i in range(2 * product + 3))


def test_lasso_structure_invariants():
    rng = random.Random(11)
    for _ in range(100):
        n = rng.randint(1, 5)
        t = random_template(n, rng, p=0.4)
        tr = find_lasso(t, [])
        states = tr.prefix_states + tr.period_states
        assert len({s.key() for s in states}) == len(states)
        assert successor(t, tr.period_states[-1]) == tr.period_states[0]
        assert len(states) <= 2 ** (n * (n - 1) // 2) + 1


def test_oracle_soundness_with_set_propositions():
    rng = random.Random(12)
    for _ in range(120):
        t = random_template(rng.randint(2, 5), rng, p=rng.choice([0.25, 0.45]))
        props = [random_proposition(t, rng, max_side=3) for _ in range(3)]
        names = t.variables
        props += [CIProposition({a}, {b}) for a in names for b in names if a < b][:4]
        assert state_trace(t, props, 10) == oracle_trace(t, props, 10)


def test_restricted_trace(fig1):
    p = CIProposition({"O"}, {"S"}, {"L"})
    tr = restricted_trace(fig1, [p])
    assert len(tr.prefix) == 16 and len(tr.period) == 1
    assert all(p in x for x in tr.letters)
    empty = DBNTemplate(("A", "B"))
    q = CIProposition({"A"}, {"B"})
    assert set(restricted_trace(empty, [q]).letters) == {frozenset({q})}
    with pytest.raises(ModelError):
        restricted_trace(DBNTemplate(("A", "B"), frozenset({(0, 1)})), [])


def test_restricted_tail_matches_oracle():
    rng = random.Random(13)
    for _ in range(40):
        n = rng.randint(1, 4)
        t = random_template(n, rng, p=0.4, restricted=True)
        props = [p for p in (random_proposition(t, rng) for _ in range(3)) if p]
        oracle = oracle_trace(t, props, n * n + 8)
        assert len(set(oracle[n * n:])) == 1
        assert restricted_trace(t, props).letters == tuple(oracle[:n * n + 1])


def test_budget(monkeypatch):
    t, p = gen_prime_bridges(2)
    with pytest.raises(StateBudgetExceeded) as info:
        find_lasso(t, [p], budget=3)
    assert info.value.visited == 3
    monkeypatch.setenv("DBNCI_STATE_BUDGET", "5")
    assert default_budget() == 5
    with pytest.raises(StateBudgetExceeded):
        find_lasso(t, [p])


def test_lasso_trace_helpers():
    a, b = frozenset({"a"}), frozenset()
    tr = LassoTrace((b,), (a, b, a, b))
    assert tr.minimal_period() == 2
    assert [tr.letter_at(i) for i in range(6)] == [b, a, b, a, b, a]
    rot = tr.rotated()
    assert [rot.letter_at(i) for i in range(9)] == [tr.letter_at(i) for i in range(9)]
    with pytest.raises(ValueError):
        LassoTrace((a,), ())


def test_intra_edges_from_step_template():
    t = DBNTemplate(("A", "B"), frozenset(), frozenset({(Slot(0, True), 1)}))
    assert successor(t, initial_state(t)).intra_edges == {(0, 1)}
