import random
from fractions import Fraction

import pytest

from dbnci.generators import (UnaryDFA, dfas_from_doc, dfas_to_doc, first_primes,
                              gen_dfa_intersection, gen_prime_bridges, gen_skolem_embedding,
                              random_dfa, random_distribution, random_doubly_stochastic,
                              skolem_closed_form, verify_skolem_difference)
from dbnci.model import ModelError
from dbnci.repr_ts import find_lasso
from dbnci.stochastic import distribution_at
from dbnci.unfolding import MarkovChain, dbn_to_markov_chain, oracle_trace

F = Fraction


def test_primes():
    assert first_primes(6) == [2, 3, 5, 7, 11, 13]


def test_bridge_sizes():
    t, p = gen_prime_bridges(1)
    assert (t.n, len(t.initial_edges), len(t.step_edges)) == (4, 2, 4)
    t, p = gen_prime_bridges(2)
    assert t.n == 3 + 2 + 3
    assert p.z == {"W1_0", "W2_0"}
    with pytest.raises(ValueError):
        gen_prime_bridges(0)


def test_bridge_k1_connects_at_even_times():
    t, p = gen_prime_bridges(1)
    assert [p not in x for x in oracle_trace(t, [p], 10)] == [s % 2 == 0 for s in range(11)]


def even_dfa():
    return UnaryDFA(("e", "o"), {"e": "o", "o": "e"}, frozenset({"e"}))


def mod_dfa(m):
    states = tuple(f"r{i}" for i in range(m))
    return UnaryDFA(states, {states[i]: states[(i + 1) % m] for i in range(m)},
                    frozenset({states[0]}))


def test_even_dfa_behaves_like_one_bridge():
    t1, p1 = gen_prime_bridges(1)
    t2, p2 = gen_dfa_intersection([even_dfa()])
    a = [p1 in x for x in oracle_trace(t1, [p1], 10)]
    b = [p2 in x for x in oracle_trace(t2, [p2], 10)]
    assert a == b


def test_two_and_three_cycles():
    t, p = gen_dfa_intersection([mod_dfa(2), mod_dfa(3)])
    word = oracle_trace(t, [p], 13)
    assert [p not in x for x in word] == [s % 6 == 0 for s in range(14)]
    assert find_lasso(t, [p]).minimal_period() == 6


def test_empty_accepting_set_never_connects():
    dfa = UnaryDFA(("a", "b"), {"a": "b", "b": "b"}, frozenset())
    t, p = gen_dfa_intersection([dfa])
    assert all(p in x for x in oracle_trace(t, [p], 10))


def test_random_dfa_sets_match_simulation():
    rng = random.Random(41)
    for _ in range(15):
        dfas = [random_dfa(rng) for _ in range(rng.randint(1, 3))]
        t, p = gen_dfa_intersection(dfas)
        tr = find_lasso(t, [p])
        for s in range(40):
            assert (p not in tr.letter_at(s)) == all(d.accepts(s) for d in dfas)


def test_dfa_validation_and_documents():
    with pytest.raises(ModelError):
        UnaryDFA(("a",), {"a": "b"}, frozenset())
    with pytest.raises(ModelError):
        UnaryDFA(("a",), {"a": "a"}, frozenset({"z"}))
    with pytest.raises(ModelError):
        dfas_from_doc({"dfas": [{"states": ["a"]}]})
    with pytest.raises(ValueError):
        gen_dfa_intersection([])
    dfas = [even_dfa(), mod_dfa(3)]
    assert dfas_from_doc(dfas_to_doc(dfas)) == dfas


def chain(matrix, init):
    return MarkovChain(len(matrix), tuple(tuple(F(q) for q in row) for row in matrix),
                       tuple(F(q) for q in init))


def test_skolem_two_state_layout():
    m = chain([["1/3", "2/3"], ["2/3", "1/3"]], [1, 0])
    inst = gen_skolem_embedding(m)
    assert inst.dbn.template.variables == ("X", "Z0", "Y")
    assert inst.k == 1 and inst.z_bits == 1
    # the equivalent chain is (1/2) [[M, M], [S, S]] on the valid encodings
    big = dbn_to_markov_chain(inst.dbn)
    enc = {0: 1, 1: 0}          # chain state -> (X, Z0) configuration with Z0 = 0
    s = F(1, 2)
    for y_prev in (0, 1):
        for c in range(2):
            col = enc[c] + 4 * y_prev
            for y in (0, 1):
                for l in range(2):
                    want = F(1, 2) * (m.matrix[l][c] if y == 1 else s)
                    assert big.matrix[enc[l] + 4 * y][col] == want


def test_skolem_bit_count():
    rng = random.Random(42)
    for size, bits in [(2, 1), (3, 1), (4, 2), (5, 2), (6, 3), (9, 3)]:
        m = MarkovChain(size, random_doubly_stochastic(size, rng), (1,) + (0,) * (size - 1))
        inst = gen_skolem_embedding(m)
        assert inst.dbn.template.n == bits + 2


def test_skolem_trivial_values():
    rng = random.Random(43)
    for size in (2, 3, 5):
        m = random_doubly_stochastic(size, rng)
        inst = gen_skolem_embedding(MarkovChain(size, m, (1,) + (0,) * (size - 1)))
        assert verify_skolem_difference(inst, 0) == 1 - F(1, size)
        uniform = gen_skolem_embedding(MarkovChain(size, m, (F(1, size),) * size))
        assert all(verify_skolem_difference(uniform, n) == 0 for n in range(6))


def test_skolem_identity_and_fair_coin():
    rng = random.Random(44)
    for _ in range(8):
        size = rng.randint(2, 5)
        inst = gen_skolem_embedding(MarkovChain(size, random_doubly_stochastic(size, rng),
                                                random_distribution(size, rng, 7)))
        y = inst.z_bits + 1
        for n in range(16):
            assert verify_skolem_difference(inst, n) == skolem_closed_form(inst, n)
            assert distribution_at(inst.dbn, n).marginal([y])[(1,)] == F(1, 2)


def test_skolem_invalid_encodings_are_absorbing():
    rng = random.Random(45)
    m = MarkovChain(4, random_doubly_stochastic(4, rng), (1, 0, 0, 0))
    inst = gen_skolem_embedding(m)          # 3 state bits, 4 valid encodings
    big = dbn_to_markov_chain(inst.dbn)
    sizes = inst.dbn.sizes
    valid = {1} | {2 * z for z in range(3)}  # X=1,Z=0 or X=0,Z<3 (X is the lowest digit)
    for c in range(big.size):
        state = c % 8
        if state not in valid:
            col = [big.matrix[l][c] for l in range(big.size)]
            assert sum(col[l] for l in range(big.size) if l % 8 == state) == 1
    assert sizes == (2, 2, 2, 2)


def test_skolem_preconditions():
    not_stationary = chain([["1", "1/2"], ["0", "1/2"]], [1, 0])
    with pytest.raises(ModelError, match="row sums"):
        gen_skolem_embedding(not_stationary)
    m = chain([["1/2", "1/2"], ["1/2", "1/2"]], [1, 0])
    with pytest.raises(ModelError, match="distribution"):
        gen_skolem_embedding(m, (F(1, 2), F(1, 3)))
    with pytest.raises(ModelError):
        gen_skolem_embedding(chain([["1"]], [1]))
    with pytest.raises(ValueError):
        verify_skolem_difference(gen_skolem_embedding(m), -1)


def test_random_doubly_stochastic():
    rng = random.Random(46)
    for _ in range(20):
        size = rng.randint(1, 6)
        m = random_doubly_stochastic(size, rng)
        assert all(sum(row) == 1 for row in m)
        assert all(sum(m[l][c] for l in range(size)) == 1 for c in range(size))
