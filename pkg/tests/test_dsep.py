import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dbnci.dsep import d_separated, has_collision_free_path
from dbnci.model import BNTemplate, ModelError
from dbnci.unfolding import UnfoldedNode, unfold


def bn(*edges, nodes=None):
    nodes = nodes or sorted({v for e in edges for v in e})
    return BNTemplate(tuple(nodes), frozenset(edges))


# -- brute-force reference: enumerate simple undirected paths ------------------

def _descendants(g, v):
    out, stack = {v}, [v]
    while stack:
        for c in g.children(stack.pop()):
            if c not in out:
                out.add(c)
                stack.append(c)
    return out


def _paths(g, a, b):
    """All simple undirected paths a..b, as node lists."""
    def extend(path):
        last = path[-1]
        if last == b:
            yield list(path)
            return
        for nxt in g.parents(last) | g.children(last):
            if nxt not in path:
                path.append(nxt)
                yield from extend(path)
                path.pop()
    yield from extend([a])


def _is_d_path(g, path, zs):
    for i in range(1, len(path) - 1):
        prev, w, nxt = path[i - 1], path[i], path[i + 1]
        collider = prev in g.parents(w) and nxt in g.parents(w)
        if collider:
            if not (_descendants(g, w) & zs):
                return False
        elif w in zs:
            return False
    return True


def brute_separated(g, xs, ys, zs):
    return not any(_is_d_path(g, p, set(zs)) for x in xs for y in ys for p in _paths(g, x, y))


def brute_trek(g, a, b, forbidden):
    for p in _paths(g, a, b):
        if any(w in forbidden for w in p[1:-1]):
            continue
        if all(not (p[i - 1] in g.parents(p[i]) and p[i + 1] in g.parents(p[i]))
               for i in range(1, len(p) - 1)):
            return True
    return False


@st.composite
def dags(draw, max_nodes=6):
    n = draw(st.integers(2, max_nodes))
    nodes = [f"v{i}" for i in range(n)]
    pairs = [(nodes[i], nodes[j]) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    perm = draw(st.permutations(nodes))
    rename = dict(zip(nodes, perm))
    return BNTemplate(tuple(nodes), frozenset((rename[a], rename[b]) for a, b in chosen))


@st.composite
def queries(draw):
    g = draw(dags())
    nodes = list(g.nodes)
    x, y = draw(st.lists(st.sampled_from(nodes), min_size=2, max_size=2, unique=True))
    rest = [v for v in nodes if v not in (x, y)]
    roles = draw(st.lists(st.sampled_from("xyzn"), min_size=len(rest), max_size=len(rest)))
    xs = {x} | {v for v, r in zip(rest, roles) if r == "x"}
    ys = {y} | {v for v, r in zip(rest, roles) if r == "y"}
    zs = {v for v, r in zip(rest, roles) if r == "z"}
    return g, xs, ys, zs


@settings(max_examples=300, deadline=None)
@given(queries())
def test_matches_path_enumeration(q):
    g, xs, ys, zs = q
    assert d_separated(g, xs, ys, zs) == brute_separated(g, xs, ys, zs)


@settings(max_examples=200, deadline=None)
@given(queries())
def test_symmetry_and_decomposition(q):
    g, xs, ys, zs = q
    sep = d_separated(g, xs, ys, zs)
    assert sep == d_separated(g, ys, xs, zs)
    if sep:
        for x in xs:
            assert d_separated(g, {x}, ys, zs)


@settings(max_examples=200, deadline=None)
@given(dags(), st.data())
def test_trek_matches_path_enumeration(g, data):
    a, b = data.draw(st.lists(st.sampled_from(g.nodes), min_size=2, max_size=2, unique=True))
    rest = [v for v in g.nodes if v not in (a, b)]
    forbidden = set(data.draw(st.lists(st.sampled_from(rest), unique=True))) if rest else set()
    assert has_collision_free_path(g, a, b, forbidden) == brute_trek(g, a, b, forbidden)


def test_chain_and_collider():
    chain = bn(("A", "B"), ("B", "C"))
    assert d_separated(chain, {"A"}, {"C"}, {"B"})
    assert not d_separated(chain, {"A"}, {"C"})
    collider = bn(("A", "C"), ("B", "C"))
    assert d_separated(collider, {"A"}, {"B"})
    assert not d_separated(collider, {"A"}, {"B"}, {"C"})


def test_collider_opened_by_descendant():
    g = bn(("A", "C"), ("B", "C"), ("C", "D"))
    assert not d_separated(g, {"A"}, {"B"}, {"D"})


def test_running_example_slice_zero(fig1):
    g = unfold(fig1, 0)
    o, s, l = (UnfoldedNode(v, 0) for v in "OSL")
    assert d_separated(g, {o}, {s}, {l})


def test_trek_examples(fig4):
    assert has_collision_free_path(bn(("C", "A"), ("C", "B")), "A", "B")
    assert not has_collision_free_path(bn(("A", "C"), ("B", "C")), "A", "B")
    g = unfold(fig4, 2)
    slice2 = {UnfoldedNode(v, 2) for v in fig4.variables}
    a, b = UnfoldedNode("W1", 2), UnfoldedNode("W3", 2)
    assert has_collision_free_path(g, a, b, slice2 - {a, b})


def test_errors():
    g = bn(("A", "B"))
    with pytest.raises(ModelError):
        d_separated(g, {"A"}, {"Q"})
    with pytest.raises(ModelError):
        d_separated(g, {"A"}, {"A"})
    with pytest.raises(ModelError):
        has_collision_free_path(g, "A", "A")
