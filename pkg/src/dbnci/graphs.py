"""Small graph utilities shared by the automaton checks."""

from __future__ import annotations


def reachable(roots, successors) -> set:
    seen = set(roots)
    stack = list(seen)
    while stack:
        for w in successors(stack.pop()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def strongly_connected_components(vertices, successors) -> list:
    """Tarjan's algorithm, iterative so deep graphs do not hit the recursion limit.

    Returns components as lists, in reverse topological order.
    """
    index = {}
    lowlink = {}
    on_stack = set()
    stack = []
    components = []
    counter = 0
    for root in vertices:
        if root in index:
            continue
        work = [(root, iter(successors(root)))]
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = lowlink[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(successors(w))))
                    advanced = True
                    break
                if w in on_stack:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                lowlink[u] = min(lowlink[u], lowlink[v])
            if lowlink[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                components.append(comp)
    return components


def is_nontrivial(component, successors) -> bool:
    """A component carries a cycle: more than one vertex or a self-loop."""
    if len(component) > 1:
        return True
    v = component[0]
    return v in set(successors(v))
