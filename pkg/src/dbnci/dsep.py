"""d-separation and collision-free (trek) connectivity on BN-templates."""

from __future__ import annotations

from .model import BNTemplate, ModelError


def _check_nodes(bn, *groups):
    for group in groups:
        for node in group:
            if node not in bn:
                raise ModelError(f"unknown node {node!r}")


def d_separated(bn: BNTemplate, xs, ys, zs=()) -> bool:
    """True iff ``zs`` d-separates ``xs`` from ``ys`` in ``bn``.

    Reachability over (node, direction) states: ``up`` means the node was
    entered from one of its children, ``down`` from one of its parents.
    A collider is passable iff it is an ancestor of (or inside) ``zs``.
    """
    xs, ys, zs = set(xs), set(ys), set(zs)
    _check_nodes(bn, xs, ys, zs)
    if xs & ys or xs & zs or ys & zs:
        raise ModelError("query sets must be pairwise disjoint")
    opens_collider = bn.ancestors(zs)
    seen = set()
    stack = [(x, "up") for x in xs]
    while stack:
        state = stack.pop()
        if state in seen:
            continue
        seen.add(state)
        node, direction = state
        if node in ys:
            return False
        if direction == "up":
            if node in zs:
                continue
            stack.extend((p, "up") for p in bn.parents(node))
            stack.extend((c, "down") for c in bn.children(node))
        else:
            if node not in zs:
                stack.extend((c, "down") for c in bn.children(node))
            if node in opens_collider:
                stack.extend((p, "up") for p in bn.parents(node))
    return True


def has_collision_free_path(bn: BNTemplate, a, b, forbidden=()) -> bool:
    """True iff some node reaches both ``a`` and ``b`` by directed paths
    whose interior nodes avoid ``forbidden``.

    Sweep upwards from ``a`` to collect every admissible source, then sweep
    downwards from those sources looking for ``b``.
    """
    _check_nodes(bn, (a, b), forbidden)
    if a == b:
        raise ModelError("endpoints of a collision-free path must differ")
    forbidden = set(forbidden)
    if a in forbidden or b in forbidden:
        raise ModelError("endpoints may not be forbidden")
    sources = {a}
    stack = [a]
    while stack:
        for p in bn.parents(stack.pop()):
            if p == b:
                return True
            if p not in sources and p not in forbidden:
                sources.add(p)
                stack.append(p)
    seen = set(sources)
    stack = list(sources)
    while stack:
        for c in bn.children(stack.pop()):
            if c == b:
                return True
            if c not in seen and c not in forbidden:
                seen.add(c)
                stack.append(c)
    return False
