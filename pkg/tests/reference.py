"""Slow, independent reference implementations used as test oracles.

Nothing here imports the package's solvers; graphs are plain edge lists.
"""
from __future__ import annotations

from itertools import combinations

import networkx as nx


def digraph(n: int, edges) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edges)
    return g


def subset_causal_paths(n: int, edges, x: int, y: int) -> set[tuple[int, ...]]:
    """Directed x->y paths by brute force over interior node subsets.

    Node ids form a topological order, so in any directed path the interior
    nodes appear in increasing id order and the ascending arrangement is the
    only permutation of a subset that can be edge-consecutive.
    """
    es = set(edges)
    inner = [v for v in range(n) if v not in (x, y)]
    out = set()
    for k in range(len(inner) + 1):
        for sub in combinations(inner, k):
            seq = (x,) + tuple(sorted(sub)) + (y,)
            if all((a, b) in es for a, b in zip(seq, seq[1:])):
                out.add(seq)
    return out


def nx_causal_paths(n: int, edges, x: int, y: int) -> set[tuple[int, ...]]:
    return {tuple(p) for p in nx.all_simple_paths(digraph(n, edges), x, y)}


def nx_backdoor_paths(n: int, edges, x: int, y: int) -> set[tuple[tuple[int, ...], tuple[bool, ...]]]:
    """Skeleton paths from x to y whose first edge points into x, with step directions."""
    es = set(edges)
    skel = digraph(n, edges).to_undirected()
    out = set()
    for p in nx.all_simple_paths(skel, x, y):
        if (p[1], p[0]) not in es:
            continue
        out.add((tuple(p), tuple((a, b) in es for a, b in zip(p, p[1:]))))
    return out


def backdoor_valid(n: int, edges, x: int, y: int, z) -> bool:
    """Backdoor criterion via d-separation in the graph without x's outgoing edges."""
    g = digraph(n, edges)
    z = set(z)
    if z & nx.descendants(g, x):
        return False
    cut = g.copy()
    cut.remove_edges_from(list(g.out_edges(x)))
    return nx.is_d_separator(cut, {x}, {y}, z)


def minimal_sets(n: int, edges, x: int, y: int, max_size: int = 4) -> set[frozenset[int]]:
    """All valid sets up to ``max_size`` with no valid proper subset."""
    pool = [v for v in range(n) if v not in (x, y)]
    valid = []
    for k in range(max_size + 1):
        for z in combinations(pool, k):
            if backdoor_valid(n, edges, x, y, z):
                valid.append(frozenset(z))
    return {z for z in valid if not any(w < z for w in valid)}


def transitive_descendants(n: int, edges) -> list[set[int]]:
    """Closure by repeated relaxation until nothing changes."""
    desc = [set() for _ in range(n)]
    for u, v in edges:
        desc[u].add(v)
    changed = True
    while changed:
        changed = False
        for u in range(n):
            extra = set().union(*(desc[w] for w in desc[u])) - desc[u] if desc[u] else set()
            if extra:
                desc[u] |= extra
                changed = True
    return desc


def fixpoint_states(n: int, parents, formulas, observed, interventions=None) -> dict[int, bool]:
    """Evaluate boolean formulas by sweeping in arbitrary order until stable.

    ``formulas[v]`` is a callable taking the current state dict. Intervened
    nodes keep their pinned value and ignore their formula.
    """
    interventions = dict(interventions or {})
    state = {v: False for v in range(n)}
    state.update(observed)
    state.update(interventions)
    for _ in range(n + 1):
        changed = False
        for v in reversed(range(n)):  # deliberately not topological
            if v in interventions or v in observed:
                continue
            new = formulas[v](state)
            if new != state[v]:
                state[v] = new
                changed = True
        if not changed:
            return state
    raise AssertionError("formulas did not reach a fixpoint")


def expr_callable(expr):
    """Turn a package expression tree into a closure, walking its fields generically."""
    if hasattr(expr, "node"):
        node, neg = expr.node, expr.negated
        return lambda s: (not s[node]) if neg else s[node]
    left, right = expr_callable(expr.left), expr_callable(expr.right)
    if expr.op == "and":
        return lambda s: left(s) and right(s)
    return lambda s: left(s) or right(s)
