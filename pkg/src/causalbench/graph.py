"""Tiered random DAGs.

Nodes are dense integers assigned tier by tier, so node ids are already a
topological order: every edge ``(u, v)`` has ``tier(u) < tier(v)`` and hence
``u < v``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from . import _random
from .errors import ContractError, ValidationError


@dataclass(frozen=True)
class GraphShape:
    """Node count per tier, index 0 being the highest tier."""

    tier_sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(self.tier_sizes)
        object.__setattr__(self, "tier_sizes", sizes)
        if len(sizes) < 2:
            raise ValidationError(f"a graph shape needs at least 2 tiers, got {len(sizes)}")
        for s in sizes:
            if not isinstance(s, int) or isinstance(s, bool) or s < 1:
                raise ValidationError(f"tier sizes must be positive integers, got {sizes!r}")

    @classmethod
    def parse(cls, text: str) -> "GraphShape":
        """Parse ``"2*5"`` (five tiers of two) or ``"1,2,2,1"``."""
        text = text.strip()
        m = re.fullmatch(r"(\d+)\s*\*\s*(\d+)", text)
        if m:
            width, depth = int(m.group(1)), int(m.group(2))
            return cls((width,) * depth)
        try:
            return cls(tuple(int(p) for p in re.split(r"[,\s-]+", text) if p))
        except ValueError:
            raise ValidationError(f"cannot parse graph shape {text!r}") from None

    @property
    def label(self) -> str:
        sizes = self.tier_sizes
        if len(set(sizes)) == 1:
            return f"{sizes[0]}*{len(sizes)}"
        return ",".join(map(str, sizes))

    @property
    def n_tiers(self) -> int:
        return len(self.tier_sizes)

    @property
    def n_nodes(self) -> int:
        return sum(self.tier_sizes)

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class JunctionProbabilities:
    p_fork: float = 0.1
    p_chain: float = 0.1
    p_collider: float = 0.1

    def __post_init__(self):
        for name in ("p_fork", "p_chain", "p_collider"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {p}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p_fork, self.p_chain, self.p_collider)


@dataclass(frozen=True)
class GenParams:
    shape: GraphShape
    iterations: int
    probs: JunctionProbabilities
    seed: int


@dataclass(frozen=True)
class ComplexityStats:
    avg_indegree: Fraction
    chain_count: int
    fork_count: int
    collider_count: int

    def as_dict(self) -> dict:
        return {
            "avg_indegree": float(self.avg_indegree),
            "chain_count": self.chain_count,
            "fork_count": self.fork_count,
            "collider_count": self.collider_count,
        }


@dataclass(frozen=True, eq=False)
class TieredDag:
    shape: GraphShape
    edges: tuple[tuple[int, int], ...]
    gen_params: GenParams | None = field(default=None, compare=False)

    def __post_init__(self):
        edges = tuple(sorted({(int(u), int(v)) for u, v in self.edges}))
        if len(edges) != len(self.edges):
            raise ValidationError("duplicate edges")
        object.__setattr__(self, "edges", edges)
        tiers = self.tiers
        n = len(tiers)
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"edge {(u, v)} references a node outside 0..{n - 1}")
            if tiers[u] >= tiers[v]:
                raise ValidationError(f"edge {(u, v)} does not run from a higher to a lower tier")

    @classmethod
    def from_edges(cls, shape: GraphShape | Sequence[int], edges: Iterable[tuple[int, int]]) -> "TieredDag":
        if not isinstance(shape, GraphShape):
            shape = GraphShape(tuple(shape))
        return cls(shape, tuple(edges))

    def __eq__(self, other):
        if not isinstance(other, TieredDag):
            return NotImplemented
        return self.shape == other.shape and self.edges == other.edges

    def __hash__(self):
        return hash((self.shape, self.edges))

    @cached_property
    def tiers(self) -> tuple[int, ...]:
        return tuple(t for t, size in enumerate(self.shape.tier_sizes) for _ in range(size))

    @property
    def n_nodes(self) -> int:
        return self.shape.n_nodes

    @property
    def nodes(self) -> range:
        return range(self.n_nodes)

    def tier_nodes(self, tier: int) -> tuple[int, ...]:
        start = sum(self.shape.tier_sizes[:tier])
        return tuple(range(start, start + self.shape.tier_sizes[tier]))

    @cached_property
    def _parents(self) -> tuple[tuple[int, ...], ...]:
        acc: list[list[int]] = [[] for _ in self.nodes]
        for u, v in self.edges:
            acc[v].append(u)
        return tuple(tuple(p) for p in acc)

    @cached_property
    def _children(self) -> tuple[tuple[int, ...], ...]:
        acc: list[list[int]] = [[] for _ in self.nodes]
        for u, v in self.edges:
            acc[u].append(v)
        return tuple(tuple(c) for c in acc)

    @cached_property
    def child_masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << c for c in cs) for cs in self._children)

    @cached_property
    def parent_masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << p for p in ps) for ps in self._parents)

    @cached_property
    def descendant_masks(self) -> tuple[int, ...]:
        # reverse id order is reverse topological order
        masks = [0] * self.n_nodes
        for v in reversed(self.nodes):
            m = 0
            for c in self._children[v]:
                m |= (1 << c) | masks[c]
            masks[v] = m
        return tuple(masks)

    def _check(self, v: int) -> None:
        if not (isinstance(v, int) and 0 <= v < self.n_nodes):
            raise ContractError(f"unknown node id {v!r}")

    def parents(self, v: int) -> frozenset[int]:
        self._check(v)
        return frozenset(self._parents[v])

    def children(self, v: int) -> frozenset[int]:
        self._check(v)
        return frozenset(self._children[v])

    def descendants(self, v: int) -> frozenset[int]:
        self._check(v)
        return frozenset(_bits(self.descendant_masks[v]))

    def ancestors(self, v: int) -> frozenset[int]:
        self._check(v)
        return frozenset(u for u in self.nodes if self.descendant_masks[u] >> v & 1)

    def roots(self) -> frozenset[int]:
        return frozenset(v for v in self.nodes if not self._parents[v])

    def topological_order(self) -> list[int]:
        return list(self.nodes)

    def indegree(self, v: int) -> int:
        return len(self._parents[v])

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.child_masks[u] >> v & 1)


def _bits(mask: int) -> Iterable[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def parents(g: TieredDag, v: int) -> frozenset[int]:
    return g.parents(v)


def descendants(g: TieredDag, v: int) -> frozenset[int]:
    return g.descendants(v)


def roots(g: TieredDag) -> frozenset[int]:
    return g.roots()


def topological_order(g: TieredDag) -> list[int]:
    return g.topological_order()


def generate_graph(
    shape: GraphShape | Sequence[int],
    iterations: int,
    probs: JunctionProbabilities | Sequence[float] = JunctionProbabilities(),
    seed: int = 0,
) -> TieredDag:
    """Grow a random tiered DAG by junction sampling.

    For each iteration and each node, three independent uniforms decide
    whether the node tries to start a fork (two children), a chain
    (node -> m -> w) and a collider (node -> c <- u).  Partners are drawn
    uniformly from the eligible nodes; an attempt whose partners do not exist
    is dropped.  Edges have set semantics.  Finally every node below tier 0
    that is still an orphan receives one parent from the tier directly above.
    """
    if not isinstance(shape, GraphShape):
        shape = GraphShape(tuple(shape))
    if not isinstance(probs, JunctionProbabilities):
        probs = JunctionProbabilities(*probs)
    if iterations < 0:
        raise ValidationError(f"iterations must be non-negative, got {iterations}")

    tiers = [t for t, size in enumerate(shape.tier_sizes) for _ in range(size)]
    n = len(tiers)
    starts = [sum(shape.tier_sizes[:t]) for t in range(shape.n_tiers)] + [n]
    # nodes below tier t are starts[t+1]..n-1, nodes above tier t are 0..starts[t]-1
    below = [range(starts[t + 1], n) for t in range(shape.n_tiers)]
    p_fork, p_chain, p_collider = probs.as_tuple()
    edges: set[tuple[int, int]] = set()

    for it in range(iterations):
        for v in range(n):
            rng = _random.stream(seed, _random.GRAPH, it, v)
            u_fork, u_chain, u_collider = rng.random(3)
            lower = below[tiers[v]]
            if u_fork < p_fork and len(lower) >= 2:
                i = int(rng.integers(len(lower)))
                j = int(rng.integers(len(lower) - 1))
                j += j >= i
                edges.add((v, lower[i]))
                edges.add((v, lower[j]))
            if u_chain < p_chain and lower:
                m = lower[int(rng.integers(len(lower)))]
                after = below[tiers[m]]
                if after:
                    edges.add((v, m))
                    edges.add((m, after[int(rng.integers(len(after)))]))
            if u_collider < p_collider and lower:
                c = lower[int(rng.integers(len(lower)))]
                n_above = starts[tiers[c]]  # candidates 0..n_above-1, minus v
                if n_above >= 2:
                    u = int(rng.integers(n_above - 1))
                    u += u >= v
                    edges.add((v, c))
                    edges.add((u, c))

    has_parent = {v for _, v in edges}
    rng = _random.stream(seed, _random.CLOSURE)
    for v in range(starts[1], n):
        if v not in has_parent:
            t = tiers[v]
            edges.add((starts[t - 1] + int(rng.integers(shape.tier_sizes[t - 1])), v))

    return TieredDag(shape, tuple(edges), GenParams(shape, iterations, probs, seed))


def complexity_stats(g: TieredDag) -> ComplexityStats:
    indeg = [0] * g.n_nodes
    outdeg = [0] * g.n_nodes
    for u, v in g.edges:
        outdeg[u] += 1
        indeg[v] += 1
    return ComplexityStats(
        avg_indegree=Fraction(len(g.edges), g.n_nodes),
        chain_count=sum(i * o for i, o in zip(indeg, outdeg)),
        fork_count=sum(o * (o - 1) // 2 for o in outdeg),
        collider_count=sum(i * (i - 1) // 2 for i in indeg),
    )
