"""Spanning-tree construction and repair.

The workhorse is :func:`extended_kruskal`: Kruskal's greedy merge, except that
it starts from a forest of preserved edges (links that already carry a secure
link key) instead of from isolated nodes. Every connected piece of the
preserved forest is one partial tree; the cheapest edge joining two distinct
partial trees is added until one tree remains. With nothing preserved it is
plain Kruskal.

Ties between equal weights are broken by a *tie rule*, a key function on the
canonical edge ``(min id, max id)``. The default orders such edges
lexicographically, which makes every output deterministic.
"""

from __future__ import annotations

import heapq
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Optional

from .errors import DisconnectedError, PreconditionError
from .net_model import LEADER, Edge, NodeId, Topology, adjacency, components, edge
from .weighting import WeightedTopology

TieRule = Callable[[Edge], Any]


def lexicographic(e: Edge) -> Edge:
    return e


class UnionFind:
    def __init__(self, items: Iterable[NodeId] = ()):
        self.parent: dict[NodeId, NodeId] = {}
        self.rank: dict[NodeId, int] = {}
        for x in items:
            self.add(x)

    def add(self, x: NodeId) -> None:
        if x not in self.parent:
            self.parent[x] = x
            self.rank[x] = 0

    def find(self, x: NodeId) -> NodeId:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: NodeId, b: NodeId) -> bool:
        """Merge the sets of ``a`` and ``b``; False if they were already one set."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def _default_root(nodes: Iterable[NodeId]) -> Optional[NodeId]:
    nodes = set(nodes)
    if not nodes:
        return None
    return LEADER if LEADER in nodes else min(nodes)


@dataclass(frozen=True)
class SpanningForest:
    """Preserved secure links: an acyclic edge set over ``nodes``."""

    nodes: frozenset[NodeId]
    edges: frozenset[Edge]

    def __post_init__(self):
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        object.__setattr__(self, "edges", frozenset(edge(*e) for e in self.edges))
        uf = UnionFind(self.nodes)
        for a, b in sorted(self.edges):
            if a not in self.nodes or b not in self.nodes:
                raise PreconditionError(f"forest edge {(a, b)} touches a node outside the forest")
            if not uf.union(a, b):
                raise PreconditionError(f"preserved edges contain a cycle through {(a, b)}")

    @classmethod
    def empty(cls, nodes: Iterable[NodeId]) -> "SpanningForest":
        return cls(frozenset(nodes), frozenset())

    def components(self) -> list[tuple[NodeId, ...]]:
        return components(self.nodes, self.edges)

    @property
    def is_connected(self) -> bool:
        return len(self.components()) <= 1


@dataclass(frozen=True)
class SpanningTree:
    nodes: frozenset[NodeId]
    edges: frozenset[Edge]
    root: Optional[NodeId] = None

    def __post_init__(self):
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        object.__setattr__(self, "edges", frozenset(edge(*e) for e in self.edges))
        if self.root is None:
            object.__setattr__(self, "root", _default_root(self.nodes))
        if self.nodes and self.root not in self.nodes:
            raise PreconditionError(f"root {self.root} is not a tree node")
        if len(self.edges) != max(len(self.nodes) - 1, 0) or len(components(self.nodes, self.edges)) > 1:
            raise PreconditionError("edge set is not a spanning tree of the node set")

    def rooted_at(self, root: NodeId) -> "SpanningTree":
        return SpanningTree(self.nodes, self.edges, root)

    @cached_property
    def parent(self) -> dict[NodeId, Optional[NodeId]]:
        adj = adjacency(self.nodes, self.edges)
        parent: dict[NodeId, Optional[NodeId]] = {self.root: None} if self.nodes else {}
        queue = [self.root] if self.nodes else []
        for u in queue:
            for v in adj[u]:
                if v not in parent:
                    parent[v] = u
                    queue.append(v)
        return parent

    @cached_property
    def children(self) -> dict[NodeId, list[NodeId]]:
        kids: dict[NodeId, list[NodeId]] = {i: [] for i in self.nodes}
        for v, p in self.parent.items():
            if p is not None:
                kids[p].append(v)
        for lst in kids.values():
            lst.sort()
        return kids

    def depth(self) -> dict[NodeId, int]:
        out = {}
        for v in self.parent:  # BFS order: parents precede children
            p = self.parent[v]
            out[v] = 0 if p is None else out[p] + 1
        return out

    def height(self) -> int:
        return max(self.depth().values(), default=0)


@dataclass(frozen=True)
class SuperposedGraph:
    """Edge union of local spanning trees; connected but not necessarily a tree."""

    nodes: frozenset[NodeId]
    edges: frozenset[Edge]

    def components(self) -> list[tuple[NodeId, ...]]:
        return components(self.nodes, self.edges)


def _check_connected(wtopo: WeightedTopology) -> None:
    blocks = components(wtopo.nodes, wtopo.edges)
    if len(blocks) > 1:
        raise DisconnectedError(blocks)


def _sort_key(wtopo: WeightedTopology, tie_rule: TieRule):
    return lambda e: (wtopo.weights[e], tie_rule(e))


def extended_kruskal(
    wtopo: WeightedTopology,
    preserved: Optional[SpanningForest] = None,
    tie_rule: TieRule = lexicographic,
    root: Optional[NodeId] = None,
) -> SpanningTree:
    nodes = frozenset(wtopo.nodes)
    keep = preserved.edges if preserved is not None else frozenset()
    stale = keep - wtopo.edges
    if stale:
        raise PreconditionError(f"preserved edges not in the topology: {sorted(stale)}")
    if preserved is not None and not preserved.nodes <= nodes:
        raise PreconditionError("preserved forest has nodes outside the topology")
    _check_connected(wtopo)

    uf = UnionFind(nodes)
    for a, b in sorted(keep):
        if not uf.union(a, b):
            raise PreconditionError(f"preserved edges contain a cycle through {(a, b)}")
    chosen = set(keep)
    parts = len(nodes) - len(keep)
    for a, b in sorted(wtopo.edges - keep, key=_sort_key(wtopo, tie_rule)):
        if parts <= 1:
            break
        if uf.union(a, b):
            chosen.add((a, b))
            parts -= 1
    return SpanningTree(nodes, frozenset(chosen), root if root is not None else _default_root(nodes))


def kruskal_mst(
    wtopo: WeightedTopology, tie_rule: TieRule = lexicographic, root: Optional[NodeId] = None
) -> SpanningTree:
    return extended_kruskal(wtopo, None, tie_rule, root)


def prim_mst(
    wtopo: WeightedTopology, start: Optional[NodeId] = None, tie_rule: TieRule = lexicographic
) -> SpanningTree:
    nodes = frozenset(wtopo.nodes)
    _check_connected(wtopo)
    if not nodes:
        return SpanningTree(nodes, frozenset())
    start = start if start is not None else _default_root(nodes)
    if start not in nodes:
        raise PreconditionError(f"start node {start} is not in the topology")
    adj = adjacency(nodes, wtopo.edges)
    visited = {start}
    heap = [(wtopo.weights[edge(start, v)], tie_rule(edge(start, v)), edge(start, v)) for v in adj[start]]
    heapq.heapify(heap)
    chosen = set()
    while heap and len(visited) < len(nodes):
        _, _, e = heapq.heappop(heap)
        new = e[1] if e[0] in visited else e[0]
        if new in visited:
            continue
        visited.add(new)
        chosen.add(e)
        for v in adj[new]:
            if v not in visited:
                f = edge(new, v)
                heapq.heappush(heap, (wtopo.weights[f], tie_rule(f), f))
    return SpanningTree(nodes, frozenset(chosen), start)


def derive_preserved_forest(
    prev,
    new_topo: Topology,
    weights: Optional[Mapping[Edge, float]] = None,
    tie_rule: TieRule = lexicographic,
    priority: Iterable[Edge] = (),
) -> SpanningForest:
    """Previous secure links that survive into ``new_topo``.

    An edge survives when both endpoints are still present and the distance
    rule still admits it. ``prev`` is anything with an ``edges`` attribute (a
    tree, a superposed graph) or a plain edge iterable. If the survivors contain
    cycles, which only happens for superposed inputs, a maximal acyclic subset
    is kept greedily: ``priority`` edges first, then by ascending weight in
    ``weights`` (tie rule breaks ties; missing weights count as equal).
    """
    prev_edges = getattr(prev, "edges", prev)
    survivors = {edge(*e) for e in prev_edges} & new_topo.edges
    first = {edge(*e) for e in priority} & survivors

    def key(e):
        return (e not in first, weights.get(e, 0.0) if weights else 0.0, tie_rule(e))

    uf = UnionFind(new_topo.nodes)
    kept = {e for e in sorted(survivors, key=key) if uf.union(*e)}
    return SpanningForest(frozenset(new_topo.nodes), frozenset(kept))


def build_lst(
    sub: WeightedTopology,
    preserved_in_sub: Optional[SpanningForest] = None,
    tie_rule: TieRule = lexicographic,
    center: Optional[NodeId] = None,
) -> SpanningTree:
    """Local spanning tree of one neighborhood subgraph (rooted at its center)."""
    return extended_kruskal(sub, preserved_in_sub, tie_rule, root=center)


def superpose(lsts: Iterable) -> SuperposedGraph:
    nodes: set[NodeId] = set()
    edges: set[Edge] = set()
    for t in lsts:
        nodes |= t.nodes
        edges |= t.edges
    return SuperposedGraph(frozenset(nodes), frozenset(edges))


def redundant_edge_count(g) -> int:
    blocks = components(g.nodes, g.edges)
    if len(blocks) > 1:
        raise DisconnectedError(blocks)
    return len(g.edges) - max(len(g.nodes) - 1, 0)
