"""Geometric snapshot model of a MANET.

A :class:`Topology` is an immutable snapshot: node states plus the edge set
derived from their positions and transmission ranges. Two modes exist:

``homogeneous``
    every node has the same range ``d_max`` and ``(i, j)`` is an edge iff
    ``d_ij <= d_max``.
``unbalanced``
    node 1 is the leader and covers every normal node; an edge needs both
    directions of the directly-connected relation, so in practice
    ``d_ij < d_normal``. Boundary-distance edges therefore exist only in
    homogeneous mode.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .errors import TopologyError, UnknownNodeError

NodeId = int
Edge = tuple[int, int]
Point = tuple[float, float]

LEADER: NodeId = 1


class Mode(str, Enum):
    UNBALANCED = "unbalanced"
    HOMOGENEOUS = "homogeneous"


class EventKind(str, Enum):
    NODE_JOIN = "node_join"
    NODE_LEAVE = "node_leave"
    POSITION_UPDATE = "position_update"
    POWER_UPDATE = "power_update"


def edge(a: NodeId, b: NodeId) -> Edge:
    """Canonical unordered pair ``(min, max)``."""
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class NodeState:
    id: NodeId
    position: Point
    power_available: float
    transmission_range: float

    def __post_init__(self):
        if not isinstance(self.id, (int,)) or self.id < 1:
            raise TopologyError(f"node id must be a positive integer, got {self.id!r}")
        if not self.transmission_range > 0:
            raise TopologyError(f"node {self.id}: transmission range must be > 0")
        if self.power_available < 0:
            raise TopologyError(f"node {self.id}: power available must be >= 0")
        object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))

    def distance_to(self, other: "NodeState") -> float:
        return math.dist(self.position, other.position)


@dataclass(frozen=True)
class Topology:
    mode: Mode
    nodes: Mapping[NodeId, NodeState]
    edges: frozenset[Edge]
    round_index: int = 0

    @property
    def ids(self) -> list[NodeId]:
        return sorted(self.nodes)

    def __len__(self):
        return len(self.nodes)

    def node(self, i: NodeId) -> NodeState:
        try:
            return self.nodes[i]
        except KeyError:
            raise UnknownNodeError(i) from None

    def distance(self, a: NodeId, b: NodeId) -> float:
        return self.node(a).distance_to(self.node(b))

    def adjacency(self) -> dict[NodeId, list[NodeId]]:
        return adjacency(self.nodes, self.edges)

    @property
    def d_max(self) -> Optional[float]:
        """Common range of a homogeneous topology (None when empty or unbalanced)."""
        if self.mode is not Mode.HOMOGENEOUS or not self.nodes:
            return None
        return next(iter(self.nodes.values())).transmission_range


@dataclass(frozen=True)
class NetworkEvent:
    """A node event (join/leave, possibly batched) or an edge event.

    Edge events are position or power updates: edges are derived from geometry,
    so a link appears or breaks only because somebody moved.
    """

    kind: EventKind
    joins: tuple[NodeState, ...] = ()
    leaves: tuple[NodeId, ...] = ()
    positions: Mapping[NodeId, Point] = field(default_factory=dict)
    powers: Mapping[NodeId, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", EventKind(self.kind))
        payload = {
            EventKind.NODE_JOIN: self.joins,
            EventKind.NODE_LEAVE: self.leaves,
            EventKind.POSITION_UPDATE: self.positions,
            EventKind.POWER_UPDATE: self.powers,
        }
        if not payload[self.kind]:
            raise TopologyError(f"{self.kind.value} event with an empty payload")
        for kind, data in payload.items():
            if kind is not self.kind and data:
                raise TopologyError(f"{self.kind.value} event carries a {kind.value} payload")

    @property
    def is_node_event(self) -> bool:
        return self.kind in (EventKind.NODE_JOIN, EventKind.NODE_LEAVE)

    @classmethod
    def join(cls, *states: NodeState) -> "NetworkEvent":
        return cls(EventKind.NODE_JOIN, joins=tuple(states))

    @classmethod
    def leave(cls, *ids: NodeId) -> "NetworkEvent":
        return cls(EventKind.NODE_LEAVE, leaves=tuple(ids))

    @classmethod
    def move(cls, positions: Mapping[NodeId, Point]) -> "NetworkEvent":
        return cls(EventKind.POSITION_UPDATE, positions=dict(positions))

    @classmethod
    def power(cls, powers: Mapping[NodeId, float]) -> "NetworkEvent":
        return cls(EventKind.POWER_UPDATE, powers=dict(powers))


def directly_connected(topo: Topology, a: NodeId, b: NodeId) -> bool:
    """``a -> b``: node ``a`` reaches ``b`` in one hop (``d_ab < D_a``)."""
    na, nb = topo.node(a), topo.node(b)
    if a == b:
        raise TopologyError("directly_connected needs two distinct nodes")
    if topo.mode is Mode.UNBALANCED and a == LEADER:
        return True
    return na.distance_to(nb) < na.transmission_range


def _linked(mode: Mode, a: NodeState, b: NodeState) -> bool:
    d = a.distance_to(b)
    if mode is Mode.HOMOGENEOUS:
        return d <= a.transmission_range and d <= b.transmission_range
    a_to_b = a.id == LEADER or d < a.transmission_range
    b_to_a = b.id == LEADER or d < b.transmission_range
    return a_to_b and b_to_a


def _validate(nodes: Mapping[NodeId, NodeState], mode: Mode) -> None:
    if mode is Mode.HOMOGENEOUS:
        ranges = {s.transmission_range for s in nodes.values()}
        if len(ranges) > 1:
            raise TopologyError(f"homogeneous nodes must share one range, got {sorted(ranges)}")
        return
    if not nodes:
        return
    if LEADER not in nodes:
        raise TopologyError("unbalanced topology has no leader (node 1)")
    leader = nodes[LEADER]
    for s in nodes.values():
        if s.id != LEADER and s.distance_to(leader) > leader.transmission_range:
            raise TopologyError(
                f"leader range {leader.transmission_range} does not cover node {s.id}"
            )


def build_topology(
    nodes: Iterable[NodeState], mode: Mode | str = Mode.HOMOGENEOUS, round_index: int = 0
) -> Topology:
    mode = Mode(mode)
    by_id: dict[NodeId, NodeState] = {}
    for s in nodes:
        if s.id in by_id:
            raise TopologyError(f"duplicate node id {s.id}")
        by_id[s.id] = s
    by_id = dict(sorted(by_id.items()))
    _validate(by_id, mode)
    states = list(by_id.values())
    edges = set()
    for i, a in enumerate(states):
        for b in states[i + 1:]:
            if _linked(mode, a, b):
                edges.add(edge(a.id, b.id))
    return Topology(mode, by_id, frozenset(edges), round_index)


def apply_event(topo: Topology, ev: NetworkEvent) -> Topology:
    nodes = dict(topo.nodes)
    if ev.kind is EventKind.NODE_JOIN:
        for s in ev.joins:
            if s.id in nodes:
                raise TopologyError(f"join of existing node id {s.id}")
            nodes[s.id] = s
    elif ev.kind is EventKind.NODE_LEAVE:
        for i in ev.leaves:
            if i not in nodes:
                raise UnknownNodeError(i)
            if topo.mode is Mode.UNBALANCED and i == LEADER:
                raise TopologyError("the leader node cannot leave an unbalanced MANET")
            del nodes[i]
    elif ev.kind is EventKind.POSITION_UPDATE:
        for i, pos in ev.positions.items():
            nodes[i] = replace(topo.node(i), position=tuple(pos))
    else:
        for i, pa in ev.powers.items():
            nodes[i] = replace(topo.node(i), power_available=float(pa))
    k = topo.round_index + 1 if ev.is_node_event else topo.round_index
    return build_topology(nodes.values(), topo.mode, k)


def adjacency(nodes: Iterable[NodeId], edges: Iterable[Edge]) -> dict[NodeId, list[NodeId]]:
    adj: dict[NodeId, list[NodeId]] = {i: [] for i in nodes}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    for nbrs in adj.values():
        nbrs.sort()
    return adj


def components(nodes: Iterable[NodeId], edges: Iterable[Edge]) -> list[tuple[NodeId, ...]]:
    """Connected components as sorted tuples, ordered by smallest member."""
    adj = adjacency(nodes, edges)
    seen: set[NodeId] = set()
    out = []
    for start in sorted(adj):
        if start in seen:
            continue
        block = [start]
        seen.add(start)
        stack = [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    block.append(v)
                    stack.append(v)
        out.append(tuple(sorted(block)))
    return out


def connected_components(topo: Topology) -> list[tuple[NodeId, ...]]:
    return components(topo.nodes, topo.edges)


def is_connected(topo: Topology) -> bool:
    return len(connected_components(topo)) <= 1


def neighborhood_subgraph(topo: Topology, i: NodeId) -> Topology:
    """Subgraph induced by ``i`` and every node within ``i``'s range (inclusive)."""
    center = topo.node(i)
    if topo.mode is not Mode.HOMOGENEOUS:
        raise TopologyError("neighborhood subgraphs are defined for homogeneous topologies")
    members = {
        j: s for j, s in topo.nodes.items()
        if j == i or center.distance_to(s) <= center.transmission_range
    }
    induced = frozenset(e for e in topo.edges if e[0] in members and e[1] in members)
    return Topology(topo.mode, members, induced, topo.round_index)
