"""Local-spanning-tree protocol for homogeneous MANETs.

There is no global leader. Every node acts as the leader of its own
neighborhood subgraph: it learns the neighborhood from hello broadcasts,
weights it from weight broadcasts, and maintains a local spanning tree (LST)
with the extended Kruskal algorithm. The union of all LSTs is the superposed
graph; it is connected whenever the topology is, and a session key flooded
over it from a randomly chosen initiator reaches every member.

LST maintenance reuses secure links: the preserved forest of node ``i`` is the
previous round's secure links restricted to ``i``'s new neighborhood, with
``i``'s own previous LST edges taken first. A node whose neighborhood did not
change therefore keeps its LST. With ``ctx.lmst`` set every LST is instead the
true minimum spanning tree of its neighborhood.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import KeyDistributionError, PreconditionError
from .metrics import MessageCounts, MessageLog, MetricsReport
from .net_model import (
    Edge, Mode, NetworkEvent, NodeId, NodeState, Topology, adjacency, apply_event, build_topology,
    connected_components, neighborhood_subgraph,
)
from .protocol_centralized import DeliveryReport, DisconnectionReport, Payload, ProtocolContext
from .rng import Rng, make_rng
from .secure_links import (
    SecureLinkStore, SessionKey, SymmetricCipher, establish_links_for_tree, prune_links,
    unwrap_session_key, wrap_session_key,
)
from .spanning import (
    SpanningTree, SuperposedGraph, build_lst, derive_preserved_forest, kruskal_mst,
    redundant_edge_count, superpose,
)
from .weighting import WeightedTopology, recompute_weights


@dataclass(frozen=True)
class DistributedState:
    topology: Topology
    lsts: dict[NodeId, SpanningTree]
    superposed: SuperposedGraph
    store: SecureLinkStore
    session_key: Optional[SessionKey]
    log: MessageLog = field(default_factory=MessageLog)
    round: int = 0
    aborts: tuple[DisconnectionReport, ...] = ()
    last_delivery: Optional[DeliveryReport] = None
    last_preserved: frozenset[Edge] = frozenset()
    rebuilt: frozenset[NodeId] = frozenset()

    @property
    def epoch(self) -> int:
        return self.session_key.epoch if self.session_key else 0

    @property
    def members(self) -> frozenset[NodeId]:
        return frozenset(self.topology.nodes)


def select_initiator(members: Iterable[NodeId], rng: Rng | int) -> NodeId:
    pool = sorted(members)
    if not pool:
        raise PreconditionError("cannot pick an initiator from an empty membership")
    return pool[int(make_rng(rng).integers(len(pool)))]


def flood_session_key(
    g, initiator: NodeId, store: SecureLinkStore, cipher: SymmetricCipher, session_key: SessionKey
) -> DeliveryReport:
    """Flood the session key over ``g`` from ``initiator``.

    Nodes transmit one at a time in breadth-first order of first receipt,
    iterating neighbors by ascending id, and each local broadcast is heard
    at once. A node decrypts and forwards only its first copy, and does not send
    to neighbors it has already heard from, so every edge carries at most one
    payload and the duplicate count equals the number of edges beyond a tree.
    """
    for a, b in sorted(g.edges):
        if (a, b) not in store:
            raise KeyDistributionError((a, b))
    adj = adjacency(g.nodes, g.edges)
    if initiator not in adj:
        raise PreconditionError(f"initiator {initiator} is not in the graph")
    recovered = {initiator: session_key}
    depth = {initiator: 0}
    heard_from: dict[NodeId, set[NodeId]] = {i: set() for i in adj}
    payloads = []
    duplicates = 0
    queue = deque([initiator])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v in heard_from[u]:
                continue
            link = store.key(u, v)
            ct = wrap_session_key(recovered[u], link, cipher)
            payloads.append(Payload(u, v, ct))
            heard_from[v].add(u)
            if v in recovered:
                duplicates += 1
                continue
            recovered[v] = unwrap_session_key(ct, link, cipher)
            depth[v] = depth[u] + 1
            queue.append(v)
    return DeliveryReport(initiator, depth, tuple(payloads), recovered, duplicates)


def compute_lsts(
    topo: Topology,
    wtopo: WeightedTopology,
    ctx: ProtocolContext,
    prev_links: Iterable[Edge] = (),
    prev_lsts: Optional[dict[NodeId, SpanningTree]] = None,
) -> dict[NodeId, SpanningTree]:
    """Every node's LST; each is independent of the others, so order is irrelevant."""
    prev_links = frozenset(prev_links)
    prev_lsts = prev_lsts or {}
    out = {}
    for i in topo.ids:
        sub = wtopo.restrict(neighborhood_subgraph(topo, i))
        if ctx.lmst:
            out[i] = kruskal_mst(sub, ctx.tie_rule, root=i)
            continue
        own = prev_lsts[i].edges if i in prev_lsts else ()
        preserved = derive_preserved_forest(prev_links, sub.topology, sub.weights, ctx.tie_rule, priority=own)
        out[i] = build_lst(sub, preserved, ctx.tie_rule, center=i)
    return out


def _execute(
    state: DistributedState, topo: Topology, ev: Optional[NetworkEvent], ctx: ProtocolContext
) -> tuple[DistributedState, MetricsReport]:
    kind = ev.kind.value if ev is not None else "bootstrap"
    n = len(topo)
    counts = MessageCounts(hello=n)
    blocks = connected_components(topo)
    if len(blocks) > 1:
        note = DisconnectionReport(state.round, kind, tuple(blocks))
        report = MetricsReport.from_counts(state.round, kind, state.epoch, counts, aborted=True)
        return replace(
            state, log=state.log.record(counts), round=state.round + 1, aborts=state.aborts + (note,)
        ), report

    counts.weight_msg = n
    wtopo = recompute_weights(topo, ctx.params, ctx.weight_fn)
    prev_links = state.store.edges()
    lsts = compute_lsts(topo, wtopo, ctx, prev_links, state.lsts)
    rebuilt = frozenset(i for i, t in lsts.items() if i not in state.lsts or state.lsts[i].edges != t.edges)
    # a rebuilt node tells its LST neighbors about the new local tree
    counts.notification = len(rebuilt)
    g = superpose(lsts.values())

    store = state.store.copy()
    departed = ev.leaves if ev is not None else ()
    prune_links(store, departed, g.edges)
    preserved = store.edges()
    delta = establish_links_for_tree(g, store, ctx.kx, ctx.rng, state.round)

    session_key, delivery = state.session_key, None
    if ev is None or ev.is_node_event or ctx.force_rekey:
        initiator = select_initiator(topo.nodes, ctx.rng)
        session_key = SessionKey.generate(ctx.rng, state.epoch + 1, ctx.session_key_bytes)
        delivery = flood_session_key(g, initiator, store, ctx.cipher, session_key)
        counts.key_payload = len(delivery.payloads)

    report = MetricsReport.from_counts(
        state.round, kind, session_key.epoch if session_key else 0, counts,
        new_exchanges=delta.new_exchanges, reused_links=delta.reused_links,
        redundant_edges=redundant_edge_count(g),
        max_depth=delivery.max_depth if delivery else 0,
        duplicates=delivery.duplicates if delivery else 0,
    )
    new_state = DistributedState(
        topology=topo, lsts=lsts, superposed=g, store=store, session_key=session_key,
        log=state.log.record(counts), round=state.round + 1, aborts=state.aborts,
        last_delivery=delivery, last_preserved=preserved, rebuilt=rebuilt,
    )
    return new_state, report


def bootstrap_distributed(
    nodes: Iterable[NodeState], ctx: ProtocolContext
) -> tuple[DistributedState, MetricsReport]:
    topo = build_topology(nodes, Mode.HOMOGENEOUS)
    empty = DistributedState(topo, {}, SuperposedGraph(frozenset(), frozenset()), SecureLinkStore(), None)
    return _execute(empty, topo, None, ctx)


def run_round_distributed(
    state: DistributedState, ev: NetworkEvent, ctx: ProtocolContext
) -> tuple[DistributedState, MetricsReport]:
    if state.topology.mode is not Mode.HOMOGENEOUS:
        raise PreconditionError("the distributed protocol runs on homogeneous topologies")
    return _execute(state, apply_event(state.topology, ev), ev, ctx)
