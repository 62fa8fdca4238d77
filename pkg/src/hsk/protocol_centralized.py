"""Leader-driven spanning-tree protocol for unbalanced MANETs.

One round per event:

1. topology construction (hello broadcasts, ID messages to the leader) and
   the surviving secure-link forest;
2. weight refresh (weight messages to the leader);
3. surviving forest already connected -> it is the new tree;
4. otherwise repair it with the extended Kruskal algorithm;
5. notifications and pairwise key exchange for the edges not yet keyed;
6. the leader distributes a fresh session key down the tree.

Step 6 runs on node events only, unless ``force_rekey`` is set. A round whose
post-event topology is disconnected is aborted: the returned state keeps the
previous topology, tree, links and key, and only the logs move on.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import KeyDistributionError
from .metrics import MessageCounts, MessageLog, MetricsReport
from .net_model import (
    LEADER, Edge, Mode, NetworkEvent, NodeId, NodeState, Topology, apply_event,
    build_topology, connected_components,
)
from .rng import Rng, make_rng
from .secure_links import (
    SESSION_KEY_BYTES, HashExchange, HashSIVCipher, KeyExchange, LinkDelta, SecureLinkStore,
    SessionKey, SymmetricCipher, establish_links_for_tree, prune_links, unwrap_session_key,
    wrap_session_key,
)
from .spanning import SpanningForest, SpanningTree, TieRule, derive_preserved_forest, extended_kruskal, lexicographic
from .weighting import WeightFunction, WeightParams, recompute_weights


@dataclass
class ProtocolContext:
    """Configuration plus the seeded random stream shared by every round of a run."""

    rng: Rng = field(default_factory=lambda: make_rng(0))
    params: WeightParams = field(default_factory=WeightParams)
    kx: KeyExchange = field(default_factory=HashExchange)
    cipher: SymmetricCipher = field(default_factory=HashSIVCipher)
    tie_rule: TieRule = lexicographic
    weight_fn: Optional[WeightFunction] = None
    force_rekey: bool = False
    session_key_bytes: int = SESSION_KEY_BYTES
    lmst: bool = False


@dataclass(frozen=True)
class Payload:
    sender: NodeId
    receiver: NodeId
    ciphertext: bytes


@dataclass(frozen=True)
class DeliveryReport:
    source: NodeId
    depth: dict[NodeId, int]
    payloads: tuple[Payload, ...]
    recovered: dict[NodeId, SessionKey]
    duplicates: int = 0

    @property
    def max_depth(self) -> int:
        return max(self.depth.values(), default=0)

    def receipts(self) -> dict[NodeId, int]:
        out: dict[NodeId, int] = {}
        for p in self.payloads:
            out[p.receiver] = out.get(p.receiver, 0) + 1
        return out


@dataclass(frozen=True)
class DisconnectionReport:
    round: int
    event_kind: str
    components: tuple[tuple[NodeId, ...], ...]


@dataclass(frozen=True)
class CentralizedState:
    topology: Topology
    tree: Optional[SpanningTree]
    store: SecureLinkStore
    session_key: Optional[SessionKey]
    log: MessageLog = field(default_factory=MessageLog)
    round: int = 0
    aborts: tuple[DisconnectionReport, ...] = ()
    last_delivery: Optional[DeliveryReport] = None
    last_preserved: frozenset[Edge] = frozenset()

    @property
    def epoch(self) -> int:
        return self.session_key.epoch if self.session_key else 0

    @property
    def members(self) -> frozenset[NodeId]:
        return frozenset(self.topology.nodes)


def round_topology_construction(topo: Topology) -> tuple[Topology, MessageCounts]:
    """Rebuild the leader's view: one hello per node, one ID message per normal node."""
    rebuilt = build_topology(topo.nodes.values(), topo.mode, topo.round_index)
    n = len(rebuilt)
    return rebuilt, MessageCounts(hello=n, id_msg=max(n - 1, 0))


def distribute_session_key(
    tree: SpanningTree, store: SecureLinkStore, cipher: SymmetricCipher, session_key: SessionKey
) -> DeliveryReport:
    """Push the session key from the root to the leaves, re-encrypting per child."""
    for a, b in sorted(tree.edges):
        if (a, b) not in store:
            raise KeyDistributionError((a, b))
    recovered = {tree.root: session_key} if tree.nodes else {}
    depth = tree.depth()
    payloads = []
    for u in tree.parent:  # BFS order from the root
        for v in tree.children[u]:
            link = store.key(u, v)
            ct = wrap_session_key(recovered[u], link, cipher)
            payloads.append(Payload(u, v, ct))
            recovered[v] = unwrap_session_key(ct, link, cipher)
    return DeliveryReport(tree.root, depth, tuple(payloads), recovered)


def _repair(
    topo: Topology, prev_edges: Iterable[Edge], ctx: ProtocolContext
) -> tuple[SpanningTree, SpanningForest, bool]:
    wtopo = recompute_weights(topo, ctx.params, ctx.weight_fn)
    preserved = derive_preserved_forest(prev_edges, topo, wtopo.weights, ctx.tie_rule)
    root = LEADER if LEADER in topo.nodes else None
    if preserved.is_connected:
        return SpanningTree(preserved.nodes, preserved.edges, root), preserved, False
    return extended_kruskal(wtopo, preserved, ctx.tie_rule, root), preserved, True


def _execute(
    state: CentralizedState, topo: Topology, ev: Optional[NetworkEvent], ctx: ProtocolContext
) -> tuple[CentralizedState, MetricsReport]:
    kind = ev.kind.value if ev is not None else "bootstrap"
    topo, counts = round_topology_construction(topo)
    n = len(topo)
    blocks = connected_components(topo)
    if len(blocks) > 1:
        note = DisconnectionReport(state.round, kind, tuple(blocks))
        report = MetricsReport.from_counts(state.round, kind, state.epoch, counts, aborted=True)
        return replace(
            state, log=state.log.record(counts), round=state.round + 1, aborts=state.aborts + (note,)
        ), report

    counts.weight_msg = max(n - 1, 0)
    prev = state.tree.edges if state.tree is not None else ()
    tree, preserved, repaired = _repair(topo, prev, ctx)

    store = state.store.copy()
    departed = ev.leaves if ev is not None else ()
    prune_links(store, departed, tree.edges)
    if repaired:
        # one notification per normal node with at least one tree neighbor
        touched = {i for e in tree.edges for i in e}
        counts.notification = len(touched - {LEADER})
    delta: LinkDelta = establish_links_for_tree(tree, store, ctx.kx, ctx.rng, state.round)

    session_key, delivery = state.session_key, None
    rekey = ev is None or ev.is_node_event or ctx.force_rekey
    if rekey:
        session_key = SessionKey.generate(ctx.rng, state.epoch + 1, ctx.session_key_bytes)
        delivery = distribute_session_key(tree, store, ctx.cipher, session_key)
        counts.key_payload = len(delivery.payloads)

    report = MetricsReport.from_counts(
        state.round, kind, session_key.epoch if session_key else 0, counts,
        new_exchanges=delta.new_exchanges, reused_links=delta.reused_links,
        max_depth=delivery.max_depth if delivery else 0,
    )
    new_state = CentralizedState(
        topology=topo, tree=tree, store=store, session_key=session_key,
        log=state.log.record(counts), round=state.round + 1, aborts=state.aborts,
        last_delivery=delivery, last_preserved=preserved.edges,
    )
    return new_state, report


def bootstrap(
    nodes: Iterable[NodeState], ctx: ProtocolContext, mode: Mode | str = Mode.UNBALANCED
) -> tuple[CentralizedState, MetricsReport]:
    """Initial key establishment (k = 0): plain Kruskal from isolated nodes."""
    topo = build_topology(nodes, mode)
    empty = CentralizedState(topo, None, SecureLinkStore(), None)
    return _execute(empty, topo, None, ctx)


def run_round(
    state: CentralizedState, ev: NetworkEvent, ctx: ProtocolContext
) -> tuple[CentralizedState, MetricsReport]:
    topo = apply_event(state.topology, ev)
    return _execute(state, topo, ev, ctx)
