import collections
import random

import pytest

from oracles import connected, ring_flood_trace

from hsk.errors import KeyDistributionError, PreconditionError
from hsk.net_model import NetworkEvent, NodeState, neighborhood_subgraph
from hsk.protocol_centralized import ProtocolContext
from hsk.protocol_distributed import (
    bootstrap_distributed, flood_session_key, run_round_distributed, select_initiator,
)
from hsk.rng import make_rng
from hsk.secure_links import HashExchange, HashSIVCipher, SecureLinkStore, SessionKey, establish_links_for_tree
from hsk.spanning import SuperposedGraph
from hsk.weighting import WeightParams


def ctx(**kw):
    return ProtocolContext(rng=make_rng(0), params=WeightParams(1000, 1, 0), **kw)


def line(n, gap=3.0, d_max=4.0):
    return [NodeState(i, (gap * i, 0.0), 10.0, d_max) for i in range(1, n + 1)]


def scatter(seed, n=25, d_max=3.5):
    rnd = random.Random(seed)
    return [NodeState(i, (rnd.uniform(0, 10), rnd.uniform(0, 10)), rnd.uniform(0, 100), d_max)
            for i in range(1, n + 1)]


def keyed(edges, nodes=None):
    nodes = nodes or {i for e in edges for i in e}
    g = SuperposedGraph(frozenset(nodes), frozenset(edges))
    store = SecureLinkStore()
    establish_links_for_tree(g, store, HashExchange(), make_rng(3))
    return g, store


def sk():
    return SessionKey.generate(make_rng(0), 1)


def test_tree_topology_has_no_redundancy():
    state, report = bootstrap_distributed(line(6), ctx())
    assert state.superposed.edges == state.topology.edges
    assert report.redundant_edges == 0 and report.duplicates == 0
    assert report.key_payload == 5


def test_complete_graph_lmst_gives_global_mst():
    nodes = [NodeState(i, p, 1.0, 20.0) for i, p in enumerate([(0, 0), (1, 0), (3, 1), (0, 4), (5, 5)], 1)]
    state, report = bootstrap_distributed(nodes, ctx(lmst=True))
    assert len(state.superposed.edges) == 4 and report.redundant_edges == 0


def test_select_initiator():
    assert select_initiator([9], 123) == 9
    assert select_initiator(range(1, 6), 42) == select_initiator(range(1, 6), 42)
    with pytest.raises(PreconditionError):
        select_initiator([], 0)


def test_initiator_frequencies_are_uniform():
    rng = make_rng(2024)
    counts = collections.Counter(select_initiator(range(1, 6), rng) for _ in range(10000))
    assert all(abs(counts[i] / 10000 - 0.2) <= 0.02 for i in range(1, 6))


def test_flood_on_tree():
    edges = {(1, 2), (1, 3), (3, 4), (3, 5)}
    g, store = keyed(edges)
    rep = flood_session_key(g, 3, store, HashSIVCipher(), sk())
    assert rep.duplicates == 0 and len(rep.payloads) == 4
    assert rep.depth == {3: 0, 1: 1, 4: 1, 5: 1, 2: 2}


@pytest.mark.parametrize("n", range(3, 11))
def test_flood_on_ring_matches_hand_trace(n):
    g, store = keyed({tuple(sorted((i, i % n + 1))) for i in range(1, n + 1)})
    rep = flood_session_key(g, 1, store, HashSIVCipher(), sk())
    trace = ring_flood_trace(n)
    assert rep.duplicates == trace["duplicates"]
    assert len(rep.payloads) == trace["payloads"]
    assert rep.depth == trace["depth"]
    receipts = rep.receipts()
    assert [i for i, c in receipts.items() if c == 2] == [trace["dup_node"]]
    assert set(rep.recovered) == set(range(1, n + 1))


def test_flood_payload_bound_on_dense_graph():
    edges = {(a, b) for a in range(1, 7) for b in range(a + 1, 7)}
    g, store = keyed(edges)
    rep = flood_session_key(g, 4, store, HashSIVCipher(), sk())
    assert len(rep.payloads) <= 2 * len(edges)
    assert rep.duplicates == len(edges) - 5


def test_flood_errors():
    g, store = keyed({(1, 2), (2, 3)})
    with pytest.raises(PreconditionError):
        flood_session_key(g, 9, store, HashSIVCipher(), sk())
    del store.links[(1, 2)]
    with pytest.raises(KeyDistributionError):
        flood_session_key(g, 1, store, HashSIVCipher(), sk())


def test_store_tracks_superposition_every_round():
    c = ctx()
    state, _ = bootstrap_distributed(scatter(1), c)
    assert connected(state.topology.ids, state.topology.edges)
    events = [
        NetworkEvent.leave(4), NetworkEvent.move({7: (5.0, 5.0)}),
        NetworkEvent.join(NodeState(30, (4.0, 4.0), 50.0, 3.5)), NetworkEvent.power({2: 99.0}),
    ]
    for ev in events:
        state, report = run_round_distributed(state, ev, c)
        if report.aborted:
            continue
        assert state.store.edges() == state.superposed.edges
        if ev.is_node_event:
            assert set(state.last_delivery.recovered) == state.members
        assert state.last_preserved <= state.superposed.edges


def test_leave_rebuilds_only_affected_neighborhoods():
    c = ctx()
    state, _ = bootstrap_distributed(scatter(2), c)
    gone = 5
    after, report = run_round_distributed(state, NetworkEvent.leave(gone), c)
    assert not report.aborted
    for i in after.topology.ids:
        before_nb = neighborhood_subgraph(state.topology, i)
        after_nb = neighborhood_subgraph(after.topology, i)
        if before_nb.nodes == after_nb.nodes and before_nb.edges == after_nb.edges:
            assert after.lsts[i].edges == state.lsts[i].edges
            assert i not in after.rebuilt
    assert after.rebuilt <= {i for i in after.topology.ids if gone in state.lsts[i].nodes}
    assert report.notification == len(after.rebuilt)


def test_distributed_message_counts():
    state, report = bootstrap_distributed(line(5), ctx())
    assert (report.hello, report.weight_msg, report.id_msg) == (5, 5, 0)


def test_disconnection_aborts():
    c = ctx()
    state, _ = bootstrap_distributed(line(4), c)
    after, report = run_round_distributed(state, NetworkEvent.leave(2), c)
    assert report.aborted and after.superposed == state.superposed and after.epoch == state.epoch
