"""Acceptance suite: one test per criterion, summarized at the end of the run."""

import random
import time

import pytest

from oracles import brute_force_mst_weight, connected, random_connected_graph, ring_flood_trace

from hsk.cli import main
from hsk.errors import DecryptionError
from hsk.harness import compute_connectivity_bounds, iter_scenario, random_placement, sweep_dmax
from hsk.net_model import LEADER, NetworkEvent, NodeState, edge
from hsk.protocol_centralized import ProtocolContext, bootstrap, run_round
from hsk.protocol_distributed import bootstrap_distributed, flood_session_key
from hsk.rng import make_rng
from hsk.scenario import scenario_from_dict
from hsk.secure_links import HashExchange, HashSIVCipher, SecureLinkStore, SessionKey, establish_links_for_tree
from hsk.secure_links import unwrap_session_key
from hsk.spanning import SuperposedGraph, extended_kruskal, kruskal_mst, prim_mst, redundant_edge_count
from hsk.weighting import WeightParams, recompute_weights, weighted_graph

criterion = pytest.mark.criterion
GRID = (4.0, 5.5, 7.0, 8.5, 10.0, 12.0, 15.0)


@criterion("1", "MST equivalence vs brute force, 500 graphs n<=8, exact, <10s")
def test_mst_equivalence():
    start = time.perf_counter()
    rnd = random.Random(1)
    for _ in range(500):
        nodes, w = random_connected_graph(rnd, rnd.randint(1, 8), rnd.randint(0, 6), wmax=20)
        best = brute_force_mst_weight(nodes, w)
        g = weighted_graph(w, nodes)
        for tree in (kruskal_mst(g), prim_mst(g), extended_kruskal(g)):
            assert sum(w[e] for e in tree.edges) == best
    assert time.perf_counter() - start < 10


@criterion("2", "superposed LSTs connected on 200 topologies n in [10,60], <30s")
def test_superposition_connected():
    start = time.perf_counter()
    rnd = random.Random(2)
    for k in range(200):
        n = rnd.randint(10, 60)
        placed = random_placement(make_rng(k), n, pa_range=(0.0, 100.0))
        d_low, d_upper = compute_connectivity_bounds(placed)
        d_max = d_low + rnd.random() * (d_upper - d_low)
        nodes = [NodeState(s.id, s.position, s.power_available, d_max) for s in placed]
        state, _ = bootstrap_distributed(nodes, ProtocolContext(rng=make_rng(k)))
        assert connected(state.topology.ids, state.topology.edges)
        assert connected(state.superposed.nodes, state.superposed.edges)
        assert state.superposed.nodes == set(state.topology.ids)
    assert time.perf_counter() - start < 30


@criterion("3", "complete graphs under LMST: superposition == global MST, 0 redundant")
def test_complete_graph_lmst():
    rnd = random.Random(3)
    done = 0
    while done < 100:
        n = rnd.randint(2, 12)
        nodes = [NodeState(i, (rnd.uniform(0, 10), rnd.uniform(0, 10)), rnd.uniform(0, 100), 20.0)
                 for i in range(1, n + 1)]
        ctx = ProtocolContext(rng=make_rng(done), lmst=True)
        state, report = bootstrap_distributed(nodes, ctx)
        wt = recompute_weights(state.topology, ctx.params)
        assert len(state.topology.edges) == n * (n - 1) // 2
        if len(set(wt.weights.values())) != len(wt.weights):
            continue
        assert state.superposed.edges == kruskal_mst(wt).edges
        assert redundant_edge_count(state.superposed) == 0 == report.redundant_edges
        done += 1


def mixed_schedule(rnd: random.Random, length: int = 20) -> list[dict]:
    events = []
    for _ in range(length):
        kind = rnd.choices(("join", "leave", "move", "power"), weights=(3, 3, 4, 2))[0]
        ev = {"kind": kind, "count": rnd.randint(1, 2)}
        if kind == "move":
            ev["step"] = 2.0
        events.append(ev)
    return events


def centralized_run(k: int):
    data = {
        "schema": "hsk-scenario/1", "seed": 1000 + k, "node_count": 20, "mode": "centralized",
        "d_normal": 4.0, "events": mixed_schedule(random.Random(k)),
    }
    return list(iter_scenario(scenario_from_dict(data)))


@pytest.fixture(scope="module")
def centralized_runs():
    return [centralized_run(k) for k in range(100)]


@criterion("4", "link reuse: E- subset of E+, new exchanges == |E+ \\ E-|, leaf leave -> 0")
def test_link_reuse(centralized_runs):
    rounds = 0
    for run in centralized_runs:
        for ev, state, report in run[1:]:
            if report.aborted:
                continue
            rounds += 1
            assert state.last_preserved <= state.tree.edges
            assert report.new_exchanges == len(state.tree.edges - state.last_preserved)
            assert report.reused_links == len(state.last_preserved)
            assert state.store.edges() == state.tree.edges
    assert rounds > 1500

    # leaf leave with the rest still connected
    layout = {1: (2, 0), 2: (0, 0), 3: (1, 0), 4: (-1, 0), 5: (0, 1), 6: (-2, 0), 7: (0, 2)}
    nodes = [NodeState(i, p, 10.0, 5.0 if i == LEADER else 1.5) for i, p in layout.items()]
    ctx = ProtocolContext(rng=make_rng(0), params=WeightParams(1000, 1, 0))
    state, _ = bootstrap(nodes, ctx)
    for leaf in (6, 7):
        state, report = run_round(state, NetworkEvent.leave(leaf), ctx)
        assert report.new_exchanges == 0 and not report.aborted


@criterion("5", "epoch +1 per node event, never on edge events; only members unwrap")
def test_rekey_semantics(centralized_runs):
    cipher = HashSIVCipher()
    for run in centralized_runs:
        retained: dict[int, list[bytes]] = {}
        prev = run[0][1]
        assert prev.epoch == 1
        for ev, state, report in run[1:]:
            if report.aborted:
                assert state.epoch == prev.epoch
                prev = state
                continue
            expected = prev.epoch + 1 if ev.is_node_event else prev.epoch
            assert state.epoch == report.epoch == expected
            for gone in ev.leaves:
                retained[gone] = list(prev.store.keys_of(gone).values())
                assert not any(gone in e for e in state.store.edges())
            if ev.is_node_event:
                delivery = state.last_delivery
                assert set(delivery.recovered) == state.members
                assert all(sk == state.session_key for sk in delivery.recovered.values())
                for keys in retained.values():
                    for p in delivery.payloads:
                        for k in keys:
                            with pytest.raises(DecryptionError):
                                unwrap_session_key(p.ciphertext, k, cipher)
            prev = state


@criterion("6", "message counts per round; flood payloads <= 2|E|; tree flood 0 duplicates")
def test_message_accounting(centralized_runs):
    for run in centralized_runs:
        for ev, state, report in run:
            if report.aborted:
                continue
            n = len(state.topology)
            assert report.hello == n
            assert report.id_msg == report.weight_msg == n - 1
            assert report.notification <= n - 1
            rekey = ev is None or ev.is_node_event
            assert report.key_payload == (n - 1 if rekey else 0)

    for k in range(30):
        data = {
            "schema": "hsk-scenario/1", "seed": 2000 + k, "node_count": 30, "mode": "distributed",
            "d_max": 3.5, "events": mixed_schedule(random.Random(k), 10),
        }
        for ev, state, report in iter_scenario(scenario_from_dict(data)):
            if report.aborted or report.key_payload == 0:
                continue
            assert report.key_payload <= 2 * len(state.superposed.edges)
            assert report.duplicates == report.redundant_edges

    line = [NodeState(i, (1.5 * i, 1.0), 5.0, 2.0) for i in range(1, 7)]
    state, report = bootstrap_distributed(line, ProtocolContext(rng=make_rng(0)))
    assert report.duplicates == 0 and report.key_payload == 5


@pytest.fixture(scope="module")
def sweep():
    start = time.perf_counter()
    res = sweep_dmax(50, n=40, area=(10.0, 10.0), grid=GRID, base_seed=0)
    return res, time.perf_counter() - start


@criterion("7a", "sweep: redundant == 0 whenever d_max >= d_upper; runtime < 2 min")
def test_sweep_zero_beyond_d_upper(sweep):
    res, elapsed = sweep
    assert all(p.instances >= 50 for p in res.points)
    beyond = [i for i in res.instances if i.d_max >= i.d_upper]
    assert beyond
    assert all(i.redundant == 0 for i in beyond)
    assert elapsed < 120


@criterion("7b", "sweep: mean redundant at d_max=15 is 0")
def test_sweep_zero_at_15(sweep):
    assert sweep[0].point(15.0).mean == 0


@criterion("7c", "sweep: mean redundant at d_max=4 <= 20")
def test_sweep_small_at_4(sweep):
    assert sweep[0].point(4.0).mean <= 20


@criterion("7d", "sweep: mean redundant curve peaks at an interior grid point")
def test_sweep_interior_peak(sweep):
    res, _ = sweep
    means = [p.mean for p in res.points]
    peak = means.index(max(means))
    assert 0 < peak < len(means) - 1, f"means by d_max: {dict(zip(res.grid, means))}"


@criterion("8", "two runs of each scenario give byte-identical CSV and DOT")
def test_determinism(tmp_path, scenarios_dir):
    files = sorted(scenarios_dir.glob("*.yaml"))
    assert files
    for sc in files:
        outs = []
        for rep in ("a", "b"):
            out = tmp_path / sc.stem / rep
            assert main(["run", str(sc), "--out", str(out)]) == 0
            outs.append(((out / "rounds.csv").read_bytes(), (out / "final.dot").read_bytes()))
        assert outs[0] == outs[1]


@criterion("9", "ring flood: one duplicate, full delivery, matches hand trace for n=3..10")
def test_ring_flood():
    for n in range(3, 11):
        ring = {edge(i, i % n + 1) for i in range(1, n + 1)}
        g = SuperposedGraph(frozenset(range(1, n + 1)), frozenset(ring))
        store = SecureLinkStore()
        establish_links_for_tree(g, store, HashExchange(), make_rng(n))
        sk = SessionKey.generate(make_rng(n), 1)
        rep = flood_session_key(g, 1, store, HashSIVCipher(), sk)
        trace = ring_flood_trace(n)
        assert rep.duplicates == 1
        assert len(rep.payloads) == trace["payloads"]
        assert rep.depth == trace["depth"]
        assert [i for i, c in rep.receipts().items() if c > 1] == [trace["dup_node"]]
        assert set(rep.recovered) == set(range(1, n + 1))
        assert all(v == sk for v in rep.recovered.values())
