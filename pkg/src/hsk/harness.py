"""Scenario runner, random placement, connectivity bounds and the d_max sweep."""

from __future__ import annotations

import math
import statistics
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .errors import ConfigurationError, TopologyError
from .metrics import MetricsReport
from .net_model import LEADER, Mode, NetworkEvent, NodeState, Topology, build_topology, is_connected
from .protocol_centralized import CentralizedState, ProtocolContext, bootstrap, run_round
from .protocol_distributed import DistributedState, bootstrap_distributed, run_round_distributed
from .rng import Rng, child_rng, make_rng
from .scenario import EventSpec, Scenario
from .secure_links import key_exchange
from .spanning import kruskal_mst, redundant_edge_count
from .weighting import WeightedTopology, WeightParams

# child-stream ids under the scenario seed
PLACEMENT, EVENTS, PROTOCOL = 0, 1, 2

# The range study is geometric: LMSTs are taken over distance alone.
SWEEP_WEIGHTS = WeightParams(big_M=1000.0, alpha=1.0, beta=0.0)

State = Union[CentralizedState, DistributedState]


def random_placement(
    seed: int | Rng,
    n: int,
    area: tuple[float, float] = (10.0, 10.0),
    pa_range: tuple[float, float] = (0.0, 100.0),
    transmission_range: float = 1.0,
) -> list[NodeState]:
    """``n`` nodes uniform over ``[0, w] x [0, h]`` with PA uniform over ``pa_range``."""
    if n < 1:
        raise ValueError("need at least one node")
    rng = make_rng(seed)
    w, h = area
    pos = rng.uniform((0.0, 0.0), (w, h), size=(n, 2))
    pa = rng.uniform(pa_range[0], pa_range[1], size=n)
    return [
        NodeState(i + 1, (float(pos[i, 0]), float(pos[i, 1])), float(pa[i]), transmission_range)
        for i in range(n)
    ]


def compute_connectivity_bounds(nodes: Sequence[NodeState]) -> tuple[float, float]:
    """``(d_low, d_upper)``: the smallest range that connects the nodes, and the largest distance.

    ``d_low`` is the longest edge of the Euclidean minimum spanning tree.
    """
    nodes = list(nodes)
    if len(nodes) < 2:
        raise ValueError("connectivity bounds need at least two nodes")
    dist = {}
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            key = (a.id, b.id) if a.id < b.id else (b.id, a.id)
            dist[key] = a.distance_to(b)
    topo = Topology(Mode.HOMOGENEOUS, {s.id: s for s in nodes}, frozenset(dist), 0)
    mst = kruskal_mst(WeightedTopology(topo, dist))
    return max(dist[e] for e in mst.edges), max(dist.values())


def with_ranges(nodes: Sequence[NodeState], sc: Scenario) -> list[NodeState]:
    if sc.mode == "distributed":
        return [replace(s, transmission_range=sc.d_max) for s in nodes]
    return [
        replace(s, transmission_range=sc.leader_range if s.id == LEADER else sc.d_normal) for s in nodes
    ]


def topology_mode(sc: Scenario) -> Mode:
    return Mode.HOMOGENEOUS if sc.mode == "distributed" else Mode.UNBALANCED


def initial_placement(sc: Scenario) -> tuple[list[NodeState], int]:
    """Placement for the scenario, redrawn until connected. Returns ``(nodes, redraws)``."""
    for attempt in range(sc.placement_retries + 1):
        nodes = with_ranges(random_placement(child_rng(sc.seed, PLACEMENT, attempt), sc.node_count, sc.area, sc.pa_range), sc)
        if is_connected(build_topology(nodes, topology_mode(sc))):
            return nodes, attempt
    raise ConfigurationError(
        f"no connected placement of {sc.node_count} nodes after {sc.placement_retries} redraws"
    )


def resolve_event(spec: EventSpec, topo: Topology, sc: Scenario, rng: Rng, next_id: int) -> NetworkEvent:
    """Turn a scenario entry into a concrete event against the current membership."""
    w, h = sc.area
    ids = topo.ids

    def pick(count: int, pool: list[int]) -> list[int]:
        if count > len(pool):
            raise TopologyError(f"{spec.kind}: asked for {count} nodes, only {len(pool)} eligible")
        chosen = rng.choice(len(pool), size=count, replace=False)
        return sorted(pool[int(c)] for c in chosen)

    if spec.kind == "join":
        count = len(spec.positions) if spec.positions is not None else spec.count
        states = []
        for j in range(count):
            if spec.positions is not None:
                pos = spec.positions[j]
            else:
                pos = (float(rng.uniform(0, w)), float(rng.uniform(0, h)))
            pa = spec.values[j] if spec.values is not None else float(rng.uniform(*sc.pa_range))
            states.append(NodeState(next_id + j, pos, pa, 1.0))
        return NetworkEvent.join(*with_ranges(states, sc))

    if spec.kind == "leave":
        pool = [i for i in ids if not (topo.mode is Mode.UNBALANCED and i == LEADER)]
        targets = list(spec.ids) if spec.ids is not None else pick(spec.count, pool)
        return NetworkEvent.leave(*targets)

    targets = list(spec.ids) if spec.ids is not None else pick(spec.count, ids)
    if spec.kind == "move":
        moves = {}
        for j, i in enumerate(targets):
            if spec.positions is not None:
                moves[i] = spec.positions[j]
            elif spec.step is not None:
                x, y = topo.node(i).position
                dx, dy = rng.uniform(-spec.step, spec.step, size=2)
                moves[i] = (min(max(x + float(dx), 0.0), w), min(max(y + float(dy), 0.0), h))
            else:
                moves[i] = (float(rng.uniform(0, w)), float(rng.uniform(0, h)))
        return NetworkEvent.move(moves)

    powers = {}
    for j, i in enumerate(targets):
        powers[i] = spec.values[j] if spec.values is not None else float(rng.uniform(*sc.pa_range))
    return NetworkEvent.power(powers)


def make_context(sc: Scenario, rng: Optional[Rng] = None) -> ProtocolContext:
    return ProtocolContext(
        rng=rng if rng is not None else child_rng(sc.seed, PROTOCOL),
        params=sc.weights,
        kx=key_exchange(sc.primitive),
        force_rekey=sc.force_rekey,
        lmst=sc.lmst,
    )


@dataclass
class RunResult:
    scenario: Scenario
    reports: list[MetricsReport] = field(default_factory=list)
    states: list[State] = field(default_factory=list)
    events: list[Optional[NetworkEvent]] = field(default_factory=list)
    placement_redraws: int = 0

    @property
    def final(self) -> State:
        return self.states[-1]


def iter_scenario(
    sc: Scenario, result: Optional[RunResult] = None
) -> Iterator[tuple[Optional[NetworkEvent], State, MetricsReport]]:
    """Yield ``(event, state, report)`` per round, starting with the bootstrap (event None)."""
    nodes, redraws = initial_placement(sc)
    if result is not None:
        result.placement_redraws = redraws
    ctx = make_context(sc)
    events_rng = child_rng(sc.seed, EVENTS)
    if sc.mode == "distributed":
        state, report = bootstrap_distributed(nodes, ctx)
        step = run_round_distributed
    else:
        state, report = bootstrap(nodes, ctx, Mode.UNBALANCED)
        step = run_round
    yield None, state, report
    next_id = max(s.id for s in nodes) + 1
    for spec in sc.events:
        ev = resolve_event(spec, state.topology, sc, events_rng, next_id)
        if ev.joins:
            next_id = max(next_id, max(s.id for s in ev.joins) + 1)
        state, report = step(state, ev, ctx)
        yield ev, state, report


def run_scenario(sc: Scenario) -> RunResult:
    result = RunResult(sc)
    for ev, state, report in iter_scenario(sc, result):
        result.events.append(ev)
        result.states.append(state)
        result.reports.append(report)
    return result


def final_graph(state: State):
    """The structure worth drawing: the tree (centralized) or the superposed graph."""
    return state.superposed if isinstance(state, DistributedState) else state.tree


@dataclass(frozen=True)
class SweepInstance:
    seed: int
    d_max: float
    redraws: int
    d_low: float
    d_upper: float
    edges: int
    redundant: int


@dataclass(frozen=True)
class SweepPoint:
    d_max: float
    mean: float
    stddev: float
    instances: int
    redraws: int
    skipped: int


@dataclass
class SweepResult:
    grid: tuple[float, ...]
    points: list[SweepPoint]
    instances: list[SweepInstance]

    def point(self, d_max: float) -> SweepPoint:
        for p in self.points:
            if p.d_max == d_max:
                return p
        raise KeyError(d_max)


def sweep_dmax(
    seed_count: int,
    n: int = 40,
    area: tuple[float, float] = (10.0, 10.0),
    grid: Sequence[float] = (4.0, 5.5, 7.0, 8.5, 10.0, 12.0, 15.0),
    base_seed: int = 0,
    pa_range: tuple[float, float] = (0.0, 100.0),
    params: Optional[WeightParams] = None,
    retry_cap: int = 100,
) -> SweepResult:
    """Redundant edges of the superposed graph built under LMST, across ranges.

    Seed ``s`` draws one placement that is reused at every grid point where it
    is connected; below its ``d_low`` the placement is redrawn (up to
    ``retry_cap`` times) and the redraw count is recorded.
    """
    params = params or SWEEP_WEIGHTS
    grid = tuple(float(d) for d in grid)
    instances: list[SweepInstance] = []
    skipped = {d: 0 for d in grid}
    for s in range(seed_count):
        for d in grid:
            for attempt in range(retry_cap + 1):
                placed = random_placement(child_rng(base_seed, s, attempt), n, area, pa_range, d)
                topo = build_topology(placed, Mode.HOMOGENEOUS)
                if is_connected(topo):
                    break
            else:
                skipped[d] += 1
                continue
            ctx = ProtocolContext(rng=child_rng(base_seed, s, attempt, PROTOCOL), params=params, lmst=True)
            state, _ = bootstrap_distributed(placed, ctx)
            d_low, d_upper = compute_connectivity_bounds(placed) if n >= 2 else (0.0, 0.0)
            instances.append(SweepInstance(
                s, d, attempt, d_low, d_upper, len(topo.edges), redundant_edge_count(state.superposed)
            ))
    points = []
    for d in grid:
        vals = [i.redundant for i in instances if i.d_max == d]
        points.append(SweepPoint(
            d_max=d,
            mean=statistics.fmean(vals) if vals else math.nan,
            stddev=statistics.pstdev(vals) if vals else math.nan,
            instances=len(vals),
            redraws=sum(i.redraws for i in instances if i.d_max == d),
            skipped=skipped[d],
        ))
    instances.sort(key=lambda i: (i.seed, grid.index(i.d_max)))
    return SweepResult(grid, points, instances)
