"""Time-variant edge weights from distance and residual energy.

The shipped weight is linear,

    W_ij = M + alpha * d_ij - beta * min(PA_i, PA_j)      if d_ij <= cutoff
    W_ij = +inf                                           otherwise

Any other callable ``(d, pa_i, pa_j) -> float`` may be plugged in, provided it
is nondecreasing in ``d``, nonincreasing in ``min(pa_i, pa_j)`` and strictly
positive on admissible inputs.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Callable, Optional, Union

from .errors import ConfigurationError
from .net_model import LEADER, Edge, Mode, NodeState, Topology, edge

INF = math.inf

WeightFunction = Callable[[float, float, float], float]


@dataclass(frozen=True)
class WeightParams:
    big_M: float = 1000.0
    alpha: float = 1.0
    beta: float = 1.0
    range_cutoff: Optional[float] = None

    def __post_init__(self):
        if not self.big_M > 0:
            raise ConfigurationError("M must be positive")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigurationError("alpha and beta must be nonnegative")
        if self.range_cutoff is not None and not self.range_cutoff > 0:
            raise ConfigurationError("range cutoff must be positive")

    def __call__(self, d: float, pa_i: float, pa_j: float) -> float:
        return self.big_M + self.alpha * d - self.beta * min(pa_i, pa_j)

    def validate(self, pa_max: float) -> None:
        """Check positivity over every admissible input: distances >= 0, PA <= pa_max."""
        worst = self.big_M - self.beta * pa_max
        if not worst > 0:
            raise ConfigurationError(
                f"M={self.big_M} is too small: weight can reach {worst} <= 0 "
                f"with beta={self.beta} and PA up to {pa_max}"
            )


def edge_weight(
    d_ij: float, pa_i: float, pa_j: float, params: WeightParams,
    weight_fn: Optional[WeightFunction] = None,
) -> float:
    if d_ij < 0 or pa_i < 0 or pa_j < 0:
        raise ValueError("distance and power available must be nonnegative")
    if params.range_cutoff is not None and d_ij > params.range_cutoff:
        return INF
    w = (weight_fn or params)(d_ij, pa_i, pa_j)
    if not w > 0:
        raise ConfigurationError(
            f"weight {w} <= 0 for d={d_ij}, PA=({pa_i}, {pa_j}); increase M"
        )
    return w


@dataclass(frozen=True)
class WeightedTopology:
    topology: Topology
    weights: Mapping[Edge, float]

    @property
    def nodes(self):
        return self.topology.nodes

    @property
    def edges(self) -> frozenset[Edge]:
        return self.topology.edges

    def weight(self, e: Edge) -> float:
        return self.weights.get(e, INF)

    def total(self, edges) -> float:
        return sum(self.weights[e] for e in edges)

    def restrict(self, sub: Topology) -> "WeightedTopology":
        """Weights of an induced subgraph, e.g. a neighborhood."""
        return WeightedTopology(sub, {e: self.weights[e] for e in sub.edges})


def weighted(topo: Topology, weights: Mapping[Edge, float]) -> WeightedTopology:
    """Wrap explicit weights (handy for hand-built graphs and tests)."""
    missing = set(topo.edges) - set(weights)
    if missing:
        raise ValueError(f"no weight for edges {sorted(missing)}")
    return WeightedTopology(topo, {e: float(weights[e]) for e in sorted(topo.edges)})


def weighted_graph(weights: Mapping[Edge, float], nodes=()) -> WeightedTopology:
    """Abstract weighted graph with no geometry behind it.

    Nodes get placeholder states; edges and weights are taken as given. Extra
    isolated nodes can be listed in ``nodes``.
    """
    canon = {edge(a, b): float(w) for (a, b), w in weights.items()}
    ids = set(nodes) | {i for e in canon for i in e}
    states = {i: NodeState(i, (0.0, 0.0), 0.0, 1.0) for i in sorted(ids)}
    topo = Topology(Mode.HOMOGENEOUS, states, frozenset(canon), 0)
    return WeightedTopology(topo, dict(sorted(canon.items())))


def _cutoff(topo: Topology) -> Optional[float]:
    if not topo.nodes:
        return None
    if topo.mode is Mode.HOMOGENEOUS:
        return topo.d_max
    normal = [s.transmission_range for i, s in topo.nodes.items() if i != LEADER]
    return max(normal) if normal else None


def recompute_weights(
    topo: Topology,
    params: Union[WeightParams, None] = None,
    weight_fn: Optional[WeightFunction] = None,
) -> WeightedTopology:
    params = params or WeightParams()
    if params.range_cutoff is None:
        params = WeightParams(params.big_M, params.alpha, params.beta, _cutoff(topo))
    out: dict[Edge, float] = {}
    for a, b in sorted(topo.edges):
        na, nb = topo.nodes[a], topo.nodes[b]
        w = edge_weight(na.distance_to(nb), na.power_available, nb.power_available, params, weight_fn)
        if w == INF:
            raise ConfigurationError(f"edge {(a, b)} lies beyond the weight cutoff")
        out[(a, b)] = w
    return WeightedTopology(topo, out)

