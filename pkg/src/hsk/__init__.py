"""HSK group key agreement for MANETs.

Spanning-tree based key agreement with extended-Kruskal topology repair:
a leader-driven protocol for unbalanced networks, a local-spanning-tree
protocol for homogeneous ones, and a deterministic simulator around both.
"""

from .errors import (
    ConfigurationError, DecryptionError, DisconnectedError, HSKError, KeyDistributionError,
    LinkError, PreconditionError, TopologyError, UnknownNodeError,
)
from .metrics import MetricsReport, export_csv, read_csv
from .net_model import (
    LEADER, EventKind, Mode, NetworkEvent, NodeState, Topology, apply_event, build_topology,
    connected_components, directly_connected, is_connected, neighborhood_subgraph,
)
from .spanning import (
    SpanningForest, SpanningTree, SuperposedGraph, build_lst, derive_preserved_forest,
    extended_kruskal, kruskal_mst, prim_mst, redundant_edge_count, superpose,
)
from .weighting import WeightedTopology, WeightParams, edge_weight, recompute_weights, weighted_graph

__version__ = "0.1.0"
