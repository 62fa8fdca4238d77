"""Graphviz DOT output.

Node positions become ``pos="x,y!"`` so ``neato -n`` draws the real geometry.
Tree edges are solid black; redundant edges (those outside a minimum spanning
tree of the drawn graph) are dashed red.
"""

from __future__ import annotations

from collections.abc import Mapping
from pathlib import Path
from typing import Optional

from .errors import HSKError
from .net_model import Edge, NodeId, Point
from .spanning import UnionFind, lexicographic


def _fmt(x: float) -> str:
    return f"{x:.6f}".rstrip("0").rstrip(".") or "0"


def redundant_edges(nodes, edges, weights: Optional[Mapping[Edge, float]] = None) -> set[Edge]:
    """Edges left over once a minimum spanning forest is taken out of the graph."""
    uf = UnionFind(nodes)
    key = (lambda e: (weights.get(e, 0.0), lexicographic(e))) if weights else lexicographic
    return {e for e in sorted(edges, key=key) if not uf.union(*e)}


def to_dot(
    g,
    positions: Optional[Mapping[NodeId, Point]] = None,
    weights: Optional[Mapping[Edge, float]] = None,
    name: str = "hsk",
) -> str:
    nodes = sorted(g.nodes)
    edges = sorted(g.edges)
    extra = redundant_edges(nodes, edges, weights)
    lines = [f"graph {name} {{", "  node [shape=circle, fontsize=10];"]
    for i in nodes:
        attrs = [f'label="{i}"']
        if positions and i in positions:
            x, y = positions[i]
            attrs.append(f'pos="{_fmt(x)},{_fmt(y)}!"')
        lines.append(f"  {i} [{', '.join(attrs)}];")
    for a, b in edges:
        style = 'style=dashed, color=red, class="redundant"' if (a, b) in extra else 'style=solid, color=black, class="tree"'
        label = f', label="{_fmt(weights[(a, b)])}"' if weights and (a, b) in weights else ""
        lines.append(f"  {a} -- {b} [{style}{label}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(g, path, positions=None, weights=None) -> Path:
    path = Path(path)
    try:
        path.write_text(to_dot(g, positions, weights))
    except OSError as exc:
        raise HSKError(f"cannot write DOT to {path}: {exc}") from exc
    return path


def parse_dot_edges(text: str) -> list[tuple[Edge, str]]:
    """Edges and their class from text written by :func:`to_dot` (for round-trip checks)."""
    out = []
    for line in text.splitlines():
        line = line.strip()
        if " -- " not in line:
            continue
        head, attrs = line.split(" [", 1)
        a, b = (int(x) for x in head.split(" -- "))
        out.append(((a, b), "redundant" if 'class="redundant"' in attrs else "tree"))
    return out

