"""Scenario files.

A scenario is a YAML mapping tagged ``schema: hsk-scenario/1``::

    schema: hsk-scenario/1
    seed: 7
    node_count: 20
    area: [10.0, 10.0]
    mode: centralized          # or: distributed
    d_normal: 4.0              # centralized: range of normal nodes
    d_leader: 15.0             # centralized: leader range, >= area diagonal (default: diagonal)
    # d_max: 4.0               # distributed: common range
    pa_range: [0.0, 100.0]
    primitive: test-double     # or: finite-field
    weights: {M: 1000.0, alpha: 1.0, beta: 1.0}
    lmst: false                # distributed: every LST is its neighborhood's MST
    force_rekey: false         # rekey on edge events too
    placement_retries: 100     # redraws allowed to get a connected initial placement
    events:
      - {kind: join, count: 2}                      # random positions and PA
      - {kind: join, positions: [[1.0, 2.0]], power: [40.0]}
      - {kind: leave, ids: [5]}
      - {kind: leave, count: 1}                     # random member (never the leader)
      - {kind: move, count: 3, step: 1.0, repeat: 4}  # burst of 4 edge events
      - {kind: move, ids: [3], positions: [[2.5, 2.5]]}
      - {kind: power, ids: [2], values: [50.0]}
      - {kind: power, count: 2}                     # random new PA from pa_range

``repeat`` expands an entry into that many consecutive events. Entries without
explicit ids are resolved from the seeded event stream against the membership
at the time the event fires. Event kinds ``join``/``leave`` are node events,
``move``/``power`` are edge events.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import ConfigurationError
from .secure_links import PRIMITIVES
from .weighting import WeightParams

SCHEMA = "hsk-scenario/1"
EVENT_KINDS = ("join", "leave", "move", "power")


@dataclass(frozen=True)
class EventSpec:
    kind: str
    count: Optional[int] = None
    ids: Optional[tuple[int, ...]] = None
    positions: Optional[tuple[tuple[float, float], ...]] = None
    values: Optional[tuple[float, ...]] = None
    step: Optional[float] = None

    @property
    def is_node_event(self) -> bool:
        return self.kind in ("join", "leave")


@dataclass(frozen=True)
class Scenario:
    seed: int
    node_count: int
    area: tuple[float, float] = (10.0, 10.0)
    mode: str = "centralized"
    d_max: Optional[float] = None
    d_leader: Optional[float] = None
    d_normal: Optional[float] = None
    weights: WeightParams = field(default_factory=WeightParams)
    pa_range: tuple[float, float] = (0.0, 100.0)
    primitive: str = "test-double"
    lmst: bool = False
    force_rekey: bool = False
    placement_retries: int = 100
    events: tuple[EventSpec, ...] = ()

    def __post_init__(self):
        if self.mode not in ("centralized", "distributed"):
            raise ConfigurationError(f"mode must be centralized or distributed, got {self.mode!r}")
        if self.node_count < 1:
            raise ConfigurationError("node_count must be >= 1")
        if min(self.area) <= 0:
            raise ConfigurationError("area sides must be positive")
        lo, hi = self.pa_range
        if lo < 0 or hi < lo:
            raise ConfigurationError("pa_range must satisfy 0 <= min <= max")
        if self.primitive not in PRIMITIVES:
            raise ConfigurationError(f"unknown primitive {self.primitive!r}")
        if self.placement_retries < 0:
            raise ConfigurationError("placement_retries must be >= 0")
        if self.mode == "distributed":
            if self.d_max is None or self.d_max <= 0:
                raise ConfigurationError("distributed mode needs a positive d_max")
        else:
            if self.d_normal is None or self.d_normal <= 0:
                raise ConfigurationError("centralized mode needs a positive d_normal")
            if self.d_leader is not None and self.d_leader < self.diagonal:
                raise ConfigurationError(
                    f"d_leader={self.d_leader} cannot cover the {self.area[0]}x{self.area[1]} area"
                )
        self.weights.validate(hi)

    @property
    def diagonal(self) -> float:
        return math.hypot(*self.area)

    @property
    def leader_range(self) -> float:
        return self.d_leader if self.d_leader is not None else self.diagonal


def _pairs(raw, name) -> tuple[tuple[float, float], ...]:
    try:
        return tuple((float(x), float(y)) for x, y in raw)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name} must be a list of [x, y] pairs") from None


def _event(raw: dict[str, Any], index: int) -> list[EventSpec]:
    if not isinstance(raw, dict) or raw.get("kind") not in EVENT_KINDS:
        raise ConfigurationError(f"event #{index}: kind must be one of {EVENT_KINDS}")
    unknown = set(raw) - {"kind", "count", "ids", "positions", "values", "power", "step", "repeat"}
    if unknown:
        raise ConfigurationError(f"event #{index}: unknown keys {sorted(unknown)}")
    kind = raw["kind"]
    values = raw.get("values", raw.get("power"))
    spec = EventSpec(
        kind=kind,
        count=int(raw["count"]) if "count" in raw else None,
        ids=tuple(int(i) for i in raw["ids"]) if "ids" in raw else None,
        positions=_pairs(raw["positions"], "positions") if "positions" in raw else None,
        values=tuple(float(v) for v in values) if values is not None else None,
        step=float(raw["step"]) if "step" in raw else None,
    )
    if spec.count is not None and spec.count < 1:
        raise ConfigurationError(f"event #{index}: count must be >= 1")
    if kind == "join" and spec.ids is not None:
        raise ConfigurationError(f"event #{index}: joining nodes get fresh ids; do not list ids")
    if kind in ("leave", "move", "power") and spec.ids is None and spec.count is None:
        raise ConfigurationError(f"event #{index}: give ids or a count")
    if kind == "join" and spec.positions is None and spec.count is None:
        raise ConfigurationError(f"event #{index}: give positions or a count")
    if kind == "move" and spec.ids is not None and spec.positions is not None and len(spec.ids) != len(spec.positions):
        raise ConfigurationError(f"event #{index}: ids and positions differ in length")
    repeat = int(raw.get("repeat", 1))
    if repeat < 1:
        raise ConfigurationError(f"event #{index}: repeat must be >= 1")
    return [spec] * repeat


def scenario_from_dict(data: dict[str, Any]) -> Scenario:
    if not isinstance(data, dict):
        raise ConfigurationError("scenario must be a mapping")
    if data.get("schema") != SCHEMA:
        raise ConfigurationError(f"unsupported schema tag {data.get('schema')!r}; expected {SCHEMA!r}")
    known = {
        "schema", "seed", "node_count", "area", "mode", "d_max", "d_leader", "d_normal", "weights",
        "pa_range", "primitive", "lmst", "force_rekey", "placement_retries", "events",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigurationError(f"unknown scenario keys {sorted(unknown)}")
    for key in ("seed", "node_count"):
        if key not in data:
            raise ConfigurationError(f"scenario is missing {key!r}")
    w = data.get("weights") or {}
    events = []
    for i, raw in enumerate(data.get("events") or []):
        events.extend(_event(raw, i))

    def opt(key):
        return float(data[key]) if data.get(key) is not None else None

    return Scenario(
        seed=int(data["seed"]),
        node_count=int(data["node_count"]),
        area=tuple(float(v) for v in data.get("area", (10.0, 10.0))),
        mode=str(data.get("mode", "centralized")),
        d_max=opt("d_max"),
        d_leader=opt("d_leader"),
        d_normal=opt("d_normal"),
        weights=WeightParams(
            big_M=float(w.get("M", 1000.0)), alpha=float(w.get("alpha", 1.0)), beta=float(w.get("beta", 1.0))
        ),
        pa_range=tuple(float(v) for v in data.get("pa_range", (0.0, 100.0))),
        primitive=str(data.get("primitive", "test-double")),
        lmst=bool(data.get("lmst", False)),
        force_rekey=bool(data.get("force_rekey", False)),
        placement_retries=int(data.get("placement_retries", 100)),
        events=tuple(events),
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read scenario {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: invalid YAML: {exc}") from exc
    return scenario_from_dict(data)
