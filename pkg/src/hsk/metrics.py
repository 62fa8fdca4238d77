"""Per-round metrics records and their CSV form."""

from __future__ import annotations

import csv
from collections.abc import Iterable
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import HSKError


@dataclass
class MessageCounts:
    hello: int = 0
    id_msg: int = 0
    weight_msg: int = 0
    notification: int = 0
    key_payload: int = 0

    def __add__(self, other: "MessageCounts") -> "MessageCounts":
        return MessageCounts(**{f.name: getattr(self, f.name) + getattr(other, f.name) for f in fields(self)})


@dataclass(frozen=True)
class MessageLog:
    """Cumulative message counters plus a per-round history."""

    total: MessageCounts = field(default_factory=MessageCounts)
    rounds: tuple[MessageCounts, ...] = ()

    def record(self, counts: MessageCounts) -> "MessageLog":
        return MessageLog(self.total + counts, self.rounds + (counts,))


@dataclass(frozen=True)
class MetricsReport:
    round: int
    event_kind: str
    epoch: int
    hello: int = 0
    id_msg: int = 0
    weight_msg: int = 0
    notification: int = 0
    key_payload: int = 0
    new_exchanges: int = 0
    reused_links: int = 0
    redundant_edges: int = 0
    max_depth: int = 0
    duplicates: int = 0
    aborted: bool = False

    @classmethod
    def from_counts(cls, round: int, event_kind: str, epoch: int, counts: MessageCounts, **extra) -> "MetricsReport":
        return cls(round, event_kind, epoch, **asdict(counts), **extra)


CSV_COLUMNS = tuple(f.name for f in fields(MetricsReport))


def _cell(v) -> str:
    return str(int(v)) if isinstance(v, bool) else str(v)


def write_csv(reports: Iterable[MetricsReport], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow([_cell(getattr(r, c)) for c in CSV_COLUMNS])


def export_csv(reports: Iterable[MetricsReport], path) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            write_csv(reports, fh)
    except OSError as exc:
        raise HSKError(f"cannot write CSV to {path}: {exc}") from exc
    return path


def read_csv(path) -> list[MetricsReport]:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise HSKError(f"cannot read CSV from {path}: {exc}") from exc
    out = []
    for row in rows:
        vals = {}
        for f in fields(MetricsReport):
            raw = row[f.name]
            if f.name == "event_kind":
                vals[f.name] = raw
            elif f.name == "aborted":
                vals[f.name] = raw == "1"
            else:
                vals[f.name] = int(raw)
        out.append(MetricsReport(**vals))
    return out


def summarize(reports: Iterable[MetricsReport]) -> dict:
    reports = list(reports)
    done = [r for r in reports if not r.aborted]
    out = {
        "rounds": len(reports),
        "aborted": len(reports) - len(done),
        "final_epoch": max((r.epoch for r in reports), default=0),
    }
    for name in ("hello", "id_msg", "weight_msg", "notification", "key_payload",
                 "new_exchanges", "reused_links", "duplicates"):
        out[name] = sum(getattr(r, name) for r in reports)
    out["max_redundant_edges"] = max((r.redundant_edges for r in done), default=0)
    return out
