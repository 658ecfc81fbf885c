"""Classification instances from group evolution chains.

An instance describes one group G at frame n by the sizes of the groups on a
backward chain of pair events ending at G (oldest first) and the events
between them; its label is the event that links G to frame n+1.
"""

from __future__ import annotations

import csv
import io
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .communities import Group, GroupKey
from .errors import InputError
from .ged import EventType, EvolutionEdge

logger = logging.getLogger(__name__)

TARGET_CLASSES = (
    EventType.CONTINUING,
    EventType.SHRINKING,
    EventType.GROWING,
    EventType.SPLITTING,
    EventType.MERGING,
    EventType.DISSOLVING,
)

# label choice when a group has several outgoing events
LABEL_PRIORITY = TARGET_CLASSES

DEFAULT_STEPS = 4
CHAIN_CAP = 64


@dataclass(frozen=True)
class SequenceInstance:
    sizes: tuple[int, ...]
    events: tuple[EventType, ...]
    label: EventType
    provenance: tuple[GroupKey, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if len(self.events) != len(self.sizes) - 1:
            raise ValueError("an instance needs exactly one event between consecutive sizes")
        if self.label not in TARGET_CLASSES:
            raise ValueError(f"{self.label.value} is not a target class")
        if any(not e.is_pair_event for e in self.events):
            raise ValueError("feature events must be pair events")

    @property
    def steps(self) -> int:
        return len(self.sizes)

    # fixed names for the default four-step layout
    @property
    def size_t3(self) -> int:
        return self.sizes[-4]

    @property
    def size_t2(self) -> int:
        return self.sizes[-3]

    @property
    def size_t1(self) -> int:
        return self.sizes[-2]

    @property
    def size_t0(self) -> int:
        return self.sizes[-1]

    @property
    def event_32(self) -> EventType:
        return self.events[-3]

    @property
    def event_21(self) -> EventType:
        return self.events[-2]

    @property
    def event_10(self) -> EventType:
        return self.events[-1]


@dataclass
class ExtractionStats:
    groups_considered: int = 0
    groups_with_instances: int = 0
    cap_hits: list[GroupKey] = field(default_factory=list)


def column_names(steps: int = DEFAULT_STEPS) -> list[str]:
    cols = []
    for back in range(steps - 1, -1, -1):
        cols.append(f"size_t{back}")
        if back:
            cols.append(f"event_{back}{back - 1}")
    return cols + ["label"]


def _pick_labels(outgoing: Sequence[EvolutionEdge], policy: str) -> list[EventType]:
    kinds = {e.event for e in outgoing}
    ordered = [e for e in LABEL_PRIORITY if e in kinds]
    if not ordered:
        return []
    return ordered if policy == "all" else ordered[:1]


def extract_instances(
    evolution: Iterable[EvolutionEdge],
    groups: Mapping[int, Sequence[Group]],
    steps: int = DEFAULT_STEPS,
    label_policy: str = "priority",
    chain_policy: str = "per-chain",
    cap: int = CHAIN_CAP,
    stats: ExtractionStats | None = None,
) -> list[SequenceInstance]:
    """Emit instances for every group with a label and enough pair-event history.

    ``chain_policy="per-chain"`` emits one instance per distinct backward
    chain (at most ``cap``, smallest provenance first); ``"per-group"`` keeps
    only the first chain.  ``label_policy="all"`` emits one instance per
    distinct outgoing event type instead of the highest-priority one.
    """
    if steps < 2:
        raise InputError("steps must be at least 2")
    if label_policy not in ("priority", "all"):
        raise InputError(f"unknown label policy {label_policy!r}")
    if chain_policy not in ("per-chain", "per-group"):
        raise InputError(f"unknown chain policy {chain_policy!r}")
    stats = stats if stats is not None else ExtractionStats()

    sizes = {g.key: len(g.members) for f in groups for g in groups[f]}
    incoming: dict[GroupKey, list[EvolutionEdge]] = defaultdict(list)
    outgoing: dict[GroupKey, list[EvolutionEdge]] = defaultdict(list)
    for e in evolution:
        if e.source is not None:
            outgoing[e.source].append(e)
        if e.target is not None and e.source is not None and e.event.is_pair_event:
            incoming[e.target].append(e)
    for edges in incoming.values():
        edges.sort(key=lambda e: e.source)

    def chains_to(key: GroupKey, depth: int) -> list[tuple[list[GroupKey], list[EventType]]]:
        # all backward chains of `depth` pair events ending at key, oldest node first
        if depth == 0:
            return [([key], [])]
        found = []
        for e in incoming.get(key, ()):
            for nodes, events in chains_to(e.source, depth - 1):
                found.append((nodes + [key], events + [e.event]))
        return found

    instances: list[SequenceInstance] = []
    for f in sorted(groups):
        for g in sorted(groups[f], key=lambda g: g.group_id):
            stats.groups_considered += 1
            labels = _pick_labels(outgoing.get(g.key, ()), label_policy)
            if not labels:
                continue
            chains = sorted(chains_to(g.key, steps - 1), key=lambda c: c[0])
            if not chains:
                continue
            if len(chains) > cap:
                stats.cap_hits.append(g.key)
                logger.warning("group %s has %d backward chains; keeping %d", g.key, len(chains), cap)
                chains = chains[:cap]
            if chain_policy == "per-group":
                chains = chains[:1]
            stats.groups_with_instances += 1
            for nodes, events in chains:
                for label in labels:
                    instances.append(
                        SequenceInstance(
                            tuple(sizes[k] for k in nodes), tuple(events), label, tuple(nodes)
                        )
                    )
    return instances


def format_instances(instances: Sequence[SequenceInstance]) -> str:
    if not instances:
        raise InputError("no instances to serialize")
    steps = instances[0].steps
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(column_names(steps))
    for inst in instances:
        if inst.steps != steps:
            raise InputError("instances of different lengths cannot share a file")
        row: list[object] = []
        for i, size in enumerate(inst.sizes):
            row.append(size)
            if i < len(inst.events):
                row.append(inst.events[i].value)
        row.append(inst.label.value)
        writer.writerow(row)
    return buf.getvalue()


def serialize_instances(instances: Sequence[SequenceInstance], path: str | Path) -> None:
    Path(path).write_text(format_instances(instances), encoding="utf-8", newline="\n")


def read_instances(path: str | Path) -> list[SequenceInstance]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header or header[-1] != "label" or len(header) % 2:
                raise InputError(f"{path}: not an instance file")
            steps = len(header) // 2
            if header != column_names(steps):
                raise InputError(f"{path}: unexpected header {header}")
            out = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    sizes = tuple(int(row[2 * i]) for i in range(steps))
                    events = tuple(EventType.parse(row[2 * i + 1]) for i in range(steps - 1))
                    out.append(SequenceInstance(sizes, events, EventType.parse(row[-1])))
                except (ValueError, IndexError) as exc:
                    raise InputError(f"{path}, line {lineno}: {exc}") from exc
    except OSError as exc:
        raise InputError(f"cannot read instances {path}: {exc}") from exc
    return out
