"""Group Evolution Discovery: inclusion measure and event classification.

For groups G1 in frame i and G2 in frame i+1 the inclusion of G1 in G2 is

    I(G1, G2) = |G1 & G2| / |G1|  *  sum_{x in G1 & G2} NI(x) / sum_{x in G1} NI(x)

with NI the importance of each member inside G1.  Both inclusions, the two
group sizes and the number of matches each group has in the adjacent frame
decide which single event (if any) links the pair.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .communities import Group, GroupKey
from .errors import InputError

logger = logging.getLogger(__name__)

DISSOLVE_THRESHOLD = 0.10


class EventType(Enum):
    CONTINUING = "continuing"
    SHRINKING = "shrinking"
    GROWING = "growing"
    SPLITTING = "splitting"
    MERGING = "merging"
    DISSOLVING = "dissolving"
    FORMING = "forming"

    @property
    def is_pair_event(self) -> bool:
        return self not in (EventType.DISSOLVING, EventType.FORMING)

    @classmethod
    def parse(cls, text: str) -> "EventType":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise InputError(f"unknown event type {text!r}") from None


PAIR_EVENTS = tuple(e for e in EventType if e.is_pair_event)


@dataclass(frozen=True)
class InclusionPair:
    i_fwd: float
    i_bwd: float


@dataclass(frozen=True)
class GedParams:
    alpha: float = 0.5
    beta: float = 0.5
    dissolve_threshold: float = DISSOLVE_THRESHOLD

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "dissolve_threshold"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InputError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class EvolutionEdge:
    source: GroupKey | None
    target: GroupKey | None
    event: EventType
    inclusions: InclusionPair | None = None
    matches: tuple[int, int] | None = field(default=None, compare=False)

    @property
    def frame(self) -> int:
        """Index of the earlier frame of the transition."""
        if self.source is not None:
            return self.source[0]
        assert self.target is not None
        return self.target[0] - 1

    def sort_key(self) -> tuple:
        return (
            self.frame,
            self.source[1] if self.source else "",
            self.target[1] if self.target else "",
        )


def _scores(ni: Mapping[str, float] | None, members: Iterable[str]) -> Mapping[str, float]:
    if ni is None:
        return {x: 1.0 for x in members}
    return ni


def inclusion(g1: Group | frozenset[str], g2: Group | frozenset[str], ni_g1: Mapping[str, float] | None = None) -> float:
    """Inclusion of ``g1`` in ``g2`` weighted by the importance of g1's members.

    ``ni_g1=None`` means uniform importance.  When every member of g1 scores 0
    the quality factor falls back to the quantity factor.
    """
    m1 = g1.members if isinstance(g1, Group) else g1
    m2 = g2.members if isinstance(g2, Group) else g2
    if not m1:
        raise InputError("inclusion of an empty group is undefined")
    scores = _scores(ni_g1, m1)
    common = 0
    total = 0.0
    shared = 0.0
    # one ordered pass so that g1 <= g2 yields shared == total bit-for-bit
    for x in sorted(m1):
        try:
            s = scores[x]
        except KeyError:
            raise InputError(f"no importance score for member {x!r}") from None
        total += s
        if x in m2:
            common += 1
            shared += s
    quantity = common / len(m1)
    if total == 0:
        logger.warning("all importance scores are zero; inclusion uses quantity only")
        quality = quantity
    else:
        quality = shared / total
    return quantity * quality


def is_match(i_fwd: float, i_bwd: float, params: GedParams) -> bool:
    """Match predicate, inclusions oriented from the earlier to the later group."""
    return i_fwd >= params.alpha or i_bwd >= params.beta


def count_matches(
    g: Group,
    candidates: Sequence[Group],
    ni: Mapping[GroupKey, Mapping[str, float]] | None,
    params: GedParams,
    direction: str = "forward",
) -> int:
    """Number of groups in the adjacent frame matching ``g``.

    ``direction="forward"``: ``g`` is in frame i and candidates in frame i+1;
    ``"backward"``: ``g`` is in frame i+1 and candidates in frame i.
    """
    if direction not in ("forward", "backward"):
        raise InputError(f"direction must be forward or backward, got {direction!r}")
    ni = ni or {}
    count = 0
    for h in candidates:
        early, late = (g, h) if direction == "forward" else (h, g)
        i_fwd = inclusion(early, late, ni.get(early.key))
        i_bwd = inclusion(late, early, ni.get(late.key))
        if is_match(i_fwd, i_bwd, params):
            count += 1
    return count


def classify_pair(
    i_fwd: float,
    i_bwd: float,
    size1: int,
    size2: int,
    fwd_matches: int,
    bwd_matches: int,
    alpha: float,
    beta: float,
) -> EventType | None:
    """Pair event for G1 (frame i) and G2 (frame i+1), or None.

    ``fwd_matches`` counts G1's matches in frame i+1, ``bwd_matches`` counts
    G2's matches in frame i.  When exactly one inclusion reaches its
    threshold and the sizes are equal, the failing inclusion picks the
    orientation: I(G1,G2) < alpha reads as G1 breaking up (shrinking or
    splitting), I(G2,G1) < beta as G2 absorbing (growing or merging).  The
    other orientation is used only if the preferred one has no match.
    """
    fwd_ok = i_fwd >= alpha
    bwd_ok = i_bwd >= beta
    if fwd_ok and bwd_ok:
        if size1 == size2:
            return EventType.CONTINUING
        return EventType.SHRINKING if size1 > size2 else EventType.GROWING
    if not fwd_ok and not bwd_ok:
        return None

    def breaking_up() -> EventType | None:
        if fwd_matches == 1:
            return EventType.SHRINKING
        return EventType.SPLITTING if fwd_matches > 1 else None

    def absorbing() -> EventType | None:
        if bwd_matches == 1:
            return EventType.GROWING
        return EventType.MERGING if bwd_matches > 1 else None

    if size1 > size2:
        return breaking_up()
    if size1 < size2:
        return absorbing()
    if not fwd_ok:
        return breaking_up() or absorbing()
    return absorbing() or breaking_up()


def classify_transitions(
    groups_i: Sequence[Group],
    groups_next: Sequence[Group],
    ni: Mapping[GroupKey, Mapping[str, float]] | None,
    params: GedParams,
) -> list[EvolutionEdge]:
    """All evolution edges between two consecutive frames."""
    ni = ni or {}
    fwd = [[inclusion(a, b, ni.get(a.key)) for b in groups_next] for a in groups_i]
    bwd = [[inclusion(b, a, ni.get(b.key)) for b in groups_next] for a in groups_i]
    match = [[is_match(fwd[p][q], bwd[p][q], params) for q in range(len(groups_next))] for p in range(len(groups_i))]
    fwd_counts = [sum(row) for row in match]
    bwd_counts = [sum(match[p][q] for p in range(len(groups_i))) for q in range(len(groups_next))]
    floor = params.dissolve_threshold

    edges: list[EvolutionEdge] = []
    for p, a in enumerate(groups_i):
        for q, b in enumerate(groups_next):
            event = classify_pair(
                fwd[p][q], bwd[p][q], len(a), len(b), fwd_counts[p], bwd_counts[q], params.alpha, params.beta
            )
            if event is not None:
                edges.append(
                    EvolutionEdge(a.key, b.key, event, InclusionPair(fwd[p][q], bwd[p][q]), (fwd_counts[p], bwd_counts[q]))
                )
                logger.debug(
                    "%s -> %s: %s (matches fwd=%d bwd=%d)", a.key, b.key, event.value, fwd_counts[p], bwd_counts[q]
                )
    for p, a in enumerate(groups_i):
        if all(fwd[p][q] < floor and bwd[p][q] < floor for q in range(len(groups_next))):
            edges.append(EvolutionEdge(a.key, None, EventType.DISSOLVING))
    for q, b in enumerate(groups_next):
        if all(fwd[p][q] < floor and bwd[p][q] < floor for p in range(len(groups_i))):
            edges.append(EvolutionEdge(None, b.key, EventType.FORMING))
    return sorted(edges, key=EvolutionEdge.sort_key)


def build_evolution_graph(
    groups: Mapping[int, Sequence[Group]],
    ni: Mapping[GroupKey, Mapping[str, float]] | None,
    params: GedParams,
) -> list[EvolutionEdge]:
    """Evolution edges over every consecutive frame pair, in (frame, from, to) order."""
    frames = sorted(groups)
    if len(frames) < 2:
        raise InputError("GED needs at least two timeframes")
    if frames != list(range(frames[0], frames[0] + len(frames))):
        raise InputError("timeframe indices must be consecutive")
    edges: list[EvolutionEdge] = []
    for f in frames[:-1]:
        edges.extend(classify_transitions(groups[f], groups[f + 1], ni, params))
    return edges


def unmatched_groups(groups: Mapping[int, Sequence[Group]], edges: Iterable[EvolutionEdge]) -> list[GroupKey]:
    """Groups that take part in no evolution edge at all ("no-event" diagnostics)."""
    touched = set()
    for e in edges:
        touched.add(e.source)
        touched.add(e.target)
    return [g.key for f in sorted(groups) for g in groups[f] if g.key not in touched]


EVENT_COLUMNS = ["frame_from", "group_from", "frame_to", "group_to", "event", "inclusion_fwd", "inclusion_bwd"]


def format_events(edges: Iterable[EvolutionEdge]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EVENT_COLUMNS)
    for e in edges:
        src = e.source or ("", "")
        dst = e.target or ("", "")
        inc = (repr(e.inclusions.i_fwd), repr(e.inclusions.i_bwd)) if e.inclusions else ("", "")
        writer.writerow([src[0], src[1], dst[0], dst[1], e.event.value, *inc])
    return buf.getvalue()


def write_events(edges: Iterable[EvolutionEdge], path: str | Path) -> None:
    Path(path).write_text(format_events(edges), encoding="utf-8", newline="\n")


def read_events(path: str | Path) -> list[EvolutionEdge]:
    edges = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            missing = set(EVENT_COLUMNS) - set(reader.fieldnames or [])
            if missing:
                raise InputError(f"{path}: missing column(s) {sorted(missing)}")
            for row in reader:
                src = (int(row["frame_from"]), row["group_from"]) if row["frame_from"] else None
                dst = (int(row["frame_to"]), row["group_to"]) if row["frame_to"] else None
                inc = None
                if row["inclusion_fwd"]:
                    inc = InclusionPair(float(row["inclusion_fwd"]), float(row["inclusion_bwd"]))
                edges.append(EvolutionEdge(src, dst, EventType.parse(row["event"]), inc))
    except OSError as exc:
        raise InputError(f"cannot read events file {path}: {exc}") from exc
    except ValueError as exc:
        raise InputError(f"bad events file {path}: {exc}") from exc
    return edges
