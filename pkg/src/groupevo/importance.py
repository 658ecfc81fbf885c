"""Per-group node importance used as the quality weight of inclusion.

``social_position`` is a PageRank-like fixed point over the commitment graph:

    SP(x) = (1 - eps) + eps * sum_{y -> x} SP(y) * C(y, x)
    C(y, x) = w(y, x) / sum_z w(y, z)

Members without positive out-weight are dangling and pass nothing on; their
mass is not redistributed.  This is a reconstruction of the social position
measure, not a verified copy of its original definition.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .communities import Group, GroupKey
from .errors import InputError
from .tsn import TemporalSocialNetwork, Timeframe

MEASURES = ("sp", "degree", "uniform")


@dataclass(frozen=True)
class ImportanceMap(Mapping):
    """Scores for exactly the members of one group (read-only mapping)."""

    key: GroupKey
    scores: dict[str, float]
    converged: bool = True
    iterations: int = 0
    deltas: tuple[float, ...] = field(default=(), repr=False)
    # sum of absolute changes per round; unlike the max change this never grows
    l1_deltas: tuple[float, ...] = field(default=(), repr=False)

    def __getitem__(self, node: str) -> float:
        return self.scores[node]

    def __iter__(self) -> Iterator[str]:
        return iter(self.scores)

    def __len__(self) -> int:
        return len(self.scores)


def _induced_out_edges(nodes: frozenset[str] | set[str], frame: Timeframe) -> dict[str, dict[str, float]]:
    out: dict[str, dict[str, float]] = defaultdict(dict)
    for (s, t), w in frame.edges.items():
        if s in nodes and t in nodes and s != t:
            out[s][t] = w
    return out


def _social_position_scores(
    nodes: list[str], out_edges: Mapping[str, Mapping[str, float]], epsilon: float, tol: float, max_iter: int
) -> tuple[dict[str, float], bool, int, list[float], list[float]]:
    # commitment lists: for each target x, the (source y, C(y,x)) pairs
    incoming: dict[str, list[tuple[str, float]]] = {x: [] for x in nodes}
    for y in nodes:
        targets = out_edges.get(y, {})
        total = sum(targets.values())
        if total <= 0:
            continue
        for x in sorted(targets):
            w = targets[x]
            if w > 0:
                incoming[x].append((y, w / total))

    sp = {x: 1.0 for x in nodes}
    deltas: list[float] = []
    l1: list[float] = []
    for it in range(1, max_iter + 1):
        new = {x: (1.0 - epsilon) + epsilon * sum(sp[y] * c for y, c in incoming[x]) for x in nodes}
        changes = [abs(new[x] - sp[x]) for x in nodes]
        delta = max(changes)
        deltas.append(delta)
        l1.append(math.fsum(changes))
        sp = new
        if delta < tol:
            return sp, True, it, deltas, l1
    return sp, False, max_iter, deltas, l1


def social_position(
    group: Group,
    frame: Timeframe,
    epsilon: float = 0.85,
    tol: float = 1e-9,
    max_iter: int = 200,
    scope: str = "group",
) -> ImportanceMap:
    """Social position of each member by power iteration from SP = 1.

    ``scope="group"`` iterates over the group's induced subgraph;
    ``scope="frame"`` over the whole frame, restricted to members afterwards.
    A run that hits ``max_iter`` returns its last iterate with
    ``converged=False``.
    """
    if not group.members:
        raise InputError(f"group {group.group_id} is empty")
    if not 0 < epsilon < 1:
        raise InputError("epsilon must lie in (0, 1)")
    if tol <= 0 or max_iter < 1:
        raise InputError("tol must be positive and max_iter >= 1")
    if scope == "group":
        universe = group.members
    elif scope == "frame":
        universe = frame.nodes | group.members
    else:
        raise InputError(f"unknown importance scope {scope!r}")
    nodes = sorted(universe)
    scores, converged, iterations, deltas, l1 = _social_position_scores(
        nodes, _induced_out_edges(universe, frame), epsilon, tol, max_iter
    )
    return ImportanceMap(
        group.key,
        {x: scores[x] for x in sorted(group.members)},
        converged,
        iterations,
        tuple(deltas),
        tuple(l1),
    )


def degree_importance(group: Group, frame: Timeframe) -> ImportanceMap:
    """In-degree plus out-degree inside the group's induced subgraph (unweighted)."""
    if not group.members:
        raise InputError(f"group {group.group_id} is empty")
    degree = {x: 0 for x in sorted(group.members)}
    for (s, t) in frame.edges:
        if s in degree and t in degree and s != t:
            degree[s] += 1
            degree[t] += 1
    return ImportanceMap(group.key, {x: float(d) for x, d in degree.items()})


def uniform_importance(group: Group) -> ImportanceMap:
    return ImportanceMap(group.key, {x: 1.0 for x in sorted(group.members)})


def compute_importance(
    groups: Mapping[int, list[Group]],
    tsn: TemporalSocialNetwork | None,
    measure: str = "sp",
    epsilon: float = 0.85,
    tol: float = 1e-9,
    max_iter: int = 200,
    scope: str = "group",
) -> dict[GroupKey, ImportanceMap]:
    if measure not in MEASURES:
        raise InputError(f"unknown importance measure {measure!r}")
    frames = {f.index: f for f in tsn.frames} if tsn is not None else {}
    out: dict[GroupKey, ImportanceMap] = {}
    for f in sorted(groups):
        for g in groups[f]:
            if measure == "uniform":
                out[g.key] = uniform_importance(g)
                continue
            if f not in frames:
                raise InputError(f"no timeframe {f} for group {g.group_id}")
            if measure == "sp":
                out[g.key] = social_position(g, frames[f], epsilon, tol, max_iter, scope)
            else:
                out[g.key] = degree_importance(g, frames[f])
    return out


def format_importance(ni: Mapping[GroupKey, Mapping[str, float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["frame", "group_id", "node", "score"])
    for frame, gid in sorted(ni):
        scores = ni[(frame, gid)]
        for node in sorted(scores):
            writer.writerow([frame, gid, node, repr(float(scores[node]))])
    return buf.getvalue()


def write_importance(ni: Mapping[GroupKey, Mapping[str, float]], path: str | Path) -> None:
    Path(path).write_text(format_importance(ni), encoding="utf-8", newline="\n")


def read_importance(path: str | Path) -> dict[GroupKey, ImportanceMap]:
    scores: dict[GroupKey, dict[str, float]] = defaultdict(dict)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                score = float(row["score"])
                if not score >= 0:
                    raise ValueError(f"negative or NaN score for node {row['node']}")
                scores[(int(row["frame"]), row["group_id"])][row["node"]] = score
    except OSError as exc:
        raise InputError(f"cannot read importance file {path}: {exc}") from exc
    except (KeyError, ValueError) as exc:
        raise InputError(f"bad importance file {path}: {exc}") from exc
    return {key: ImportanceMap(key, dict(sorted(s.items()))) for key, s in scores.items()}
