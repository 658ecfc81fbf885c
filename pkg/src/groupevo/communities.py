"""Overlapping community detection by k-clique percolation.

A k-clique community is the union of all k-cliques that can be reached from
each other through a chain of k-cliques sharing k-1 nodes (Palla et al. 2005,
the method behind CFinder).  Communities are found here from maximal cliques:
two maximal cliques of size >= k belong to the same community iff they are
linked by a chain of maximal cliques pairwise sharing at least k-1 nodes.
"""

from __future__ import annotations

import csv
import io
import logging
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import InputError
from .tsn import TemporalSocialNetwork, Timeframe

logger = logging.getLogger(__name__)

GroupKey = tuple[int, str]


@dataclass(frozen=True)
class Group:
    frame_index: int
    group_id: str
    members: frozenset[str]

    @property
    def key(self) -> GroupKey:
        return (self.frame_index, self.group_id)

    def __len__(self) -> int:
        return len(self.members)


def undirected_adjacency(frame: Timeframe, min_weight: float | None = None) -> dict[str, set[str]]:
    """Symmetrize a frame: u-v is an edge if either direction is present.

    With ``min_weight`` only directed edges of weight >= min_weight count.
    """
    adj: dict[str, set[str]] = defaultdict(set)
    for (s, t), w in frame.edges.items():
        if s == t or (min_weight is not None and w < min_weight):
            continue
        adj[s].add(t)
        adj[t].add(s)
    return dict(adj)


def _bron_kerbosch(adj: Mapping[str, set[str]]) -> Iterable[frozenset[str]]:
    # iterative Bron-Kerbosch with Tomita pivoting
    nodes = set(adj)
    stack = [(set(), nodes, set())]
    while stack:
        r, p, x = stack.pop()
        if not p and not x:
            if len(r) >= 2:
                yield frozenset(r)
            continue
        pivot = max(p | x, key=lambda u: (len(adj[u] & p), u))
        for v in sorted(p - adj[pivot]):
            stack.append((r | {v}, p & adj[v], x & adj[v]))
            p = p - {v}
            x = x | {v}


def _sort_key(members: Iterable[str]) -> list[str]:
    return sorted(members)


def maximal_cliques(frame: Timeframe | Mapping[str, set[str]], min_weight: float | None = None) -> list[frozenset[str]]:
    """All maximal cliques (size >= 2) of the symmetrized frame, sorted
    lexicographically by their sorted member lists."""
    adj = frame if isinstance(frame, Mapping) else undirected_adjacency(frame, min_weight)
    return sorted(_bron_kerbosch(adj), key=_sort_key)


def percolate(cliques: Iterable[frozenset[str]], k: int) -> list[frozenset[str]]:
    """Union-find over cliques of size >= k that share at least k-1 nodes."""
    big = [c for c in cliques if len(c) >= k]
    parent = list(range(len(big)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    by_node: dict[str, list[int]] = defaultdict(list)
    for i, c in enumerate(big):
        for node in c:
            by_node[node].append(i)
    for i, c in enumerate(big):
        shared: dict[int, int] = defaultdict(int)
        for node in c:
            for j in by_node[node]:
                if j > i:
                    shared[j] += 1
        for j, n in shared.items():
            if n >= k - 1:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    comps: dict[int, set[str]] = defaultdict(set)
    for i, c in enumerate(big):
        comps[find(i)].update(c)
    return sorted((frozenset(m) for m in comps.values()), key=_sort_key)


def group_id(frame_index: int, rank: int) -> str:
    return f"{frame_index}:{rank:04d}"


def cpm_communities(frame: Timeframe, k: int = 3, min_weight: float | None = None) -> list[Group]:
    if k < 3:
        raise InputError(f"clique size k must be >= 3, got {k}")
    communities = percolate(maximal_cliques(frame, min_weight), k)
    return [Group(frame.index, group_id(frame.index, r), m) for r, m in enumerate(communities)]


def detect(tsn: TemporalSocialNetwork, k: int = 3, min_weight: float | None = None) -> dict[int, list[Group]]:
    return {frame.index: cpm_communities(frame, k, min_weight) for frame in tsn.frames}


def all_groups(groups: Mapping[int, list[Group]]) -> list[Group]:
    return [g for f in sorted(groups) for g in groups[f]]


def format_groups(groups: Mapping[int, list[Group]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["frame", "group_id", "node"])
    for g in all_groups(groups):
        for node in sorted(g.members):
            writer.writerow([g.frame_index, g.group_id, node])
    return buf.getvalue()


def write_groups(groups: Mapping[int, list[Group]], path: str | Path) -> None:
    Path(path).write_text(format_groups(groups), encoding="utf-8", newline="\n")


def read_groups(path: str | Path, n_frames: int | None = None) -> dict[int, list[Group]]:
    """Load a ``frame,group_id,node`` membership file.

    Groups with identical member sets inside one frame are collapsed onto the
    first id seen, with a warning.  ``n_frames`` pads the result with empty
    frames so that frames without groups are still represented.
    """
    members: dict[GroupKey, set[str]] = {}
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            missing = {"frame", "group_id", "node"} - set(reader.fieldnames or [])
            if missing:
                raise InputError(f"{path}: missing column(s) {sorted(missing)}")
            for row in reader:
                key = (int(row["frame"]), row["group_id"])
                members.setdefault(key, set()).add(row["node"])
    except OSError as exc:
        raise InputError(f"cannot read groups file {path}: {exc}") from exc
    except ValueError as exc:
        raise InputError(f"bad groups file {path}: {exc}") from exc

    out: dict[int, list[Group]] = defaultdict(list)
    seen: dict[tuple[int, frozenset[str]], str] = {}
    for (frame, gid), nodes in members.items():
        fs = frozenset(nodes)
        if (frame, fs) in seen:
            logger.warning("frame %d: group %s duplicates %s; dropped", frame, gid, seen[(frame, fs)])
            continue
        seen[(frame, fs)] = gid
        out[frame].append(Group(frame, gid, fs))
    if n_frames is not None:
        for f in range(n_frames):
            out.setdefault(f, [])
    elif out:
        for f in range(max(out) + 1):
            out.setdefault(f, [])
    return {f: sorted(out[f], key=lambda g: g.group_id) for f in sorted(out)}
