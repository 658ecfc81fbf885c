"""Synthetic temporal networks with planted group evolution.

A script lists, per frame, what happens to named groups::

    frames 6
    noise 0.0
    frame 0: form A 8
    frame 2: grow A 3
    frame 3: split A B C
    frame 4: merge D B C
    frame 5: dissolve D

A directive at frame n describes the transition from frame n-1 to n.  Live
groups without a directive continue unchanged.  ``split`` takes child names
with optional sizes (``B:5``); ``merge`` names the result first, then the
parents.  Fresh node ids come from one script-wide counter, so a node that
left never comes back.  With churn (``noise`` > 0) a group that a directive
would push below the minimum size is topped up with fresh nodes instead of
being rejected.
"""

from __future__ import annotations

import random
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .communities import Group
from .errors import InputError
from .ged import EventType, EvolutionEdge
from .oracle import oracle_evolution
from .tsn import DAY, Interaction

KINDS = ("form", "continue", "grow", "shrink", "split", "merge", "dissolve")
MIN_SIZE = 3


@dataclass(frozen=True)
class Directive:
    frame: int
    kind: str
    group: str
    args: tuple[str, ...] = ()


@dataclass
class EvolutionScript:
    frames: int
    directives: list[Directive] = field(default_factory=list)
    noise: float = 0.0
    seed: int = 0
    min_size: int = MIN_SIZE

    def __post_init__(self) -> None:
        if self.frames < 1:
            raise InputError("a script needs at least one frame")
        if not 0 <= self.noise < 1:
            raise InputError("noise must lie in [0, 1)")

    def render(self) -> str:
        lines = [f"frames {self.frames}", f"noise {self.noise!r}", f"seed {self.seed}"]
        for d in sorted(self.directives, key=lambda d: d.frame):
            lines.append(f"frame {d.frame}: {' '.join((d.kind, d.group, *d.args))}")
        return "\n".join(lines) + "\n"


def parse_script(text: str) -> EvolutionScript:
    frames = None
    noise = 0.0
    seed = 0
    min_size = MIN_SIZE
    directives = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("frame "):
                head, _, body = line.partition(":")
                frame = int(head.split()[1])
                parts = body.split()
                if len(parts) < 2 or parts[0] not in KINDS:
                    raise ValueError(f"expected '<event> <group> [args]', got {body.strip()!r}")
                directives.append(Directive(frame, parts[0], parts[1], tuple(parts[2:])))
            else:
                key, value = line.split(None, 1)
                if key == "frames":
                    frames = int(value)
                elif key == "noise":
                    noise = float(value)
                elif key == "seed":
                    seed = int(value)
                elif key == "min_size":
                    min_size = int(value)
                else:
                    raise ValueError(f"unknown setting {key!r}")
        except ValueError as exc:
            raise InputError(f"script line {lineno}: {exc}") from exc
    if frames is None:
        if not directives:
            raise InputError("empty script")
        frames = max(d.frame for d in directives) + 1
    return EvolutionScript(frames, directives, noise, seed, min_size)


def read_script(path: str | Path) -> EvolutionScript:
    try:
        return parse_script(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read script {path}: {exc}") from exc


@dataclass
class PlantedEvolution:
    script: EvolutionScript
    frames: list[dict[str, frozenset[str]]]
    truth: list[EvolutionEdge]

    @property
    def groups(self) -> dict[int, list[Group]]:
        return {
            f: [Group(f, name, members) for name, members in sorted(frame.items())]
            for f, frame in enumerate(self.frames)
        }

    def realized_truth(self, alpha: float = 0.5, beta: float = 0.5) -> list[EvolutionEdge]:
        """Events the rule oracle assigns to the realized memberships (uniform importance)."""
        return [
            EvolutionEdge((f, p) if p else None, (f + 1, q) if q else None, event)
            for f, p, q, event in sorted(
                oracle_evolution(self.frames, alpha, beta), key=lambda t: (t[0], t[1] or "", t[2] or "")
            )
        ]


def _split_sizes(args: tuple[str, ...], total: int) -> list[tuple[str, int]]:
    names, sizes = [], []
    for a in args:
        name, _, size = a.partition(":")
        names.append(name)
        sizes.append(int(size) if size else None)
    if len(names) < 2:
        raise InputError("split needs at least two children")
    known = sum(s for s in sizes if s is not None)
    free = [i for i, s in enumerate(sizes) if s is None]
    if free:
        rest = total - known
        base, extra = divmod(rest, len(free))
        for j, i in enumerate(free):
            sizes[i] = base + (1 if j < extra else 0)
    if sum(sizes) != total:
        raise InputError(f"split sizes {sizes} do not add up to the group size {total}")
    return list(zip(names, sizes))


def plant_memberships(script: EvolutionScript) -> PlantedEvolution:
    """Realize the script frame by frame and record the intended events."""
    counter = 0

    def fresh(n: int) -> list[str]:
        nonlocal counter
        out = [f"n{counter + i:05d}" for i in range(n)]
        counter += n
        return out

    by_frame: dict[int, list[Directive]] = {}
    for d in script.directives:
        if not 0 <= d.frame < script.frames:
            raise InputError(f"directive at frame {d.frame} outside 0..{script.frames - 1}")
        if d.frame == 0 and d.kind != "form":
            raise InputError("only 'form' is allowed at frame 0")
        by_frame.setdefault(d.frame, []).append(d)

    frames: list[dict[str, frozenset[str]]] = []
    truth: list[EvolutionEdge] = []
    live: dict[str, list[str]] = {}
    for f in range(script.frames):
        prev = {name: list(m) for name, m in live.items()}
        nxt: dict[str, list[str]] = {}
        touched: set[str] = set()
        formed: set[str] = set()
        events: list[tuple[str | None, str | None, EventType]] = []

        def need(name: str, d: Directive) -> list[str]:
            if name not in prev:
                raise InputError(f"frame {d.frame}: group {name!r} is not alive")
            if name in touched:
                raise InputError(f"frame {d.frame}: group {name!r} already has a directive")
            touched.add(name)
            return prev[name]

        def place(name: str, members: list[str], d: Directive) -> None:
            if name in nxt:
                raise InputError(f"frame {d.frame}: group name {name!r} used twice")
            if len(members) < script.min_size and script.noise > 0:
                # churn may have drifted sizes away from what the script assumed
                members = members + fresh(script.min_size - len(members))
            if len(members) < script.min_size:
                raise InputError(f"frame {d.frame}: group {name!r} would have {len(members)} < {script.min_size} members")
            nxt[name] = members

        for d in by_frame.get(f, []):
            if d.kind == "form":
                if d.group in prev and d.group not in touched:
                    raise InputError(f"frame {d.frame}: group {d.group!r} already exists")
                size = int(d.args[0]) if d.args else 8
                place(d.group, fresh(size), d)
                formed.add(d.group)
                if f > 0:
                    events.append((None, d.group, EventType.FORMING))
            elif d.kind == "continue":
                place(d.group, list(need(d.group, d)), d)
                events.append((d.group, d.group, EventType.CONTINUING))
            elif d.kind == "grow":
                members = need(d.group, d)
                place(d.group, members + fresh(int(d.args[0]) if d.args else 1), d)
                events.append((d.group, d.group, EventType.GROWING))
            elif d.kind == "shrink":
                members = need(d.group, d)
                drop = int(d.args[0]) if d.args else 1
                place(d.group, sorted(members)[: max(len(members) - drop, 0)], d)
                events.append((d.group, d.group, EventType.SHRINKING))
            elif d.kind == "split":
                members = sorted(need(d.group, d))
                start = 0
                for name, size in _split_sizes(d.args, len(members)):
                    place(name, members[start : start + size], d)
                    start += size
                    events.append((d.group, name, EventType.SPLITTING))
            elif d.kind == "merge":
                if len(d.args) < 2:
                    raise InputError(f"frame {d.frame}: merge needs at least two parents")
                union: list[str] = []
                for parent in d.args:
                    union.extend(need(parent, d))
                place(d.group, sorted(set(union)), d)
                for parent in d.args:
                    events.append((parent, d.group, EventType.MERGING))
            elif d.kind == "dissolve":
                need(d.group, d)
                events.append((d.group, None, EventType.DISSOLVING))

        for name in sorted(prev):
            if name not in touched:
                if name in nxt:
                    raise InputError(f"frame {f}: group name {name!r} is still alive")
                nxt[name] = list(prev[name])
                events.append((name, name, EventType.CONTINUING))

        if script.noise > 0 and f > 0:
            rng = np.random.default_rng(np.random.SeedSequence([script.seed & (2**63 - 1), f]))
            for name in sorted(nxt):
                if name in formed:
                    continue
                members = sorted(nxt[name])
                leave = rng.random(len(members)) < script.noise
                n_join = int(rng.binomial(len(members), script.noise))
                allowed = len(members) + n_join - script.min_size
                kept, dropped = [], 0
                for m, out in zip(members, leave):
                    if out and dropped < allowed:
                        dropped += 1
                    else:
                        kept.append(m)
                nxt[name] = kept + fresh(n_join)

        live = nxt
        frames.append({name: frozenset(m) for name, m in sorted(nxt.items())})
        for src, dst, event in events:
            truth.append(EvolutionEdge((f - 1, src) if src else None, (f, dst) if dst else None, event))

    truth.sort(key=EvolutionEdge.sort_key)
    return PlantedEvolution(script, frames, truth)


def emit_edges(
    groups: Mapping[int, list[Group]] | list[Mapping[str, frozenset[str]]],
    p_intra: float,
    p_inter: float,
    seed: int = 0,
    frame_len: int = 30 * DAY,
    origin: int = 0,
) -> list[Interaction]:
    """Random interactions realizing the planted groups.

    In frame f (interval ``[origin + f*frame_len, origin + (f+1)*frame_len)``)
    each pair of nodes sharing a group interacts with probability ``p_intra``,
    every other pair of the frame's nodes with probability ``p_inter``.  An
    interacting pair yields one unit-weight interaction in each direction at
    a uniform integer timestamp of the frame.
    """
    if not 0 <= p_inter < p_intra <= 1 and not (p_intra == 0 and p_inter == 0):
        raise InputError("need 0 <= p_inter < p_intra <= 1")
    if isinstance(groups, Mapping):
        frames = [{g.group_id: g.members for g in groups[f]} for f in sorted(groups)]
    else:
        frames = list(groups)
    out: list[Interaction] = []
    for f, frame in enumerate(frames):
        nodes = sorted(set().union(*frame.values())) if frame else []
        if len(nodes) < 2:
            continue
        pos = {n: i for i, n in enumerate(nodes)}
        n = len(nodes)
        same = np.zeros((n, n), dtype=bool)
        for members in frame.values():
            idx = np.array(sorted(pos[m] for m in members))
            same[np.ix_(idx, idx)] = True
        iu, ju = np.triu_indices(n, 1)
        prob = np.where(same[iu, ju], p_intra, p_inter)
        rng = np.random.default_rng(np.random.SeedSequence([seed & (2**63 - 1), 1, f]))
        hit = np.flatnonzero(rng.random(len(iu)) < prob)
        stamps = origin + f * frame_len + rng.integers(0, frame_len, size=len(hit))
        for h, ts in zip(hit, stamps):
            a, b = nodes[iu[h]], nodes[ju[h]]
            out.append(Interaction(a, b, int(ts), 1.0))
            out.append(Interaction(b, a, int(ts), 1.0))
    return out


def format_interactions(interactions: list[Interaction]) -> str:
    lines = ["source,target,timestamp,weight"]
    for it in interactions:
        ts = it.timestamp if isinstance(it.timestamp, int) else repr(it.timestamp)
        lines.append(f"{it.source},{it.target},{ts},{it.weight!r}")
    return "\n".join(lines) + "\n"


def lifecycle_script(
    n_groups: int = 20,
    frames: int = 20,
    noise: float = 0.0,
    seed: int = 0,
    initial: int | None = None,
    step: int = 3,
) -> EvolutionScript:
    """A script in which every group runs through a size-driven life cycle.

    Groups start small and grow by ``step`` members per frame up to a random
    peak, hold for two frames, then split in halves if they reached twelve
    members or else decline by ``step`` members per frame until they dissolve
    at five members or fewer.
    Pairs of small declining groups sometimes merge.  New groups keep forming
    until ``n_groups`` have been born (split and merge products not counted).
    """
    rng = random.Random(seed)
    initial = initial if initial is not None else max(1, n_groups // 3)
    directives: list[Directive] = []
    state: dict[str, dict] = {}
    created = 0
    births = 0

    def new_name() -> str:
        nonlocal created
        created += 1
        return f"G{created:03d}"

    def born(f: int) -> None:
        nonlocal births
        births += 1
        name = new_name()
        size = rng.randint(4, 6)
        directives.append(Directive(f, "form", name, (str(size),)))
        state[name] = {"size": size, "phase": "rise", "peak": rng.randint(10, 14), "hold": 0}

    for _ in range(min(initial, n_groups)):
        born(0)
    remaining_frames = max(frames - 1, 1)
    for f in range(1, frames):
        names = sorted(state)
        declining = [n for n in names if state[n]["phase"] == "decline" and 5 <= state[n]["size"] <= 7]
        if len(declining) >= 2 and rng.random() < 0.3:
            a, b = declining[0], declining[1]
            child = new_name()
            directives.append(Directive(f, "merge", child, (a, b)))
            size = state[a]["size"] + state[b]["size"]
            del state[a], state[b]
            state[child] = {"size": size, "phase": "hold", "peak": size, "hold": 1}
            names = [n for n in names if n not in (a, b)]
        for name in names:
            s = state[name]
            if s["phase"] == "rise":
                if s["size"] >= s["peak"]:
                    s["phase"], s["hold"] = "hold", 1
                    directives.append(Directive(f, "continue", name))
                else:
                    s["size"] += step
                    directives.append(Directive(f, "grow", name, (str(step),)))
            elif s["phase"] == "hold":
                if s["hold"] > 0:
                    s["hold"] -= 1
                    directives.append(Directive(f, "continue", name))
                elif s["size"] >= 12:
                    left, right = new_name(), new_name()
                    half = s["size"] // 2
                    # same rounding as the planter: the first child takes the odd member
                    children = ((left, s["size"] - half), (right, half))
                    directives.append(Directive(f, "split", name, (left, right)))
                    del state[name]
                    for child, size in children:
                        state[child] = {"size": size, "phase": "decline", "peak": size, "hold": 0}
                else:
                    s["phase"] = "decline"
                    drop = min(step, s["size"] - 3)
                    s["size"] -= drop
                    directives.append(Directive(f, "shrink", name, (str(drop),)))
            else:
                if s["size"] <= 5:
                    directives.append(Directive(f, "dissolve", name))
                    del state[name]
                else:
                    drop = min(step, s["size"] - 3)
                    s["size"] -= drop
                    directives.append(Directive(f, "shrink", name, (str(drop),)))
        births_left = n_groups - births
        if births_left > 0 and f < frames - 1:
            per_frame = -(-births_left // max(remaining_frames - f, 1))
            for _ in range(min(per_frame, births_left)):
                born(f)
    return EvolutionScript(frames, directives, noise, seed)
