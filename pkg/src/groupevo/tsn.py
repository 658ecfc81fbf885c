"""Interaction logs and their slicing into a temporal social network.

A temporal social network is an ordered list of timeframes; each timeframe is a
directed weighted graph built from the interactions whose timestamp falls into
its half-open interval ``[start, end)``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Iterable

from .errors import InputError

logger = logging.getLogger(__name__)

DAY = 86400

REQUIRED_COLUMNS = ("source", "target", "timestamp")


@dataclass(frozen=True)
class Interaction:
    source: str
    target: str
    timestamp: float
    weight: float = 1.0


@dataclass(frozen=True)
class Timeframe:
    index: int
    start: float
    end: float
    nodes: frozenset[str]
    edges: dict[tuple[str, str], float] = field(hash=False, compare=True)

    def total_weight(self) -> float:
        return math.fsum(self.edges.values())


@dataclass(frozen=True)
class TemporalSocialNetwork:
    frames: tuple[Timeframe, ...]
    window_len: float
    overlap: float

    def __len__(self) -> int:
        return len(self.frames)

    def __getitem__(self, k: int) -> Timeframe:
        return self.frames[k]

    def __iter__(self):
        return iter(self.frames)


@dataclass
class LogFormat:
    """Column layout of an interaction log.

    ``columns`` gives the column order when the file has no header.  With
    ``header=None`` the first row is treated as a header when it names the
    required columns.
    """

    delimiter: str | None = None
    header: bool | None = None
    columns: tuple[str, ...] = ("source", "target", "timestamp", "weight")
    max_errors: int = 0


@dataclass
class ParsedLog:
    interactions: list[Interaction]
    self_loops: int = 0
    malformed: list[tuple[int, str]] = field(default_factory=list)


def parse_timestamp(text: str) -> float:
    """Integer (or decimal) epoch seconds, or an ISO-8601 date/time (UTC if naive)."""
    text = text.strip()
    try:
        value = float(text)
    except ValueError:
        pass
    else:
        if not math.isfinite(value):
            raise ValueError(f"non-finite timestamp {text!r}")
        return int(value) if value.is_integer() else value
    iso = text[:-1] + "+00:00" if text.endswith(("Z", "z")) else text
    try:
        dt = datetime.fromisoformat(iso)
    except ValueError:
        raise ValueError(f"unparseable timestamp {text!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    ts = dt.timestamp()
    return int(ts) if ts.is_integer() else ts


def _sniff_delimiter(line: str) -> str:
    return "\t" if "\t" in line and "," not in line else ","


def parse_interactions(stream: IO[bytes] | IO[str] | bytes | str, fmt: LogFormat | None = None) -> ParsedLog:
    """Parse a delimiter-separated interaction log.

    Rows are returned in input order.  Self-loops are dropped and counted.
    Malformed rows are skipped and reported with their 1-based line number;
    once more than ``fmt.max_errors`` of them are seen an :class:`InputError`
    listing them is raised.
    """
    fmt = fmt or LogFormat()
    try:
        if isinstance(stream, bytes):
            text = stream.decode("utf-8")
        elif isinstance(stream, str):
            text = stream
        else:
            raw = stream.read()
            text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read interaction log: {exc}") from exc

    lines = text.splitlines()
    first = next((ln for ln in lines if ln.strip()), "")
    delimiter = fmt.delimiter or _sniff_delimiter(first)
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)

    columns = list(fmt.columns)
    result = ParsedLog([])
    header_seen = False
    index: dict[str, int] = {}

    def fail(lineno: int, msg: str) -> None:
        result.malformed.append((lineno, msg))
        if len(result.malformed) > fmt.max_errors:
            details = "; ".join(f"line {n}: {m}" for n, m in result.malformed)
            raise InputError(f"too many malformed rows ({len(result.malformed)}): {details}")

    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        cells = [c.strip() for c in row]
        if not header_seen:
            header_seen = True
            lowered = [c.lower() for c in cells]
            looks_like_header = any(name in lowered for name in (*REQUIRED_COLUMNS, "weight"))
            if fmt.header or (fmt.header is None and looks_like_header):
                missing = [name for name in REQUIRED_COLUMNS if name not in lowered]
                if missing:
                    raise InputError(f"missing required column(s): {', '.join(missing)}")
                index = {name: lowered.index(name) for name in lowered if name in (*REQUIRED_COLUMNS, "weight")}
                continue
            index = {name: i for i, name in enumerate(columns)}
            if any(name not in index for name in REQUIRED_COLUMNS):
                raise InputError("declared column order lacks source/target/timestamp")
        needed = max(index[name] for name in REQUIRED_COLUMNS)
        if len(cells) <= needed:
            fail(lineno, f"expected at least {needed + 1} columns, got {len(cells)}")
            continue
        source, target = cells[index["source"]], cells[index["target"]]
        if not source or not target:
            fail(lineno, "empty node id")
            continue
        try:
            ts = parse_timestamp(cells[index["timestamp"]])
        except ValueError as exc:
            fail(lineno, str(exc))
            continue
        weight = 1.0
        wi = index.get("weight")
        if wi is not None and wi < len(cells) and cells[wi] != "":
            try:
                weight = float(cells[wi])
            except ValueError:
                fail(lineno, f"bad weight {cells[wi]!r}")
                continue
            if not math.isfinite(weight) or weight < 0:
                fail(lineno, f"weight must be finite and non-negative, got {cells[wi]!r}")
                continue
        if source == target:
            result.self_loops += 1
            continue
        result.interactions.append(Interaction(source, target, ts, weight))

    if result.self_loops:
        logger.info("dropped %d self-loop(s)", result.self_loops)
    return result


def read_interactions(path: str | Path, fmt: LogFormat | None = None) -> ParsedLog:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read interaction log {path}: {exc}") from exc
    return parse_interactions(data, fmt)


def window(
    interactions: Iterable[Interaction],
    window_len: float,
    overlap: float = 0,
    origin: float | None = None,
) -> TemporalSocialNetwork:
    """Slice interactions into consecutive, possibly overlapping timeframes.

    Frame ``k`` covers ``[origin + k*step, origin + k*step + window_len)`` with
    ``step = window_len - overlap``.  Frames are emitted until one covers the
    last timestamp.  Interactions before ``origin`` are ignored.
    """
    interactions = list(interactions)
    if window_len <= 0:
        raise InputError("window length must be positive")
    if not 0 <= overlap < window_len:
        raise InputError("overlap must satisfy 0 <= overlap < window length")
    if not interactions:
        raise InputError("cannot window an empty interaction list")
    if origin is None:
        origin = min(it.timestamp for it in interactions)
    last = max(it.timestamp for it in interactions)
    step = window_len - overlap

    n_frames = 1
    while origin + (n_frames - 1) * step + window_len <= last:
        n_frames += 1

    buckets: list[dict[tuple[str, str], float]] = [{} for _ in range(n_frames)]
    for it in interactions:
        offset = it.timestamp - origin
        if offset < 0:
            continue
        # frames k with k*step <= offset < k*step + window_len
        hi = min(int(offset // step), n_frames - 1)
        k = hi
        while k >= 0 and offset < k * step + window_len:
            if offset >= k * step:
                edges = buckets[k]
                key = (it.source, it.target)
                edges[key] = edges.get(key, 0.0) + it.weight
            k -= 1

    frames = []
    for k, edges in enumerate(buckets):
        nodes = frozenset(n for pair in edges for n in pair)
        start = origin + k * step
        frames.append(Timeframe(k, start, start + window_len, nodes, dict(sorted(edges.items()))))
    return TemporalSocialNetwork(tuple(frames), window_len, overlap)


def write_frames(tsn: TemporalSocialNetwork, out_dir: str | Path) -> list[Path]:
    """Write ``frame_<k>.csv`` edge lists plus a ``frames.json`` manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    entries = []
    for frame in tsn.frames:
        name = f"frame_{frame.index}.csv"
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["source", "target", "weight"])
        for (s, t), w in sorted(frame.edges.items()):
            writer.writerow([s, t, repr(float(w))])
        (out / name).write_text(buf.getvalue(), encoding="utf-8", newline="\n")
        written.append(out / name)
        entries.append({"index": frame.index, "start": frame.start, "end": frame.end, "file": name})
    manifest = {"window_len": tsn.window_len, "overlap": tsn.overlap, "frames": entries}
    (out / "frames.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8", newline="\n")
    written.append(out / "frames.json")
    return written


def read_frames(frames_dir: str | Path) -> TemporalSocialNetwork:
    base = Path(frames_dir)
    try:
        manifest = json.loads((base / "frames.json").read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read frame manifest in {base}: {exc}") from exc
    frames = []
    for entry in manifest["frames"]:
        edges: dict[tuple[str, str], float] = {}
        try:
            with open(base / entry["file"], newline="", encoding="utf-8") as fh:
                for row in csv.DictReader(fh):
                    edges[(row["source"], row["target"])] = float(row["weight"])
        except (OSError, KeyError, ValueError) as exc:
            raise InputError(f"bad frame file {entry['file']}: {exc}") from exc
        nodes = frozenset(n for pair in edges for n in pair)
        frames.append(Timeframe(int(entry["index"]), entry["start"], entry["end"], nodes, edges))
    frames.sort(key=lambda f: f.index)
    return TemporalSocialNetwork(tuple(frames), manifest["window_len"], manifest["overlap"])
