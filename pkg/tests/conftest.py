from __future__ import annotations

import sys
from pathlib import Path

import pytest

from groupevo.communities import Group
from groupevo.tsn import Timeframe

sys.path.insert(0, str(Path(__file__).parent))


def make_frame(edges, index=0, start=0.0, end=1.0, symmetric=False) -> Timeframe:
    """Timeframe from (u, v) or (u, v, w) tuples."""
    agg: dict[tuple[str, str], float] = {}
    for e in edges:
        u, v = e[0], e[1]
        w = e[2] if len(e) > 2 else 1.0
        pairs = [(u, v), (v, u)] if symmetric else [(u, v)]
        for p in pairs:
            agg[p] = agg.get(p, 0.0) + w
    nodes = frozenset(n for p in agg for n in p)
    return Timeframe(index, start, end, nodes, dict(sorted(agg.items())))


def make_group(members, frame=0, gid=None) -> Group:
    members = frozenset(members)
    return Group(frame, gid or "".join(sorted(members)), members)


@pytest.fixture
def frame_factory():
    return make_frame


# criterion name -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in ACCEPTANCE.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
