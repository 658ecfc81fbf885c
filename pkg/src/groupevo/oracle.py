"""Literal, table-driven transcription of the GED event rules.

Kept deliberately separate from :mod:`groupevo.ged` (it imports nothing from
it except the event names) so that it can serve as an independent reference:
every rule is written out clause by clause, all firing rules are collected,
and only then is the equal-size ambiguity resolved.  It also derives ground
truth for noisy synthetic scripts from realized memberships with uniform
importance.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from .ged import EventType

C, S, G, SP, M = (
    EventType.CONTINUING,
    EventType.SHRINKING,
    EventType.GROWING,
    EventType.SPLITTING,
    EventType.MERGING,
)


def firing_rules(i12, i21, n1, n2, fwd_matches, bwd_matches, alpha, beta) -> set[EventType]:
    """Every pair event whose guard holds, with no disambiguation."""
    one_next = fwd_matches == 1
    many_next = fwd_matches > 1
    one_prev = bwd_matches == 1
    many_prev = bwd_matches > 1
    hits = set()
    # a
    if i12 >= alpha and i21 >= beta and n1 == n2:
        hits.add(C)
    # b
    if (i12 >= alpha and i21 >= beta and n1 > n2) or (
        ((i12 < alpha and i21 >= beta and n1 >= n2) or (i12 >= alpha and i21 < beta and n1 >= n2)) and one_next
    ):
        hits.add(S)
    # c
    if (i12 >= alpha and i21 >= beta and n1 < n2) or (
        ((i12 >= alpha and i21 < beta and n1 <= n2) or (i12 < alpha and i21 >= beta and n1 <= n2)) and one_prev
    ):
        hits.add(G)
    # d
    if ((i12 < alpha and i21 >= beta and n1 >= n2) or (i12 >= alpha and i21 < beta and n1 >= n2)) and many_next:
        hits.add(SP)
    # e
    if ((i12 >= alpha and i21 < beta and n1 <= n2) or (i12 < alpha and i21 >= beta and n1 <= n2)) and many_prev:
        hits.add(M)
    return hits


def resolve(hits: set[EventType], i12: float, alpha: float) -> EventType | None:
    """Pick one event when rules b-e both fire (only possible for equal sizes).

    A failing forward inclusion (i12 < alpha) favours the forward-looking
    events shrinking/splitting, otherwise growing/merging win.
    """
    if not hits:
        return None
    if len(hits) == 1:
        return next(iter(hits))
    forward_side = hits & {S, SP}
    backward_side = hits & {G, M}
    preferred, other = (forward_side, backward_side) if i12 < alpha else (backward_side, forward_side)
    (event,) = preferred or other
    return event


def oracle_event(i12, i21, n1, n2, fwd_matches, bwd_matches, alpha, beta) -> EventType | None:
    return resolve(firing_rules(i12, i21, n1, n2, fwd_matches, bwd_matches, alpha, beta), i12, alpha)


def uniform_inclusion(a: frozenset[str], b: frozenset[str]) -> float:
    frac = len(a & b) / len(a)
    return frac * frac


def oracle_transitions(
    groups_i: Mapping[str, frozenset[str]],
    groups_next: Mapping[str, frozenset[str]],
    alpha: float,
    beta: float,
    floor: float = 0.10,
) -> set[tuple[str | None, str | None, EventType]]:
    """Events between two frames of named groups under uniform importance.

    Returns ``(from_name, to_name, event)`` triples; Dissolving has
    ``to_name=None`` and Forming ``from_name=None``.
    """
    inc = {
        (p, q): (uniform_inclusion(a, b), uniform_inclusion(b, a))
        for p, a in groups_i.items()
        for q, b in groups_next.items()
    }

    def matched(p, q):
        i12, i21 = inc[(p, q)]
        return i12 >= alpha or i21 >= beta

    out = set()
    for (p, q), (i12, i21) in inc.items():
        nf = sum(matched(p, r) for r in groups_next)
        nb = sum(matched(r, q) for r in groups_i)
        event = oracle_event(i12, i21, len(groups_i[p]), len(groups_next[q]), nf, nb, alpha, beta)
        if event is not None:
            out.add((p, q, event))
    for p in groups_i:
        if all(inc[(p, q)][0] < floor and inc[(p, q)][1] < floor for q in groups_next):
            out.add((p, None, EventType.DISSOLVING))
    for q in groups_next:
        if all(inc[(p, q)][0] < floor and inc[(p, q)][1] < floor for p in groups_i):
            out.add((None, q, EventType.FORMING))
    return out


def oracle_evolution(
    frames: Sequence[Mapping[str, frozenset[str]]], alpha: float, beta: float
) -> set[tuple[int, str | None, str | None, EventType]]:
    """``(earlier_frame, from, to, event)`` for every consecutive frame pair."""
    out = set()
    for f in range(len(frames) - 1):
        for p, q, e in oracle_transitions(frames[f], frames[f + 1], alpha, beta):
            out.add((f, p, q, e))
    return out
