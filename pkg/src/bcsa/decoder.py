"""Iterative peeling (successive interference cancellation) on a GraphView.

A singleton slot (exactly one not-yet-resolved known occupant) reveals its
occupant; resolving a user removes all of its edges from the visible
slots, which may create new singletons. The resolved set is independent
of the order in which singletons are processed, so the processing order
is only a reproducibility choice: lowest-numbered eligible slot first.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .graphs import GraphView

__all__ = ["DecodeOutcome", "peel"]


@dataclass(frozen=True)
class DecodeOutcome:
    """Result of one peeling run.

    order lists (slot, user) resolution events in processing order.
    residual_slots are the visible slots still carrying at least one
    unresolved known occupant when no singleton is left; slots emptied by
    peeling are not residual.
    """

    resolved: frozenset[int]
    order: tuple[tuple[int, int], ...]
    residual_slots: frozenset[int]


def peel(view: GraphView, *, rng=None, until: int | None = None) -> DecodeOutcome:
    """Peel a view until no singleton slot remains.

    rng, if given, picks a random eligible singleton at each step instead
    of the lowest-numbered one (used to exercise confluence). until, if
    given, stops as soon as that user is resolved; resolved/order/residual
    then describe the partial run.
    """
    remaining = {s: set(occ) for s, occ in view.edges.items()}
    slots_by_user: dict[int, list[int]] = {}
    for s, occ in remaining.items():
        for u in occ:
            slots_by_user.setdefault(u, []).append(s)

    candidates = [s for s, occ in remaining.items() if len(occ) == 1]
    if rng is None:
        heapq.heapify(candidates)
    resolved: set[int] = set()
    order: list[tuple[int, int]] = []

    while candidates:
        if rng is None:
            s = heapq.heappop(candidates)
        else:
            s = candidates.pop(int(rng.integers(len(candidates))))
        if len(remaining[s]) != 1:
            continue
        (user,) = remaining[s]
        resolved.add(user)
        order.append((s, user))
        for t in slots_by_user.get(user, ()):
            occ = remaining[t]
            occ.discard(user)
            if len(occ) == 1:
                if rng is None:
                    heapq.heappush(candidates, t)
                else:
                    candidates.append(t)
        if user == until:
            break

    residual = frozenset(s for s, occ in remaining.items() if occ)
    return DecodeOutcome(
        resolved=frozenset(resolved), order=tuple(order), residual_slots=residual
    )
