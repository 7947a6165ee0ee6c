"""Frame graphs and receiver-induced views.

A frame is a bipartite graph between users and slots: each user transmits
copies of one packet in a set of distinct slots. A receiver embedded in
the frame is half-duplex, so its own transmission slots are invisible to
it; ``induced_view`` captures exactly what a given receiver can hear.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import fill_slot_choices
from .distributions import DegreeDistribution

__all__ = ["FrameGraph", "GraphView", "generate_frame", "induced_view", "sample_frame_arrays"]


@dataclass(frozen=True)
class FrameGraph:
    """Ground-truth user/slot graph of one frame.

    slots_of[u] is user u's transmission slot set; users_in[s] is the
    inverse index. Ids are dense integers from 0. Immutable.
    """

    n_slots: int
    slots_of: tuple[frozenset[int], ...]
    users_in: tuple[frozenset[int], ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.n_slots < 0:
            raise ValueError("n_slots must be non-negative")
        slots_of = tuple(frozenset(s) for s in self.slots_of)
        for u, slots in enumerate(slots_of):
            for s in slots:
                if not 0 <= s < self.n_slots:
                    raise ValueError(f"user {u} slot {s} outside [0, {self.n_slots})")
        inverse = [set() for _ in range(self.n_slots)]
        for u, slots in enumerate(slots_of):
            for s in slots:
                inverse[s].add(u)
        users_in = tuple(frozenset(occ) for occ in inverse)
        if self.users_in is not None and tuple(self.users_in) != users_in:
            raise ValueError("users_in does not invert slots_of")
        object.__setattr__(self, "slots_of", slots_of)
        object.__setattr__(self, "users_in", users_in)

    @property
    def n_users(self) -> int:
        return len(self.slots_of)

    def degree(self, u: int) -> int:
        return len(self.slots_of[u])


@dataclass(frozen=True)
class GraphView:
    """What one receiver works with: visible slots and their known occupants.

    edges has exactly one entry per visible slot (possibly an empty set).
    self_user identifies the viewpoint owner when the owner's own edges
    are part of the view (reconstructions); it is None for plain induced
    views, where the owner is absent entirely.
    """

    n_slots: int
    edges: dict[int, frozenset[int]]
    self_user: int | None = None

    def __post_init__(self):
        for s in self.edges:
            if not 0 <= s < self.n_slots:
                raise ValueError(f"visible slot {s} outside [0, {self.n_slots})")

    @property
    def visible_slots(self) -> frozenset[int]:
        return frozenset(self.edges)

    def users(self) -> frozenset[int]:
        """All users appearing as edge endpoints."""
        out: set[int] = set()
        for occ in self.edges.values():
            out |= occ
        return frozenset(out)


def sample_frame_arrays(m: int, n: int, dist: DegreeDistribution, rand) -> tuple:
    """Draw one frame's degrees and slot sets as flat arrays.

    Returns (deg, uoff, uslots) in the CSR layout the kernels use. The
    randomness source is a numpy Generator; degrees come from one uniform
    draw per user through the distribution's cdf, slot subsets from a
    partial shuffle consuming one uniform per edge, so a frame's content
    is a pure function of the generator state.
    """
    if n < dist.max_degree:
        raise ValueError(f"n={n} smaller than max degree q={dist.max_degree}")
    if m < 0:
        raise ValueError("m must be non-negative")
    cdf = np.asarray(dist.cdf())
    deg = np.minimum(
        np.searchsorted(cdf, rand.random(m), side="right"), dist.max_degree
    ).astype(np.int64)
    uoff = np.zeros(m + 1, np.int64)
    np.cumsum(deg, out=uoff[1:])
    uslots = np.empty(int(uoff[-1]), np.int64)
    uniforms = rand.random(int(uoff[-1]))
    perm = np.empty(n, np.int64)
    fill_slot_choices(n, deg, uoff, uniforms, uslots, perm)
    return deg, uoff, uslots


def generate_frame(m: int, n: int, dist: DegreeDistribution, rand) -> FrameGraph:
    """Generate a frame: each user draws a degree from dist and picks that
    many distinct slots uniformly at random (uniform over all C(n,l)
    subsets)."""
    deg, uoff, uslots = sample_frame_arrays(m, n, dist, rand)
    slots_of = tuple(
        frozenset(int(s) for s in uslots[uoff[u] : uoff[u + 1]]) for u in range(m)
    )
    return FrameGraph(n_slots=n, slots_of=slots_of)


def induced_view(G: FrameGraph, u: int | None, mode: str = "broadcast") -> GraphView:
    """The frame as seen by a receiver.

    broadcast: receiver u is a user inside the frame; its own transmission
    slots are erased and u never appears as an occupant. unicast: an
    exterior receiver (classical base station) that hears every slot; u is
    ignored and may be None.
    """
    if mode == "unicast":
        edges = {s: G.users_in[s] for s in range(G.n_slots)}
        return GraphView(n_slots=G.n_slots, edges=edges)
    if mode != "broadcast":
        raise ValueError(f"unknown mode {mode!r}")
    if u is None or not 0 <= u < G.n_users:
        raise ValueError(f"unknown user id {u!r}")
    own = G.slots_of[u]
    edges = {s: G.users_in[s] for s in range(G.n_slots) if s not in own}
    return GraphView(n_slots=G.n_slots, edges=edges)
