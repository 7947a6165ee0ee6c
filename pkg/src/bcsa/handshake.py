"""The probabilistic handshake between pairs of in-frame receivers.

After decoding its induced view, a receiver rebuilds its best guess of
the full frame graph: resolved peers' edges are known everywhere (copy
pointers reveal full slot sets), slots left with unresolved interference
are discarded as unusable, and the receiver re-inserts itself with its
own transmission slots. Running the peeling decoder on that
reconstruction with a chosen peer's slots deleted predicts whether the
peer resolved the receiver; comparing the prediction with ground truth
classifies each ordered pair into one of five outcome classes.

This module is the readable reference path; engine.py reproduces the
same tallies with array kernels for bulk Monte Carlo.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decoder import DecodeOutcome, peel
from .graphs import FrameGraph, GraphView, induced_view
from .tally import MOMENT_DIM, HandshakeTally, Outcome

__all__ = [
    "Reconstruction",
    "reconstruct",
    "evaluate_peer",
    "classify",
    "handshake_frame",
]


@dataclass(frozen=True)
class Reconstruction:
    """A receiver's rebuilt frame graph and the knowledge behind it.

    view holds every slot except the owner's residual ones; its edges are
    the owner's own plus the full (pointer-revealed) edge sets of resolved
    peers, including edges inside the owner's transmission slots.
    peer_slots maps each resolved peer to its true full slot set.
    """

    owner: int
    view: GraphView
    resolved_peers: frozenset[int]
    peer_slots: dict[int, frozenset[int]]


def reconstruct(G: FrameGraph, a: int, outcome: DecodeOutcome) -> Reconstruction:
    """Build receiver a's reconstruction from its decode outcome.

    outcome must be the result of peeling a's induced view of G; cheap
    consistency checks guard against mismatched arguments.
    """
    own = G.slots_of[a]
    if a in outcome.resolved:
        raise ValueError("decode outcome resolves the receiver itself")
    if not outcome.residual_slots.isdisjoint(own):
        raise ValueError("residual slots overlap the receiver's own slots")
    for v in outcome.resolved:
        if not 0 <= v < G.n_users:
            raise ValueError(f"resolved user {v} not in frame")
        # a resolved user was revealed through at least one retained,
        # visible singleton slot
        assert any(
            s not in outcome.residual_slots and s not in own for s in G.slots_of[v]
        ), f"user {v} resolved with no retained visible slot"

    residual = outcome.residual_slots
    edges: dict[int, set[int]] = {
        s: set() for s in range(G.n_slots) if s not in residual
    }
    for v in outcome.resolved | {a}:
        for s in G.slots_of[v]:
            if s not in residual:
                edges[s].add(v)
    view = GraphView(
        n_slots=G.n_slots,
        edges={s: frozenset(occ) for s, occ in edges.items()},
        self_user=a,
    )
    return Reconstruction(
        owner=a,
        view=view,
        resolved_peers=frozenset(outcome.resolved),
        peer_slots={v: G.slots_of[v] for v in outcome.resolved},
    )


def evaluate_peer(recon: Reconstruction, b: int) -> int:
    """Predict from a's reconstruction whether peer b resolved a.

    Deletes user b and all of b's slots (with their edges) from the
    reconstruction, peels the rest, and returns 1 iff the owner comes out
    resolved. Only meaningful for peers the owner actually resolved.
    """
    if b not in recon.resolved_peers:
        raise ValueError(f"peer {b} was not resolved by user {recon.owner}")
    removed = recon.peer_slots[b]
    edges = {s: occ for s, occ in recon.view.edges.items() if s not in removed}
    view = GraphView(n_slots=recon.view.n_slots, edges=edges, self_user=recon.owner)
    outcome = peel(view, until=recon.owner)
    return int(recon.owner in outcome.resolved)


def classify(g_ab: int, a_ba: int | None, g_ba: int) -> Outcome:
    """Map the outcome vector [gAB, aBA, gBA] to its class.

    a_ba must be None exactly when g_ab = 0 (no handshake was attempted).
    """
    if g_ab not in (0, 1) or g_ba not in (0, 1):
        raise ValueError("outcome bits must be 0 or 1")
    if g_ab == 0:
        if a_ba is not None:
            raise ValueError("self-check defined although peer was never resolved")
        return Outcome.AUX_PEER_OK if g_ba else Outcome.AUX_BOTH_FAIL
    if a_ba not in (0, 1):
        raise ValueError("self-check bit missing for a resolved peer")
    if a_ba == 1:
        return Outcome.SUCCESSFUL if g_ba else Outcome.FALSE_HANDSHAKE
    return Outcome.IMPOSSIBLE if g_ba else Outcome.FAILURE_DETECTED


def _check_subview(recon: Reconstruction, b: int, G: FrameGraph) -> None:
    """Assert the self-check graph is contained in b's true induced view."""
    removed = recon.peer_slots[b]
    truth = induced_view(G, b, "broadcast")
    for s, occ in recon.view.edges.items():
        if s in removed:
            continue
        if s not in truth.edges:
            raise AssertionError(f"slot {s} invisible to peer {b}")
        if not occ <= truth.edges[s]:
            raise AssertionError(f"invented edges {occ - truth.edges[s]} in slot {s}")


def handshake_frame(G: FrameGraph, mode: str = "fast") -> HandshakeTally:
    """Classify every ordered user pair of one frame.

    fast mode invokes the self-check only where it decides between
    detected and undetected failure (gAB=1, gBA=0); mutually resolved
    pairs are tallied successful outright, which is exact because a
    (1,0,1) outcome is unreachable. verify mode runs the self-check for
    every resolved peer, asserts the self-check graph never invents
    edges, and counts any (1,0,1) occurrence separately.
    """
    if mode not in ("fast", "verify"):
        raise ValueError(f"unknown handshake mode {mode!r}")
    m = G.n_users
    outcomes = [peel(induced_view(G, u, "broadcast")) for u in range(m)]
    resolved = [out.resolved for out in outcomes]

    tally = HandshakeTally(config_key=None)
    tally.frames = 1
    recons: dict[int, Reconstruction] = {}

    counts = tally.outcome_counts
    for a in range(m):
        own = G.slots_of[a]
        for b in range(m):
            if b == a:
                continue
            g_ab = int(b in resolved[a])
            g_ba = int(a in resolved[b])
            tally.pair_total += 1
            d_observed = len(G.slots_of[b] - own)
            tally.add_pair_degree(G.degree(a), d_observed, unresolved=not g_ab)
            if not g_ab:
                tally.unresolved_pairs += 1
                counts[classify(0, None, g_ba)] += 1
                continue
            if mode == "fast" and g_ba:
                counts[Outcome.SUCCESSFUL] += 1
                continue
            if a not in recons:
                recons[a] = reconstruct(G, a, outcomes[a])
            if mode == "verify":
                _check_subview(recons[a], b, G)
            a_ba = evaluate_peer(recons[a], b)
            outcome = classify(g_ab, a_ba, g_ba)
            if outcome is Outcome.IMPOSSIBLE:
                tally.impossible_count += 1
            else:
                counts[outcome] += 1

    tally.check_count_identities(all_pairs=True, handshake_on=True)
    tally.moment1, tally.moment2 = frame_moments(
        np.array(
            [counts[o] for o in sorted(counts)] + [tally.unresolved_pairs],
            dtype=np.float64,
        ),
        tally.pair_total,
    )
    return tally


def frame_moments(count_vector: np.ndarray, pairs: int) -> tuple:
    """First/second moment contribution of one frame's proportion vector."""
    assert count_vector.shape == (MOMENT_DIM,)
    v = count_vector / pairs if pairs else count_vector * 0.0
    return v, np.outer(v, v)
