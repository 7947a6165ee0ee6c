"""Handshake outcome classes and mergeable per-frame tallies.

For an ordered user pair (A, B) the handshake outcome is determined by
three bits: gAB (A resolved B), aBA (A's self-check: does A believe B
resolved A, evaluated on A's reconstructed graph with B's slots removed)
and gBA (ground truth: B resolved A). aBA is undefined when gAB = 0,
because A cannot attempt a handshake with a peer it never resolved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

__all__ = ["Outcome", "HandshakeTally", "merge_tallies", "MOMENT_DIM"]

#: per-frame moment vector layout: proportions of p1..p5 plus the
#: unresolved-pair share (the frame's packet loss rate)
MOMENT_DIM = 6


class Outcome(IntEnum):
    """Classes of the per-pair outcome vector g = [gAB, aBA, gBA]."""

    FAILURE_DETECTED = 1  # (1,0,0): B missed A and A's self-check caught it
    FALSE_HANDSHAKE = 2  # (1,1,0): A believes the handshake but B missed A
    AUX_BOTH_FAIL = 3  # (0,x,0): A never resolved B; B missed A too
    AUX_PEER_OK = 4  # (0,x,1): A never resolved B although B resolved A
    SUCCESSFUL = 5  # (1,1,1): handshake completed and correct
    IMPOSSIBLE = 6  # (1,0,1): provably unreachable; counted separately


#: the five tally classes in index order p1..p5
TALLY_CLASSES = tuple(Outcome(i) for i in range(1, 6))


class ImpossibleOutcomeError(RuntimeError):
    """A provably unreachable (1,0,1) outcome was observed in verify mode."""


@dataclass
class HandshakeTally:
    """Accumulated counters over one or more frames of a fixed configuration.

    outcome_counts maps the five outcome classes to pair counts;
    pair_total counts all tallied ordered pairs; per_degree maps (receiver
    degree k, observed peer degree d) to [observed, unresolved] pair
    counts; unresolved_pairs counts pairs the receiver failed to resolve
    (equals AUX_BOTH_FAIL + AUX_PEER_OK whenever the handshake ran).

    moment1/moment2 accumulate first and second moments of the per-frame
    proportion vector (p1..p5 shares and the unresolved share), which is
    what makes frame-batched standard errors mergeable.

    config_key identifies the generating configuration; merging tallies
    with different non-None keys is refused. A key of None (empty tally)
    merges with anything.
    """

    config_key: tuple | None = None
    frames: int = 0
    pair_total: int = 0
    outcome_counts: dict[Outcome, int] = field(
        default_factory=lambda: {o: 0 for o in TALLY_CLASSES}
    )
    impossible_count: int = 0
    unresolved_pairs: int = 0
    per_degree: dict[tuple[int, int], list[int]] = field(default_factory=dict)
    moment1: np.ndarray = field(default_factory=lambda: np.zeros(MOMENT_DIM))
    moment2: np.ndarray = field(
        default_factory=lambda: np.zeros((MOMENT_DIM, MOMENT_DIM))
    )

    @classmethod
    def empty(cls) -> "HandshakeTally":
        return cls()

    def add_pair_degree(self, k: int, d: int, unresolved: bool) -> None:
        cell = self.per_degree.setdefault((k, d), [0, 0])
        cell[0] += 1
        if unresolved:
            cell[1] += 1

    def check_count_identities(self, all_pairs: bool, handshake_on: bool) -> None:
        """Exact integer identities that must hold for any consistent tally."""
        c = self.outcome_counts
        if handshake_on:
            total = sum(c.values()) + self.impossible_count
            if total != self.pair_total:
                raise AssertionError(
                    f"outcome counts {total} do not partition {self.pair_total} pairs"
                )
            failed = c[Outcome.AUX_BOTH_FAIL] + c[Outcome.AUX_PEER_OK]
            if failed != self.unresolved_pairs:
                raise AssertionError("unresolved-pair counter mismatch")
            if all_pairs:
                # pair reversal is a bijection, so receiver-side failures
                # (gAB=0) and peer-side failures (gBA=0) count equal
                peer_side = (
                    c[Outcome.FAILURE_DETECTED]
                    + c[Outcome.FALSE_HANDSHAKE]
                    + c[Outcome.AUX_BOTH_FAIL]
                )
                if peer_side != self.unresolved_pairs:
                    raise AssertionError("pair-reversal symmetry violated")
        observed = sum(cell[0] for cell in self.per_degree.values())
        unresolved = sum(cell[1] for cell in self.per_degree.values())
        if observed != self.pair_total or unresolved != self.unresolved_pairs:
            raise AssertionError("per-degree totals disagree with pair counters")


def merge_tallies(a: HandshakeTally, b: HandshakeTally) -> HandshakeTally:
    """Fieldwise sum; associative, commutative, with the empty tally as identity."""
    if a.config_key is not None and b.config_key is not None:
        if a.config_key != b.config_key:
            raise ValueError(
                f"cannot merge tallies of different configurations: "
                f"{a.config_key} vs {b.config_key}"
            )
    out = HandshakeTally(config_key=a.config_key or b.config_key)
    out.frames = a.frames + b.frames
    out.pair_total = a.pair_total + b.pair_total
    out.outcome_counts = {
        o: a.outcome_counts[o] + b.outcome_counts[o] for o in TALLY_CLASSES
    }
    out.impossible_count = a.impossible_count + b.impossible_count
    out.unresolved_pairs = a.unresolved_pairs + b.unresolved_pairs
    per_degree: dict[tuple[int, int], list[int]] = {}
    for src in (a.per_degree, b.per_degree):
        for key, (obs, unres) in src.items():
            cell = per_degree.setdefault(key, [0, 0])
            cell[0] += obs
            cell[1] += unres
    out.per_degree = per_degree
    out.moment1 = a.moment1 + b.moment1
    out.moment2 = a.moment2 + b.moment2
    return out
