"""Exact brute-force enumeration of tiny instances.

Iterates every joint (degree, slot subset) assignment across all users,
weights each complete frame by its exact probability, runs the reference
decode/handshake on it, and accumulates outcome and per-degree loss
probabilities. Users are distinguishable and no symmetry is exploited:
correctness over speed at toy scale.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .decoder import peel
from .distributions import DegreeDistribution
from .graphs import FrameGraph, induced_view
from .handshake import handshake_frame
from .tally import Outcome

__all__ = ["ExactResult", "EnumerationSizeError", "enumerate_exact"]

MAX_CONFIGS = 10_000_000


class EnumerationSizeError(ValueError):
    """Configuration space exceeds the enumeration bound."""


class _Kahan:
    """Kahan-compensated float accumulator."""

    __slots__ = ("total", "comp")

    def __init__(self):
        self.total = 0.0
        self.comp = 0.0

    def add(self, x: float) -> None:
        y = x - self.comp
        t = self.total + y
        self.comp = (t - self.total) - y
        self.total = t

    @property
    def value(self) -> float:
        return self.total


class _Exact:
    """Exact-rational accumulator (optional test path for tiny instances)."""

    __slots__ = ("total",)

    def __init__(self):
        self.total = Fraction(0)

    def add(self, x) -> None:
        self.total += x

    @property
    def value(self) -> Fraction:
        return self.total


@dataclass(frozen=True)
class ExactResult:
    """Exact probabilities for one (m, n, dist, mode) instance.

    outcome_probs is empty when no ordered pair exists (m < 2 or unicast
    mode); otherwise it covers the five outcome classes plus IMPOSSIBLE
    and sums to 1. per_degree_plr maps (receiver degree, observed peer
    degree) to the exact loss probability; the receiver degree is 0 in
    unicast mode (exterior receiver). Values are floats, or Fractions on
    the exact-rational path.
    """

    n_users: int
    n_slots: int
    dist: DegreeDistribution
    mode: str
    outcome_probs: dict[Outcome, float | Fraction]
    per_degree_plr: dict[tuple[int, int], float | Fraction]
    plr: float | Fraction
    config_count: int

    @property
    def instance(self) -> tuple:
        return (self.n_users, self.n_slots, self.dist, self.mode)


def enumerate_exact(
    m: int,
    n: int,
    dist: DegreeDistribution,
    mode: str = "broadcast",
    *,
    exact: bool = False,
    max_configs: int = MAX_CONFIGS,
) -> ExactResult:
    """Exactly enumerate all weighted frames of an instance.

    exact=True accumulates in rational arithmetic (slow; meant for
    instances of a few users and slots), otherwise doubles with Kahan
    compensation.
    """
    if mode not in ("broadcast", "unicast"):
        raise ValueError(f"unknown mode {mode!r}")
    if m < 0:
        raise ValueError("m must be non-negative")
    q = dist.max_degree
    if n < q:
        raise ValueError(f"n={n} smaller than max degree q={q}")

    support = [l for l, p in enumerate(dist.probs) if p > 0]
    per_user = sum(math.comb(n, l) for l in support)
    total = per_user**m
    if total > max_configs:
        raise EnumerationSizeError(
            f"{total} weighted configurations exceed the bound {max_configs}"
        )

    options = []
    for l in support:
        if exact:
            w = Fraction(dist.probs[l]) / math.comb(n, l)
        else:
            w = dist.probs[l] / math.comb(n, l)
        for subset in itertools.combinations(range(n), l):
            options.append((w, frozenset(subset)))

    acc = _Exact if exact else _Kahan
    pair_classes = list(Outcome)
    outcome_acc = {o: acc() for o in pair_classes}
    obs_acc: dict[tuple[int, int], object] = {}
    unres_acc: dict[tuple[int, int], object] = {}

    def bump(table, key, x):
        cell = table.get(key)
        if cell is None:
            cell = table[key] = acc()
        cell.add(x)

    n_pairs = m * (m - 1)
    count = 0
    for assignment in itertools.product(options, repeat=m):
        count += 1
        w = math.prod(opt[0] for opt in assignment) if not exact else _frac_prod(assignment)
        G = FrameGraph(n_slots=n, slots_of=tuple(opt[1] for opt in assignment))
        if mode == "broadcast":
            if n_pairs == 0:
                continue
            t = handshake_frame(G, "verify")
            for o in t.outcome_counts:
                if t.outcome_counts[o]:
                    outcome_acc[o].add(w * _ratio(t.outcome_counts[o], n_pairs, exact))
            if t.impossible_count:
                outcome_acc[Outcome.IMPOSSIBLE].add(
                    w * _ratio(t.impossible_count, n_pairs, exact)
                )
            for key, (obs, unres) in t.per_degree.items():
                bump(obs_acc, key, w * obs)
                if unres:
                    bump(unres_acc, key, w * unres)
        else:
            resolved = peel(induced_view(G, None, "unicast")).resolved
            for u in range(m):
                key = (0, G.degree(u))
                bump(obs_acc, key, w)
                if u not in resolved:
                    bump(unres_acc, key, w)
    assert count == total

    zero = Fraction(0) if exact else 0.0
    outcome_probs = (
        {o: outcome_acc[o].value for o in pair_classes}
        if mode == "broadcast" and n_pairs > 0
        else {}
    )
    per_degree_plr = {}
    obs_total = zero
    unres_total = zero
    for key, cell in sorted(obs_acc.items()):
        unres = unres_acc[key].value if key in unres_acc else zero
        per_degree_plr[key] = unres / cell.value
        obs_total += cell.value
        unres_total += unres
    plr = unres_total / obs_total if obs_total else zero

    return ExactResult(
        n_users=m,
        n_slots=n,
        dist=dist,
        mode=mode,
        outcome_probs=outcome_probs,
        per_degree_plr=per_degree_plr,
        plr=plr,
        config_count=count,
    )


def _frac_prod(assignment) -> Fraction:
    w = Fraction(1)
    for opt in assignment:
        w *= opt[0]
    return w


def _ratio(num: int, den: int, exact: bool):
    return Fraction(num, den) if exact else num / den
