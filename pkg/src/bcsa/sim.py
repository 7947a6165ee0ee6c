"""Load sweeps: simulate a list of operating points and stream CSV rows.

One row per channel load, ascending. Counts are written as integers and
probabilities with six significant digits; rows end with a bare newline
regardless of platform. Per-degree loss columns are optional and named
``plr_k{K}_d{D}`` for receiver degree K and observed peer degree D.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO

from .analysis import EstimateReport, estimate
from .distributions import DegreeDistribution
from .engine import simulate_point
from .tally import TALLY_CLASSES, HandshakeTally, ImpossibleOutcomeError

__all__ = ["BASE_COLUMNS", "SweepConfig", "SweepRow", "run_sweep", "users_for_load"]

BASE_COLUMNS = [
    "load", "users", "frames", "pairs",
    "c1", "c2", "c3", "c4", "c5", "impossible",
    "p1", "p2", "p3", "p4", "p5",
    "plr", "plr_se", "detect_ratio", "bound_tight", "conj_ratio",
]


def users_for_load(load: float, n_slots: int) -> int:
    """User count at a channel load, rounding halves up (not to even)."""
    return int(math.floor(load * n_slots + 0.5))


@dataclass(frozen=True)
class SweepConfig:
    """A validated sweep: one simulation point per channel load."""

    n_slots: int
    dist: DegreeDistribution
    loads: tuple[float, ...]
    frames: int
    seed: int = 0
    mode: str = "broadcast"
    handshake: str = "fast"
    ref_count: int | None = None
    per_degree: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.mode not in ("broadcast", "unicast"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.handshake not in ("off", "fast", "verify"):
            raise ValueError(f"unknown handshake mode {self.handshake!r}")
        if self.mode == "unicast" and self.handshake != "off":
            raise ValueError("unicast mode has no return channel: use handshake='off'")
        if self.n_slots < 1:
            raise ValueError("need at least one slot")
        if self.n_slots < self.dist.max_degree:
            raise ValueError(
                f"n={self.n_slots} smaller than max degree q={self.dist.max_degree}"
            )
        if not self.loads:
            raise ValueError("need at least one load")
        if any(g <= 0 for g in self.loads):
            raise ValueError("loads must be positive")
        if any(b <= a for a, b in zip(self.loads, self.loads[1:])):
            raise ValueError("loads must be strictly increasing")
        if self.frames < 1:
            raise ValueError("need at least one frame")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        min_users = 2 if self.mode == "broadcast" else 1
        for g in self.loads:
            if users_for_load(g, self.n_slots) < min_users:
                raise ValueError(
                    f"load {g:g} gives fewer than {min_users} users at n={self.n_slots}"
                )
        if self.ref_count is not None:
            if self.mode != "broadcast":
                raise ValueError("reference receivers only apply to broadcast mode")
            fewest = min(users_for_load(g, self.n_slots) for g in self.loads)
            if not 1 <= self.ref_count <= fewest:
                raise ValueError(f"ref_count must be in [1, {fewest}] for this sweep")

    @property
    def user_counts(self) -> tuple[int, ...]:
        return tuple(users_for_load(g, self.n_slots) for g in self.loads)

    def degree_columns(self) -> list[tuple[int, int]]:
        """(receiver degree, observed degree) keys reported per row."""
        if not self.per_degree:
            return []
        if self.mode == "unicast":
            ks = [0]
        else:
            ks = [l for l, p in enumerate(self.dist.probs) if p > 0]
        return [(k, d) for k in ks for d in range(self.dist.max_degree + 1)]


@dataclass(frozen=True)
class SweepRow:
    load: float
    users: int
    tally: HandshakeTally
    report: EstimateReport


def run_sweep(config: SweepConfig, out: IO[str] | str | Path | None = None) -> list[SweepRow]:
    """Run every point of the sweep, optionally streaming CSV rows to out.

    Each row is written (and flushed) as soon as its point finishes. In
    verify handshake mode an impossible outcome aborts the sweep with
    ImpossibleOutcomeError right after its row is written.
    """
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="") as f:
            return _run_sweep(config, f)
    return _run_sweep(config, out)


def _run_sweep(config: SweepConfig, f: IO[str] | None) -> list[SweepRow]:
    deg_cols = config.degree_columns()
    writer = None
    if f is not None:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(BASE_COLUMNS + [f"plr_k{k}_d{d}" for k, d in deg_cols])

    rows = []
    for i, g in enumerate(config.loads):
        m = users_for_load(g, config.n_slots)
        tally = simulate_point(
            config.n_slots,
            m,
            config.dist,
            config.frames,
            config.seed,
            load_index=i,
            mode=config.mode,
            handshake=config.handshake,
            ref_count=config.ref_count,
            workers=config.workers,
        )
        report = estimate(tally)
        if writer is not None:
            writer.writerow(_format_row(g, m, tally, report, deg_cols))
            f.flush()
        rows.append(SweepRow(load=g, users=m, tally=tally, report=report))
        if config.handshake == "verify" and tally.impossible_count:
            raise ImpossibleOutcomeError(
                f"{tally.impossible_count} impossible handshake outcome(s) "
                f"at load {g:g}"
            )
    return rows


def _fmt(x: float) -> str:
    return format(x, ".6g")


def _format_row(g, m, tally, report, deg_cols) -> list[str]:
    row = [
        _fmt(g),
        str(m),
        str(tally.frames),
        str(tally.pair_total),
    ]
    row += [str(tally.outcome_counts[o]) for o in TALLY_CLASSES]
    row.append(str(tally.impossible_count))
    row += [_fmt(p) for p in (report.p1, report.p2, report.p3, report.p4, report.p5)]
    row += [
        _fmt(report.plr),
        _fmt(report.plr_se),
        _fmt(report.detect_ratio),
        _fmt(report.bound_tight),
        _fmt(report.conj_ratio),
    ]
    for key in deg_cols:
        val = report.per_degree_plr.get(key)
        row.append("nan" if val is None else _fmt(val))
    return row
