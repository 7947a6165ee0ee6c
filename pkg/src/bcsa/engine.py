"""Bulk Monte Carlo simulation of framed random access with handshakes.

Frames are simulated in fixed-size chunks. Every frame draws its own
generator from a seed tree keyed by (sweep-point index, frame index), so
results are reproducible bit for bit no matter how frames are grouped
into chunks or spread over worker processes. Chunk tallies are merged in
chunk order, which keeps the floating-point moment sums deterministic
too.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ._kernels import (
    C_IMPOSSIBLE,
    C_UNRESOLVED,
    HS_FAST,
    HS_OFF,
    HS_VERIFY,
    classify_pairs,
    decode_broadcast_all,
    decode_full,
    slot_occupancy,
)
from .distributions import DegreeDistribution
from .graphs import sample_frame_arrays
from .tally import MOMENT_DIM, TALLY_CLASSES, HandshakeTally, merge_tallies

__all__ = ["CHUNK_FRAMES", "frame_rng", "simulate_point"]

CHUNK_FRAMES = 256

_HS_CODES = {"off": HS_OFF, "fast": HS_FAST, "verify": HS_VERIFY}


def frame_rng(seed: int, load_index: int, frame_index: int) -> np.random.Generator:
    """Independent generator for one frame of one sweep point."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(load_index, frame_index))
    return np.random.default_rng(ss)


def _config_key(n, m, probs, seed, load_index, mode, handshake, ref_count):
    return (n, m, probs, seed, load_index, mode, handshake, ref_count)


def _simulate_chunk(
    n, m, probs, start, stop, seed, load_index, mode, handshake, ref_count
) -> HandshakeTally:
    """Simulate frames [start, stop) of one sweep point into a fresh tally."""
    dist = DegreeDistribution(probs)
    q = dist.max_degree
    hs_code = _HS_CODES[handshake]
    all_pairs = ref_count is None
    tally = HandshakeTally(
        config_key=_config_key(n, m, probs, seed, load_index, mode, handshake, ref_count)
    )

    counts = np.zeros(7, np.int64)
    counts_total = np.zeros(7, np.int64)
    obs_f = np.zeros((q + 1, q + 1), np.int64)
    unres_f = np.zeros((q + 1, q + 1), np.int64)
    obs = np.zeros_like(obs_f)
    unres = np.zeros_like(unres_f)
    base_cnt = np.zeros(n, np.int64)
    base_ssum = np.zeros(n, np.int64)
    V = np.zeros((stop - start, MOMENT_DIM))
    if mode == "broadcast":
        resolved = np.zeros((m, m), np.uint8)
        residual = np.zeros((m, n), np.uint8)
        all_refs = np.arange(m, dtype=np.int64)
    else:
        resolved_full = np.zeros(m, np.uint8)

    pair_total = 0
    for i, f in enumerate(range(start, stop)):
        rng = frame_rng(seed, load_index, f)
        deg, uoff, uslots = sample_frame_arrays(m, n, dist, rng)
        counts[:] = 0
        obs_f[:] = 0
        unres_f[:] = 0
        slot_occupancy(n, uoff, uslots, base_cnt, base_ssum)
        if mode == "broadcast":
            if all_pairs:
                refs = all_refs
            else:
                refs = np.sort(rng.choice(m, size=ref_count, replace=False)).astype(
                    np.int64
                )
            pairs = refs.shape[0] * (m - 1)
            resolved[:] = 0
            decode_broadcast_all(
                n, m, uoff, uslots, base_cnt, base_ssum, resolved, residual
            )
            classify_pairs(
                n, m, deg, uoff, uslots, resolved, residual, refs, hs_code,
                obs_f, unres_f, counts,
            )
        else:
            pairs = m
            resolved_full[:] = 0
            decode_full(n, m, uoff, uslots, base_cnt, base_ssum, resolved_full)
            obs_f[0, :] = np.bincount(deg, minlength=q + 1)
            lost = deg[resolved_full == 0]
            unres_f[0, :] = np.bincount(lost, minlength=q + 1)
            counts[C_UNRESOLVED] = lost.shape[0]

        # exact per-frame invariants; violations mean a decoder/tally bug
        assert int(obs_f.sum()) == pairs
        assert int(unres_f.sum()) == counts[C_UNRESOLVED]
        if mode == "broadcast" and hs_code != HS_OFF:
            assert int(counts[:6].sum()) == pairs
            assert counts[2] + counts[3] == counts[C_UNRESOLVED]
            if all_pairs:
                assert counts[0] + counts[1] + counts[2] == counts[C_UNRESOLVED]

        if pairs:
            V[i, :5] = counts[:5] / pairs
            V[i, 5] = counts[C_UNRESOLVED] / pairs
        pair_total += pairs
        counts_total += counts
        obs += obs_f
        unres += unres_f

    tally.frames = stop - start
    tally.pair_total = pair_total
    for idx, o in enumerate(TALLY_CLASSES):
        tally.outcome_counts[o] = int(counts_total[idx])
    tally.impossible_count = int(counts_total[C_IMPOSSIBLE])
    tally.unresolved_pairs = int(counts_total[C_UNRESOLVED])
    for k, d in zip(*np.nonzero(obs)):
        tally.per_degree[(int(k), int(d))] = [int(obs[k, d]), int(unres[k, d])]
    tally.moment1 = V.sum(axis=0)
    tally.moment2 = V.T @ V
    tally.check_count_identities(
        all_pairs=all_pairs and mode == "broadcast",
        handshake_on=mode == "broadcast" and hs_code != HS_OFF,
    )
    return tally


def _simulate_chunk_args(args) -> HandshakeTally:
    return _simulate_chunk(*args)


_warmed = False


def _warmup() -> None:
    """Compile the kernels once in the parent before forking workers."""
    global _warmed
    if _warmed:
        return
    probs = (0.0, 0.0, 1.0)
    _simulate_chunk(4, 2, probs, 0, 1, 0, 0, "broadcast", "verify", None)
    _simulate_chunk(4, 2, probs, 0, 1, 0, 0, "unicast", "off", None)
    _warmed = True


def simulate_point(
    n: int,
    m: int,
    dist: DegreeDistribution,
    frames: int,
    seed: int,
    *,
    load_index: int = 0,
    mode: str = "broadcast",
    handshake: str = "fast",
    ref_count: int | None = None,
    workers: int = 1,
    chunk_frames: int = CHUNK_FRAMES,
) -> HandshakeTally:
    """Simulate one (n, m) operating point and return the merged tally.

    ref_count=None evaluates every ordered user pair per frame; an
    integer K draws K reference receivers per frame and evaluates their
    m-1 pairs each. Unicast mode decodes the full frame for an exterior
    receiver and only tracks packet loss, so it requires handshake="off".
    """
    if mode not in ("broadcast", "unicast"):
        raise ValueError(f"unknown mode {mode!r}")
    if handshake not in _HS_CODES:
        raise ValueError(f"unknown handshake mode {handshake!r}")
    if mode == "unicast" and handshake != "off":
        raise ValueError("unicast mode has no return channel: use handshake='off'")
    if m < 0 or frames < 0 or n < 1:
        raise ValueError("need n >= 1, m >= 0, frames >= 0")
    if n < dist.max_degree:
        raise ValueError(f"n={n} smaller than max degree q={dist.max_degree}")
    if ref_count is not None:
        if mode != "broadcast":
            raise ValueError("reference receivers only apply to broadcast mode")
        if not 1 <= ref_count <= m:
            raise ValueError(f"ref_count must be in [1, {m}]")
    if workers < 1 or chunk_frames < 1:
        raise ValueError("workers and chunk_frames must be positive")

    probs = dist.probs
    spans = [
        (lo, min(lo + chunk_frames, frames)) for lo in range(0, frames, chunk_frames)
    ]
    args = [
        (n, m, probs, lo, hi, seed, load_index, mode, handshake, ref_count)
        for lo, hi in spans
    ]
    if workers == 1 or len(args) <= 1:
        parts = [_simulate_chunk_args(a) for a in args]
    else:
        _warmup()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_chunk_args, args))

    out = HandshakeTally(
        config_key=_config_key(n, m, probs, seed, load_index, mode, handshake, ref_count)
    )
    for part in parts:
        out = merge_tallies(out, part)
    return out
