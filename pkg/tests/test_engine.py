"""Array engine vs the readable reference path, and determinism."""

import numpy as np
import pytest

from bcsa import (
    Outcome,
    classify,
    evaluate_peer,
    frame_rng,
    generate_frame,
    handshake_frame,
    induced_view,
    merge_tallies,
    parse_distribution,
    peel,
    reconstruct,
    simulate_point,
)
from bcsa.tally import HandshakeTally


def _reference_point(n, m, dist, frames, seed, load_index=0, mode="verify"):
    """Recompute a simulate_point tally with the pure-Python pipeline."""
    total = None
    for i in range(frames):
        rng = frame_rng(seed, load_index, i)
        G = generate_frame(m, n, dist, rng)
        t = handshake_frame(G, mode)
        total = t if total is None else merge_tallies(total, t)
    return total


def _assert_tallies_match(a, b):
    assert a.frames == b.frames
    assert a.pair_total == b.pair_total
    assert a.outcome_counts == b.outcome_counts
    assert a.impossible_count == b.impossible_count
    assert a.unresolved_pairs == b.unresolved_pairs
    assert a.per_degree == b.per_degree
    assert np.allclose(a.moment1, b.moment1, atol=1e-12)
    assert np.allclose(a.moment2, b.moment2, atol=1e-12)


def test_engine_equals_reference_fast(dist_mixed):
    eng = simulate_point(23, 17, dist_mixed, frames=40, seed=2, handshake="fast")
    ref = _reference_point(23, 17, dist_mixed, 40, 2, mode="fast")
    _assert_tallies_match(eng, ref)


def test_engine_equals_reference_verify(dist_two):
    eng = simulate_point(14, 9, dist_two, frames=30, seed=8, handshake="verify")
    ref = _reference_point(14, 9, dist_two, 30, 8, mode="verify")
    _assert_tallies_match(eng, ref)


def test_engine_equals_reference_unicast(dist_two):
    eng = simulate_point(
        20, 12, dist_two, frames=50, seed=11, mode="unicast", handshake="off"
    )
    assert eng.frames == 50
    assert eng.pair_total == 50 * 12
    # rebuild the per-degree table independently with the reference decoder
    obs = {}
    unres = {}
    lost_total = 0
    for i in range(50):
        rng = frame_rng(11, 0, i)
        G = generate_frame(12, 20, dist_two, rng)
        resolved = peel(induced_view(G, None, "unicast")).resolved
        for u in range(12):
            key = (0, G.degree(u))
            obs[key] = obs.get(key, 0) + 1
            if u not in resolved:
                unres[key] = unres.get(key, 0) + 1
                lost_total += 1
    assert eng.per_degree == {key: [obs[key], unres.get(key, 0)] for key in obs}
    assert eng.unresolved_pairs == lost_total


def test_engine_reference_subset_receivers(dist_mixed):
    n, m, K, frames, seed = 18, 12, 3, 25, 13
    eng = simulate_point(
        n, m, dist_mixed, frames=frames, seed=seed, handshake="fast", ref_count=K
    )
    counts = {o: 0 for o in Outcome}
    pair_total = 0
    unresolved = 0
    for i in range(frames):
        rng = frame_rng(seed, 0, i)
        G = generate_frame(m, n, dist_mixed, rng)
        refs = np.sort(rng.choice(m, K, replace=False))
        outcomes = {u: peel(induced_view(G, u)) for u in range(m)}
        recons = {}
        for a in (int(x) for x in refs):
            for b in range(m):
                if b == a:
                    continue
                pair_total += 1
                g_ab = int(b in outcomes[a].resolved)
                g_ba = int(a in outcomes[b].resolved)
                if not g_ab:
                    unresolved += 1
                    counts[classify(0, None, g_ba)] += 1
                elif g_ba:
                    counts[Outcome.SUCCESSFUL] += 1
                else:
                    if a not in recons:
                        recons[a] = reconstruct(G, a, outcomes[a])
                    counts[classify(1, evaluate_peer(recons[a], b), 0)] += 1
    assert eng.pair_total == pair_total == frames * K * (m - 1)
    assert eng.unresolved_pairs == unresolved
    for o in (o for o in Outcome if o is not Outcome.IMPOSSIBLE):
        assert eng.outcome_counts[o] == counts[o]


def test_chunking_invariance(dist_two):
    a = simulate_point(30, 18, dist_two, frames=70, seed=3, chunk_frames=16)
    b = simulate_point(30, 18, dist_two, frames=70, seed=3, chunk_frames=256)
    assert a.outcome_counts == b.outcome_counts
    assert a.per_degree == b.per_degree
    assert a.unresolved_pairs == b.unresolved_pairs
    assert np.allclose(a.moment1, b.moment1, atol=1e-12)
    assert np.allclose(a.moment2, b.moment2, atol=1e-12)


def test_worker_count_does_not_change_results(dist_two):
    a = simulate_point(30, 18, dist_two, frames=60, seed=4, workers=1)
    b = simulate_point(30, 18, dist_two, frames=60, seed=4, workers=3)
    assert a.outcome_counts == b.outcome_counts
    assert a.per_degree == b.per_degree
    assert np.array_equal(a.moment1, b.moment1)
    assert np.array_equal(a.moment2, b.moment2)
    assert a.config_key == b.config_key


def test_same_seed_reproduces(dist_mixed):
    a = simulate_point(25, 15, dist_mixed, frames=30, seed=6)
    b = simulate_point(25, 15, dist_mixed, frames=30, seed=6)
    assert a.outcome_counts == b.outcome_counts
    assert np.array_equal(a.moment2, b.moment2)


def test_different_load_index_changes_frames(dist_mixed):
    a = simulate_point(25, 15, dist_mixed, frames=30, seed=6, load_index=0)
    b = simulate_point(25, 15, dist_mixed, frames=30, seed=6, load_index=1)
    assert a.outcome_counts != b.outcome_counts


def test_frame_rng_is_deterministic():
    a = frame_rng(42, 3, 1000).random(8)
    b = frame_rng(42, 3, 1000).random(8)
    c = frame_rng(42, 3, 1001).random(8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_engine_validation(dist_mixed):
    d = dist_mixed
    with pytest.raises(ValueError):
        simulate_point(5, 4, d, frames=2, seed=0)  # n < max degree
    with pytest.raises(ValueError):
        simulate_point(20, 4, d, frames=2, seed=0, mode="bogus")
    with pytest.raises(ValueError):
        simulate_point(20, 4, d, frames=2, seed=0, handshake="bogus")
    with pytest.raises(ValueError):
        simulate_point(20, 4, d, frames=2, seed=0, mode="unicast", handshake="fast")
    with pytest.raises(ValueError):
        simulate_point(20, 4, d, frames=2, seed=0, ref_count=0)
    with pytest.raises(ValueError):
        simulate_point(20, 4, d, frames=2, seed=0, ref_count=5)
    with pytest.raises(ValueError):
        simulate_point(
            20, 4, d, frames=2, seed=0, mode="unicast", handshake="off", ref_count=2
        )
    with pytest.raises(ValueError):
        simulate_point(20, 4, d, frames=-1, seed=0)
    empty = simulate_point(20, 4, d, frames=0, seed=0)
    assert empty.frames == 0 and empty.pair_total == 0


def test_tally_asserts_frame_identities(dist_two):
    t = simulate_point(40, 30, dist_two, frames=25, seed=19)
    t.check_count_identities(all_pairs=True, handshake_on=True)
    assert t.pair_total == 25 * 30 * 29
    assert sum(t.outcome_counts.values()) == t.pair_total
    assert t.impossible_count == 0


def test_merge_rejects_mismatched_configs(dist_two):
    a = simulate_point(20, 10, dist_two, frames=4, seed=1)
    b = simulate_point(20, 10, dist_two, frames=4, seed=2)
    with pytest.raises(ValueError):
        merge_tallies(a, b)


def test_merge_with_empty_is_identity(dist_two):
    a = simulate_point(20, 10, dist_two, frames=6, seed=1)
    merged = merge_tallies(HandshakeTally.empty(), a)
    _assert_tallies_match(merged, a)
    assert merged.config_key == a.config_key
