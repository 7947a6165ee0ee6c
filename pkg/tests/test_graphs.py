"""Frame sampling and the per-user induced views."""

import numpy as np
import pytest
import scipy.stats

from bcsa import FrameGraph, GraphView, generate_frame, induced_view, parse_distribution
from bcsa.graphs import sample_frame_arrays


def _frame(n_slots, slot_sets):
    return FrameGraph(n_slots=n_slots, slots_of=tuple(frozenset(s) for s in slot_sets))


def test_full_occupancy_when_degree_equals_slots():
    d = parse_distribution("x2")
    rng = np.random.default_rng(0)
    G = generate_frame(3, 2, d, rng)
    assert G.n_users == 3
    for u in range(3):
        assert G.slots_of[u] == frozenset({0, 1})
    assert G.users_in[0] == frozenset({0, 1, 2})
    assert G.users_in[1] == frozenset({0, 1, 2})


def test_empty_frame():
    d = parse_distribution("x")
    rng = np.random.default_rng(0)
    G = generate_frame(0, 4, d, rng)
    assert G.n_users == 0
    assert all(G.users_in[s] == frozenset() for s in range(4))


def test_copies_are_distinct_slots():
    d = parse_distribution("0.25x^2+0.6x^3+0.15x^8")
    rng = np.random.default_rng(42)
    for _ in range(50):
        G = generate_frame(20, 12, d, rng)
        for u in range(G.n_users):
            assert len(G.slots_of[u]) == G.degree(u)
            assert G.slots_of[u] <= set(range(12))


def test_mean_edge_count(dist_two):
    rng = np.random.default_rng(9)
    m = 1000
    G = generate_frame(m, 2000, dist_two, rng)
    edges = sum(G.degree(u) for u in range(m))
    mean = m * dist_two.mean_degree  # 3700
    second = sum(p * l * l for l, p in enumerate(dist_two.probs))
    sigma = (m * (second - dist_two.mean_degree**2)) ** 0.5  # ~55
    assert abs(edges - mean) < 4 * sigma


def test_slot_subsets_uniform_chi_square():
    # degree-3 users in 6 slots: all C(6,3)=20 subsets equally likely
    d = parse_distribution("x3")
    deg, uoff, uslots = sample_frame_arrays(
        100_000, 6, d, np.random.default_rng(11)
    )
    assert np.all(deg == 3)
    ids = {}
    counts = []
    observed = np.zeros(20, dtype=np.int64)
    for u in range(100_000):
        key = tuple(sorted(uslots[uoff[u] : uoff[u] + 3]))
        if key not in ids:
            ids[key] = len(ids)
            counts.append(0)
        observed[ids[key]] += 1
    assert len(ids) == 20
    res = scipy.stats.chisquare(observed)
    assert res.pvalue > 0.001


def test_degree_zero_user_allowed():
    G = _frame(3, [set(), {0}])
    assert G.degree(0) == 0
    assert G.users_in[0] == frozenset({1})
    view = induced_view(G, 1)
    assert 1 not in {u for occ in view.edges.values() for u in occ}


def test_frame_validation_rejects_out_of_range():
    with pytest.raises(ValueError):
        _frame(2, [{0, 2}])
    with pytest.raises(ValueError):
        _frame(-1, [])


def test_frame_validation_rejects_bad_inverse_index():
    with pytest.raises(ValueError):
        FrameGraph(
            n_slots=2,
            slots_of=(frozenset({0}),),
            users_in=(frozenset(), frozenset({0})),
        )


def test_induced_view_excludes_own_slots():
    # receiver {0,1}; peers {2} and {0}; slots 3,4 empty
    G = _frame(5, [{0, 1}, {2}, {0}])
    view = induced_view(G, 0)
    assert view.self_user is None  # the receiver is absent, not special-cased
    assert view.visible_slots == frozenset({2, 3, 4})
    assert view.edges == {2: frozenset({1}), 3: frozenset(), 4: frozenset()}


def test_induced_view_never_contains_receiver():
    d = parse_distribution("0.5x2+0.5x3")
    rng = np.random.default_rng(5)
    for _ in range(20):
        G = generate_frame(8, 6, d, rng)
        for u in range(8):
            view = induced_view(G, u)
            assert view.visible_slots == frozenset(range(6)) - G.slots_of[u]
            for occupants in view.edges.values():
                assert u not in occupants


def test_induced_view_unicast_sees_everything():
    G = _frame(3, [{0, 1}, {2}])
    view = induced_view(G, None, mode="unicast")
    assert view.self_user is None
    assert view.visible_slots == frozenset({0, 1, 2})
    assert view.edges[0] == frozenset({0})
    assert view.edges[2] == frozenset({1})


def test_induced_view_validates_user_and_mode():
    G = _frame(3, [{0}])
    with pytest.raises(ValueError):
        induced_view(G, 5)
    with pytest.raises(ValueError):
        induced_view(G, None)
    with pytest.raises(ValueError):
        induced_view(G, 0, mode="bogus")


def test_view_users_helper():
    view = GraphView(n_slots=4, edges={0: frozenset({2, 3}), 1: frozenset({2})})
    assert view.users() == frozenset({2, 3})


def test_generate_rejects_too_few_slots():
    d = parse_distribution("x3")
    with pytest.raises(ValueError):
        generate_frame(2, 2, d, np.random.default_rng(0))
