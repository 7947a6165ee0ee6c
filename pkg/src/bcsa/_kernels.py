"""Numba kernels for bulk simulation: subset sampling, peeling, pair tallies.

Users and slots are dense integer ids. A frame is held in CSR-like arrays:
``uslots[uoff[u]:uoff[u+1]]`` lists user u's transmission slots. Peeling
state per slot is a pair of arrays: ``cnt[s]`` counts not-yet-removed
occupants and ``ssum[s]`` holds the sum of their ids, so a singleton slot
reveals its occupant as ``ssum[s]``. Slots outside the receiver's view are
forced to cnt 0 and are never decremented (resolved users' copies there
are skipped by the ``cnt > 0`` guard).

The readable reference implementations live in decoder.py / handshake.py;
tests assert the two paths produce identical tallies.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# handshake modes for classify_pairs
HS_OFF = 0
HS_FAST = 1
HS_VERIFY = 2

# counter layout shared with engine.py
C_P1, C_P2, C_P3, C_P4, C_P5, C_IMPOSSIBLE, C_UNRESOLVED = range(7)


@njit(cache=True)
def fill_slot_choices(n, deg, uoff, uniforms, uslots, perm):
    """Fill uslots with a uniform deg[u]-subset of [0, n) per user.

    Partial Fisher-Yates on the scratch permutation ``perm`` (length n,
    any content), consuming one uniform float per edge. Swaps are undone
    after each user so every user samples from the identity permutation.
    """
    for i in range(n):
        perm[i] = i
    for u in range(deg.shape[0]):
        base = uoff[u]
        l = deg[u]
        for j in range(l):
            r = int(uniforms[base + j] * (n - j))
            if r >= n - j:
                r = n - j - 1
            r += j
            tmp = perm[j]
            perm[j] = perm[r]
            perm[r] = tmp
            uslots[base + j] = perm[j]
        for j in range(l - 1, -1, -1):
            r = int(uniforms[base + j] * (n - j))
            if r >= n - j:
                r = n - j - 1
            r += j
            tmp = perm[j]
            perm[j] = perm[r]
            perm[r] = tmp


@njit(cache=True)
def slot_occupancy(n, uoff, uslots, cnt, ssum):
    """Per-slot occupant count and id sum for a whole frame."""
    for s in range(n):
        cnt[s] = 0
        ssum[s] = 0
    m = uoff.shape[0] - 1
    for u in range(m):
        for j in range(uoff[u], uoff[u + 1]):
            s = uslots[j]
            cnt[s] += 1
            ssum[s] += u


@njit(cache=True)
def decode_broadcast_all(n, m, uoff, uslots, base_cnt, base_ssum, resolved, residual):
    """Peel every user's induced view; fill resolved (m,m) and residual (m,n).

    resolved[a, v] = 1 iff receiver a resolves user v. residual[a, s] = 1
    iff slot s is visible to a and still carries unresolved occupants when
    peeling stops.
    """
    cnt = np.empty(n, np.int64)
    ssum = np.empty(n, np.int64)
    stack = np.empty(n, np.int64)
    for a in range(m):
        for s in range(n):
            cnt[s] = base_cnt[s]
            ssum[s] = base_ssum[s]
        for j in range(uoff[a], uoff[a + 1]):
            s = uslots[j]
            cnt[s] = 0
            ssum[s] = 0
        top = 0
        for s in range(n):
            if cnt[s] == 1:
                stack[top] = s
                top += 1
        while top > 0:
            top -= 1
            s = stack[top]
            if cnt[s] != 1:
                continue
            v = ssum[s]
            resolved[a, v] = 1
            for j in range(uoff[v], uoff[v + 1]):
                t = uslots[j]
                if cnt[t] > 0:
                    cnt[t] -= 1
                    ssum[t] -= v
                    if cnt[t] == 1:
                        stack[top] = t
                        top += 1
        for s in range(n):
            residual[a, s] = 1 if cnt[s] > 0 else 0


@njit(cache=True)
def decode_full(n, m, uoff, uslots, base_cnt, base_ssum, resolved):
    """Peel the full frame graph (exterior receiver); fill resolved (m,)."""
    cnt = np.empty(n, np.int64)
    ssum = np.empty(n, np.int64)
    stack = np.empty(n, np.int64)
    for s in range(n):
        cnt[s] = base_cnt[s]
        ssum[s] = base_ssum[s]
    top = 0
    for s in range(n):
        if cnt[s] == 1:
            stack[top] = s
            top += 1
    while top > 0:
        top -= 1
        s = stack[top]
        if cnt[s] != 1:
            continue
        v = ssum[s]
        resolved[v] = 1
        for j in range(uoff[v], uoff[v + 1]):
            t = uslots[j]
            if cnt[t] > 0:
                cnt[t] -= 1
                ssum[t] -= v
                if cnt[t] == 1:
                    stack[top] = t
                    top += 1


@njit(cache=True)
def classify_pairs(
    n, m, deg, uoff, uslots, resolved, residual, refs, hs_mode, obs, unres, counts
):
    """Tally ordered pairs (a, b) for every receiver a in refs, b != a.

    obs/unres are (q+1, q+1) matrices indexed by (receiver degree,
    observed peer degree); counts is the 7-slot counter vector declared at
    module top. In fast mode the self-check peel runs only for pairs where
    a resolved b but b did not resolve a; in verify mode it runs for every
    pair a resolved, and a (resolved, self-check 0, peer-resolved 1)
    combination increments the impossible counter.
    """
    cnt_a = np.zeros(n, np.int64)
    ssum_a = np.zeros(n, np.int64)
    cnt = np.empty(n, np.int64)
    ssum = np.empty(n, np.int64)
    stack = np.empty(n, np.int64)
    amask = np.zeros(n, np.uint8)
    for ia in range(refs.shape[0]):
        a = refs[ia]
        ka = deg[a]
        for j in range(uoff[a], uoff[a + 1]):
            amask[uslots[j]] = 1
        built = False
        for b in range(m):
            if b == a:
                continue
            overlap = 0
            for j in range(uoff[b], uoff[b + 1]):
                if amask[uslots[j]] == 1:
                    overlap += 1
            d = deg[b] - overlap
            obs[ka, d] += 1
            gab = resolved[a, b]
            if gab == 0:
                unres[ka, d] += 1
                counts[C_UNRESOLVED] += 1
            if hs_mode == HS_OFF:
                continue
            gba = resolved[b, a]
            if gab == 0:
                if gba == 0:
                    counts[C_P3] += 1
                else:
                    counts[C_P4] += 1
                continue
            if hs_mode == HS_FAST and gba == 1:
                counts[C_P5] += 1
                continue
            if not built:
                # occupancy of a's reconstruction: own edges plus resolved
                # peers' full slot sets, except slots left with residual
                # interference in a's decode
                for s in range(n):
                    cnt_a[s] = 0
                    ssum_a[s] = 0
                for v in range(m):
                    if v == a or resolved[a, v] == 1:
                        for j in range(uoff[v], uoff[v + 1]):
                            t = uslots[j]
                            if residual[a, t] == 0:
                                cnt_a[t] += 1
                                ssum_a[t] += v
                built = True
            # self-check: remove peer b's slots and peel until a resolves
            for s in range(n):
                cnt[s] = cnt_a[s]
                ssum[s] = ssum_a[s]
            for j in range(uoff[b], uoff[b + 1]):
                t = uslots[j]
                cnt[t] = 0
                ssum[t] = 0
            top = 0
            for s in range(n):
                if cnt[s] == 1:
                    stack[top] = s
                    top += 1
            aba = 0
            while top > 0:
                top -= 1
                s = stack[top]
                if cnt[s] != 1:
                    continue
                v = ssum[s]
                if v == a:
                    aba = 1
                    break
                for j in range(uoff[v], uoff[v + 1]):
                    t = uslots[j]
                    if cnt[t] > 0:
                        cnt[t] -= 1
                        ssum[t] -= v
                        if cnt[t] == 1:
                            stack[top] = t
                            top += 1
            if gba == 1:
                if aba == 1:
                    counts[C_P5] += 1
                else:
                    counts[C_IMPOSSIBLE] += 1
            else:
                if aba == 0:
                    counts[C_P1] += 1
                else:
                    counts[C_P2] += 1
        for j in range(uoff[a], uoff[a + 1]):
            amask[uslots[j]] = 0


@njit(cache=True)
def count_observed_degrees(n, deg, uoff, uslots, receiver_slots, out):
    """Histogram of observed peer degrees against a fixed receiver slot set.

    For each user, the observed degree is its true degree minus the
    overlap with receiver_slots. Used for empirical checks of the induced
    degree distribution.
    """
    mask = np.zeros(n, np.uint8)
    for i in range(receiver_slots.shape[0]):
        mask[receiver_slots[i]] = 1
    for u in range(deg.shape[0]):
        overlap = 0
        for j in range(uoff[u], uoff[u + 1]):
            if mask[uslots[j]] == 1:
                overlap += 1
        out[deg[u] - overlap] += 1
