"""Numba kernels for tree growth, prediction, and weighted candidate draws.

Design constraints the kernels must honor:

* Per-tree RNG streams are counter-based (splitmix64 keyed by seed and tree
  index), so the forest is bit-identical no matter how many threads run.
* Candidate variables are drawn by sequential weighted sampling without
  replacement over a binary sum-tree; removed weight is restored from an
  undo log afterwards, so the shared weight template is never mutated.
* Variables with weight exactly 0 are never drawn.
* Split ties break toward the smallest threshold within a variable and
  toward the lowest variable index across candidates.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
U53 = np.float64(1.0 / 9007199254740992.0)  # 2**-53

LEAF = np.int32(-1)
UNUSED = np.int32(-2)


@njit(cache=True)
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * MIX1
    z = (z ^ (z >> np.uint64(27))) * MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _stream_init(seed, tree_idx):
    return _mix(_mix(seed + GOLDEN) ^ (np.uint64(tree_idx) + np.uint64(1)))


@njit(cache=True)
def _next_uniform(state):
    """Advance a splitmix64 state; return (u in [0,1), new state)."""
    state = state + GOLDEN
    z = _mix(state)
    return np.float64(z >> np.uint64(11)) * U53, state


@njit(cache=True)
def build_weight_tree(weights):
    """Binary sum-tree over the weight vector; leaves at [M, M+P)."""
    p = weights.shape[0]
    m = 1
    while m < p:
        m *= 2
    tw = np.zeros(2 * m, dtype=np.float64)
    for j in range(p):
        tw[m + j] = weights[j]
    for i in range(m - 1, 0, -1):
        tw[i] = tw[2 * i] + tw[2 * i + 1]
    return tw, m


@njit(cache=True)
def _draw_candidates(tw, m, p, mtry, state, cand, log_pos, log_val):
    """Draw up to mtry distinct indices proportional to the remaining weight.

    Each draw removes the chosen leaf's weight from the sum-tree; the undo
    log restores the tree exactly (old values written back in reverse) so
    the caller can reuse it for the next node.
    Returns (ndrawn, state). Drawn indices are sorted ascending in cand.
    """
    total0 = tw[1]
    floor = total0 * 1e-12
    nlog = 0
    ndrawn = 0
    for _ in range(mtry):
        total = tw[1]
        if total <= floor:
            break
        u, state = _next_uniform(state)
        u *= total
        i = 1
        while i < m:
            l = 2 * i
            if u < tw[l]:
                i = l
            else:
                u -= tw[l]
                i = l + 1
        # rounding drift can land on an emptied leaf; step to the next
        # positive one deterministically
        if tw[i] <= 0.0:
            j = i - m
            found = False
            for _k in range(p):
                j += 1
                if j >= p:
                    j -= p
                if tw[m + j] > 0.0:
                    i = m + j
                    found = True
                    break
            if not found:
                break
        cand[ndrawn] = i - m
        ndrawn += 1
        w = tw[i]
        while i >= 1:
            log_pos[nlog] = i
            log_val[nlog] = tw[i]
            nlog += 1
            tw[i] -= w
            i //= 2
    for k in range(nlog - 1, -1, -1):
        tw[log_pos[k]] = log_val[k]
    # insertion sort: mtry is small and candidates must be visited ascending
    for a in range(1, ndrawn):
        v = cand[a]
        b = a - 1
        while b >= 0 and cand[b] > v:
            cand[b + 1] = cand[b]
            b -= 1
        cand[b + 1] = v
    return ndrawn, state


@njit(cache=True)
def best_split(x, y):
    """Best Gini split of binary labels y on values x.

    Scans midpoints between consecutive distinct sorted values; returns
    (found, threshold, impurity_decrease). Ties take the smallest
    threshold. found is False when x is constant, y is pure, or no split
    has a positive decrease.
    """
    n = x.shape[0]
    t1 = 0
    for i in range(n):
        t1 += y[i]
    t0 = n - t1
    if t1 == 0 or t0 == 0:
        return False, 0.0, 0.0
    g_parent = 2.0 * (t1 / n) * (t0 / n)
    order = np.argsort(x)
    best_dec = 0.0
    best_thr = 0.0
    found = False
    n1l = 0
    for i in range(n - 1):
        n1l += y[order[i]]
        xi = x[order[i]]
        xj = x[order[i + 1]]
        if xi < xj:
            nl = i + 1
            nr = n - nl
            n0l = nl - n1l
            n1r = t1 - n1l
            n0r = nr - n1r
            gl = 2.0 * (n1l / nl) * (n0l / nl)
            gr = 2.0 * (n1r / nr) * (n0r / nr)
            dec = g_parent - (nl / n) * gl - (nr / n) * gr
            if dec > best_dec:
                best_dec = dec
                best_thr = 0.5 * (xi + xj)
                found = True
    return found, best_thr, best_dec


@njit(cache=True)
def _grow_tree(xf, y, w_tree_template, m, p, mtry, min_node_size, seed,
               tree_idx, max_nodes, feat, thr, left, right, c0, c1, inbag):
    """Grow one tree on a bootstrap sample. Returns the node count."""
    n = xf.shape[0]
    state = _stream_init(seed, tree_idx)

    for i in range(n):
        inbag[i] = 0
    samp = np.empty(n, dtype=np.int32)
    for d in range(n):
        u, state = _next_uniform(state)
        idx = np.int32(u * n)
        samp[d] = idx
        inbag[idx] += 1

    tw = w_tree_template.copy()
    cand = np.empty(mtry, dtype=np.int64)
    depth = 0
    mm = m
    while mm > 0:
        depth += 1
        mm //= 2
    log_pos = np.empty(mtry * (depth + 1), dtype=np.int64)
    log_val = np.empty(mtry * (depth + 1), dtype=np.float64)
    xbuf = np.empty(n, dtype=np.float64)
    ybuf = np.empty(n, dtype=np.int8)
    part = np.empty(n, dtype=np.int32)

    stack_node = np.empty(max_nodes, dtype=np.int32)
    stack_lo = np.empty(max_nodes, dtype=np.int32)
    stack_hi = np.empty(max_nodes, dtype=np.int32)
    top = 0
    stack_node[0] = 0
    stack_lo[0] = 0
    stack_hi[0] = n
    n_nodes = 1

    while top >= 0:
        node = stack_node[top]
        lo = stack_lo[top]
        hi = stack_hi[top]
        top -= 1
        size = hi - lo

        cnt1 = 0
        for s in range(lo, hi):
            cnt1 += y[samp[s]]
        cnt0 = size - cnt1
        c0[node] = cnt0
        c1[node] = cnt1
        feat[node] = LEAF

        if size <= min_node_size or cnt0 == 0 or cnt1 == 0:
            continue

        ndrawn, state = _draw_candidates(tw, m, p, mtry, state, cand,
                                         log_pos, log_val)
        best_dec = 0.0
        best_thr = 0.0
        best_feat = -1
        for ci in range(ndrawn):
            f = cand[ci]
            for k in range(size):
                v = samp[lo + k]
                xbuf[k] = xf[v, f]
                ybuf[k] = y[v]
            ok, t, dec = best_split(xbuf[:size], ybuf[:size])
            if ok and dec > best_dec:
                best_dec = dec
                best_thr = t
                best_feat = f
        if best_feat < 0:
            continue

        k = lo
        for s in range(lo, hi):
            v = samp[s]
            if xf[v, best_feat] <= best_thr:
                part[k] = v
                k += 1
        nl = k - lo
        for s in range(lo, hi):
            v = samp[s]
            if xf[v, best_feat] > best_thr:
                part[k] = v
                k += 1
        for s in range(lo, hi):
            samp[s] = part[s]

        left_id = n_nodes
        right_id = n_nodes + 1
        n_nodes += 2
        feat[node] = np.int32(best_feat)
        thr[node] = best_thr
        left[node] = left_id
        right[node] = right_id
        top += 1
        stack_node[top] = right_id
        stack_lo[top] = lo + nl
        stack_hi[top] = hi
        top += 1
        stack_node[top] = left_id
        stack_lo[top] = lo
        stack_hi[top] = lo + nl

    return n_nodes


@njit(cache=True, parallel=True)
def grow_forest(xf, y, weights, ntree, mtry, min_node_size, seed, max_nodes,
                feat, thr, left, right, c0, c1, inbag, n_nodes):
    """Grow all trees in parallel; outputs are preallocated per-tree rows."""
    p = xf.shape[1]
    w_tree, m = build_weight_tree(weights)
    for t in prange(ntree):
        n_nodes[t] = _grow_tree(
            xf, y, w_tree, m, p, mtry, min_node_size, seed, t, max_nodes,
            feat[t], thr[t], left[t], right[t], c0[t], c1[t], inbag[t])


@njit(cache=True)
def accumulate_split_counts(feat, n_nodes, p):
    """Merge per-tree split usage into a length-P count vector."""
    counts = np.zeros(p, dtype=np.int64)
    for t in range(feat.shape[0]):
        for k in range(n_nodes[t]):
            f = feat[t, k]
            if f >= 0:
                counts[f] += 1
    return counts


@njit(cache=True)
def _tree_vote(feat, thr, left, right, c0, c1, t, row):
    node = 0
    while feat[t, node] >= 0:
        if row[feat[t, node]] <= thr[t, node]:
            node = left[t, node]
        else:
            node = right[t, node]
    if c1[t, node] > c0[t, node]:
        return 1.0
    if c0[t, node] > c1[t, node]:
        return 0.0
    return 0.5


@njit(cache=True, parallel=True)
def predict_votes(feat, thr, left, right, c0, c1, x):
    """Per-row fraction of trees voting class 1 (tied leaves vote 0.5)."""
    nsamp = x.shape[0]
    ntree = feat.shape[0]
    out = np.empty(nsamp, dtype=np.float64)
    for s in prange(nsamp):
        acc = 0.0
        for t in range(ntree):
            acc += _tree_vote(feat, thr, left, right, c0, c1, t, x[s])
        out[s] = acc / ntree
    return out


@njit(cache=True, parallel=True)
def oob_votes(feat, thr, left, right, c0, c1, inbag, x):
    """Vote fractions over out-of-bag trees only.

    Returns (fractions, coverage); fraction is NaN where coverage is 0.
    """
    nsamp = x.shape[0]
    ntree = feat.shape[0]
    frac = np.empty(nsamp, dtype=np.float64)
    cover = np.zeros(nsamp, dtype=np.int64)
    for s in prange(nsamp):
        acc = 0.0
        cnt = 0
        for t in range(ntree):
            if inbag[t, s] == 0:
                acc += _tree_vote(feat, thr, left, right, c0, c1, t, x[s])
                cnt += 1
        cover[s] = cnt
        frac[s] = acc / cnt if cnt > 0 else np.nan
    return frac, cover


@njit(cache=True)
def sample_candidates_once(weights, mtry, state):
    """One candidate draw from scratch (public-API path, shares the
    sum-tree sampler with tree growth)."""
    p = weights.shape[0]
    tw, m = build_weight_tree(weights)
    depth = 0
    mm = m
    while mm > 0:
        depth += 1
        mm //= 2
    cand = np.empty(mtry, dtype=np.int64)
    log_pos = np.empty(mtry * (depth + 1), dtype=np.int64)
    log_val = np.empty(mtry * (depth + 1), dtype=np.float64)
    ndrawn, state = _draw_candidates(tw, m, p, mtry, state, cand,
                                     log_pos, log_val)
    return cand[:ndrawn], state
