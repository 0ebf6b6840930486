"""Pure-NumPy implementations of the hot kernels.

Mirrors the API of the compiled module ``_speedups``; used when the
extension is unavailable or when ``SOBROUGH_BACKEND=python`` is set.
All arrays are C-contiguous float64.  Tensor coefficients are packed
level-major: level k occupies ``offsets[k]:offsets[k]+d**k``.
"""

import math

import numpy as np

_BLOCK = 128


def level_layout(d, N):
    """Offsets and sizes of the packed levels of T^N(R^d)."""
    sizes = [d**k for k in range(N + 1)]
    offsets = [0]
    for s in sizes[:-1]:
        offsets.append(offsets[-1] + s)
    return np.asarray(offsets, dtype=np.int64), np.asarray(sizes, dtype=np.int64)


def _lv(arr, off, sz, k):
    return arr[..., off[k]:off[k] + sz[k]]


def rowwise_mul(a, b, d, N):
    """Row-by-row truncated tensor product of two (m, L) batches."""
    off, sz = level_layout(d, N)
    m = a.shape[0]
    out = np.zeros_like(a)
    for k in range(N + 1):
        acc = _lv(out, off, sz, k)
        for i in range(k + 1):
            j = k - i
            ai = _lv(a, off, sz, i).reshape(m, sz[i], 1)
            bj = _lv(b, off, sz, j).reshape(m, 1, sz[j])
            acc += (ai * bj).reshape(m, sz[k])
    return out


def chen_prefix(segs, d, N, start=None):
    """Running left products: out[0] = start (identity if None), out[m+1] = out[m] ⊗ segs[m]."""
    off, sz = level_layout(d, N)
    m, L = segs.shape
    out = np.zeros((m + 1, L))
    if start is None:
        out[0, 0] = 1.0
    else:
        out[0] = start
    for r in range(m):
        out[r + 1] = rowwise_mul(out[r:r + 1], segs[r:r + 1], d, N)[0]
    return out


def inverse_batch(nodes, d, N):
    """Group inverses of a (n, L) batch via the truncated Neumann series."""
    negx = -nodes.copy()
    negx[:, 0] = 0.0
    acc = np.zeros_like(nodes)
    acc[:, 0] = 1.0
    cur = acc.copy()
    for _ in range(N):
        cur = rowwise_mul(cur, negx, d, N)
        acc += cur
    return acc


def _increment_levels(inv_rows, nodes, d, N, k):
    """Level-k coefficients of inv_rows[u] ⊗ nodes[v] for all (u, v); shape (m, n, d^k)."""
    off, sz = level_layout(d, N)
    m = inv_rows.shape[0]
    n = nodes.shape[0]
    acc = np.zeros((m, n, sz[k]))
    for i in range(k + 1):
        j = k - i
        A = _lv(inv_rows, off, sz, i)
        B = _lv(nodes, off, sz, j)
        acc += np.einsum("ma,nb->mnab", A, B).reshape(m, n, sz[k])
    return acc


def hom_dist_block(inv_rows, nodes, d, N):
    """Homogeneous norms of increments inv_rows[u] ⊗ nodes[v]; shape (m, n)."""
    m = inv_rows.shape[0]
    n = nodes.shape[0]
    out = np.zeros((m, n))
    for k in range(1, N + 1):
        lev = _increment_levels(inv_rows, nodes, d, N, k)
        ss = np.einsum("mnc,mnc->mn", lev, lev)
        out += ss ** (0.5 / k)
    return out


def hom_dist_matrix(nodes, inv, d, N, i0, i1):
    """Full (w, w) distance matrix over the window [i0, i1); rows block-wise."""
    w = i1 - i0
    out = np.empty((w, w))
    for r0 in range(0, w, _BLOCK):
        r1 = min(r0 + _BLOCK, w)
        out[r0:r1] = hom_dist_block(inv[i0 + r0:i0 + r1], nodes[i0:i1], d, N)
    return out


def level_diff_block(inv1, nodes1, inv2, nodes2, d, N, k):
    """|π_k(increment¹_{u,v} − increment²_{u,v})| for all (u, v); shape (m, n)."""
    lev = _increment_levels(inv1, nodes1, d, N, k)
    lev -= _increment_levels(inv2, nodes2, d, N, k)
    return np.sqrt(np.einsum("mnc,mnc->mn", lev, lev))


def sobolev_pair_sum(nodes, inv, d, N, p, expo, h, i0, i1):
    """Σ_{i0 ≤ u < v < i1} dist(u,v)^p · ((v−u)·h)^(−expo), summed block-wise."""
    parts = []
    for r0 in range(i0, i1, _BLOCK):
        r1 = min(r0 + _BLOCK, i1)
        dist = hom_dist_block(inv[r0:r1], nodes[r0:i1], d, N)
        gap = (np.arange(r0, i1)[None, :] - np.arange(r0, r1)[:, None]).astype(float)
        mask = gap > 0
        gap[~mask] = 1.0
        term = np.where(mask, dist**p * (gap * h) ** (-expo), 0.0)
        parts.append(float(np.sum(term)))
    return math.fsum(parts)


def partition_dp_max(w):
    """Max over partitions 0 = m_0 < … < m_r = n−1 of Σ w[m_i, m_{i+1}]."""
    n = w.shape[0]
    if n < 2:
        return 0.0
    dp = np.full(n, -np.inf)
    dp[0] = 0.0
    for j in range(1, n):
        dp[j] = np.max(dp[:j] + w[:j, j])
    return float(dp[n - 1])


def interval_dp_table(w):
    """T[a, b] = partition_dp_max of w restricted to [a, b], for all a ≤ b."""
    n = w.shape[0]
    T = np.zeros((n, n))
    for a in range(n - 1):
        row = T[a]
        for b in range(a + 1, n):
            row[b] = np.max(row[a:b] + w[a:b, b])
    return T
