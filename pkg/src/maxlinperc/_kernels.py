"""Compiled per-trial kernels over window edge masks.

All kernels use the dense node/edge indexing of :class:`~maxlinperc.lattice.Window`
with ``W``/``H`` the window width/height. Visited sets are stamp arrays: a
node counts as visited in the current search iff ``mark[n] == stamp``, which
avoids clearing per trial.
"""

import numpy as np
from numba import njit

_BACK = 0
_FORWARD = 1
_BOTH = 2


@njit(cache=True, nogil=True)
def _push_neighbours(mask, W, H, n, mode, mark, stamp, queue, tail):
    nE = (W - 1) * H
    x = n // H
    y = n - x * H
    if mode != _FORWARD:
        if x > 0 and mask[n - H] and mark[n - H] != stamp:
            mark[n - H] = stamp
            queue[tail] = n - H
            tail += 1
        if y > 0 and mask[nE + x * (H - 1) + y - 1] and mark[n - 1] != stamp:
            mark[n - 1] = stamp
            queue[tail] = n - 1
            tail += 1
    if mode != _BACK:
        if x < W - 1 and mask[n] and mark[n + H] != stamp:
            mark[n + H] = stamp
            queue[tail] = n + H
            tail += 1
        if y < H - 1 and mask[nE + x * (H - 1) + y] and mark[n + 1] != stamp:
            mark[n + 1] = stamp
            queue[tail] = n + 1
            tail += 1
    return tail


@njit(cache=True, nogil=True)
def search(mask, W, H, start, mode, mark, stamp, queue):
    """Mark everything reachable from ``start``; returns the count (start included)."""
    mark[start] = stamp
    queue[0] = start
    head, tail = 0, 1
    while head < tail:
        tail = _push_neighbours(mask, W, H, queue[head], mode, mark, stamp, queue, tail)
        head += 1
    return tail


@njit(cache=True, nogil=True)
def _meets(mask, W, H, a, b, mode, mark, stamp, queue):
    # Closed reach sets of a and b intersect? a's set gets `stamp`, b's `stamp + 1`.
    search(mask, W, H, a, mode, mark, stamp, queue)
    if mark[b] == stamp:
        return True
    other = stamp + 1
    mark[b] = other
    queue[0] = b
    head, tail = 0, 1
    nE = (W - 1) * H
    while head < tail:
        n = queue[head]
        head += 1
        x = n // H
        y = n - x * H
        for k in range(2):
            m = -1
            if mode == _BACK:
                if k == 0 and x > 0 and mask[n - H]:
                    m = n - H
                elif k == 1 and y > 0 and mask[nE + x * (H - 1) + y - 1]:
                    m = n - 1
            else:
                if k == 0 and x < W - 1 and mask[n]:
                    m = n + H
                elif k == 1 and y < H - 1 and mask[nE + x * (H - 1) + y]:
                    m = n + 1
            if m >= 0:
                if mark[m] == stamp:
                    return True
                if mark[m] != other:
                    mark[m] = other
                    queue[tail] = m
                    tail += 1
    return False


@njit(cache=True, nogil=True)
def batch_meets(opens, W, H, pairs, mode):
    """``out[t, k]``: closed ancestor (mode 0) / descendant (mode 1) sets of pair k meet in trial t."""
    T = opens.shape[0]
    P = pairs.shape[0]
    out = np.zeros((T, P), dtype=np.bool_)
    mark = np.zeros(W * H, dtype=np.int64)
    queue = np.empty(W * H, dtype=np.int64)
    stamp = 1
    for t in range(T):
        for k in range(P):
            out[t, k] = _meets(opens[t], W, H, pairs[k, 0], pairs[k, 1], mode, mark, stamp, queue)
            stamp += 2
    return out


@njit(cache=True, nogil=True)
def _hits_shell(mask, W, H, s, radius, mode, mark, stamp, queue, target):
    # BFS from s until a node at L-infinity distance >= radius is seen.
    # With target >= 0 both the target and the shell must be reached.
    sx = s // H
    sy = s - sx * H
    mark[s] = stamp
    queue[0] = s
    head, tail = 0, 1
    got_shell = radius <= 0
    got_target = target < 0 or target == s
    while head < tail:
        n = queue[head]
        head += 1
        old = tail
        tail = _push_neighbours(mask, W, H, n, mode, mark, stamp, queue, tail)
        for q in range(old, tail):
            m = queue[q]
            mx = m // H
            my = m - mx * H
            if max(abs(mx - sx), abs(my - sy)) >= radius:
                got_shell = True
            if m == target:
                got_target = True
        if got_shell and got_target:
            return True
    return got_shell and got_target


@njit(cache=True, nogil=True)
def batch_shell_hit(opens, W, H, s, radius, mode, target):
    T = opens.shape[0]
    out = np.zeros(T, dtype=np.bool_)
    mark = np.zeros(W * H, dtype=np.int64)
    queue = np.empty(W * H, dtype=np.int64)
    for t in range(T):
        out[t] = _hits_shell(opens[t], W, H, s, radius, mode, mark, t + 1, queue, target)
    return out


@njit(cache=True, nogil=True)
def batch_cluster_size(opens, W, H, s, mode):
    T = opens.shape[0]
    out = np.zeros(T, dtype=np.int64)
    mark = np.zeros(W * H, dtype=np.int64)
    queue = np.empty(W * H, dtype=np.int64)
    for t in range(T):
        out[t] = search(opens[t], W, H, s, mode, mark, t + 1, queue)
    return out


@njit(cache=True, nogil=True)
def restrict_to_clusters(mask, W, H, sources, mark, stamp, queue):
    """Open edges of the union of open clusters of ``sources`` (the enlargement U(H))."""
    for k in range(sources.shape[0]):
        if mark[sources[k]] != stamp:
            search(mask, W, H, sources[k], _BOTH, mark, stamp, queue)
    nE = (W - 1) * H
    out = np.zeros(mask.shape[0], dtype=np.bool_)
    for e in range(mask.shape[0]):
        if mask[e]:
            if e < nE:
                origin = e
            else:
                r = e - nE
                x = r // (H - 1)
                origin = x * H + (r - x * (H - 1))
            out[e] = mark[origin] == stamp
    return out


@njit(cache=True, nogil=True)
def batch_enlarged_meets(opens, W, H, sources, pairs):
    """Common-ancestor test evaluated on U(H) built per trial from ``opens``."""
    T = opens.shape[0]
    P = pairs.shape[0]
    out = np.zeros((T, P), dtype=np.bool_)
    mark = np.zeros(W * H, dtype=np.int64)
    queue = np.empty(W * H, dtype=np.int64)
    stamp = 1
    for t in range(T):
        sub = restrict_to_clusters(opens[t], W, H, sources, mark, stamp, queue)
        stamp += 1
        for k in range(P):
            out[t, k] = _meets(sub, W, H, pairs[k, 0], pairs[k, 1], _BACK, mark, stamp, queue)
            stamp += 2
    return out
