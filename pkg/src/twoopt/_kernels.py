"""Compiled inner loops for cost lookup, move evaluation and the best-move searches.

Every kernel receives the instance as ``(mode, mat, pts)``: ``mode`` selects
how ``cost(u, v)`` is computed (dense matrix lookup or one of the point
metrics) and the unused array is a 1x1 / 1x2 placeholder.  Tour positions
and node labels are 0-based.
"""
import numpy as np
from numba import njit

MODE_MATRIX = 0
MODE_EUCLIDEAN = 1
MODE_EUC_2D = 2
MODE_CEIL_2D = 3

_JIT = dict(cache=True, nogil=True)


@njit(inline="always")
def cost(mode, mat, pts, u, v):
    if mode == MODE_MATRIX:
        return mat[u, v]
    dx = pts[u, 0] - pts[v, 0]
    dy = pts[u, 1] - pts[v, 1]
    d = np.sqrt(dx * dx + dy * dy)
    if mode == MODE_EUCLIDEAN:
        return d
    if mode == MODE_EUC_2D:
        return np.floor(d + 0.5)
    return np.ceil(d)


@njit(**_JIT)
def materialize(mode, pts):
    n = pts.shape[0]
    dummy = np.zeros((1, 1))
    out = np.zeros((n, n))
    for u in range(n):
        for v in range(u + 1, n):
            c = cost(mode, dummy, pts, u, v)
            out[u, v] = c
            out[v, u] = c
    return out


@njit(**_JIT)
def row_minima(mode, mat, pts, n):
    out = np.empty(n)
    for u in range(n):
        best = np.inf
        for v in range(n):
            if v != u:
                c = cost(mode, mat, pts, u, v)
                if c < best:
                    best = c
        out[u] = best
    return out


@njit(**_JIT)
def edge_costs(mode, mat, pts, order):
    n = order.size
    out = np.empty(n)
    for i in range(n):
        out[i] = cost(mode, mat, pts, order[i], order[(i + 1) % n])
    return out


@njit(**_JIT)
def tour_length(mode, mat, pts, order):
    n = order.size
    total = 0.0
    for i in range(n):
        total += cost(mode, mat, pts, order[i], order[(i + 1) % n])
    return total


@njit(inline="always")
def _gain(mode, mat, pts, order, succ, ec, i, j):
    # symmetric in (i, j) bit for bit: both sums commute and cost is symmetric
    return (ec[i] + ec[j]) - (cost(mode, mat, pts, order[i], order[j])
                              + cost(mode, mat, pts, succ[i], succ[j]))


@njit(**_JIT)
def successors(order):
    n = order.size
    succ = np.empty(n, np.int64)
    for i in range(n - 1):
        succ[i] = order[i + 1]
    succ[n - 1] = order[0]
    return succ


@njit(**_JIT)
def best_move_ce(mode, mat, pts, order):
    n = order.size
    succ = successors(order)
    ec = edge_costs(mode, mat, pts, order)
    best = -np.inf
    bi = -1
    bj = -1
    evals = 0
    for i in range(n):
        a = order[i]
        b = succ[i]
        ci = ec[i]
        # adjacent pivot pairs (i, i+1) and (0, n-1) share a node: they are
        # counted as evaluated but never become the champion
        evals += n - 1 - i
        stop = n - 1 if i == 0 else n
        for j in range(i + 2, stop):
            g = (ci + ec[j]) - (cost(mode, mat, pts, a, order[j])
                                + cost(mode, mat, pts, b, succ[j]))
            if g > best or bi < 0:
                best = g
                bi = i
                bj = j
    return bi, bj, best, evals


@njit(**_JIT)
def pivot_keys(ec, order, cmin, strong):
    n = order.size
    keys = ec.copy()
    if strong:
        for i in range(n):
            keys[i] = ec[i] - (cmin[order[i]] + cmin[order[(i + 1) % n]]) / 2.0
    return keys


@njit(inline="always")
def _above(keys, a, b):
    # max-heap order; equal keys favour the smaller tour position
    ka = keys[a]
    kb = keys[b]
    return ka > kb or (ka == kb and a < b)


@njit(**_JIT)
def _sift_down(heap, size, keys, k):
    while True:
        left = 2 * k + 1
        if left >= size:
            return
        top = left
        right = left + 1
        if right < size and _above(keys, heap[right], heap[left]):
            top = right
        if _above(keys, heap[top], heap[k]):
            heap[k], heap[top] = heap[top], heap[k]
            k = top
        else:
            return


@njit(**_JIT)
def heap_build(keys):
    n = keys.size
    heap = np.arange(n)
    for k in range(n // 2 - 1, -1, -1):
        _sift_down(heap, n, keys, k)
    return heap


@njit(**_JIT)
def heap_pop(heap, size, keys):
    top = heap[0]
    size -= 1
    heap[0] = heap[size]
    _sift_down(heap, size, keys, 0)
    return top, size


@njit(**_JIT)
def _expand(mode, mat, pts, order, succ, ec, n, i, dedup, never, cnt,
            state, fstate, log, record):
    """Evaluate every partner of pivot ``i``; champion kept in ``state``/``fstate``.

    ``state`` = [has_champ, bi, bj, evals, log_len]; ``fstate`` = [best].
    Returns the new size of the never-expanded array.
    """
    prev = (i - 1) % n
    nxt = (i + 1) % n
    if dedup:
        k = 0
        while k < cnt:
            j = never[k]
            if j == i:
                cnt -= 1
                never[k] = never[cnt]
                continue
            k += 1
            if j == prev or j == nxt:
                continue
            g = _gain(mode, mat, pts, order, succ, ec, i, j)
            state[3] += 1
            if record:
                log[state[4], 0] = min(i, j)
                log[state[4], 1] = max(i, j)
                state[4] += 1
            if state[0] == 0 or g > fstate[0]:
                state[0] = 1
                state[1] = min(i, j)
                state[2] = max(i, j)
                fstate[0] = g
        return cnt
    for j in range(n):
        if j == i or j == prev or j == nxt:
            continue
        g = _gain(mode, mat, pts, order, succ, ec, i, j)
        state[3] += 1
        if record:
            log[state[4], 0] = min(i, j)
            log[state[4], 1] = max(i, j)
            state[4] += 1
        if state[0] == 0 or g > fstate[0]:
            state[0] = 1
            state[1] = min(i, j)
            state[2] = max(i, j)
            fstate[0] = g
    return cnt


@njit(**_JIT)
def best_move_greedy(mode, mat, pts, order, cmin, strong, dedup, log, record):
    n = order.size
    succ = successors(order)
    ec = edge_costs(mode, mat, pts, order)
    keys = pivot_keys(ec, order, cmin, strong)
    heap = heap_build(keys)
    size = n
    never = np.arange(n)
    cnt = n
    state = np.zeros(5, np.int64)
    fstate = np.full(1, -np.inf)
    expanded = np.empty(n, np.int64)
    n_exp = 0
    selections = 0
    while size > 0:
        if state[0] == 1 and not keys[heap[0]] > fstate[0] / 2.0:
            break
        i, size = heap_pop(heap, size, keys)
        selections += 1
        expanded[n_exp] = i
        n_exp += 1
        cnt = _expand(mode, mat, pts, order, succ, ec, n, i, dedup, never, cnt,
                      state, fstate, log, record)
    return (state[0] == 1, state[1], state[2], fstate[0], state[3],
            selections, expanded[:n_exp].copy(), state[4])


@njit(**_JIT)
def best_move_blind(mode, mat, pts, order, cmin, strong, dedup, log, record):
    n = order.size
    succ = successors(order)
    ec = edge_costs(mode, mat, pts, order)
    keys = pivot_keys(ec, order, cmin, strong)
    never = np.arange(n)
    cnt = n
    state = np.zeros(5, np.int64)
    fstate = np.full(1, -np.inf)
    expanded = np.empty(n, np.int64)
    n_exp = 0
    for i in range(n):
        if state[0] == 1 and not keys[i] > fstate[0] / 2.0:
            continue
        expanded[n_exp] = i
        n_exp += 1
        cnt = _expand(mode, mat, pts, order, succ, ec, n, i, dedup, never, cnt,
                      state, fstate, log, record)
    return (state[0] == 1, state[1], state[2], fstate[0], state[3],
            n, expanded[:n_exp].copy(), state[4])


@njit(**_JIT)
def best_move_fixed(mode, mat, pts, order, delta):
    n = order.size
    succ = successors(order)
    ec = edge_costs(mode, mat, pts, order)
    never = np.empty(0, np.int64)
    log = np.empty((0, 2), np.int64)
    state = np.zeros(5, np.int64)
    fstate = np.full(1, -np.inf)
    expanded = np.empty(n, np.int64)
    n_exp = 0
    for i in range(n):
        if ec[i] > delta:
            expanded[n_exp] = i
            n_exp += 1
            _expand(mode, mat, pts, order, succ, ec, n, i, False, never, 0,
                    state, fstate, log, False)
    return (state[0] == 1, state[1], state[2], fstate[0], state[3],
            n, expanded[:n_exp].copy(), state[4])


@njit(**_JIT)
def reverse_segment(order, position, i, j):
    lo = i + 1
    hi = j
    while lo < hi:
        a = order[lo]
        b = order[hi]
        order[lo] = b
        order[hi] = a
        position[b] = lo
        position[a] = hi
        lo += 1
        hi -= 1
