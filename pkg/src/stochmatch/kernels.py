"""Hot loops, compiled with numba when available (see ``_jit``).

Every kernel is a pure function of its array inputs and a block of
pre-drawn uniforms ``U`` (one row per trial).  Slot layouts are fixed per
kernel so that a trial's outcome depends only on its own row.  Trial
kernels write one status code per edge (constants below) and the position
of the edge in the trial's scan order.
"""

import math

import numpy as np

from ._jit import njit

NOT_CONSIDERED = 0
PROBE_FAIL = 1
PROBE_SUCCESS = 2
SKIPPED = 3
SIMULATED = 4
SIMULATED_STOP = 5

SNAP = 1e-12


# ------------------------------------------------------------------ rounding


@njit
def _snap(x, e):
    if x[e] < SNAP:
        x[e] = 0.0
    elif x[e] > 1.0 - SNAP:
        x[e] = 1.0


@njit
def _lowest_fractional_at(vertex, skip, x, adj_ptr, adj_edge):
    for k in range(adj_ptr[vertex], adj_ptr[vertex + 1]):
        f = adj_edge[k]
        if f != skip and x[f] > 0.0 and x[f] < 1.0:
            return f
    return -1


@njit
def _walk(seed, x, eu, ev, adj_ptr, adj_edge, pathv, pathe, pos):
    """Grow a walk of fractional edges from ``seed``.

    Returns ``(start, length, is_cycle)``: ``pathe[start:start+length]`` is
    a cycle or a maximal path, listed in walk order.
    """
    pathv[0] = eu[seed]
    pathv[1] = ev[seed]
    pathe[0] = seed
    pos[eu[seed]] = 0
    pos[ev[seed]] = 1
    nv = 2
    flipped = False
    start = 0
    length = 0
    is_cycle = False
    while True:
        end = pathv[nv - 1]
        f = _lowest_fractional_at(end, pathe[nv - 2], x, adj_ptr, adj_edge)
        if f < 0:
            if flipped:
                start = 0
                length = nv - 1
                break
            for i in range(nv // 2):
                tmp = pathv[i]
                pathv[i] = pathv[nv - 1 - i]
                pathv[nv - 1 - i] = tmp
            for i in range((nv - 1) // 2):
                tmp = pathe[i]
                pathe[i] = pathe[nv - 2 - i]
                pathe[nv - 2 - i] = tmp
            for i in range(nv):
                pos[pathv[i]] = i
            flipped = True
            continue
        c = ev[f] if eu[f] == end else eu[f]
        if pos[c] >= 0:
            pathe[nv - 1] = f
            start = pos[c]
            length = nv - pos[c]
            is_cycle = True
            break
        pathv[nv] = c
        pathe[nv - 1] = f
        pos[c] = nv
        nv += 1
    for i in range(nv):
        pos[pathv[i]] = -1
    return start, length, is_cycle


@njit
def gkps_inplace(x, eu, ev, adj_ptr, adj_edge, u, pathv, pathe, pos):
    """Dependent rounding of ``x`` on a bipartite support, in place.

    Consumes ``u[k]`` on iteration ``k``; at most ``len(x)`` iterations.
    Returns the number of uniforms used.
    """
    m = x.shape[0]
    for e in range(m):
        _snap(x, e)
    k = 0
    while True:
        seed = -1
        for e in range(m):
            if x[e] > 0.0 and x[e] < 1.0:
                seed = e
                break
        if seed < 0:
            break
        start, length, is_cycle = _walk(seed, x, eu, ev, adj_ptr, adj_edge, pathv, pathe, pos)
        if is_cycle and length % 2 == 1:
            raise ValueError("fractional support contains an odd cycle")
        up = np.inf
        down = np.inf
        for j in range(length):
            e = pathe[start + j]
            if j % 2 == 0:
                up = min(up, 1.0 - x[e])
                down = min(down, x[e])
            else:
                up = min(up, x[e])
                down = min(down, 1.0 - x[e])
        if k >= u.shape[0]:
            raise ValueError("rounding ran out of uniforms")
        if u[k] * (up + down) < down:
            step = up
        else:
            step = -down
        k += 1
        for j in range(length):
            e = pathe[start + j]
            if j % 2 == 0:
                x[e] += step
            else:
                x[e] -= step
            _snap(x, e)
    return k


@njit
def levelset_inplace(x, u):
    """Pairwise level-set rounding of a star vector, in place."""
    m = x.shape[0]
    for e in range(m):
        _snap(x, e)
    k = 0
    while True:
        i = -1
        j = -1
        for e in range(m):
            if x[e] > 0.0 and x[e] < 1.0:
                if i < 0:
                    i = e
                else:
                    j = e
                    break
        if i < 0:
            break
        if j < 0:
            x[i] = 1.0 if u[k] < x[i] else 0.0
            k += 1
            break
        up = min(1.0 - x[i], x[j])
        down = min(x[i], 1.0 - x[j])
        if u[k] * (up + down) < down:
            x[i] += up
            x[j] -= up
        else:
            x[i] -= down
            x[j] += down
        _snap(x, i)
        _snap(x, j)
        k += 1
    return k


@njit
def gkps_many(n_vertices, eu, ev, adj_ptr, adj_edge, x, U, out):
    m = x.shape[0]
    xx = np.empty(m)
    pathv = np.empty(m + 2, dtype=np.int64)
    pathe = np.empty(m + 1, dtype=np.int64)
    pos = np.full(n_vertices, -1, dtype=np.int64)
    for i in range(U.shape[0]):
        for e in range(m):
            xx[e] = x[e]
        gkps_inplace(xx, eu, ev, adj_ptr, adj_edge, U[i], pathv, pathe, pos)
        for e in range(m):
            out[i, e] = 1 if xx[e] == 1.0 else 0


@njit
def levelset_many(x, U, out):
    m = x.shape[0]
    xx = np.empty(m)
    for i in range(U.shape[0]):
        for e in range(m):
            xx[e] = x[e]
        levelset_inplace(xx, U[i])
        for e in range(m):
            out[i, e] = 1 if xx[e] == 1.0 else 0


# ------------------------------------------------------------ probe order


@njit
def probe_time(p, u):
    return -math.log1p(-p * u) / p


# ------------------------------------------------------- offline trials


@njit
def alg1_trials(n_vertices, eu, ev, p, w, x, adj_ptr, adj_edge, split, U, status, rank, profit):
    """Round, order by probe time, probe safe edges.

    Slots: [0, n) vertex sides when ``split``; then m rounding slots,
    m probe-time slots and m outcome slots, the latter two indexed by edge id.
    """
    m = eu.shape[0]
    off = n_vertices if split else 0
    xx = np.empty(m)
    ys = np.empty(m)
    cand = np.empty(m, dtype=np.int64)
    side = np.zeros(n_vertices, dtype=np.bool_)
    matched = np.zeros(n_vertices, dtype=np.bool_)
    pathv = np.empty(m + 2, dtype=np.int64)
    pathe = np.empty(m + 1, dtype=np.int64)
    pos = np.full(n_vertices, -1, dtype=np.int64)
    for i in range(U.shape[0]):
        u = U[i]
        for e in range(m):
            xx[e] = x[e] if p[e] > 0.0 else 0.0
        if split:
            for v in range(n_vertices):
                side[v] = u[v] < 0.5
            for e in range(m):
                if side[eu[e]] == side[ev[e]]:
                    xx[e] = 0.0
        gkps_inplace(xx, eu, ev, adj_ptr, adj_edge, u[off:off + m], pathv, pathe, pos)
        nc = 0
        for e in range(m):
            if xx[e] == 1.0:
                cand[nc] = e
                ys[nc] = probe_time(p[e], u[off + m + e])
                nc += 1
        order = np.argsort(ys[:nc], kind="mergesort")
        for v in range(n_vertices):
            matched[v] = False
        total = 0.0
        for r in range(nc):
            e = cand[order[r]]
            rank[i, e] = r
            if matched[eu[e]] or matched[ev[e]]:
                status[i, e] = SKIPPED
            elif u[off + 2 * m + e] < p[e]:
                status[i, e] = PROBE_SUCCESS
                matched[eu[e]] = True
                matched[ev[e]] = True
                total += w[e]
            else:
                status[i, e] = PROBE_FAIL
        profit[i] = total


@njit
def alg2_trials(n_vertices, eu, ev, p, w, x, adj_ptr, adj_edge, U, status, rank, profit):
    """Round y = p*x and probe every selected edge.  Slots: m rounding, m outcome."""
    m = eu.shape[0]
    xx = np.empty(m)
    matched = np.zeros(n_vertices, dtype=np.bool_)
    pathv = np.empty(m + 2, dtype=np.int64)
    pathe = np.empty(m + 1, dtype=np.int64)
    pos = np.full(n_vertices, -1, dtype=np.int64)
    for i in range(U.shape[0]):
        u = U[i]
        for e in range(m):
            xx[e] = p[e] * x[e]
        gkps_inplace(xx, eu, ev, adj_ptr, adj_edge, u[0:m], pathv, pathe, pos)
        for v in range(n_vertices):
            matched[v] = False
        total = 0.0
        r = 0
        for e in range(m):
            if xx[e] != 1.0:
                continue
            rank[i, e] = r
            r += 1
            if matched[eu[e]] or matched[ev[e]]:
                status[i, e] = SKIPPED
            elif u[m + e] < p[e]:
                status[i, e] = PROBE_SUCCESS
                matched[eu[e]] = True
                matched[ev[e]] = True
                total += w[e]
            else:
                status[i, e] = PROBE_FAIL
        profit[i] = total


@njit
def fixed_set_trials(p, w, chosen, U, status, rank, profit):
    """Probe a fixed vertex-disjoint edge set (Greedy).  Slots: m outcome."""
    m = p.shape[0]
    for i in range(U.shape[0]):
        total = 0.0
        r = 0
        for e in range(m):
            if not chosen[e]:
                continue
            rank[i, e] = r
            r += 1
            if U[i, e] < p[e]:
                status[i, e] = PROBE_SUCCESS
                total += w[e]
            else:
                status[i, e] = PROBE_FAIL
        profit[i] = total


# -------------------------------------------------------- online trials


@njit
def online_trials(eid, p, w, x, alpha, t_types, rounds, U, status, rank, profit, triggers):
    """Arrivals plus the buyer subroutine.

    Slots: ``rounds`` arrival draws, then for type b a block of 4|A| slots
    at ``rounds + 4|A| b``: rounding, probe time, dumping coin, outcome, each
    indexed by item.  Only a type's first arrival reads its block.
    """
    n_items, n_types = eid.shape
    taken = np.zeros(n_items, dtype=np.bool_)
    seen = np.zeros(n_types, dtype=np.bool_)
    xb = np.empty(n_items)
    ys = np.empty(n_items)
    cand = np.empty(n_items, dtype=np.int64)
    for i in range(U.shape[0]):
        u = U[i]
        for a in range(n_items):
            taken[a] = False
        for b in range(n_types):
            seen[b] = False
        total = 0.0
        r = 0
        for rd in range(rounds):
            b = int(u[rd] * n_types)
            if b >= n_types:
                b = n_types - 1
            if seen[b]:
                continue
            seen[b] = True
            triggers[i, b] += 1
            base = rounds + 4 * n_items * b
            for a in range(n_items):
                if taken[a] or p[a, b] <= 0.0:
                    xb[a] = 0.0
                else:
                    xb[a] = x[a, b]
            levelset_inplace(xb, u[base:base + n_items])
            nc = 0
            for a in range(n_items):
                if xb[a] == 1.0:
                    cand[nc] = a
                    ys[nc] = probe_time(p[a, b], u[base + n_items + a])
                    nc += 1
            order = np.argsort(ys[:nc], kind="mergesort")
            real = 0
            for k in range(nc):
                if real >= t_types[b]:
                    break
                a = cand[order[k]]
                e = eid[a, b]
                rank[i, e] = r
                r += 1
                stop = u[base + 3 * n_items + a] < p[a, b]
                if u[base + 2 * n_items + a] < alpha[a, b]:
                    real += 1
                    if stop:
                        status[i, e] = PROBE_SUCCESS
                        taken[a] = True
                        total += w[a, b]
                        break
                    status[i, e] = PROBE_FAIL
                else:
                    if stop:
                        status[i, e] = SIMULATED_STOP
                        break
                    status[i, e] = SIMULATED
        profit[i] = total


@njit
def beta_counts(p_col, x_col, U, counts):
    """Subroutine with simulated probes only; count trials in which each item
    is selected and reached.  Slots: |A| rounding, |A| probe time, |A| stop."""
    n = p_col.shape[0]
    xb = np.empty(n)
    ys = np.empty(n)
    cand = np.empty(n, dtype=np.int64)
    for i in range(U.shape[0]):
        u = U[i]
        for a in range(n):
            xb[a] = x_col[a] if p_col[a] > 0.0 else 0.0
        levelset_inplace(xb, u[0:n])
        nc = 0
        for a in range(n):
            if xb[a] == 1.0:
                cand[nc] = a
                ys[nc] = probe_time(p_col[a], u[n + a])
                nc += 1
        order = np.argsort(ys[:nc], kind="mergesort")
        for k in range(nc):
            a = cand[order[k]]
            counts[a] += 1
            if u[2 * n + a] < p_col[a]:
                break


# ------------------------------------------------------------ exact MDP


@njit
def mdp_table(n_vertices, eu, ev, p, w, t):
    """Value of the optimal adaptive policy by a full table over edge states.

    Each edge is unprobed (0), probed-absent (1) or probed-present (2); the
    state index is the base-3 number with edge e at digit e.  Probing only
    raises the index, so one descending sweep fills the table.
    """
    m = eu.shape[0]
    size = 1
    pow3 = np.empty(m, dtype=np.int64)
    for e in range(m):
        pow3[e] = size
        size *= 3
    value = np.zeros(size)
    digit = np.empty(m, dtype=np.int64)
    used = np.empty(n_vertices, dtype=np.int64)
    busy = np.empty(n_vertices, dtype=np.bool_)
    for s in range(size - 1, -1, -1):
        rest = s
        for e in range(m):
            digit[e] = rest % 3
            rest //= 3
        for v in range(n_vertices):
            used[v] = 0
            busy[v] = False
        for e in range(m):
            if digit[e] > 0:
                used[eu[e]] += 1
                used[ev[e]] += 1
                if digit[e] == 2:
                    busy[eu[e]] = True
                    busy[ev[e]] = True
        best = 0.0
        for e in range(m):
            if digit[e] != 0:
                continue
            a = eu[e]
            b = ev[e]
            if busy[a] or busy[b] or used[a] >= t[a] or used[b] >= t[b]:
                continue
            val = p[e] * (w[e] + value[s + 2 * pow3[e]]) + (1.0 - p[e]) * value[s + pow3[e]]
            if val > best:
                best = val
        value[s] = best
    return value[0]


# ------------------------------------------------------ blossom separation


@njit
def _lex_smaller(a, b):
    """Same-size vertex sets as bitmasks: is ``a`` lexicographically first?"""
    d = a ^ b
    low = d & (-d)
    return (a & low) != 0


@njit
def blossom_scan(n_vertices, eu, ev, px, tie_tol):
    """Most violated odd set over all odd W with |W| >= 3.

    Returns ``(mask, violation)``; mask is -1 when there is no odd set.
    """
    m = eu.shape[0]
    best_mask = -1
    best_val = -np.inf
    best_size = 0
    for mask in range(1 << n_vertices):
        size = 0
        rest = mask
        while rest:
            rest &= rest - 1
            size += 1
        if size < 3 or size % 2 == 0:
            continue
        s = 0.0
        for e in range(m):
            if (mask >> eu[e]) & 1 and (mask >> ev[e]) & 1:
                s += px[e]
        val = s - (size - 1) / 2.0
        if best_mask < 0 or val > best_val + tie_tol:
            take = True
        elif val >= best_val - tie_tol:
            take = size < best_size or (size == best_size and _lex_smaller(mask, best_mask))
        else:
            take = False
        if take:
            best_mask = mask
            best_val = val
            best_size = size
    return best_mask, best_val
